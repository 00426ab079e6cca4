#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "echosim/catalog.hpp"
#include "echosim/metrics.hpp"
#include "echosim/mitigation.hpp"

namespace echosim {

enum class DatasetKind { Synthetic, Files };

struct DatasetSpec {
  DatasetKind kind = DatasetKind::Synthetic;
  int users = 1000;
  int items = 10000;
  int categories = 10;
  std::size_t links = 10000;

  std::filesystem::path items_file;
  std::filesystem::path interactions_file;  // either this or states_file
  std::filesystem::path states_file;
  std::filesystem::path trust_file;  // optional
  bool skip_unknown_trust = false;
  /// Selects the default TS@k: "ciao" 300, "epinions" 900, anything else 50.
  std::string name = "synthetic";
};

/// TS@k default keyed by dataset name.
int default_ts_k(std::string_view dataset_name);

struct ExperimentConfig {
  DatasetSpec dataset;
  ModelParams params;
  MitigationConfig mitigation;
  std::size_t steps = 1000;
  std::vector<std::uint64_t> seeds{1};
  /// 0 picks every step up to 1000 steps and every 10th beyond.
  std::size_t metric_every = 0;
  std::optional<int> ts_k;
  /// Records with t < burn_in are left out of the time average.
  std::size_t burn_in = 0;
  PdvOptions pdv;

  std::string sweep_axis;
  std::vector<double> sweep_values;

  std::filesystem::path out_dir;
  unsigned threads = 1;
  bool dump_final_states = false;

  /// Throws InvalidRequest. Item count checks need a loaded dataset and happen
  /// at run time for file datasets.
  void validate() const;
  std::size_t resolved_metric_every() const;
  int resolved_ts_k() const;
};

inline constexpr std::array<std::string_view, 5> kMetricNames{"rce", "ra", "nd", "pdv", "ts_at_k"};

/// True for metrics where larger values are better.
bool higher_is_better(std::string_view metric);

struct MetricSummary {
  /// Time average per seed, in seed order.
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;
  std::optional<double> ci95;
  /// Seed-averaged value at each recorded step, with its 95% half-width.
  std::vector<double> series_mean;
  std::vector<double> series_ci95;
};

struct RunSummary {
  std::string strategy = "none";
  std::string dataset = "synthetic";
  std::vector<std::uint64_t> seeds;
  std::size_t steps = 0;
  std::size_t metric_every = 1;
  std::size_t burn_in = 0;
  int ts_k = 0;
  std::vector<std::size_t> recorded_steps;
  std::map<std::string, MetricSummary> metrics;

  std::size_t padded_slates = 0;
  std::size_t substituted_users = 0;
  std::size_t self_loops_dropped = 0;
  std::size_t isolated_users = 0;
  std::string pdv_mode = "exact";
};

/// Loaded or generated inputs for one seed.
struct PreparedDataset {
  ItemCatalog catalog;
  UserStates initial;
  SocialGraph graph;
  std::vector<std::string> user_ids;
  std::size_t substituted_users = 0;
  std::size_t self_loops_dropped = 0;
};

PreparedDataset prepare_dataset(const DatasetSpec& spec, std::uint64_t seed);

/// Runs every seed and aggregates. When out_dir is set, writes metrics.csv,
/// summary.json and, if requested, states_seed<seed>.csv.
RunSummary run_experiment(const ExperimentConfig& config);

struct SweepPoint {
  double value = 0.0;
  RunSummary summary;
};

/// Applies each sweep value to a copy of the base config. Writes one
/// subdirectory per value plus sweep.csv (long format) and
/// sweep_summary.csv under out_dir.
std::vector<SweepPoint> sweep(const ExperimentConfig& config);

/// Copy of `config` with the named axis set to `value`.
ExperimentConfig apply_axis(const ExperimentConfig& config, std::string_view axis, double value);

struct ComparisonRow {
  std::string metric;
  bool higher_is_better = true;
  double baseline = 0.0;
  double candidate = 0.0;
  /// Positive when the candidate moves the metric in its preferred direction.
  double improvement_pct = 0.0;
  std::optional<double> p_value;
};

std::vector<ComparisonRow> compare_runs(const RunSummary& candidate, const RunSummary& baseline);

void save_summary(const RunSummary& summary, const std::filesystem::path& path);
RunSummary load_summary(const std::filesystem::path& path);
void write_comparison(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path);

/// Runs the operator checks on small random instances and prints one line per
/// check. Returns false if any check fails.
bool verify_theory(std::ostream& out, std::uint64_t seed);

}  // namespace echosim
