#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "echosim/dataset.hpp"
#include "echosim/experiment.hpp"
#include "support.hpp"

using namespace echosim;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("echosim_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t line_count(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.dataset.users = 30;
  cfg.dataset.items = 200;
  cfg.dataset.categories = 5;
  cfg.dataset.links = 90;
  cfg.steps = 10;
  cfg.seeds = {1, 2, 3};
  cfg.ts_k = 5;
  return cfg;
}

RunSummary fake_summary(const std::vector<double>& rce) {
  RunSummary s;
  s.steps = 10;
  s.seeds.resize(rce.size());
  for (std::string_view name : kMetricNames) {
    MetricSummary m;
    m.per_seed = rce;
    double sum = 0.0;
    for (double v : rce) sum += v;
    m.mean = sum / static_cast<double>(rce.size());
    s.metrics[std::string(name)] = m;
  }
  return s;
}

}  // namespace

TEST_CASE("config defaults and validation") {
  CHECK(default_ts_k("ciao") == 300);
  CHECK(default_ts_k("epinions") == 900);
  CHECK(default_ts_k("synthetic") == 50);

  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.resolved_metric_every() == 1);
  cfg.steps = 1001;
  CHECK(cfg.resolved_metric_every() == 10);
  cfg.metric_every = 3;
  CHECK(cfg.resolved_metric_every() == 3);
  CHECK(cfg.resolved_ts_k() == 50);
  cfg.dataset.name = "ciao";
  CHECK(cfg.resolved_ts_k() == 300);
  cfg.ts_k = 7;
  CHECK(cfg.resolved_ts_k() == 7);

  cfg = ExperimentConfig{};
  cfg.seeds.clear();
  CHECK_CODE(cfg.validate(), ErrorCode::InvalidRequest);
  cfg.seeds = {4, 4};
  CHECK_CODE(cfg.validate(), ErrorCode::InvalidRequest);
  cfg = ExperimentConfig{};
  cfg.params.eta = 0.0;
  CHECK_CODE(cfg.validate(), ErrorCode::InvalidRequest);
  cfg = ExperimentConfig{};
  cfg.sweep_axis = "alpha";
  cfg.sweep_values = {1, 1};
  CHECK_CODE(cfg.validate(), ErrorCode::InvalidRequest);
  cfg = ExperimentConfig{};
  cfg.dataset.users = 3;
  cfg.dataset.links = 7;
  CHECK_CODE(cfg.validate(), ErrorCode::InvalidRequest);

  CHECK(higher_is_better("rce"));
  CHECK(higher_is_better("ra"));
  CHECK(higher_is_better("nd"));
  CHECK_FALSE(higher_is_better("pdv"));
  CHECK_FALSE(higher_is_better("ts_at_k"));
}

TEST_CASE("run_experiment bookkeeping and files") {
  ExperimentConfig cfg = small_config();
  cfg.out_dir = fresh_dir("run");
  cfg.dump_final_states = true;
  const RunSummary s = run_experiment(cfg);
  CHECK(s.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(s.recorded_steps.size() == 10);
  CHECK(s.ts_k == 5);
  for (std::string_view name : kMetricNames) {
    const auto& m = s.metrics.at(std::string(name));
    CHECK(m.per_seed.size() == 3);
    CHECK(m.ci95.has_value());
    CHECK(m.series_mean.size() == 10);
  }

  const std::string csv = slurp(cfg.out_dir / "metrics.csv");
  CHECK(csv.rfind("t,seed,rce,ra,nd,pdv,ts_at_k\n", 0) == 0);
  CHECK(line_count(csv) == 31);
  CHECK(fs::exists(cfg.out_dir / "summary.json"));
  for (int seed : {1, 2, 3}) CHECK(fs::exists(cfg.out_dir / ("states_seed" + std::to_string(seed) + ".csv")));

  const auto reloaded = load_summary(cfg.out_dir / "summary.json");
  CHECK(reloaded.seeds == s.seeds);
  CHECK(reloaded.metrics.at("rce").per_seed == s.metrics.at("rce").per_seed);
  CHECK(reloaded.metrics.at("pdv").mean == s.metrics.at("pdv").mean);

  // Time averages are the mean of the recorded per-seed series.
  ExperimentConfig one = small_config();
  one.seeds = {2};
  const RunSummary single = run_experiment(one);
  CHECK(single.metrics.at("rce").per_seed.front() == s.metrics.at("rce").per_seed[1]);
  CHECK_FALSE(single.metrics.at("rce").ci95.has_value());
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("outputs are byte-identical across repeats and thread counts") {
  ExperimentConfig cfg = small_config();
  cfg.dump_final_states = true;
  const fs::path first = fresh_dir("det_a");
  const fs::path second = fresh_dir("det_b");
  cfg.out_dir = first;
  run_experiment(cfg);
  cfg.out_dir = second;
  cfg.threads = 3;
  run_experiment(cfg);
  for (const char* file : {"metrics.csv", "summary.json", "states_seed2.csv"}) {
    const std::string a = slurp(first / file);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(second / file));
  }
  fs::remove_all(first);
  fs::remove_all(second);
}

TEST_CASE("mitigation runs through the harness") {
  ExperimentConfig cfg = small_config();
  for (auto kind : {StrategyKind::AdaptiveAlpha, StrategyKind::FeedbackAdjustment, StrategyKind::DiversityRerank,
                    StrategyKind::SocialReweighting}) {
    cfg.mitigation.kind = kind;
    cfg.mitigation.candidate_count = 100;
    const auto s = run_experiment(cfg);
    CHECK(s.strategy == to_string(kind));
    CHECK(std::isfinite(s.metrics.at("rce").mean));
  }
}

TEST_CASE("sweeps") {
  ExperimentConfig cfg = small_config();
  cfg.steps = 4;
  cfg.sweep_axis = "alpha";
  cfg.sweep_values = {0, 1, 5, 20};
  cfg.out_dir = fresh_dir("sweep");
  const auto points = sweep(cfg);
  CHECK(points.size() == 4);
  CHECK(fs::exists(cfg.out_dir / "sweep.csv"));
  CHECK(fs::exists(cfg.out_dir / "sweep_summary.csv"));
  CHECK(fs::is_directory(cfg.out_dir / "alpha=5"));

  // A single-value sweep is the same as running that configuration.
  ExperimentConfig base = small_config();
  base.steps = 4;
  const auto direct = run_experiment(apply_axis(base, "alpha", 5));
  CHECK(points[2].summary.metrics.at("rce").per_seed == direct.metrics.at("rce").per_seed);
  CHECK(points[2].summary.metrics.at("ts_at_k").per_seed == direct.metrics.at("ts_at_k").per_seed);
  fs::remove_all(cfg.out_dir);

  CHECK_CODE(apply_axis(base, "gamma", 1.5), ErrorCode::InvalidRequest);
  CHECK_CODE(apply_axis(base, "gamma", -0.1), ErrorCode::InvalidRequest);
  CHECK_CODE(apply_axis(base, "zeta", 1), ErrorCode::InvalidRequest);
  CHECK_CODE(apply_axis(base, "c", 2.5), ErrorCode::InvalidRequest);

  for (int c : {5, 14}) {
    const auto cfg_c = apply_axis(base, "c", c);
    CHECK(prepare_dataset(cfg_c.dataset, 1).catalog.category_count() == c);
  }
  const auto no_links = prepare_dataset(apply_axis(base, "links", 0).dataset, 1);
  CHECK(no_links.graph.isolated_count() == 30);
}

TEST_CASE("comparisons") {
  const auto base = fake_summary({1.20, 1.21, 1.19});
  const auto same = compare_runs(base, base);
  for (const auto& row : same) {
    CHECK(row.improvement_pct == 0.0);
    REQUIRE(row.p_value);
    CHECK(*row.p_value == doctest::Approx(1.0));
  }

  const auto b1 = fake_summary({1.20});
  const auto c1 = fake_summary({1.28});
  const auto rows = compare_runs(c1, b1);
  CHECK(rows[0].metric == "rce");
  CHECK(rows[0].improvement_pct == doctest::Approx(6.6667).epsilon(1e-4));
  CHECK_FALSE(rows[0].p_value);
  // Lower-is-better metrics flip the sign.
  CHECK(rows[3].metric == "pdv");
  CHECK(rows[3].improvement_pct == doctest::Approx(-6.6667).epsilon(1e-4));

  // Swapping operands with equal |base| flips the sign.
  const auto x = fake_summary({-2.0});
  const auto y = fake_summary({2.0});
  const auto xy = compare_runs(x, y);
  const auto yx = compare_runs(y, x);
  for (std::size_t k = 0; k < xy.size(); ++k) CHECK(xy[k].improvement_pct == -yx[k].improvement_pct);

  auto longer = c1;
  longer.steps = 11;
  CHECK_CODE(compare_runs(longer, b1), ErrorCode::InvalidRequest);
  CHECK_CODE(compare_runs(base, b1), ErrorCode::InvalidRequest);

  const fs::path out = fresh_dir("compare");
  write_comparison(rows, out / "comparison.csv");
  CHECK(line_count(slurp(out / "comparison.csv")) == 6);
  fs::remove_all(out);
}

TEST_CASE("file datasets") {
  const fs::path dir = fresh_dir("files");
  fs::create_directories(dir);
  std::ofstream(dir / "items.csv") << "item_id,category_ids\n1,10\n2,20\n3,10;20\n4,30\n";
  std::ofstream(dir / "ratings.csv") << "u1,1,5\nu2,2,4\nu2,4,1\nu3,3,3\n";
  std::ofstream(dir / "trust.csv") << "u1,u2\nu2,u2\nu3,u1\n";
  DatasetSpec spec;
  spec.kind = DatasetKind::Files;
  spec.items_file = dir / "items.csv";
  spec.interactions_file = dir / "ratings.csv";
  spec.trust_file = dir / "trust.csv";
  const auto data = prepare_dataset(spec, 1);
  CHECK(data.initial.users.cols() == 3);
  CHECK(data.catalog.category_count() == 3);
  CHECK(data.graph.edges().size() == 2);
  CHECK(data.self_loops_dropped == 1);
  CHECK(data.user_ids == std::vector<std::string>{"u1", "u2", "u3"});

  ExperimentConfig cfg;
  cfg.dataset = spec;
  cfg.params.h = 2;
  cfg.steps = 3;
  cfg.ts_k = 1;
  cfg.out_dir = dir / "out";
  cfg.dump_final_states = true;
  const auto s = run_experiment(cfg);
  CHECK(s.self_loops_dropped == 1);
  const auto states = read_states(cfg.out_dir / "states_seed1.csv");
  CHECK(states.ids == data.user_ids);

  // States files bypass history initialization.
  export_states(data.initial.users, dir / "states.csv", data.user_ids);
  DatasetSpec from_states = spec;
  from_states.interactions_file.clear();
  from_states.states_file = dir / "states.csv";
  CHECK(prepare_dataset(from_states, 1).initial.users == data.initial.normalized());
  fs::remove_all(dir);
}

TEST_CASE("state export") {
  const fs::path dir = fresh_dir("export");
  export_states(Matrix::Identity(2, 2), dir / "id.csv");
  CHECK(slurp(dir / "id.csv") == "user_id,coord_0,coord_1\n0,1,0\n1,0,1\n");
  std::ofstream(dir / "blocker") << "x";
  CHECK_CODE(export_states(Matrix::Identity(2, 2), dir / "blocker" / "s.csv"), ErrorCode::IoError);
  fs::remove_all(dir);
}

TEST_CASE("theory self-check report") {
  std::ostringstream out;
  CHECK(verify_theory(out, 1));
  CHECK(out.str().find("FAIL") == std::string::npos);
  CHECK(out.str().find("PASS") != std::string::npos);
}
