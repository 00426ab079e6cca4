#include "echosim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "echosim/dataset.hpp"
#include "echosim/dynamics.hpp"
#include "echosim/errors.hpp"
#include "echosim/format.hpp"
#include "echosim/parallel.hpp"
#include "echosim/rng.hpp"
#include "echosim/stats.hpp"
#include "echosim/theory.hpp"

namespace echosim {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

double metric_value(const MetricsRecord& r, std::string_view name) {
  if (name == "rce") return r.rce;
  if (name == "ra") return r.ra;
  if (name == "nd") return r.nd;
  if (name == "pdv") return r.pdv;
  return r.ts_at_k;
}

bool is_integral(double x) { return std::isfinite(x) && x == std::floor(x); }

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> records;
  UserStates final_states;
  std::vector<std::string> user_ids;
  std::size_t padded = 0;
  std::size_t substituted = 0;
  std::size_t self_loops = 0;
  std::size_t isolated = 0;
};

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  PreparedDataset data = prepare_dataset(config.dataset, seed);
  const int m = data.catalog.item_count();
  config.params.validate(m);
  config.mitigation.validate(config.params.h, m);
  auto strategy = make_strategy(config.mitigation);

  RunOptions options;
  options.seed = seed;
  options.threads = 1;
  options.schedule.every = config.resolved_metric_every();
  options.schedule.metrics.ts_k = config.resolved_ts_k();
  options.schedule.metrics.pdv = config.pdv;
  Trajectory tr = run(data.initial, data.catalog, data.graph, config.params, config.steps, options, strategy.get());

  SeedRun out;
  out.seed = seed;
  out.records = std::move(tr.records);
  out.final_states = std::move(tr.final_states);
  out.user_ids = std::move(data.user_ids);
  out.padded = tr.padded_slates;
  out.substituted = data.substituted_users;
  out.self_loops = data.self_loops_dropped;
  out.isolated = data.graph.isolated_count();
  return out;
}

nlohmann::ordered_json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

nlohmann::ordered_json numbers(const std::vector<double>& xs) {
  auto arr = nlohmann::ordered_json::array();
  for (double x : xs) arr.push_back(number(x));
  return arr;
}

double read_number(const nlohmann::json& j) { return j.is_null() ? kNan : j.get<double>(); }

std::vector<double> read_numbers(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(read_number(x));
  return out;
}

std::string axis_dir(std::string_view axis, double value) {
  return std::string(axis) + "=" + format_double(value);
}

}  // namespace

int default_ts_k(std::string_view dataset_name) {
  if (dataset_name == "ciao") return 300;
  if (dataset_name == "epinions") return 900;
  return 50;
}

bool higher_is_better(std::string_view metric) { return metric == "rce" || metric == "ra" || metric == "nd"; }

void ExperimentConfig::validate() const {
  if (seeds.empty()) fail(ErrorCode::InvalidRequest, "at least one seed is required");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    fail(ErrorCode::InvalidRequest, "seeds must be distinct");
  }
  if (steps == 0) fail(ErrorCode::InvalidRequest, "steps must be >= 1");
  if (!(params.eta > 0.0)) fail(ErrorCode::InvalidRequest, "eta must be > 0");
  if (ts_k && *ts_k < 1) fail(ErrorCode::InvalidRequest, "ts_k must be >= 1");
  if (dataset.kind == DatasetKind::Synthetic) {
    if (dataset.users < 1) fail(ErrorCode::InvalidRequest, "synthetic users must be >= 1");
    if (dataset.items < 1) fail(ErrorCode::InvalidRequest, "synthetic items must be >= 1");
    if (dataset.categories < 1) fail(ErrorCode::InvalidRequest, "synthetic categories must be >= 1");
    const auto n = static_cast<std::uint64_t>(dataset.users);
    if (dataset.links > n * (n - 1)) fail(ErrorCode::InvalidRequest, "more links than ordered user pairs");
    params.validate(dataset.items);
    mitigation.validate(params.h, dataset.items);
  } else {
    if (dataset.items_file.empty()) fail(ErrorCode::InvalidRequest, "file dataset needs an items file");
    if (dataset.interactions_file.empty() == dataset.states_file.empty()) {
      fail(ErrorCode::InvalidRequest, "file dataset needs exactly one of interactions or states");
    }
    params.validate(std::numeric_limits<int>::max());
  }
  if (!sweep_axis.empty()) {
    if (sweep_values.empty()) fail(ErrorCode::InvalidRequest, "sweep needs at least one value");
    if (std::set<double>(sweep_values.begin(), sweep_values.end()).size() != sweep_values.size()) {
      fail(ErrorCode::InvalidRequest, "sweep values must be distinct");
    }
  }
}

std::size_t ExperimentConfig::resolved_metric_every() const {
  if (metric_every != 0) return metric_every;
  return steps <= 1000 ? 1 : 10;
}

int ExperimentConfig::resolved_ts_k() const { return ts_k.value_or(default_ts_k(dataset.name)); }

PreparedDataset prepare_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  PreparedDataset out;
  if (spec.kind == DatasetKind::Synthetic) {
    SyntheticDataset syn = generate_synthetic(spec.users, spec.items, spec.categories, spec.links, seed);
    out.catalog = std::move(syn.catalog);
    out.initial = std::move(syn.initial);
    out.graph = std::move(syn.graph);
    return out;
  }

  IdIndex users;
  if (!spec.interactions_file.empty()) {
    InteractionData data = ingest_interactions(spec.interactions_file, spec.items_file);
    HistoryInit init = initial_states_from_history(data, seed);
    out.catalog = std::move(data.catalog);
    out.initial = std::move(init.states);
    out.substituted_users = init.substituted.size();
    users = std::move(data.users);
  } else {
    ItemsData items = ingest_items(spec.items_file);
    StatesFile states = read_states(spec.states_file);
    if (states.users.rows() != items.catalog.category_count()) {
      fail(ErrorCode::InvalidRequest, "states file has " + std::to_string(states.users.rows()) +
                                          " coordinates but the catalog has " +
                                          std::to_string(items.catalog.category_count()) + " categories");
    }
    out.catalog = std::move(items.catalog);
    out.initial.users = std::move(states.users);
    for (const auto& id : states.ids) {
      if (users.find(id)) fail(ErrorCode::ParseError, "duplicate user '" + id + "' in states file");
      users.intern(id);
    }
  }
  out.user_ids = users.ids();
  if (!spec.trust_file.empty()) {
    TrustData trust = ingest_trust(spec.trust_file, users, spec.skip_unknown_trust);
    out.graph = std::move(trust.graph);
    out.self_loops_dropped = trust.self_loops_dropped;
  } else {
    out.graph = build_social_graph({}, users.size());
  }
  return out;
}

RunSummary run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<SeedRun> runs(config.seeds.size());
  parallel_for(runs.size(), config.threads,
               [&](std::size_t s) { runs[s] = run_seed(config, config.seeds[s]); });

  RunSummary summary;
  summary.strategy = std::string(to_string(config.mitigation.kind));
  summary.dataset = config.dataset.name;
  summary.seeds = config.seeds;
  summary.steps = config.steps;
  summary.metric_every = config.resolved_metric_every();
  summary.burn_in = config.burn_in;
  summary.ts_k = runs.front().records.empty() ? config.resolved_ts_k() : runs.front().records.front().k_used;
  for (const auto& r : runs.front().records) summary.recorded_steps.push_back(r.t);
  if (!runs.front().records.empty() && runs.front().records.front().pdv_mode == PdvMode::Sampled) {
    summary.pdv_mode = "sampled";
  }
  for (const auto& run : runs) {
    summary.padded_slates += run.padded;
    summary.substituted_users += run.substituted;
    summary.self_loops_dropped = run.self_loops;
    summary.isolated_users = run.isolated;
  }

  const std::size_t points = summary.recorded_steps.size();
  for (std::string_view name : kMetricNames) {
    MetricSummary ms;
    for (const auto& run : runs) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& r : run.records) {
        if (r.t < config.burn_in) continue;
        sum += metric_value(r, name);
        ++count;
      }
      ms.per_seed.push_back(count == 0 ? kNan : sum / static_cast<double>(count));
    }
    const SampleSummary agg = summarize(ms.per_seed);
    ms.mean = agg.mean;
    ms.stddev = agg.stddev;
    ms.ci95 = agg.ci95;
    for (std::size_t p = 0; p < points; ++p) {
      std::vector<double> at;
      for (const auto& run : runs) at.push_back(metric_value(run.records[p], name));
      const SampleSummary s = summarize(at);
      ms.series_mean.push_back(s.mean);
      ms.series_ci95.push_back(s.ci95.value_or(kNan));
    }
    summary.metrics.emplace(std::string(name), std::move(ms));
  }

  if (!config.out_dir.empty()) {
    const auto csv_path = config.out_dir / "metrics.csv";
    std::ofstream csv = open_out(csv_path);
    csv << "t,seed,rce,ra,nd,pdv,ts_at_k\n";
    for (const auto& run : runs) {
      for (const auto& r : run.records) {
        csv << r.t << ',' << run.seed << ',' << format_double(r.rce) << ',' << format_double(r.ra) << ','
            << format_double(r.nd) << ',' << format_double(r.pdv) << ',' << format_double(r.ts_at_k) << '\n';
      }
    }
    close_checked(csv, csv_path);
    save_summary(summary, config.out_dir / "summary.json");
    if (config.dump_final_states) {
      for (const auto& run : runs) {
        export_states(run.final_states.users, config.out_dir / ("states_seed" + std::to_string(run.seed) + ".csv"),
                      run.user_ids);
      }
    }
  }
  return summary;
}

ExperimentConfig apply_axis(const ExperimentConfig& config, std::string_view axis, double value) {
  ExperimentConfig out = config;
  out.sweep_axis.clear();
  out.sweep_values.clear();
  auto need_synthetic = [&] {
    if (config.dataset.kind != DatasetKind::Synthetic) {
      fail(ErrorCode::InvalidRequest, "axis '" + std::string(axis) + "' needs a synthetic dataset");
    }
    if (!is_integral(value) || value < 0.0) {
      fail(ErrorCode::InvalidRequest, "axis '" + std::string(axis) + "' needs non-negative integers");
    }
  };
  if (axis == "alpha") {
    out.params.alpha = value;
  } else if (axis == "beta") {
    out.params.beta = value;
  } else if (axis == "gamma") {
    out.params.gamma = value;
  } else if (axis == "epsilon") {
    out.params.epsilon = value;
  } else if (axis == "m") {
    need_synthetic();
    out.dataset.items = static_cast<int>(value);
  } else if (axis == "links") {
    need_synthetic();
    out.dataset.links = static_cast<std::size_t>(value);
  } else if (axis == "c") {
    need_synthetic();
    out.dataset.categories = static_cast<int>(value);
  } else {
    fail(ErrorCode::InvalidRequest, "unknown sweep axis '" + std::string(axis) + "'");
  }
  out.validate();
  return out;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& config) {
  if (config.sweep_axis.empty()) fail(ErrorCode::InvalidRequest, "no sweep axis given");
  config.validate();
  std::vector<ExperimentConfig> configs;
  for (double v : config.sweep_values) {
    ExperimentConfig point = apply_axis(config, config.sweep_axis, v);
    if (!config.out_dir.empty()) point.out_dir = config.out_dir / axis_dir(config.sweep_axis, v);
    configs.push_back(std::move(point));
  }

  std::vector<SweepPoint> out;
  for (std::size_t p = 0; p < configs.size(); ++p) out.push_back({config.sweep_values[p], run_experiment(configs[p])});

  if (!config.out_dir.empty()) {
    const auto long_path = config.out_dir / "sweep.csv";
    std::ofstream csv = open_out(long_path);
    csv << "axis,value,t,metric,mean,ci95\n";
    for (const auto& point : out) {
      for (std::string_view name : kMetricNames) {
        const auto& ms = point.summary.metrics.at(std::string(name));
        for (std::size_t k = 0; k < point.summary.recorded_steps.size(); ++k) {
          csv << config.sweep_axis << ',' << format_double(point.value) << ',' << point.summary.recorded_steps[k]
              << ',' << name << ',' << format_double(ms.series_mean[k]) << ',' << format_double(ms.series_ci95[k])
              << '\n';
        }
      }
    }
    close_checked(csv, long_path);

    const auto summary_path = config.out_dir / "sweep_summary.csv";
    std::ofstream table = open_out(summary_path);
    table << "axis,value,metric,mean,stddev,ci95\n";
    for (const auto& point : out) {
      for (std::string_view name : kMetricNames) {
        const auto& ms = point.summary.metrics.at(std::string(name));
        table << config.sweep_axis << ',' << format_double(point.value) << ',' << name << ','
              << format_double(ms.mean) << ',' << format_double(ms.stddev) << ','
              << format_double(ms.ci95.value_or(kNan)) << '\n';
      }
    }
    close_checked(table, summary_path);
  }
  return out;
}

std::vector<ComparisonRow> compare_runs(const RunSummary& candidate, const RunSummary& baseline) {
  if (candidate.steps != baseline.steps || candidate.metric_every != baseline.metric_every ||
      candidate.burn_in != baseline.burn_in || candidate.seeds.size() != baseline.seeds.size()) {
    fail(ErrorCode::InvalidRequest, "runs differ in schedule or seed count");
  }
  std::vector<ComparisonRow> rows;
  for (std::string_view name : kMetricNames) {
    const auto& c = candidate.metrics.at(std::string(name));
    const auto& b = baseline.metrics.at(std::string(name));
    ComparisonRow row;
    row.metric = std::string(name);
    row.higher_is_better = higher_is_better(name);
    row.baseline = b.mean;
    row.candidate = c.mean;
    const double direction = row.higher_is_better ? 1.0 : -1.0;
    row.improvement_pct = direction * (c.mean - b.mean) / std::abs(b.mean) * 100.0;
    row.p_value = welch_t_test(c.per_seed, b.per_seed);
    rows.push_back(row);
  }
  return rows;
}

void save_summary(const RunSummary& s, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["strategy"] = s.strategy;
  j["dataset"] = s.dataset;
  j["seeds"] = s.seeds;
  j["steps"] = s.steps;
  j["metric_every"] = s.metric_every;
  j["burn_in"] = s.burn_in;
  j["ts_k"] = s.ts_k;
  j["ts_excludes_self"] = true;
  j["pdv_mode"] = s.pdv_mode;
  j["diagnostics"] = {{"padded_slates", s.padded_slates},
                      {"substituted_users", s.substituted_users},
                      {"self_loops_dropped", s.self_loops_dropped},
                      {"isolated_users", s.isolated_users}};
  j["recorded_steps"] = s.recorded_steps;
  auto& metrics = j["metrics"];
  for (std::string_view name : kMetricNames) {
    const auto& m = s.metrics.at(std::string(name));
    nlohmann::ordered_json mj;
    mj["mean"] = number(m.mean);
    mj["stddev"] = number(m.stddev);
    mj["ci95"] = m.ci95 ? number(*m.ci95) : nlohmann::ordered_json(nullptr);
    mj["per_seed"] = numbers(m.per_seed);
    mj["series_mean"] = numbers(m.series_mean);
    mj["series_ci95"] = numbers(m.series_ci95);
    metrics[std::string(name)] = std::move(mj);
  }
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
  close_checked(out, path);
}

RunSummary load_summary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    RunSummary s;
    s.strategy = j.at("strategy").get<std::string>();
    s.dataset = j.at("dataset").get<std::string>();
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.steps = j.at("steps").get<std::size_t>();
    s.metric_every = j.at("metric_every").get<std::size_t>();
    s.burn_in = j.at("burn_in").get<std::size_t>();
    s.ts_k = j.at("ts_k").get<int>();
    s.pdv_mode = j.at("pdv_mode").get<std::string>();
    const auto& d = j.at("diagnostics");
    s.padded_slates = d.at("padded_slates").get<std::size_t>();
    s.substituted_users = d.at("substituted_users").get<std::size_t>();
    s.self_loops_dropped = d.at("self_loops_dropped").get<std::size_t>();
    s.isolated_users = d.at("isolated_users").get<std::size_t>();
    s.recorded_steps = j.at("recorded_steps").get<std::vector<std::size_t>>();
    for (std::string_view name : kMetricNames) {
      const auto& mj = j.at("metrics").at(std::string(name));
      MetricSummary m;
      m.mean = read_number(mj.at("mean"));
      m.stddev = read_number(mj.at("stddev"));
      if (!mj.at("ci95").is_null()) m.ci95 = mj.at("ci95").get<double>();
      m.per_seed = read_numbers(mj.at("per_seed"));
      m.series_mean = read_numbers(mj.at("series_mean"));
      m.series_ci95 = read_numbers(mj.at("series_ci95"));
      s.metrics.emplace(std::string(name), std::move(m));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_comparison(const std::vector<ComparisonRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "metric,direction,baseline,candidate,improvement_pct,p_value\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << (r.higher_is_better ? "up" : "down") << ',' << format_double(r.baseline) << ','
        << format_double(r.candidate) << ',' << format_double(r.improvement_pct) << ','
        << (r.p_value ? format_double(*r.p_value) : std::string()) << '\n';
  }
  close_checked(out, path);
}

namespace {

struct Instance {
  ItemCatalog catalog;
  SocialGraph graph;
  Matrix users;
};

Instance random_instance(Rng& rng, int n, int c, int m, bool single_category) {
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(m));
  for (auto& s : sets) {
    const int k = single_category ? 1 : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(c)));
    for (int r = 0; r < k; ++r) s.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(c))));
  }
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.uniform() < 0.3) edges.push_back({i, j});
    }
  }
  Instance out{ItemCatalog(std::move(sets), c), build_social_graph(edges, n), Matrix(c, n)};
  for (Eigen::Index k = 0; k < out.users.size(); ++k) out.users.data()[k] = rng.normal();
  out.users = normalize_columns(out.users);
  return out;
}

double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

bool verify_theory(std::ostream& out, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0, 0, Stream::Fallback);
  bool ok = true;
  auto report = [&](bool pass, std::string_view name, const std::string& detail) {
    out << (pass ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
    ok = ok && pass;
  };
  auto info = [&](std::string_view name, const std::string& detail) { out << "INFO " << name << ": " << detail << '\n'; };
  auto fmt = [](double x) {
    std::ostringstream s;
    s << std::setprecision(6) << x;
    return s.str();
  };

  {
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(10));
      const int c = 1 + static_cast<int>(rng.below(5));
      const int m = 1 + static_cast<int>(rng.below(50));
      Instance inst = random_instance(rng, n, c, m, trial % 2 == 0);
      ModelParams p;
      p.alpha = 5.0 * rng.uniform();
      p.beta = 5.0 * rng.uniform();
      p.gamma = rng.uniform();
      p.epsilon = 2.0 * rng.uniform() - 1.0;
      p.eta = 0.2 * rng.uniform();
      p.h = 1;
      const Matrix a = matrix_step(inst.users, build_operators(inst.catalog, inst.graph, p));
      const Matrix b = linearized_expected_update(inst.users, inst.catalog, inst.graph, p);
      worst = std::max(worst, inf_norm(a - b));
    }
    report(worst <= 1e-12, "operator form equals linearized update", "max error " + fmt(worst));
  }
  {
    const Matrix a = Matrix::Random(3, 4);
    const Matrix u = Matrix::Random(4, 5);
    const Matrix b = Matrix::Random(2, 5);
    const double err = vectorization_identity_error(a, u, b);
    report(err <= 1e-12, "vec(A U B^T) = (B kron A) vec U", "error " + fmt(err));
  }
  {
    OperatorSet ops;
    ops.X = Matrix::Constant(1, 1, 1.0);
    ops.Y = Matrix::Constant(1, 1, 0.5);
    ops.Z = Matrix::Constant(1, 1, 0.25);
    ops.S_tilde = build_social_graph({}, 1).influence_matrix();
    const double u = fixed_point(ops).users(0, 0);
    report(std::abs(u - 4.0) <= 1e-12, "scalar fixed point", "U* = " + fmt(u));
  }
  {
    ModelParams p{1.0, 1.0, 0.5, 0.2, 0.05, 1};
    const auto r1 = convergence_margin(p);
    p = ModelParams{5.0, 5.0, 0.5, 0.1, 0.1, 1};
    const auto r2 = convergence_margin(p);
    report(std::abs(r1.margin - 0.09) <= 1e-12 && r1.satisfied && std::abs(r2.margin - 1.5125) <= 1e-12 &&
               !r2.satisfied,
           "convergence margin arithmetic", "margins " + fmt(r1.margin) + ", " + fmt(r2.margin));
  }
  {
    Instance inst = random_instance(rng, 50, 5, 200, true);
    const ModelParams p{1.0, 1.0, 0.5, 0.2, 0.05, 1};
    const OperatorSet ops = build_operators(inst.catalog, inst.graph, p);
    const FixedPointResult fp = fixed_point(ops);
    const auto conv = convergence_margin(ops);
    report(fp.residual <= 1e-10 * (1.0 + inf_norm(fp.users)), "fixed-point residual",
           "residual " + fmt(fp.residual) + ", condition " + fmt(fp.condition_estimate));
    info("iteration operator", "margin " + fmt(conv.margin) + ", norm bound " + fmt(conv.norm_bound) +
                                   ", spectral radius " + fmt(conv.spectral_radius) +
                                   (conv.spectral_radius >= 1.0 ? " (iteration does not contract)" : ""));
  }
  {
    std::vector<std::vector<int>> sets;
    for (int j = 0; j < 1000; ++j) sets.push_back({static_cast<int>(rng.below(10))});
    const ItemCatalog catalog(std::move(sets), 10);
    Eigen::Index k = 0;
    catalog.mass().maxCoeff(&k);
    // The condition only admits vectors close to the dominant axis, so draw
    // around it.
    Matrix users(10, 200);
    for (Eigen::Index i = 0; i < users.cols(); ++i) {
      for (Eigen::Index o = 0; o < 10; ++o) users(o, i) = 0.02 * rng.normal();
      users(k, i) += 1.0;
    }
    users = normalize_columns(users);
    const ModelParams p{5.0, 5.0, 1.0, 0.0, 0.1, 20};
    const auto hom = steady_homogenization_check(users, catalog, p, 100);
    report(!hom.checked.empty() && hom.violations() == 0, "homogenization monotonicity",
           std::to_string(hom.checked.size()) + " pairs checked, " + std::to_string(hom.excluded.size()) +
               " excluded, " + std::to_string(hom.violations()) + " violations");

    const double lambda = p.eta * p.beta / 1000.0;
    auto count_increasing = [&](const Vector& mass) {
      std::size_t increasing = 0;
      for (int i = 0; i < 100; ++i) {
        Vector u0(10);
        for (int o = 0; o < 10; ++o) u0(o) = std::abs(rng.normal());
        u0.normalize();
        const auto h = expected_entropy_series(u0, mass, p.alpha, lambda, 200);
        for (std::size_t t = 1; t < h.size(); ++t) {
          if (h[t] > h[t - 1] + 1e-12) {
            ++increasing;
            break;
          }
        }
      }
      return increasing;
    };
    const std::size_t balanced = count_increasing(Vector::Constant(10, 100.0));
    report(balanced == 0, "entropy non-increasing, equal category mass",
           std::to_string(balanced) + " of 100 users increase");
    info("entropy non-increasing, random category mass",
         std::to_string(count_increasing(catalog.mass())) +
             " of 100 users increase (a faster-growing category overtaking the leader raises entropy)");
  }
  return ok;
}

}  // namespace echosim
