// echosim: command-line front end for the simulator.
//
//   echosim simulate --seed 1,2,3 --out-dir runs/base [--config run.toml] ...
//     (run.toml holds a [simulate] table; command-line flags take precedence)
//   echosim sweep --axis alpha --values 0,1,5,20 --seed 1 --out-dir runs/alpha
//   echosim compare --candidate a/summary.json --baseline b/summary.json
//   echosim synth --n 1000 --m 10000 --c 10 --links 10000 --seed 7 --out-dir data
//   echosim verify-theory --seed 1
//
// Exit status: 0 success, 2 invalid input, 1 runtime failure.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "echosim/dataset.hpp"
#include "echosim/errors.hpp"
#include "echosim/experiment.hpp"
#include "echosim/format.hpp"

namespace {

struct Cli {
  echosim::ExperimentConfig config;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::string dataset_kind = "synthetic";
  std::string strategy = "none";
  std::string items, interactions, states, trust;
  int ts_k = 0;
  std::size_t pdv_exact_limit = 5000;
  std::size_t pdv_pairs = 2'000'000;
};

void add_run_options(CLI::App* app, Cli& cli) {
  auto& c = cli.config;
  app->add_option("--seed", cli.seeds, "Seeds, one run each")->required()->delimiter(',');
  app->add_option("--out-dir", cli.out_dir, "Output directory")->required();
  app->add_option("--steps", c.steps, "Time steps per run")->capture_default_str();

  app->add_option("--alpha", c.params.alpha, "Softmax temperature")->capture_default_str();
  app->add_option("--beta", c.params.beta, "Confirmation bias exponent")->capture_default_str();
  app->add_option("--gamma", c.params.gamma, "Self weight in the social blend")->capture_default_str();
  app->add_option("--epsilon", c.params.epsilon, "Leniency shift")->capture_default_str();
  app->add_option("--eta", c.params.eta, "Update rate")->capture_default_str();
  app->add_option("--list-length", c.params.h, "Recommendation list length h")->capture_default_str();

  app->add_option("--strategy", cli.strategy, "none, ua_alpha, fua, dpp or sar")->capture_default_str();
  app->add_option("--sigma", c.mitigation.sigma, "Adaptive temperature sharpness")->capture_default_str();
  app->add_option("--rho", c.mitigation.rho, "Feedback weight shift")->capture_default_str();
  app->add_option("--theta", c.mitigation.theta, "Diversity penalty")->capture_default_str();
  app->add_option("--candidates", c.mitigation.candidate_count, "Re-ranking pool size")->capture_default_str();
  app->add_option("--omega", c.mitigation.omega, "Social reweighting sharpness")->capture_default_str();
  app->add_flag("--strict-sar", c.mitigation.strict_sar, "Extra 1/|N_i| factor in the reweighted mean");
  app->add_flag("--rescale-alpha", c.mitigation.rescale_alpha, "Scale adaptive temperatures by n");

  app->add_option("--dataset", cli.dataset_kind, "synthetic or files")->capture_default_str();
  app->add_option("--dataset-name", c.dataset.name, "Name used for the TS@k default (ciao, epinions)")
      ->capture_default_str();
  app->add_option("--n", c.dataset.users, "Synthetic users")->capture_default_str();
  app->add_option("--m", c.dataset.items, "Synthetic items")->capture_default_str();
  app->add_option("--c", c.dataset.categories, "Synthetic categories")->capture_default_str();
  app->add_option("--links", c.dataset.links, "Synthetic social links")->capture_default_str();
  app->add_option("--items", cli.items, "Items CSV");
  app->add_option("--interactions", cli.interactions, "Interactions CSV");
  app->add_option("--states", cli.states, "Initial user states CSV (instead of interactions)");
  app->add_option("--trust", cli.trust, "Trust CSV");
  app->add_flag("--skip-unknown-trust", c.dataset.skip_unknown_trust, "Skip trust rows naming unknown users");

  app->add_option("--metric-every", c.metric_every, "Metric interval; 0 picks automatically")->capture_default_str();
  app->add_option("--ts-k", cli.ts_k, "Neighbors for TS@k; 0 uses the dataset default");
  app->add_option("--burn-in", c.burn_in, "Steps left out of time averages")->capture_default_str();
  app->add_option("--pdv-exact-limit", cli.pdv_exact_limit, "Largest n for exact PDV")->capture_default_str();
  app->add_option("--pdv-pairs", cli.pdv_pairs, "Pairs drawn for sampled PDV")->capture_default_str();
  app->add_option("--threads", c.threads, "Worker threads across seeds (0 = all cores)")->capture_default_str();
  app->add_flag("--dump-states", c.dump_final_states, "Write final user states per seed");
}

echosim::ExperimentConfig finish(Cli& cli) {
  auto c = cli.config;
  c.seeds = cli.seeds;
  c.out_dir = cli.out_dir;
  c.mitigation.kind = echosim::parse_strategy_kind(cli.strategy);
  if (cli.dataset_kind == "synthetic") {
    c.dataset.kind = echosim::DatasetKind::Synthetic;
  } else if (cli.dataset_kind == "files") {
    c.dataset.kind = echosim::DatasetKind::Files;
  } else {
    echosim::fail(echosim::ErrorCode::InvalidRequest, "dataset must be synthetic or files");
  }
  c.dataset.items_file = cli.items;
  c.dataset.interactions_file = cli.interactions;
  c.dataset.states_file = cli.states;
  c.dataset.trust_file = cli.trust;
  if (cli.ts_k > 0) c.ts_k = cli.ts_k;
  c.pdv.exact_limit = cli.pdv_exact_limit;
  c.pdv.sample_pairs = cli.pdv_pairs;
  return c;
}

void print_summary(const echosim::RunSummary& s) {
  std::cout << "strategy " << s.strategy << ", " << s.seeds.size() << " seed(s), " << s.steps << " steps\n";
  for (auto name : echosim::kMetricNames) {
    const auto& m = s.metrics.at(std::string(name));
    std::cout << "  " << std::left << std::setw(8) << name << echosim::format_double(m.mean);
    if (m.ci95) std::cout << " +/- " << echosim::format_double(*m.ci95);
    std::cout << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recommender feedback-loop simulator"};
  app.require_subcommand(1);
  // Options in the file go under a [simulate] or [sweep] table. fallthrough
  // lets --config appear after the subcommand name.
  app.set_config("--config", "", "TOML file with [simulate] / [sweep] tables of options");
  app.fallthrough();

  Cli sim_cli;
  auto* simulate = app.add_subcommand("simulate", "Run one configuration over one or more seeds");
  add_run_options(simulate, sim_cli);

  Cli sweep_cli;
  std::string axis;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Run a configuration for each value of one parameter");
  add_run_options(sweep, sweep_cli);
  sweep->add_option("--axis", axis, "alpha, beta, gamma, epsilon, m, links or c")->required();
  sweep->add_option("--values", values, "Values to sweep")->required()->delimiter(',');

  std::string candidate_path, baseline_path, compare_out;
  auto* compare = app.add_subcommand("compare", "Improvement table of one run against a baseline");
  compare->add_option("--candidate", candidate_path, "Candidate summary.json")->required();
  compare->add_option("--baseline", baseline_path, "Baseline summary.json")->required();
  compare->add_option("--out", compare_out, "Write the table as CSV");

  int synth_n = 1000, synth_m = 10000, synth_c = 10;
  std::size_t synth_links = 10000;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset as CSV files");
  synth->add_option("--n", synth_n, "Users")->capture_default_str();
  synth->add_option("--m", synth_m, "Items")->capture_default_str();
  synth->add_option("--c", synth_c, "Categories")->capture_default_str();
  synth->add_option("--links", synth_links, "Social links")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed")->required();
  synth->add_option("--out-dir", synth_out, "Output directory")->required();

  std::uint64_t theory_seed = 1;
  auto* theory = app.add_subcommand("verify-theory", "Check the linearized operators numerically");
  theory->add_option("--seed", theory_seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      print_summary(echosim::run_experiment(finish(sim_cli)));
    } else if (*sweep) {
      auto config = finish(sweep_cli);
      config.sweep_axis = axis;
      config.sweep_values = values;
      for (const auto& point : echosim::sweep(config)) {
        std::cout << axis << " = " << echosim::format_double(point.value) << ": ";
        print_summary(point.summary);
      }
    } else if (*compare) {
      const auto rows =
          echosim::compare_runs(echosim::load_summary(candidate_path), echosim::load_summary(baseline_path));
      std::cout << "metric   baseline  candidate  improv%  p\n";
      for (const auto& r : rows) {
        std::cout << std::left << std::setw(8) << r.metric << ' ' << std::setw(9) << r.baseline << ' ' << std::setw(10)
                  << r.candidate << ' ' << std::setw(8) << std::fixed << std::setprecision(2) << r.improvement_pct
                  << std::defaultfloat << std::setprecision(6) << ' '
                  << (r.p_value ? echosim::format_double(*r.p_value) : std::string("-")) << '\n';
      }
      if (!compare_out.empty()) echosim::write_comparison(rows, compare_out);
    } else if (*synth) {
      const auto data = echosim::generate_synthetic(synth_n, synth_m, synth_c, synth_links, synth_seed);
      const std::filesystem::path dir(synth_out);
      echosim::write_items(data.catalog, dir / "items.csv");
      echosim::write_trust(data.graph, dir / "trust.csv");
      echosim::export_states(data.initial.users, dir / "users.csv");
      std::cout << "wrote " << synth_m << " items, " << data.graph.edges().size() << " links, " << synth_n
                << " users to " << dir.string() << '\n';
    } else if (*theory) {
      return echosim::verify_theory(std::cout, theory_seed) ? 0 : 1;
    }
  } catch (const echosim::Error& e) {
    std::cerr << "echosim: " << e.what() << '\n';
    return echosim::is_validation_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "echosim: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
