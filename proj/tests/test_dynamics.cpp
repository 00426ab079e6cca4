#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "echosim/dataset.hpp"
#include "echosim/dynamics.hpp"
#include "support.hpp"

using namespace echosim;
using testing::basis;

namespace {

ItemCatalog axis_catalog(int c) {
  std::vector<std::vector<int>> sets;
  for (int o = 0; o < c; ++o) sets.push_back({o});
  return ItemCatalog(std::move(sets), c);
}

}  // namespace

TEST_CASE("social representation") {
  Matrix u(3, 2);
  u.col(0) = basis(3, 0);
  u.col(1) = basis(3, 1);
  const std::vector<Edge> edge{{0, 1}};
  const SocialGraph g = build_social_graph(edge, 2);
  CHECK(social_representation(u, g, 0, 1.0) == basis(3, 0));
  CHECK(social_representation(u, g, 0, 0.0) == basis(3, 1));
  const Vector half = social_representation(u, g, 0, 0.5);
  CHECK(half(0) == 0.5);
  CHECK(half(1) == 0.5);
  CHECK(half(2) == 0.0);
  // Isolated user 1 keeps its own vector.
  CHECK(social_representation(u, g, 1, 0.0) == basis(3, 1));
  // gamma = 1 never looks at the graph, even an empty one.
  CHECK(social_representation(u, SocialGraph{}, 1, 1.0) == basis(3, 1));
}

TEST_CASE("recommendation distribution") {
  const ItemCatalog five({{0}, {1}, {2}, {0}, {1}}, 3);
  const Vector uniform = recommendation_distribution(basis(3, 0), five, 0.0);
  for (int j = 0; j < 5; ++j) CHECK(uniform(j) == doctest::Approx(0.2).epsilon(1e-15));

  const ItemCatalog two = axis_catalog(2);
  const Vector p = recommendation_distribution(basis(2, 0), two, 1.0);
  const double e = std::exp(1.0);
  CHECK(p(0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-14));
  CHECK(p(1) == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-14));
  CHECK(p(0) == doctest::Approx(0.73106).epsilon(1e-5));

  const Vector peaked = recommendation_distribution(basis(3, 2), five, 1000.0);
  CHECK(peaked(2) > 0.999);

  Vector bad = basis(3, 0);
  bad(1) = std::numeric_limits<double>::infinity();
  CHECK_CODE(recommendation_distribution(bad, five, 1.0), ErrorCode::NumericalError);
}

TEST_CASE("recommendation distribution sums to one and ignores score shifts") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 2 + static_cast<int>(rng.below(8));
    const auto catalog = testing::random_catalog(rng, c, 1 + static_cast<int>(rng.below(300)), true);
    const Vector s = testing::random_unit_users(rng, c, 1).col(0) * (1.0 + 10.0 * rng.uniform());
    const double alpha = 30.0 * rng.uniform();
    const Vector p = recommendation_distribution(s, catalog, alpha);
    CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
    CHECK(p.minCoeff() >= 0.0);
    // Every single-category item has v . 1 = 1, so s + k 1 shifts all scores by alpha k.
    const Vector shifted = recommendation_distribution(s + Vector::Constant(c, 3.7), catalog, alpha);
    CHECK((p - shifted).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("sampling without replacement") {
  Rng rng(1);
  const Vector uniform = Vector::Constant(10, 0.1);
  auto all = sample_without_replacement(uniform, 10, rng);
  std::vector<int> sorted = all.items;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expected(10);
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(sorted == expected);
  CHECK_FALSE(all.padded);

  const Vector point = (Vector(3) << 1.0, 0.0, 0.0).finished();
  const auto one = sample_without_replacement(point, 1, rng);
  CHECK(one.items == std::vector<int>{0});
  CHECK_FALSE(one.padded);

  CHECK_CODE(sample_without_replacement(uniform, 11, rng), ErrorCode::InvalidRequest);

  const auto padded = sample_without_replacement(point, 3, rng);
  CHECK(padded.padded);
  CHECK(padded.items.front() == 0);
  CHECK(std::set<int>(padded.items.begin(), padded.items.end()).size() == 3);

  Rng a(77), b(77);
  CHECK(sample_without_replacement(uniform, 4, a).items == sample_without_replacement(uniform, 4, b).items);
}

TEST_CASE("sampling matches sequential draw-and-renormalize") {
  // Exact inclusion probability for two sequential draws.
  const Vector p = (Vector(4) << 0.5, 0.25, 0.15, 0.1).finished();
  std::vector<double> exact(4, 0.0);
  std::vector<double> first_exact(4, 0.0);
  for (int j = 0; j < 4; ++j) {
    first_exact[static_cast<std::size_t>(j)] = p(j);
    double second = 0.0;
    for (int k = 0; k < 4; ++k) {
      if (k != j) second += p(k) * p(j) / (1.0 - p(k));
    }
    exact[static_cast<std::size_t>(j)] = p(j) + second;
  }
  Rng rng(2024);
  const int trials = 200000;
  std::vector<int> hits(4, 0), first(4, 0);
  for (int t = 0; t < trials; ++t) {
    const auto s = sample_without_replacement(p, 2, rng);
    ++first[static_cast<std::size_t>(s.items[0])];
    for (int j : s.items) ++hits[static_cast<std::size_t>(j)];
  }
  for (std::size_t j = 0; j < 4; ++j) {
    const double f = static_cast<double>(hits[j]) / trials;
    const double se = std::sqrt(exact[j] * (1.0 - exact[j]) / trials);
    CHECK(std::abs(f - exact[j]) <= 4.0 * se);
    const double g = static_cast<double>(first[j]) / trials;
    const double se1 = std::sqrt(first_exact[j] * (1.0 - first_exact[j]) / trials);
    CHECK(std::abs(g - first_exact[j]) <= 4.0 * se1);
  }
}

TEST_CASE("feedback probabilities") {
  auto f = feedback_probabilities(0.0, 3.0, 0.2);
  CHECK(f.positive == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(f.negative == doctest::Approx(0.4).epsilon(1e-15));

  f = feedback_probabilities(0.5, 1.0, 0.0);
  CHECK(f.positive == 0.75);
  CHECK(f.negative == 0.25);

  for (double d : {-0.9, -0.3, 0.0, 0.4, 0.99}) {
    f = feedback_probabilities(d, 0.0, 0.0);
    CHECK(f.positive == 0.5);
    CHECK(f.negative == 0.5);
  }

  const Vector u = basis(3, 0) * 0.5;
  const Vector v = basis(3, 0);
  CHECK(feedback_probabilities(u, v, 1.0, 0.0).positive == 0.75);

  // Out-of-range scores are clamped rather than producing NaN.
  f = feedback_probabilities(7.0, 2.5, 0.0);
  CHECK(std::isfinite(f.positive));
  CHECK(f.positive > 0.999999);
  f = feedback_probabilities(-7.0, 2.5, 0.0);
  CHECK(f.positive < 1e-6);

  // Huge beta falls back to the log-odds form.
  f = feedback_probabilities(0.3, 1e6, 0.0);
  CHECK(f.positive == 1.0);
  f = feedback_probabilities(-0.3, 1e6, 0.0);
  CHECK(f.positive == 0.0);

  // Leniency pushes past 1 near d = 1; the pair is clamped and renormalized.
  f = feedback_probabilities(0.99, 5.0, 0.8);
  CHECK(f.raw_positive > 1.0);
  CHECK(f.positive == 1.0);
  CHECK(f.negative == 0.0);
}

TEST_CASE("feedback law properties on a grid") {
  const std::vector<double> ds{-0.9, -0.5, -0.1, 0.1, 0.5, 0.9};
  const std::vector<double> betas{0, 1, 2, 5, 10};
  for (double eps : {-0.4, -0.1, 0.0, 0.1, 0.4}) {
    for (double d : ds) {
      double previous = feedback_probabilities(d, betas.front(), eps).positive;
      for (double beta : betas) {
        const auto f = feedback_probabilities(d, beta, eps);
        CHECK(std::abs(f.raw_positive + f.raw_negative - 1.0) <= 1e-12);
        CHECK(std::abs(f.positive + f.negative - 1.0) <= 1e-12);
        if (d > 0) CHECK(f.positive >= previous);
        if (d < 0) CHECK(f.positive <= previous);
        previous = f.positive;
        const auto mirror = feedback_probabilities(-d, beta, eps);
        CHECK(std::abs(f.raw_positive + mirror.raw_positive - (1.0 + eps)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("drawing feedback") {
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    CHECK(draw_feedback(rng, 1.0) == 1);
    CHECK(draw_feedback(rng, 0.0) == -1);
  }
  int positive = 0;
  for (int k = 0; k < 100000; ++k) positive += draw_feedback(rng, 0.75) == 1 ? 1 : 0;
  CHECK(std::abs(positive / 100000.0 - 0.75) <= 0.005);
}

TEST_CASE("user update") {
  const ItemCatalog axes = axis_catalog(3);
  const Vector u = (Vector(3) << 0.3, -0.2, 0.1).finished();
  const std::vector<int> same{0, 0, 0};
  const std::vector<double> plus{1, 1, 1};
  CHECK((update_user(u, same, plus, 0.1, 3, axes) - (u + 0.1 * basis(3, 0))).cwiseAbs().maxCoeff() <= 1e-15);

  const std::vector<int> pair{0, 0};
  const std::vector<double> cancel{1, -1};
  CHECK(update_user(u, pair, cancel, 0.5, 2, axes) == u);

  const std::vector<int> two{0, 1};
  const Vector out = update_user(Vector::Zero(3), two, cancel, 0.2, 2, axes);
  CHECK(out(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(out(1) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(out(2) == 0.0);

  CHECK_CODE(update_user(u, two, plus, 0.1, 2, axes), ErrorCode::InvalidRequest);
}

TEST_CASE("Monte-Carlo feedback mean matches the exact expectation for a fixed slate") {
  Rng rng(8);
  const auto catalog = testing::random_catalog(rng, 5, 30, false);
  const Vector u = testing::random_unit_users(rng, 5, 1).col(0) * 1.3;
  const std::vector<int> slate{3, 7, 7, 12, 29};
  const double beta = 2.0, eps = 0.1, eta = 0.3;
  const int h = static_cast<int>(slate.size());

  Vector expected = u;
  for (int j : slate) {
    const auto f = feedback_probabilities(u, catalog.item(j), beta, eps);
    expected += (eta / h) * (f.positive - f.negative) * catalog.item(j);
  }

  const int draws = 100000;
  Vector sum = Vector::Zero(5), sq = Vector::Zero(5);
  for (int k = 0; k < draws; ++k) {
    std::vector<double> w;
    for (int j : slate) w.push_back(draw_feedback(rng, feedback_probabilities(u, catalog.item(j), beta, eps).positive));
    const Vector x = update_user(u, slate, w, eta, h, catalog);
    sum += x;
    sq += x.cwiseProduct(x);
  }
  const Vector mean = sum / draws;
  for (int o = 0; o < 5; ++o) {
    const double var = sq(o) / draws - mean(o) * mean(o);
    const double se = std::sqrt(std::max(var, 0.0) / draws);
    CHECK(std::abs(mean(o) - expected(o)) <= 4.0 * se + 1e-15);
  }
}

TEST_CASE("simulate_step") {
  Rng rng(3);
  const auto catalog = testing::random_catalog(rng, 4, 50, true);
  const SocialGraph graph = testing::random_graph(rng, 12, 0.2);
  UserStates states{testing::random_unit_users(rng, 4, 12), 0};

  SUBCASE("frozen dynamics") {
    ModelParams p;
    p.beta = 0.0;
    p.epsilon = 0.0;
    p.eta = 0.0;
    const auto r = simulate_step(states, catalog, graph, p, {9});
    CHECK(r.states.users == states.users);
    CHECK(r.states.t == 1);
    CHECK(r.log.slates.size() == 12);
    for (const auto& s : r.log.slates) {
      CHECK(s.items.size() == 20);
      CHECK(std::set<int>(s.items.begin(), s.items.end()).size() == 20);
    }
  }

  SUBCASE("deterministic and independent of thread count") {
    ModelParams p;
    const auto a = simulate_step(states, catalog, graph, p, {123, 1});
    const auto b = simulate_step(states, catalog, graph, p, {123, 4});
    CHECK(a.states.users == b.states.users);
    for (std::size_t i = 0; i < 12; ++i) {
      CHECK(a.log.slates[i].items == b.log.slates[i].items);
      for (std::size_t r = 0; r < a.log.feedback[i].size(); ++r) {
        CHECK(a.log.feedback[i][r].sign == b.log.feedback[i][r].sign);
        CHECK(a.log.feedback[i][r].p_pos_used == b.log.feedback[i][r].p_pos_used);
      }
    }
    const auto c = simulate_step(states, catalog, graph, p, {124, 1});
    CHECK(c.states.users != a.states.users);
  }

  SUBCASE("gamma = 1 does not need the graph") {
    ModelParams p;
    p.gamma = 1.0;
    CHECK_NOTHROW(simulate_step(states, catalog, SocialGraph{}, p, {1}));
    p.gamma = 0.5;
    CHECK_CODE(simulate_step(states, catalog, SocialGraph{}, p, {1}), ErrorCode::InvalidRequest);
  }

  SUBCASE("recorded distributions") {
    const auto r = simulate_step(states, catalog, graph, ModelParams{}, {5, 1, true});
    for (const auto& s : r.log.slates) {
      CHECK(s.probabilities_used.size() == 50);
      CHECK(std::abs(std::accumulate(s.probabilities_used.begin(), s.probabilities_used.end(), 0.0) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("single-item loop gains eta per step") {
  const ItemCatalog one({{0}}, 2);
  UserStates states{Matrix(basis(2, 0)), 0};
  ModelParams p;
  p.h = 1;
  p.eta = 0.1;
  p.epsilon = 1.0;  // pushes p_pos to 1
  p.gamma = 1.0;
  const SocialGraph g = build_social_graph({}, 1);
  for (int t = 1; t <= 5; ++t) {
    auto r = simulate_step(states, one, g, p, {1});
    CHECK(r.log.feedback[0][0].p_pos_used == 1.0);
    CHECK(r.log.feedback[0][0].sign == 1);
    states = r.states;
    CHECK(states.users(0, 0) == doctest::Approx(1.0 + 0.1 * t).epsilon(1e-14));
    CHECK(states.users(1, 0) == 0.0);
  }
}

TEST_CASE("run bookkeeping") {
  Rng rng(4);
  const auto catalog = testing::random_catalog(rng, 4, 60, true);
  const SocialGraph graph = testing::random_graph(rng, 10, 0.3);
  const UserStates init{testing::random_unit_users(rng, 4, 10), 0};
  ModelParams p;
  RunOptions opt;
  opt.seed = 17;
  opt.schedule.metrics.ts_k = 3;
  opt.keep_logs = true;
  opt.snapshot_every = 1;

  CHECK_CODE(run(init, catalog, graph, p, 0, opt), ErrorCode::InvalidRequest);

  const Trajectory tr = run(init, catalog, graph, p, 3, opt);
  REQUIRE(tr.records.size() == 3);
  CHECK(tr.logs.size() == 3);
  CHECK(tr.snapshots.size() == 4);
  CHECK(tr.final_states.t == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(tr.records[k].t == k);
    // Record t pairs U(t) with the slates served at step t.
    const auto expected = evaluate_metrics(k, tr.snapshots[k].users, tr.logs[k].slate_items(), catalog, graph,
                                           opt.schedule.metrics);
    CHECK(tr.records[k].rce == expected.rce);
    CHECK(tr.records[k].ra == expected.ra);
    CHECK(tr.records[k].pdv == expected.pdv);
  }

  opt.schedule.every = 2;
  CHECK(run(init, catalog, graph, p, 5, opt).records.size() == 3);
}

TEST_CASE("recommendation entropy falls under the default parameters") {
  double start = 0.0, end = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto data = generate_synthetic(100, 1000, 10, 1000, seed);
    RunOptions opt;
    opt.seed = seed;
    opt.schedule.every = 199;
    opt.schedule.metrics.ts_k = 10;
    const auto tr = run(data.initial, data.catalog, data.graph, ModelParams{}, 200, opt);
    REQUIRE(tr.records.size() == 2);
    start += tr.records.front().rce;
    end += tr.records.back().rce;
  }
  CHECK(end / 10 < start / 10);
}
