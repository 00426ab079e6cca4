#include "echosim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "echosim/errors.hpp"
#include "echosim/parallel.hpp"

namespace echosim {

std::vector<std::vector<int>> StepLog::slate_items() const {
  std::vector<std::vector<int>> out;
  out.reserve(slates.size());
  for (const auto& s : slates) out.push_back(s.items);
  return out;
}

std::size_t StepLog::padded_count() const {
  return static_cast<std::size_t>(
      std::count_if(slates.begin(), slates.end(), [](const RecommendationSlate& s) { return s.padded; }));
}

Vector social_representation(const Matrix& users, const SocialGraph& graph, int i, double gamma) {
  if (gamma == 1.0) return users.col(i);
  return gamma * users.col(i) + (1.0 - gamma) * graph.neighbor_mean(users, i);
}

Vector recommendation_distribution(const Vector& s, const ItemCatalog& catalog, double alpha) {
  if (alpha < 0.0) fail(ErrorCode::InvalidRequest, "alpha must be >= 0");
  if (catalog.item_count() == 0) fail(ErrorCode::InvalidRequest, "empty catalog");
  Vector scores = alpha * (catalog.vectors().transpose() * s);
  if (!scores.allFinite()) fail(ErrorCode::NumericalError, "non-finite recommendation scores");
  scores.array() -= scores.maxCoeff();
  Vector p = scores.array().exp();
  p /= p.sum();
  return p;
}

SampledSlate sample_without_replacement(const Vector& p, int h, Rng& rng) {
  const auto m = static_cast<int>(p.size());
  if (h < 0) fail(ErrorCode::InvalidRequest, "negative slate length");
  if (h > m) {
    fail(ErrorCode::InvalidRequest, "cannot draw " + std::to_string(h) + " items from " + std::to_string(m));
  }
  std::vector<std::pair<double, int>> keys;
  std::vector<int> zero;
  keys.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double pj = p(j);
    if (!(pj >= 0.0) || !std::isfinite(pj)) fail(ErrorCode::InvalidRequest, "invalid probability entry");
    if (pj > 0.0) {
      keys.emplace_back(rng.exponential() / pj, j);
    } else {
      zero.push_back(j);
    }
  }

  SampledSlate out;
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(h), keys.size());
  std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take), keys.end());
  out.items.reserve(static_cast<std::size_t>(h));
  for (std::size_t r = 0; r < take; ++r) out.items.push_back(keys[r].second);

  if (out.items.size() < static_cast<std::size_t>(h)) {
    out.padded = true;
    // Partial Fisher-Yates over the zero-probability items.
    for (std::size_t r = 0; out.items.size() < static_cast<std::size_t>(h); ++r) {
      const auto pick = r + static_cast<std::size_t>(rng.below(zero.size() - r));
      std::swap(zero[r], zero[pick]);
      out.items.push_back(zero[r]);
    }
  }
  return out;
}

FeedbackProbabilities feedback_probabilities(double score, double beta, double epsilon) {
  constexpr double kEdge = 1e-9;
  const double d = std::clamp(score, -1.0 + kEdge, 1.0 - kEdge);
  const double a = std::pow(1.0 + d, beta);
  const double b = std::pow(1.0 - d, beta);
  double base = 0.0;
  if (std::isfinite(a) && std::isfinite(b) && a + b > 0.0 && std::isfinite(a + b)) {
    base = a / (a + b);
  } else {
    // Large beta: the same ratio written as a logistic of the log-odds.
    base = 1.0 / (1.0 + std::exp(beta * (std::log1p(-d) - std::log1p(d))));
  }
  FeedbackProbabilities out;
  out.raw_positive = base + epsilon / 2.0;
  out.raw_negative = (1.0 - base) - epsilon / 2.0;
  double pos = std::clamp(out.raw_positive, 0.0, 1.0);
  double neg = std::clamp(out.raw_negative, 0.0, 1.0);
  if (pos != out.raw_positive || neg != out.raw_negative) {
    const double total = pos + neg;
    pos /= total;
    neg /= total;
  }
  out.positive = pos;
  out.negative = neg;
  return out;
}

FeedbackProbabilities feedback_probabilities(const Vector& u, const Vector& v, double beta, double epsilon) {
  return feedback_probabilities(u.dot(v), beta, epsilon);
}

int draw_feedback(Rng& rng, double p_pos) { return rng.uniform() < p_pos ? 1 : -1; }

Vector update_user(const Vector& u, std::span<const int> items, std::span<const double> weights, double eta,
                   int h, const ItemCatalog& catalog) {
  if (items.size() != weights.size() || items.size() != static_cast<std::size_t>(h)) {
    fail(ErrorCode::InvalidRequest, "slate, weights and h disagree in length");
  }
  Vector delta = Vector::Zero(u.size());
  for (std::size_t r = 0; r < items.size(); ++r) delta += weights[r] * catalog.item(items[r]);
  return u + (eta / static_cast<double>(h)) * delta;
}

void Strategy::begin_step(const Matrix&, const SocialGraph&, const ModelParams&) {}

double Strategy::temperature(int, const ModelParams& params) const { return params.alpha; }

Vector Strategy::social_representation(const Matrix& users, const SocialGraph& graph, int user,
                                       const ModelParams& params) const {
  return echosim::social_representation(users, graph, user, params.gamma);
}

SampledSlate Strategy::select_slate(const Vector& probabilities, const Vector&, const ItemCatalog&, int h,
                                    Rng& rng) const {
  return sample_without_replacement(probabilities, h, rng);
}

double Strategy::feedback_weight(int sign) const { return static_cast<double>(sign); }

namespace {

void check_dimensions(const UserStates& states, const ItemCatalog& catalog, const SocialGraph& graph,
                      const ModelParams& params, const Strategy& strategy) {
  params.validate(catalog.item_count());
  if (states.category_count() != catalog.category_count()) {
    fail(ErrorCode::InvalidRequest, "user and item dimensions differ");
  }
  const bool needs_graph = params.gamma < 1.0 || strategy.uses_social_graph();
  if (needs_graph && graph.user_count() != states.user_count()) {
    fail(ErrorCode::InvalidRequest, "social graph size does not match user count");
  }
}

}  // namespace

StepResult simulate_step(const UserStates& states, const ItemCatalog& catalog, const SocialGraph& graph,
                         const ModelParams& params, const StepOptions& options, Strategy* strategy) {
  Strategy fallback;
  Strategy& hooks = strategy != nullptr ? *strategy : fallback;
  check_dimensions(states, catalog, graph, params, hooks);

  const Matrix& u = states.users;
  const int n = states.user_count();
  hooks.begin_step(u, graph, params);

  StepResult result;
  result.states.users.resize(u.rows(), u.cols());
  result.states.t = states.t + 1;
  result.log.t = states.t;
  result.log.slates.resize(static_cast<std::size_t>(n));
  result.log.feedback.resize(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx);
    Rng rng = Rng::stream(options.seed, states.t, idx, Stream::Recommend);
    const Vector ui = u.col(i);
    const Vector s = hooks.social_representation(u, graph, i, params);
    const Vector p = recommendation_distribution(s, catalog, hooks.temperature(i, params));
    SampledSlate drawn = hooks.select_slate(p, ui, catalog, params.h, rng);

    auto& feedback = result.log.feedback[idx];
    std::vector<double> weights;
    weights.reserve(drawn.items.size());
    feedback.reserve(drawn.items.size());
    for (int j : drawn.items) {
      const double p_pos = feedback_probabilities(ui, catalog.item(j), params.beta, params.epsilon).positive;
      const int sign = draw_feedback(rng, p_pos);
      weights.push_back(hooks.feedback_weight(sign));
      feedback.push_back({i, j, sign, p_pos});
    }
    result.states.users.col(i) = update_user(ui, drawn.items, weights, params.eta, params.h, catalog);

    auto& slate = result.log.slates[idx];
    slate.user = i;
    slate.items = std::move(drawn.items);
    slate.padded = drawn.padded;
    if (options.record_distributions) slate.probabilities_used.assign(p.data(), p.data() + p.size());
  });
  return result;
}

Trajectory run(const UserStates& initial, const ItemCatalog& catalog, const SocialGraph& graph,
               const ModelParams& params, std::size_t steps, const RunOptions& options, Strategy* strategy) {
  if (steps == 0) fail(ErrorCode::InvalidRequest, "trajectory needs at least one step");
  Trajectory out;
  UserStates current = initial;
  StepOptions step_options{options.seed, options.threads, false};
  const std::size_t every = options.schedule.every;
  for (std::size_t k = 0; k < steps; ++k) {
    if (options.snapshot_every != 0 && k % options.snapshot_every == 0) out.snapshots.push_back(current);
    StepResult next = simulate_step(current, catalog, graph, params, step_options, strategy);
    out.padded_slates += next.log.padded_count();
    if (every != 0 && k % every == 0) {
      out.records.push_back(evaluate_metrics(current.t, current.users, next.log.slate_items(), catalog, graph,
                                             options.schedule.metrics));
    }
    if (options.keep_logs) out.logs.push_back(std::move(next.log));
    current = std::move(next.states);
  }
  if (options.snapshot_every != 0 && steps % options.snapshot_every == 0) out.snapshots.push_back(current);
  out.final_states = std::move(current);
  return out;
}

}  // namespace echosim
