#include "echosim/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "echosim/errors.hpp"
#include "echosim/metrics.hpp"

namespace echosim {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::None: return "none";
    case StrategyKind::AdaptiveAlpha: return "ua_alpha";
    case StrategyKind::FeedbackAdjustment: return "fua";
    case StrategyKind::DiversityRerank: return "dpp";
    case StrategyKind::SocialReweighting: return "sar";
  }
  return "none";
}

StrategyKind parse_strategy_kind(std::string_view name) {
  for (auto kind : {StrategyKind::None, StrategyKind::AdaptiveAlpha, StrategyKind::FeedbackAdjustment,
                    StrategyKind::DiversityRerank, StrategyKind::SocialReweighting}) {
    if (name == to_string(kind)) return kind;
  }
  fail(ErrorCode::InvalidRequest, "unknown strategy '" + std::string(name) + "'");
}

void MitigationConfig::validate(int h, int item_count) const {
  if (!std::isfinite(sigma) || !std::isfinite(rho) || !std::isfinite(theta) || !std::isfinite(omega)) {
    fail(ErrorCode::InvalidRequest, "mitigation knobs must be finite");
  }
  if (sigma < 0.0) fail(ErrorCode::InvalidRequest, "sigma must be >= 0");
  if (omega < 0.0) fail(ErrorCode::InvalidRequest, "omega must be >= 0");
  if (theta < 0.0 || theta > 1.0) fail(ErrorCode::InvalidRequest, "theta must lie in [0, 1]");
  if (kind == StrategyKind::DiversityRerank && std::min(candidate_count, item_count) < h) {
    fail(ErrorCode::InvalidRequest, "candidate pool smaller than h");
  }
}

Vector adaptive_alpha(const Vector& dispersions, double sigma, double alpha0, bool rescale_by_n) {
  const auto n = dispersions.size();
  Vector out(n);
  if (n == 0) return out;
  Vector logits(n);
  for (Eigen::Index i = 0; i < n; ++i) logits(i) = -sigma * std::log(std::max(dispersions(i), kDispersionFloor));
  const double top = logits.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) out(i) = std::exp(logits(i) - top);
  out *= alpha0 / out.sum();
  if (rescale_by_n) out *= static_cast<double>(n);
  return out;
}

double fua_weight(int sign, double rho) {
  if (sign != 1 && sign != -1) fail(ErrorCode::InvalidRequest, "feedback sign must be +1 or -1");
  return static_cast<double>(sign) - rho;
}

std::vector<int> dpp_rerank(const Vector& u, std::span<const int> candidates, const ItemCatalog& catalog,
                            double theta, int h) {
  if (h < 1) fail(ErrorCode::InvalidRequest, "h must be >= 1");
  if (candidates.size() < static_cast<std::size_t>(h)) {
    fail(ErrorCode::InvalidRequest, "candidate pool smaller than h");
  }
  const Matrix& v = catalog.vectors();
  std::vector<double> relevance(candidates.size());
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    const int j = candidates[r];
    if (j < 0 || j >= catalog.item_count()) fail(ErrorCode::IndexOutOfRange, "candidate not in catalog");
    relevance[r] = u.dot(v.col(j));
  }

  std::vector<bool> taken(candidates.size(), false);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(h));
  Vector chosen_sum = Vector::Zero(v.rows());
  for (int step = 0; step < h; ++step) {
    Vector direction = Vector::Zero(v.rows());
    const double norm = chosen_sum.norm();
    if (norm > 0.0) direction = chosen_sum / norm;
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_r = candidates.size();
    for (std::size_t r = 0; r < candidates.size(); ++r) {
      if (taken[r]) continue;
      const double score =
          step == 0 ? relevance[r] : (1.0 - theta) * relevance[r] - theta * v.col(candidates[r]).dot(direction);
      if (score > best || (score == best && candidates[r] < candidates[best_r])) {
        best = score;
        best_r = r;
      }
    }
    taken[best_r] = true;
    out.push_back(candidates[best_r]);
    chosen_sum += v.col(candidates[best_r]);
  }
  return out;
}

std::vector<double> sar_weights(std::span<const int> neighbors, const Vector& dispersions, double omega) {
  std::vector<double> w(neighbors.size());
  if (neighbors.empty()) return w;
  // exp(-omega dis) shifted by the smallest dispersion so omega = 1000 does not
  // underflow every weight to zero.
  double low = std::numeric_limits<double>::infinity();
  for (int j : neighbors) low = std::min(low, dispersions(j));
  if (!std::isfinite(low)) low = 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < neighbors.size(); ++r) {
    w[r] = std::exp(-omega * (dispersions(neighbors[r]) - low));
    total += w[r];
  }
  if (!(total > 0.0)) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
    return w;
  }
  for (double& x : w) x /= total;
  return w;
}

Vector sar_social_representation(const Matrix& users, const SocialGraph& graph, int i, double gamma, double omega,
                                 const Vector& dispersions, bool strict) {
  const auto nb = graph.neighbors(i);
  if (nb.empty()) return users.col(i);
  const auto w = sar_weights(nb, dispersions, omega);
  Vector mix = Vector::Zero(users.rows());
  for (std::size_t r = 0; r < nb.size(); ++r) mix += w[r] * users.col(nb[r]);
  if (strict) mix /= static_cast<double>(nb.size());
  return gamma * users.col(i) + (1.0 - gamma) * mix;
}

void AdaptiveAlphaStrategy::begin_step(const Matrix& users, const SocialGraph&, const ModelParams& params) {
  alphas_ = adaptive_alpha(dispersions(users), sigma_, params.alpha, rescale_);
}

double AdaptiveAlphaStrategy::temperature(int user, const ModelParams&) const { return alphas_(user); }

double FeedbackAdjustmentStrategy::feedback_weight(int sign) const { return fua_weight(sign, rho_); }

SampledSlate DiversityRerankStrategy::select_slate(const Vector& probabilities, const Vector& user,
                                                   const ItemCatalog& catalog, int h, Rng& rng) const {
  const int pool = std::min(candidate_count_, catalog.item_count());
  SampledSlate candidates = sample_without_replacement(probabilities, pool, rng);
  SampledSlate out;
  out.items = dpp_rerank(user, candidates.items, catalog, theta_, h);
  out.padded = candidates.padded;
  return out;
}

void SocialReweightingStrategy::begin_step(const Matrix& users, const SocialGraph&, const ModelParams&) {
  dispersions_ = dispersions(users);
}

Vector SocialReweightingStrategy::social_representation(const Matrix& users, const SocialGraph& graph, int user,
                                                        const ModelParams& params) const {
  return sar_social_representation(users, graph, user, params.gamma, omega_, dispersions_, strict_);
}

std::unique_ptr<Strategy> make_strategy(const MitigationConfig& config) {
  switch (config.kind) {
    case StrategyKind::None: return nullptr;
    case StrategyKind::AdaptiveAlpha: return std::make_unique<AdaptiveAlphaStrategy>(config.sigma, config.rescale_alpha);
    case StrategyKind::FeedbackAdjustment: return std::make_unique<FeedbackAdjustmentStrategy>(config.rho);
    case StrategyKind::DiversityRerank:
      return std::make_unique<DiversityRerankStrategy>(config.theta, config.candidate_count);
    case StrategyKind::SocialReweighting: return std::make_unique<SocialReweightingStrategy>(config.omega, config.strict_sar);
  }
  return nullptr;
}

}  // namespace echosim
