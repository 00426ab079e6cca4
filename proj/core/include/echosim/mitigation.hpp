#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echosim/catalog.hpp"
#include "echosim/dynamics.hpp"

namespace echosim {

enum class StrategyKind { None, AdaptiveAlpha, FeedbackAdjustment, DiversityRerank, SocialReweighting };

std::string_view to_string(StrategyKind kind);
/// Accepts none, ua_alpha, fua, dpp, sar.
StrategyKind parse_strategy_kind(std::string_view name);

struct MitigationConfig {
  StrategyKind kind = StrategyKind::None;
  double sigma = 10.0;        // adaptive temperature sharpness
  double rho = 0.02;          // feedback weight shift
  double theta = 0.501;       // diversity penalty
  int candidate_count = 1000; // pool size, capped at m
  double omega = 1000.0;      // social reweighting sharpness
  /// Divide the reweighted mean by |N_i| as well, as the formula is printed.
  bool strict_sar = false;
  /// Multiply adaptive temperatures by n so they average to alpha0.
  bool rescale_alpha = false;

  void validate(int h, int item_count) const;
};

/// Floor applied to dispersions before taking logs.
inline constexpr double kDispersionFloor = 1e-12;

/// alpha_i = alpha0 * phi_i / sum(phi), phi_i = dis_i^-sigma, evaluated as a
/// softmax of -sigma log dis_i.
Vector adaptive_alpha(const Vector& dispersions, double sigma, double alpha0, bool rescale_by_n = false);

/// +1 -> 1 - rho, -1 -> -1 - rho.
double fua_weight(int sign, double rho);

/// Greedy diversity re-ranking. The first pick maximizes u.v; each later pick
/// maximizes (1 - theta) u.v - theta v.(normalized sum of chosen vectors).
/// Ties go to the lowest item index.
std::vector<int> dpp_rerank(const Vector& u, std::span<const int> candidates, const ItemCatalog& catalog,
                            double theta, int h);

/// Normalized neighbor weights exp(-omega dis_j) / sum, in neighbor order.
std::vector<double> sar_weights(std::span<const int> neighbors, const Vector& dispersions, double omega);

/// gamma u_i + (1 - gamma) * dispersion-weighted neighbor mean.
Vector sar_social_representation(const Matrix& users, const SocialGraph& graph, int i, double gamma, double omega,
                                 const Vector& dispersions, bool strict = false);

class AdaptiveAlphaStrategy : public Strategy {
 public:
  AdaptiveAlphaStrategy(double sigma, bool rescale) : sigma_(sigma), rescale_(rescale) {}
  void begin_step(const Matrix& users, const SocialGraph& graph, const ModelParams& params) override;
  double temperature(int user, const ModelParams& params) const override;
  const Vector& alphas() const noexcept { return alphas_; }

 private:
  double sigma_;
  bool rescale_;
  Vector alphas_;
};

class FeedbackAdjustmentStrategy : public Strategy {
 public:
  explicit FeedbackAdjustmentStrategy(double rho) : rho_(rho) {}
  double feedback_weight(int sign) const override;

 private:
  double rho_;
};

class DiversityRerankStrategy : public Strategy {
 public:
  DiversityRerankStrategy(double theta, int candidate_count) : theta_(theta), candidate_count_(candidate_count) {}
  SampledSlate select_slate(const Vector& probabilities, const Vector& user, const ItemCatalog& catalog, int h,
                            Rng& rng) const override;

 private:
  double theta_;
  int candidate_count_;
};

class SocialReweightingStrategy : public Strategy {
 public:
  SocialReweightingStrategy(double omega, bool strict) : omega_(omega), strict_(strict) {}
  void begin_step(const Matrix& users, const SocialGraph& graph, const ModelParams& params) override;
  Vector social_representation(const Matrix& users, const SocialGraph& graph, int user,
                               const ModelParams& params) const override;
  bool uses_social_graph() const override { return true; }

 private:
  double omega_;
  bool strict_;
  Vector dispersions_;
};

/// Null for StrategyKind::None.
std::unique_ptr<Strategy> make_strategy(const MitigationConfig& config);

}  // namespace echosim
