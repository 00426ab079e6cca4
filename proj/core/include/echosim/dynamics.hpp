#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "echosim/catalog.hpp"
#include "echosim/metrics.hpp"
#include "echosim/rng.hpp"

namespace echosim {

struct RecommendationSlate {
  int user = 0;
  std::vector<int> items;
  /// Distribution the slate was drawn from; only filled when requested.
  std::vector<double> probabilities_used;
  /// Fewer than h items had positive probability and the rest were padded.
  bool padded = false;
};

struct FeedbackRecord {
  int user = 0;
  int item = 0;
  int sign = 1;
  double p_pos_used = 0.5;
};

struct StepLog {
  std::size_t t = 0;
  std::vector<RecommendationSlate> slates;
  std::vector<std::vector<FeedbackRecord>> feedback;

  std::vector<std::vector<int>> slate_items() const;
  std::size_t padded_count() const;
};

/// gamma * u_i + (1 - gamma) * mean of neighbors. Never touches the graph
/// when gamma == 1.
Vector social_representation(const Matrix& users, const SocialGraph& graph, int i, double gamma);

/// Softmax over alpha * v_j^T s with max subtraction.
Vector recommendation_distribution(const Vector& s, const ItemCatalog& catalog, double alpha);

struct SampledSlate {
  std::vector<int> items;
  bool padded = false;
};

/// h distinct indices drawn without replacement, in draw order. Uses
/// exponential race keys E_j / p_j, which is distributionally identical to
/// sequential draw-and-renormalize. If fewer than h entries are positive the
/// remainder is filled uniformly from the zero-probability entries.
SampledSlate sample_without_replacement(const Vector& p, int h, Rng& rng);

struct FeedbackProbabilities {
  double positive = 0.5;
  double negative = 0.5;
  /// Values before clamping to [0, 1]; they always sum to one.
  double raw_positive = 0.5;
  double raw_negative = 0.5;
};

/// Confirmation/leniency feedback law for user-item score d = u^T v. d is
/// clamped to (-1, 1) first since U(t) is unnormalized.
FeedbackProbabilities feedback_probabilities(double score, double beta, double epsilon);
FeedbackProbabilities feedback_probabilities(const Vector& u, const Vector& v, double beta, double epsilon);

/// +1 with probability p_pos, -1 otherwise.
int draw_feedback(Rng& rng, double p_pos);

/// u + (eta / h) * sum_j weights_j * v_{items_j}.
Vector update_user(const Vector& u, std::span<const int> items, std::span<const double> weights, double eta,
                   int h, const ItemCatalog& catalog);

/// Per-step hooks for mitigation strategies. The default implementation is the
/// unmitigated model. begin_step runs once against U(t) before any user is
/// processed; the const hooks are then called concurrently.
class Strategy {
 public:
  virtual ~Strategy() = default;

  virtual void begin_step(const Matrix& users, const SocialGraph& graph, const ModelParams& params);
  virtual double temperature(int user, const ModelParams& params) const;
  virtual Vector social_representation(const Matrix& users, const SocialGraph& graph, int user,
                                       const ModelParams& params) const;
  virtual SampledSlate select_slate(const Vector& probabilities, const Vector& user, const ItemCatalog& catalog,
                                    int h, Rng& rng) const;
  virtual double feedback_weight(int sign) const;
  /// Whether the hooks need a graph even when gamma == 1.
  virtual bool uses_social_graph() const { return false; }
};

struct StepOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool record_distributions = false;
};

struct StepResult {
  UserStates states;
  StepLog log;
};

/// One synchronous round: every user is served against U(t) and U(t+1) is
/// assembled afterwards. strategy may be null.
StepResult simulate_step(const UserStates& states, const ItemCatalog& catalog, const SocialGraph& graph,
                         const ModelParams& params, const StepOptions& options, Strategy* strategy = nullptr);

struct MetricSchedule {
  /// Evaluate every `every` steps; 0 disables metrics.
  std::size_t every = 1;
  MetricOptions metrics;
};

struct RunOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  MetricSchedule schedule;
  /// Keep U(t) every `snapshot_every` steps (0 = never).
  std::size_t snapshot_every = 0;
  bool keep_logs = false;
};

struct Trajectory {
  /// Record t is computed from U(t) and the slates served at step t.
  std::vector<MetricsRecord> records;
  std::vector<UserStates> snapshots;
  std::vector<StepLog> logs;
  UserStates final_states;
  std::size_t padded_slates = 0;
};

Trajectory run(const UserStates& initial, const ItemCatalog& catalog, const SocialGraph& graph,
               const ModelParams& params, std::size_t steps, const RunOptions& options,
               Strategy* strategy = nullptr);

}  // namespace echosim
