#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "echosim/catalog.hpp"

namespace echosim {

/// Entropy of the category shares in one slate. A k-category item adds 1/k to
/// each of its categories, so shares sum to the slate length.
double category_entropy(std::span<const int> slate, const ItemCatalog& catalog);

/// Mean slate entropy over users.
double rce(const std::vector<std::vector<int>>& slates, const ItemCatalog& catalog);

struct RaResult {
  double value = 0.0;
  /// Users skipped because their vector is zero.
  std::size_t excluded_users = 0;
};

/// Fraction of recommended (user, item) pairs whose normalized score exceeds
/// `threshold`.
RaResult ra(const Matrix& users, const std::vector<std::vector<int>>& slates, const ItemCatalog& catalog,
            double threshold = 0.7);

/// Mean distance between normalized endpoints over the directed edge set.
double nd(const Matrix& users, const SocialGraph& graph);

enum class PdvMode { Exact, Sampled };

struct PdvOptions {
  std::size_t exact_limit = 5000;
  std::size_t sample_pairs = 2'000'000;
  std::uint64_t seed = 0x9d2c5680u;
  /// Overrides the size-based choice.
  std::optional<PdvMode> force;
};

struct PdvResult {
  double value = 0.0;
  PdvMode mode = PdvMode::Exact;
  std::size_t pairs = 0;
  std::uint64_t seed = 0;
};

/// Population variance of pairwise normalized distances.
PdvResult pdv(const Matrix& users, const PdvOptions& options = {});

/// Mean similarity to each user's k most similar other users.
double ts_at_k(const Matrix& users, int k, unsigned threads = 1);

/// sum_o (u_o - mean(u))^2 on the normalized vector.
double dispersion(const Vector& u);
Vector dispersions(const Matrix& users);

struct MetricOptions {
  int ts_k = 50;
  double ra_threshold = 0.7;
  PdvOptions pdv;
  unsigned threads = 1;
};

struct MetricsRecord {
  std::size_t t = 0;
  double rce = 0.0;
  double ra = 0.0;
  /// NaN when the graph has no edges.
  double nd = 0.0;
  double pdv = 0.0;
  double ts_at_k = 0.0;
  int k_used = 0;
  PdvMode pdv_mode = PdvMode::Exact;
  std::size_t pdv_pairs = 0;
  std::uint64_t pdv_seed = 0;
  std::size_t ra_excluded = 0;
};

/// All five metrics for U(t) and the slates served at step t. k is capped at
/// n - 1.
MetricsRecord evaluate_metrics(std::size_t t, const Matrix& users, const std::vector<std::vector<int>>& slates,
                               const ItemCatalog& catalog, const SocialGraph& graph, const MetricOptions& options);

}  // namespace echosim
