#include "echosim/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "echosim/errors.hpp"
#include "echosim/rng.hpp"

namespace echosim {

namespace {

std::vector<int> unique_sorted(std::span<const int> categories) {
  std::vector<int> out(categories.begin(), categories.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Vector build_item_vector(std::span<const int> categories, int category_count) {
  if (categories.empty()) {
    fail(ErrorCode::InvalidItem, "item has no categories");
  }
  const auto unique = unique_sorted(categories);
  Vector v = Vector::Zero(category_count);
  const double weight = std::sqrt(1.0 / static_cast<double>(unique.size()));
  for (int l : unique) {
    if (l < 0 || l >= category_count) {
      fail(ErrorCode::IndexOutOfRange,
           "category " + std::to_string(l) + " outside [0, " + std::to_string(category_count) + ")");
    }
    v(l) = weight;
  }
  return v;
}

ItemCatalog::ItemCatalog(std::vector<std::vector<int>> category_sets, int category_count) {
  if (category_count < 1) {
    fail(ErrorCode::InvalidRequest, "category count must be positive");
  }
  const auto m = static_cast<Eigen::Index>(category_sets.size());
  vectors_ = Matrix::Zero(category_count, m);
  category_sets_.reserve(category_sets.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    auto& set = category_sets[static_cast<std::size_t>(j)];
    vectors_.col(j) = build_item_vector(set, category_count);
    auto unique = unique_sorted(set);
    single_category_ = single_category_ && unique.size() == 1;
    category_sets_.push_back(std::move(unique));
  }
  mass_ = vectors_.rowwise().sum();
}

Vector category_mass(const ItemCatalog& catalog) { return catalog.vectors().rowwise().sum(); }

Matrix UserStates::normalized() const { return normalize_columns(users); }

Matrix normalize_columns(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    const double norm = out.col(i).norm();
    if (norm > 0.0) out.col(i) /= norm;
  }
  return out;
}

Vector init_user_from_history(std::span<const int> positives, std::span<const int> negatives,
                              const ItemCatalog& catalog) {
  if (positives.empty() && negatives.empty()) {
    fail(ErrorCode::DegenerateHistory, "user has no interactions");
  }
  Vector diff = Vector::Zero(catalog.category_count());
  auto accumulate = [&](std::span<const int> items, double sign) {
    for (int j : items) {
      if (j < 0 || j >= catalog.item_count()) {
        fail(ErrorCode::IndexOutOfRange, "item " + std::to_string(j) + " not in catalog");
      }
      diff += sign * catalog.item(j);
    }
  };
  accumulate(positives, 1.0);
  accumulate(negatives, -1.0);
  const double norm = diff.norm();
  if (norm < 1e-12) {
    fail(ErrorCode::DegenerateHistory, "positive and negative items cancel out");
  }
  return diff / norm;
}

Vector init_user_random(std::uint64_t seed, int category_count) {
  if (category_count < 1) {
    fail(ErrorCode::InvalidRequest, "category count must be positive");
  }
  Rng rng(seed);
  Vector u(category_count);
  double norm = 0.0;
  do {
    for (int o = 0; o < category_count; ++o) u(o) = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  return u / norm;
}

std::span<const int> SocialGraph::neighbors(int i) const {
  const auto idx = static_cast<std::size_t>(i);
  return {targets_.data() + offsets_[idx], offsets_[idx + 1] - offsets_[idx]};
}

std::size_t SocialGraph::isolated_count() const {
  std::size_t count = 0;
  for (int i = 0; i < user_count_; ++i) count += is_isolated(i) ? 1 : 0;
  return count;
}

SparseMatrix SocialGraph::influence_matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(targets_.size() + isolated_count());
  for (int i = 0; i < user_count_; ++i) {
    const auto nb = neighbors(i);
    if (nb.empty()) {
      triplets.emplace_back(i, i, 1.0);
      continue;
    }
    const double w = 1.0 / static_cast<double>(nb.size());
    for (int j : nb) triplets.emplace_back(i, j, w);
  }
  SparseMatrix s(user_count_, user_count_);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

Vector SocialGraph::neighbor_mean(const Matrix& users, int i) const {
  const auto nb = neighbors(i);
  if (nb.empty()) return users.col(i);
  Vector sum = Vector::Zero(users.rows());
  for (int j : nb) sum += users.col(j);
  return sum / static_cast<double>(nb.size());
}

SocialGraph build_social_graph(std::span<const Edge> edges, int user_count) {
  if (user_count < 0) {
    fail(ErrorCode::InvalidRequest, "negative user count");
  }
  SocialGraph g;
  g.user_count_ = user_count;
  g.edges_.assign(edges.begin(), edges.end());
  for (const Edge& e : g.edges_) {
    if (e.from < 0 || e.from >= user_count || e.to < 0 || e.to >= user_count) {
      fail(ErrorCode::IndexOutOfRange, "edge (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
                                           ") outside [0, " + std::to_string(user_count) + ")");
    }
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.offsets_.assign(static_cast<std::size_t>(user_count) + 1, 0);
  for (const Edge& e : g.edges_) ++g.offsets_[static_cast<std::size_t>(e.from) + 1];
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  g.targets_.reserve(g.edges_.size());
  for (const Edge& e : g.edges_) g.targets_.push_back(e.to);  // edges are sorted by source
  return g;
}

void ModelParams::validate(int item_count) const {
  auto finite = [](double x) { return std::isfinite(x); };
  if (!finite(alpha) || !finite(beta) || !finite(gamma) || !finite(epsilon) || !finite(eta)) {
    fail(ErrorCode::InvalidRequest, "model parameters must be finite");
  }
  if (alpha < 0.0) fail(ErrorCode::InvalidRequest, "alpha must be >= 0");
  if (beta < 0.0) fail(ErrorCode::InvalidRequest, "beta must be >= 0");
  if (gamma < 0.0 || gamma > 1.0) fail(ErrorCode::InvalidRequest, "gamma must lie in [0, 1]");
  if (epsilon < -1.0 || epsilon > 1.0) fail(ErrorCode::InvalidRequest, "epsilon must lie in [-1, 1]");
  // eta == 0 is accepted here as the frozen-dynamics limit; experiment configs require eta > 0.
  if (eta < 0.0) fail(ErrorCode::InvalidRequest, "eta must be >= 0");
  if (h < 1) fail(ErrorCode::InvalidRequest, "h must be >= 1");
  if (h > item_count) {
    fail(ErrorCode::InvalidRequest,
         "h = " + std::to_string(h) + " exceeds item count " + std::to_string(item_count));
  }
}

}  // namespace echosim
