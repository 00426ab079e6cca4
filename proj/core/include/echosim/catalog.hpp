#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace echosim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Item vector for an item tagged with `categories`: sqrt(1/k) on each of its
/// k categories, zero elsewhere. Duplicate indices count once.
Vector build_item_vector(std::span<const int> categories, int category_count);

/// The item side of the model: column j of vectors() is v_j.
class ItemCatalog {
 public:
  ItemCatalog() = default;
  ItemCatalog(std::vector<std::vector<int>> category_sets, int category_count);

  const Matrix& vectors() const noexcept { return vectors_; }
  auto item(int j) const { return vectors_.col(j); }
  const std::vector<int>& categories(int j) const { return category_sets_[static_cast<std::size_t>(j)]; }
  const std::vector<std::vector<int>>& category_sets() const noexcept { return category_sets_; }

  /// n_o = sum_j v_j^(o).
  const Vector& mass() const noexcept { return mass_; }

  int item_count() const noexcept { return static_cast<int>(vectors_.cols()); }
  int category_count() const noexcept { return static_cast<int>(vectors_.rows()); }
  bool all_single_category() const noexcept { return single_category_; }

 private:
  Matrix vectors_;
  std::vector<std::vector<int>> category_sets_;
  Vector mass_;
  bool single_category_ = true;
};

Vector category_mass(const ItemCatalog& catalog);

/// Evolving user matrix U(t) (c x n). Columns are left unnormalized by the
/// dynamics; metrics read the normalized view.
struct UserStates {
  Matrix users;
  std::size_t t = 0;

  int user_count() const noexcept { return static_cast<int>(users.cols()); }
  int category_count() const noexcept { return static_cast<int>(users.rows()); }
  Matrix normalized() const;
};

/// Column-wise l2 normalization. Zero columns stay zero.
Matrix normalize_columns(const Matrix& m);

/// Normalized difference of positive and negative item sums. Items may repeat;
/// repeats scale the difference and cancel out in the normalization.
Vector init_user_from_history(std::span<const int> positives, std::span<const int> negatives,
                              const ItemCatalog& catalog);

/// Standard-normal coordinates scaled to unit length.
Vector init_user_random(std::uint64_t seed, int category_count);

struct Edge {
  int from = 0;  // truster
  int to = 0;    // trustee
  auto operator<=>(const Edge&) const = default;
};

class SocialGraph {
 public:
  SocialGraph() = default;

  int user_count() const noexcept { return user_count_; }

  /// Deduplicated directed edges, sorted by (from, to).
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const int> neighbors(int i) const;
  bool is_isolated(int i) const { return neighbors(i).empty(); }
  std::size_t isolated_count() const;

  /// Row-stochastic diag(S 1)^-1 S, with a unit self-loop row for isolated users.
  SparseMatrix influence_matrix() const;

  /// Mean of the neighbors' columns of `users`; u_i itself when i is isolated.
  Vector neighbor_mean(const Matrix& users, int i) const;

 private:
  friend SocialGraph build_social_graph(std::span<const Edge> edges, int user_count);

  int user_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> targets_;
};

SocialGraph build_social_graph(std::span<const Edge> edges, int user_count);

struct ModelParams {
  double alpha = 5.0;    // softmax temperature
  double beta = 5.0;     // confirmation-bias exponent
  double gamma = 0.5;    // self weight in the social representation
  double epsilon = 0.0;  // leniency shift
  double eta = 0.1;      // update rate
  int h = 20;            // slate length

  /// Throws InvalidRequest on out-of-domain values or h > item_count.
  void validate(int item_count) const;
};

}  // namespace echosim
