#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "echosim/catalog.hpp"

namespace echosim {

/// Operators of the linearized dynamics U(t+1) = X + Y U + Z U S^T.
struct OperatorSet {
  Matrix X;  // c x n
  Matrix Y;  // c x c
  Matrix Z;  // c x c
  SparseMatrix S_tilde;  // n x n, row-stochastic
  ModelParams params_used;
};

/// First-order expected update, computed user by user:
///   u_i + (eta/m) sum_j (a e (v_j.s_i - mean_k v_k.s_i) + b v_j.u_i + e) v_j
/// The alpha*beta cross terms of the full product are second order and are
/// dropped, which is exactly what the operator form encodes.
Matrix linearized_expected_update(const Matrix& users, const ItemCatalog& catalog, const SocialGraph& graph,
                                  const ModelParams& params);

/// Exact one-step expectation u_i + eta sum_j p_j g_j v_j with the softmax
/// p_j and g_j = p_pos - p_neg, no expansion. Equals the stochastic mean for
/// h = 1; for h > 1 it uses the h p_j inclusion approximation.
Matrix expected_update(const Matrix& users, const ItemCatalog& catalog, const SocialGraph& graph,
                       const ModelParams& params);

/// Builds X, Y, Z and S from the catalog and graph; n is graph.user_count().
OperatorSet build_operators(const ItemCatalog& catalog, const SocialGraph& graph, const ModelParams& params);

Matrix matrix_step(const Matrix& users, const OperatorSet& ops);

/// Applies matrix_step `steps` times.
Matrix iterate(const Matrix& users, const OperatorSet& ops, std::size_t steps);

struct ConvergenceReport {
  /// eta (beta/2 + aeg/2 + beta^2/(8 aeg)); NaN when degenerate.
  double margin = 0.0;
  /// ||Y||_inf + ||Z||_inf; NaN when only parameters were given.
  double norm_bound = 0.0;
  bool satisfied = false;
  /// alpha*epsilon*gamma <= 0, where the margin formula does not apply.
  bool degenerate = false;
  /// Spectral radius of U -> Y U + Z U S^T; NaN when not computed.
  double spectral_radius = 0.0;
};

ConvergenceReport convergence_margin(const ModelParams& params);
/// Adds the norm bound and, for nc <= dense_limit, the exact spectral radius.
ConvergenceReport convergence_margin(const OperatorSet& ops, std::size_t dense_limit = 2000);

double infinity_norm_bound(const OperatorSet& ops);

/// Spectral radius of the linear part of matrix_step. Dense eigenvalues up to
/// dense_limit unknowns, Arnoldi Ritz values beyond.
double iteration_spectral_radius(const OperatorSet& ops, std::size_t dense_limit = 2000);

struct FixedPointOptions {
  /// Largest nc solved with a dense LU; larger systems use matrix-free GMRES.
  std::size_t dense_limit = 2000;
  double condition_limit = 1e12;
  double tolerance = 1e-14;
  int max_iterations = 10000;
  int restart = 60;
};

struct FixedPointResult {
  Matrix users;  // U*, c x n
  /// 1 / rcond from the LU; NaN for the iterative path.
  double condition_estimate = 0.0;
  bool dense = true;
  int iterations = 0;
  /// ||matrix_step(U*) - U*||_inf.
  double residual = 0.0;
};

/// Solves (I - (I (x) Y + S (x) Z)) vec U* = vec X. Throws SingularSystemError
/// when the condition estimate exceeds the limit or GMRES fails.
FixedPointResult fixed_point(const OperatorSet& ops, const FixedPointOptions& options = {});

/// || vec(A U B^T) - (B (x) A) vec U ||_inf, using an explicit Kronecker
/// product. A self-test for the vectorized solver layout.
double vectorization_identity_error(const Matrix& a, const Matrix& u, const Matrix& b);

/// One step of the epsilon = 0, gamma = 1 map: u_o <- (1 + lambda n_o) u_o.
Vector scaling_step(const Vector& u, const Vector& mass, double lambda);

/// u_i^k u_j^k >= |u_i| |u_j| / sqrt(1 + r^2),
/// r = (2 n_k + lambda n_k^2) / sum_{l != k} (2 n_l + lambda n_l^2).
bool homogenization_condition(const Vector& ui, const Vector& uj, int k, const Vector& mass, double lambda);

struct PairMonotonicity {
  int i = 0;
  int j = 0;
  bool monotone = true;
  /// First step at which u_i . u_j dropped; meaningful when !monotone.
  std::size_t first_violation = 0;
  /// Largest relative drop seen (0 when monotone).
  double worst_drop = 0.0;
};

struct HomogenizationReport {
  std::size_t steps = 0;
  int dominant_category = -1;
  double lambda = 0.0;
  std::vector<PairMonotonicity> checked;
  /// Pairs failing the condition at t = 0; not asserted.
  std::vector<std::pair<int, int>> excluded;

  std::size_t violations() const;
};

/// Runs T scaling steps and tracks u_i . u_j for every pair that satisfies
/// the condition at k = argmax n_o. `pairs` empty means all i < j.
/// Requires epsilon = 0, gamma = 1 and a single-category catalog.
HomogenizationReport steady_homogenization_check(const Matrix& users, const ItemCatalog& catalog,
                                                 const ModelParams& params, std::size_t steps,
                                                 std::span<const std::pair<int, int>> pairs = {});

/// Entropy of p_o proportional to n_o exp(alpha u_o) along the scaling map,
/// for t = 0 .. T-1.
std::vector<double> expected_entropy_series(const Vector& u0, const Vector& mass, double alpha, double lambda,
                                            std::size_t steps);

/// Entropy of the category distribution above for a single state.
double expected_category_entropy(const Vector& u, const Vector& mass, double alpha);

}  // namespace echosim
