#include "echosim/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/IterativeSolvers>
#include <unsupported/Eigen/KroneckerProduct>

#include "echosim/dynamics.hpp"
#include "echosim/errors.hpp"
#include "echosim/rng.hpp"

namespace echosim {
namespace detail {
class KroneckerOperator;
}
}  // namespace echosim

namespace Eigen::internal {
template <>
struct traits<echosim::detail::KroneckerOperator> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace echosim::detail {

// vec U -> vec(U - Y U - Z U S^T), never materialized.
class KroneckerOperator : public Eigen::EigenBase<KroneckerOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  explicit KroneckerOperator(const OperatorSet& ops) : ops_(&ops) {}

  Eigen::Index rows() const { return ops_->X.size(); }
  Eigen::Index cols() const { return ops_->X.size(); }

  template <typename Rhs>
  Eigen::Product<KroneckerOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<KroneckerOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Vector apply(const Vector& x) const {
    const auto c = ops_->Y.rows();
    const auto n = ops_->X.cols();
    Eigen::Map<const Matrix> u(x.data(), c, n);
    Matrix out = u - ops_->Y * u - (ops_->Z * u) * ops_->S_tilde.transpose();
    return Eigen::Map<const Vector>(out.data(), out.size());
  }

 private:
  const OperatorSet* ops_;
};

}  // namespace echosim::detail

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<echosim::detail::KroneckerOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<echosim::detail::KroneckerOperator, Rhs,
                                generic_product_impl<echosim::detail::KroneckerOperator, Rhs>> {
  using Scalar = typename Product<echosim::detail::KroneckerOperator, Rhs>::Scalar;

  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const echosim::detail::KroneckerOperator& lhs, const Rhs& rhs,
                            const Scalar& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};
}  // namespace Eigen::internal

namespace echosim {

namespace {

void check_users(const Matrix& users, const ItemCatalog& catalog, const SocialGraph& graph,
                 const ModelParams& params) {
  if (users.rows() != catalog.category_count()) fail(ErrorCode::InvalidRequest, "user and item dimensions differ");
  if (params.gamma < 1.0 && graph.user_count() != users.cols()) {
    fail(ErrorCode::InvalidRequest, "social graph size does not match user count");
  }
  if (catalog.item_count() == 0) fail(ErrorCode::InvalidRequest, "empty catalog");
}

double inf_norm(const Matrix& m) { return m.rows() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

Matrix linearized_expected_update(const Matrix& users, const ItemCatalog& catalog, const SocialGraph& graph,
                                  const ModelParams& params) {
  check_users(users, catalog, graph, params);
  const Matrix& v = catalog.vectors();
  const auto m = v.cols();
  const double a = params.alpha;
  const double b = params.beta;
  const double e = params.epsilon;
  Matrix out(users.rows(), users.cols());
  for (Eigen::Index i = 0; i < users.cols(); ++i) {
    const Vector u = users.col(i);
    const Vector s = social_representation(users, graph, static_cast<int>(i), params.gamma);
    double mean_score = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) mean_score += v.col(k).dot(s);
    mean_score /= static_cast<double>(m);
    Vector delta = Vector::Zero(users.rows());
    for (Eigen::Index j = 0; j < m; ++j) {
      const double coef = a * e * (v.col(j).dot(s) - mean_score) + b * v.col(j).dot(u) + e;
      delta += coef * v.col(j);
    }
    out.col(i) = u + (params.eta / static_cast<double>(m)) * delta;
  }
  return out;
}

Matrix expected_update(const Matrix& users, const ItemCatalog& catalog, const SocialGraph& graph,
                       const ModelParams& params) {
  check_users(users, catalog, graph, params);
  const Matrix& v = catalog.vectors();
  Matrix out(users.rows(), users.cols());
  for (Eigen::Index i = 0; i < users.cols(); ++i) {
    const Vector u = users.col(i);
    const Vector s = social_representation(users, graph, static_cast<int>(i), params.gamma);
    const Vector p = recommendation_distribution(s, catalog, params.alpha);
    Vector delta = Vector::Zero(users.rows());
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      const auto f = feedback_probabilities(u, v.col(j), params.beta, params.epsilon);
      delta += p(j) * (f.positive - f.negative) * v.col(j);
    }
    out.col(i) = u + params.eta * delta;
  }
  return out;
}

OperatorSet build_operators(const ItemCatalog& catalog, const SocialGraph& graph, const ModelParams& params) {
  if (catalog.item_count() == 0) fail(ErrorCode::InvalidRequest, "empty catalog");
  const Matrix& v = catalog.vectors();
  const auto c = v.rows();
  const auto n = graph.user_count();
  const auto m = static_cast<double>(v.cols());
  const double aeg = params.alpha * params.epsilon * params.gamma;
  const double ae_social = params.alpha * params.epsilon * (1.0 - params.gamma);
  const double eta = params.eta;

  // V V^T assembled from one triangle so it is exactly symmetric.
  Matrix gram = Matrix::Zero(c, c);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(v);
  gram = gram.selfadjointView<Eigen::Lower>();
  const Vector w = v.rowwise().sum();  // V 1_m
  const Matrix ww = w * w.transpose();  // V 1_{m x m} V^T

  OperatorSet ops;
  ops.params_used = params;
  ops.X = (eta * params.epsilon / m) * w * Eigen::RowVectorXd::Ones(n);
  ops.Y = Matrix::Identity(c, c) + (eta * (aeg + params.beta) / m) * gram - (eta * aeg / (m * m)) * ww;
  ops.Z = (eta * ae_social / m) * (gram - ww / m);
  ops.S_tilde = graph.influence_matrix();
  return ops;
}

Matrix matrix_step(const Matrix& users, const OperatorSet& ops) {
  if (users.rows() != ops.Y.rows() || users.cols() != ops.X.cols() || ops.S_tilde.rows() != users.cols()) {
    fail(ErrorCode::InvalidRequest, "matrix_step dimension mismatch");
  }
  Matrix out = ops.X + ops.Y * users;
  if (!ops.Z.isZero(0.0)) out += (ops.Z * users) * ops.S_tilde.transpose();
  return out;
}

Matrix iterate(const Matrix& users, const OperatorSet& ops, std::size_t steps) {
  Matrix u = users;
  for (std::size_t t = 0; t < steps; ++t) u = matrix_step(u, ops);
  return u;
}

ConvergenceReport convergence_margin(const ModelParams& params) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  ConvergenceReport r;
  const double aeg = params.alpha * params.epsilon * params.gamma;
  r.degenerate = !(aeg > 0.0);
  r.margin = r.degenerate
                 ? kNan
                 : params.eta * (params.beta / 2.0 + aeg / 2.0 + params.beta * params.beta / (8.0 * aeg));
  r.norm_bound = kNan;
  r.spectral_radius = kNan;
  r.satisfied = !r.degenerate && r.margin < 1.0;
  return r;
}

ConvergenceReport convergence_margin(const OperatorSet& ops, std::size_t dense_limit) {
  ConvergenceReport r = convergence_margin(ops.params_used);
  r.norm_bound = infinity_norm_bound(ops);
  r.satisfied = (!r.degenerate && r.margin < 1.0) || r.norm_bound < 1.0;
  if (static_cast<std::size_t>(ops.X.size()) <= dense_limit) r.spectral_radius = iteration_spectral_radius(ops, dense_limit);
  return r;
}

double infinity_norm_bound(const OperatorSet& ops) { return inf_norm(ops.Y) + inf_norm(ops.Z); }

namespace {

Matrix dense_iteration_matrix(const OperatorSet& ops) {
  const auto c = ops.Y.rows();
  const auto n = ops.X.cols();
  const Matrix s = Matrix(ops.S_tilde);
  Matrix k = Matrix::Zero(n * c, n * c);
  for (Eigen::Index i = 0; i < n; ++i) {
    k.block(i * c, i * c, c, c) += ops.Y;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (s(i, j) != 0.0) k.block(i * c, j * c, c, c) += s(i, j) * ops.Z;
    }
  }
  return k;
}

}  // namespace

double iteration_spectral_radius(const OperatorSet& ops, std::size_t dense_limit) {
  const auto dim = static_cast<std::size_t>(ops.X.size());
  if (dim == 0) return 0.0;
  if (dim <= dense_limit) {
    Eigen::EigenSolver<Matrix> es(dense_iteration_matrix(ops), false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  // Arnoldi on the matrix-free map. Ritz values capture complex dominant
  // pairs that plain power iteration cannot.
  const auto apply = [&](const Vector& x) {
    const Eigen::Map<const Matrix> u(x.data(), ops.Y.rows(), ops.X.cols());
    Matrix next = ops.Y * u + (ops.Z * u) * ops.S_tilde.transpose();
    return Vector(Eigen::Map<const Vector>(next.data(), next.size()));
  };
  Rng rng(0x51ec7a1ULL);
  Vector q(static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < q.size(); ++k) q(k) = rng.normal();
  q.normalize();
  const Eigen::Index krylov = std::min<Eigen::Index>(static_cast<Eigen::Index>(dim), 120);
  Matrix basis = Matrix::Zero(q.size(), krylov + 1);
  Matrix hess = Matrix::Zero(krylov + 1, krylov);
  basis.col(0) = q;
  Eigen::Index size = krylov;
  for (Eigen::Index j = 0; j < krylov; ++j) {
    Vector w = apply(basis.col(j));
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        const double h = basis.col(i).dot(w);
        hess(i, j) += h;
        w -= h * basis.col(i);
      }
    }
    const double norm = w.norm();
    hess(j + 1, j) = norm;
    if (norm <= 1e-13 * hess.col(j).norm()) {
      size = j + 1;
      break;
    }
    basis.col(j + 1) = w / norm;
  }
  Eigen::EigenSolver<Matrix> es(hess.topLeftCorner(size, size), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

FixedPointResult fixed_point(const OperatorSet& ops, const FixedPointOptions& options) {
  const auto c = ops.Y.rows();
  const auto n = ops.X.cols();
  const auto dim = static_cast<std::size_t>(c * n);
  if (ops.Y.cols() != c || ops.Z.rows() != c || ops.Z.cols() != c || ops.S_tilde.rows() != n ||
      ops.S_tilde.cols() != n) {
    fail(ErrorCode::InvalidRequest, "operator dimensions disagree");
  }
  FixedPointResult out;
  const Eigen::Map<const Vector> rhs(ops.X.data(), ops.X.size());
  Vector x;
  if (dim <= options.dense_limit) {
    const Matrix a = Matrix::Identity(c * n, c * n) - dense_iteration_matrix(ops);
    Eigen::PartialPivLU<Matrix> lu(a);
    const double rcond = lu.rcond();
    out.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(out.condition_estimate <= options.condition_limit)) {
      throw SingularSystemError("fixed-point system is ill-conditioned", out.condition_estimate);
    }
    x = lu.solve(rhs);
    out.dense = true;
  } else {
    detail::KroneckerOperator op(ops);
    Eigen::GMRES<detail::KroneckerOperator, Eigen::IdentityPreconditioner> gmres;
    gmres.set_restart(options.restart);
    gmres.setMaxIterations(options.max_iterations);
    gmres.setTolerance(options.tolerance);
    gmres.compute(op);
    x = gmres.solve(rhs);
    out.dense = false;
    out.iterations = static_cast<int>(gmres.iterations());
    out.condition_estimate = std::numeric_limits<double>::quiet_NaN();
    if (gmres.info() != Eigen::Success || !x.allFinite()) {
      throw SingularSystemError("GMRES did not converge after " + std::to_string(gmres.iterations()) + " iterations",
                                out.condition_estimate);
    }
  }
  out.users = Eigen::Map<const Matrix>(x.data(), c, n);
  out.residual = inf_norm(matrix_step(out.users, ops) - out.users);
  return out;
}

double vectorization_identity_error(const Matrix& a, const Matrix& u, const Matrix& b) {
  const Matrix lhs = a * u * b.transpose();
  const Matrix k = Eigen::kroneckerProduct(b, a);
  const Vector rhs = k * Eigen::Map<const Vector>(u.data(), u.size());
  return (Eigen::Map<const Vector>(lhs.data(), lhs.size()) - rhs).cwiseAbs().maxCoeff();
}

Vector scaling_step(const Vector& u, const Vector& mass, double lambda) {
  return (u.array() * (1.0 + lambda * mass.array())).matrix();
}

bool homogenization_condition(const Vector& ui, const Vector& uj, int k, const Vector& mass, double lambda) {
  if (!(lambda > 0.0)) fail(ErrorCode::InvalidRequest, "lambda must be positive");
  if (k < 0 || k >= mass.size()) fail(ErrorCode::IndexOutOfRange, "category index out of range");
  auto weight = [&](Eigen::Index o) { return 2.0 * mass(o) + lambda * mass(o) * mass(o); };
  double rest = 0.0;
  for (Eigen::Index o = 0; o < mass.size(); ++o) {
    if (o != k) rest += weight(o);
  }
  if (rest == 0.0) fail(ErrorCode::DegenerateCatalog, "all item mass sits in the dominant category");
  const double r = weight(k) / rest;
  return ui(k) * uj(k) >= ui.norm() * uj.norm() / std::sqrt(1.0 + r * r);
}

std::size_t HomogenizationReport::violations() const {
  return static_cast<std::size_t>(
      std::count_if(checked.begin(), checked.end(), [](const PairMonotonicity& p) { return !p.monotone; }));
}

HomogenizationReport steady_homogenization_check(const Matrix& users, const ItemCatalog& catalog,
                                                 const ModelParams& params, std::size_t steps,
                                                 std::span<const std::pair<int, int>> pairs) {
  if (params.epsilon != 0.0 || params.gamma != 1.0) {
    fail(ErrorCode::InvalidRequest, "homogenization check needs epsilon = 0 and gamma = 1");
  }
  if (!catalog.all_single_category()) fail(ErrorCode::InvalidRequest, "catalog must be single-category");
  if (users.rows() != catalog.category_count()) fail(ErrorCode::InvalidRequest, "user and item dimensions differ");

  HomogenizationReport report;
  report.steps = steps;
  if (steps == 0) return report;

  const Vector& mass = catalog.mass();
  Eigen::Index k = 0;
  mass.maxCoeff(&k);
  report.dominant_category = static_cast<int>(k);
  report.lambda = params.eta * params.beta / static_cast<double>(catalog.item_count());

  std::vector<std::pair<int, int>> all;
  if (pairs.empty()) {
    for (int i = 0; i < users.cols(); ++i) {
      for (int j = i + 1; j < users.cols(); ++j) all.emplace_back(i, j);
    }
    pairs = all;
  }
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= users.cols() || j >= users.cols()) fail(ErrorCode::IndexOutOfRange, "pair index");
    if (homogenization_condition(users.col(i), users.col(j), static_cast<int>(k), mass, report.lambda)) {
      report.checked.push_back({i, j});
    } else {
      report.excluded.emplace_back(i, j);
    }
  }

  const Vector factor = (1.0 + report.lambda * mass.array()).matrix();
  Matrix u = users;
  std::vector<double> prev(report.checked.size());
  for (std::size_t p = 0; p < report.checked.size(); ++p) {
    prev[p] = u.col(report.checked[p].i).dot(u.col(report.checked[p].j));
  }
  for (std::size_t t = 1; t <= steps; ++t) {
    u = factor.asDiagonal() * u;
    for (std::size_t p = 0; p < report.checked.size(); ++p) {
      auto& pair = report.checked[p];
      const double now = u.col(pair.i).dot(u.col(pair.j));
      const double tol = 1e-12 * std::abs(prev[p]);
      if (now < prev[p] - tol) {
        const double drop = (prev[p] - now) / std::max(std::abs(prev[p]), std::numeric_limits<double>::min());
        if (pair.monotone) pair.first_violation = t;
        pair.monotone = false;
        pair.worst_drop = std::max(pair.worst_drop, drop);
      }
      prev[p] = now;
    }
  }
  return report;
}

double expected_category_entropy(const Vector& u, const Vector& mass, double alpha) {
  if (u.size() != mass.size()) fail(ErrorCode::InvalidRequest, "vector and mass lengths differ");
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index o = 0; o < u.size(); ++o) {
    if (mass(o) > 0.0) top = std::max(top, std::log(mass(o)) + alpha * u(o));
  }
  if (!std::isfinite(top)) fail(ErrorCode::DegenerateCatalog, "no category carries mass");
  double z = 0.0;
  for (Eigen::Index o = 0; o < u.size(); ++o) {
    if (mass(o) > 0.0) z += std::exp(std::log(mass(o)) + alpha * u(o) - top);
  }
  const double log_z = std::log(z) + top;
  double h = 0.0;
  for (Eigen::Index o = 0; o < u.size(); ++o) {
    if (mass(o) <= 0.0) continue;
    const double log_p = std::log(mass(o)) + alpha * u(o) - log_z;
    const double p = std::exp(log_p);
    if (p > 0.0) h -= p * log_p;
  }
  return std::max(h, 0.0);
}

std::vector<double> expected_entropy_series(const Vector& u0, const Vector& mass, double alpha, double lambda,
                                            std::size_t steps) {
  std::vector<double> out;
  out.reserve(steps);
  Vector u = u0;
  for (std::size_t t = 0; t < steps; ++t) {
    out.push_back(expected_category_entropy(u, mass, alpha));
    u = scaling_step(u, mass, lambda);
  }
  return out;
}

}  // namespace echosim
