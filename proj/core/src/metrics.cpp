#include "echosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "echosim/errors.hpp"
#include "echosim/parallel.hpp"
#include "echosim/rng.hpp"

namespace echosim {

namespace {

// Plain scalar loops here rather than Eigen reductions: vectorized reductions
// change summation order, and the exact-mode results are meant to match a
// textbook double loop bit for bit.
Matrix unit_columns(const Matrix& users) {
  Matrix out = users;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    double sq = 0.0;
    for (Eigen::Index o = 0; o < out.rows(); ++o) sq += out(o, i) * out(o, i);
    if (sq > 0.0) {
      const double norm = std::sqrt(sq);
      for (Eigen::Index o = 0; o < out.rows(); ++o) out(o, i) /= norm;
    }
  }
  return out;
}

double distance(const Matrix& u, Eigen::Index a, Eigen::Index b) {
  double sq = 0.0;
  for (Eigen::Index o = 0; o < u.rows(); ++o) {
    const double diff = u(o, a) - u(o, b);
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

double dot(const Matrix& u, Eigen::Index a, Eigen::Index b) {
  double s = 0.0;
  for (Eigen::Index o = 0; o < u.rows(); ++o) s += u(o, a) * u(o, b);
  return s;
}

void check_item(int j, const ItemCatalog& catalog) {
  if (j < 0 || j >= catalog.item_count()) {
    fail(ErrorCode::IndexOutOfRange, "item " + std::to_string(j) + " not in catalog");
  }
}

}  // namespace

double category_entropy(std::span<const int> slate, const ItemCatalog& catalog) {
  if (slate.empty()) fail(ErrorCode::InvalidSlate, "empty slate");
  std::vector<double> shares(static_cast<std::size_t>(catalog.category_count()), 0.0);
  for (int j : slate) {
    check_item(j, catalog);
    const auto& cats = catalog.categories(j);
    const double w = 1.0 / static_cast<double>(cats.size());
    for (int o : cats) shares[static_cast<std::size_t>(o)] += w;
  }
  const auto total = static_cast<double>(slate.size());
  double h = 0.0;
  for (double s : shares) {
    if (s > 0.0) {
      const double q = s / total;
      h -= q * std::log(q);
    }
  }
  return std::max(h, 0.0);
}

double rce(const std::vector<std::vector<int>>& slates, const ItemCatalog& catalog) {
  if (slates.empty()) fail(ErrorCode::InvalidRequest, "no slates");
  double sum = 0.0;
  for (const auto& s : slates) sum += category_entropy(s, catalog);
  return sum / static_cast<double>(slates.size());
}

RaResult ra(const Matrix& users, const std::vector<std::vector<int>>& slates, const ItemCatalog& catalog,
            double threshold) {
  if (slates.size() != static_cast<std::size_t>(users.cols())) {
    fail(ErrorCode::InvalidRequest, "one slate per user is required");
  }
  const Matrix u = unit_columns(users);
  RaResult out;
  std::size_t hits = 0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < u.cols(); ++i) {
    if (u.col(i).isZero(0.0)) {
      ++out.excluded_users;
      continue;
    }
    for (int j : slates[static_cast<std::size_t>(i)]) {
      check_item(j, catalog);
      double score = 0.0;
      for (Eigen::Index o = 0; o < u.rows(); ++o) score += u(o, i) * catalog.vectors()(o, j);
      hits += score > threshold ? 1 : 0;
      ++pairs;
    }
  }
  out.value = pairs == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(pairs);
  return out;
}

double nd(const Matrix& users, const SocialGraph& graph) {
  if (graph.edges().empty()) fail(ErrorCode::NoEdges, "graph has no edges");
  if (graph.user_count() != users.cols()) fail(ErrorCode::InvalidRequest, "graph size does not match users");
  const Matrix u = unit_columns(users);
  double sum = 0.0;
  for (const Edge& e : graph.edges()) sum += distance(u, e.from, e.to);
  return sum / static_cast<double>(graph.edges().size());
}

PdvResult pdv(const Matrix& users, const PdvOptions& options) {
  const auto n = static_cast<std::size_t>(users.cols());
  if (n < 2) fail(ErrorCode::InvalidRequest, "pdv needs at least two users");
  const Matrix u = unit_columns(users);
  PdvResult out;
  out.mode = options.force.value_or(n <= options.exact_limit ? PdvMode::Exact : PdvMode::Sampled);

  std::vector<double> d;
  if (out.mode == PdvMode::Exact) {
    d.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        d.push_back(distance(u, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      }
    }
  } else {
    if (options.sample_pairs == 0) fail(ErrorCode::InvalidRequest, "sampled pdv needs a positive pair count");
    out.seed = options.seed;
    Rng rng = Rng::stream(options.seed, n, 0, Stream::PairSample);
    d.reserve(options.sample_pairs);
    for (std::size_t r = 0; r < options.sample_pairs; ++r) {
      const auto i = rng.below(n);
      auto j = rng.below(n - 1);
      if (j >= i) ++j;
      d.push_back(distance(u, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  out.pairs = d.size();
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  out.value = var / static_cast<double>(d.size());
  return out;
}

double ts_at_k(const Matrix& users, int k, unsigned threads) {
  const auto n = users.cols();
  if (k < 1) fail(ErrorCode::InvalidRequest, "k must be >= 1");
  if (k >= n) {
    fail(ErrorCode::InvalidRequest, "k = " + std::to_string(k) + " needs more than " + std::to_string(n) + " users");
  }
  const Matrix u = unit_columns(users);
  std::vector<double> per_user(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const auto i = static_cast<Eigen::Index>(idx);
    std::vector<double> sims;
    sims.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) sims.push_back(dot(u, i, j));
    }
    std::partial_sort(sims.begin(), sims.begin() + k, sims.end(), std::greater<>());
    double s = 0.0;
    for (int r = 0; r < k; ++r) s += sims[static_cast<std::size_t>(r)];
    per_user[idx] = s / static_cast<double>(k);
  });
  double total = 0.0;
  for (double x : per_user) total += x;
  return total / static_cast<double>(n);
}

double dispersion(const Vector& u) {
  const Matrix unit = unit_columns(u);
  const auto c = unit.rows();
  double mean = 0.0;
  for (Eigen::Index o = 0; o < c; ++o) mean += unit(o, 0);
  mean /= static_cast<double>(c);
  double s = 0.0;
  for (Eigen::Index o = 0; o < c; ++o) s += (unit(o, 0) - mean) * (unit(o, 0) - mean);
  return s;
}

Vector dispersions(const Matrix& users) {
  Vector out(users.cols());
  for (Eigen::Index i = 0; i < users.cols(); ++i) out(i) = dispersion(users.col(i));
  return out;
}

MetricsRecord evaluate_metrics(std::size_t t, const Matrix& users, const std::vector<std::vector<int>>& slates,
                               const ItemCatalog& catalog, const SocialGraph& graph, const MetricOptions& options) {
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  MetricsRecord r;
  r.t = t;
  r.rce = rce(slates, catalog);
  const RaResult a = ra(users, slates, catalog, options.ra_threshold);
  r.ra = a.value;
  r.ra_excluded = a.excluded_users;
  r.nd = graph.edges().empty() ? kNan : nd(users, graph);
  const auto n = static_cast<int>(users.cols());
  if (n >= 2) {
    const PdvResult p = pdv(users, options.pdv);
    r.pdv = p.value;
    r.pdv_mode = p.mode;
    r.pdv_pairs = p.pairs;
    r.pdv_seed = p.seed;
    r.k_used = std::min(options.ts_k, n - 1);
    r.ts_at_k = ts_at_k(users, r.k_used, options.threads);
  } else {
    r.pdv = kNan;
    r.ts_at_k = kNan;
  }
  return r;
}

}  // namespace echosim
