#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "echosim/catalog.hpp"
#include "echosim/errors.hpp"
#include "echosim/rng.hpp"

namespace testing {

using echosim::ErrorCode;
using echosim::Matrix;
using echosim::Vector;

inline ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const echosim::Error& e) {
    return e.code();
  }
  FAIL("expected an echosim::Error");
  return ErrorCode::IoError;
}

#define CHECK_CODE(expr, expected) CHECK(::testing::code_of([&] { (void)(expr); }) == (expected))

inline double inf_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

inline Vector basis(int c, int k) {
  Vector v = Vector::Zero(c);
  v(k) = 1.0;
  return v;
}

inline Matrix random_unit_users(echosim::Rng& rng, int c, int n) {
  Matrix u(c, n);
  for (Eigen::Index k = 0; k < u.size(); ++k) u.data()[k] = rng.normal();
  return echosim::normalize_columns(u);
}

inline echosim::ItemCatalog random_catalog(echosim::Rng& rng, int c, int m, bool single) {
  std::vector<std::vector<int>> sets(static_cast<std::size_t>(m));
  for (auto& s : sets) {
    const int k = single ? 1 : 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(c)));
    for (int r = 0; r < k; ++r) s.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(c))));
  }
  return echosim::ItemCatalog(std::move(sets), c);
}

inline echosim::SocialGraph random_graph(echosim::Rng& rng, int n, double density) {
  std::vector<echosim::Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && rng.uniform() < density) edges.push_back({i, j});
    }
  }
  return echosim::build_social_graph(edges, n);
}

}  // namespace testing
