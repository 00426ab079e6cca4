#include <algorithm>
#include <cmath>
#include <vector>

#include "support.hpp"

using namespace echosim;
using testing::basis;

TEST_CASE("item vectors") {
  const std::vector<int> one{2};
  CHECK(build_item_vector(one, 4) == basis(4, 2));

  const std::vector<int> two{0, 2};
  const Vector v = build_item_vector(two, 4);
  CHECK(v(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(v(1) == 0.0);
  CHECK(v(2) == v(0));
  CHECK(v(3) == 0.0);

  const std::vector<int> none;
  CHECK_CODE(build_item_vector(none, 4), ErrorCode::InvalidItem);
  const std::vector<int> outside{4};
  CHECK_CODE(build_item_vector(outside, 4), ErrorCode::IndexOutOfRange);

  const std::vector<int> repeated{1, 1};
  CHECK(build_item_vector(repeated, 3) == basis(3, 1));
}

TEST_CASE("item vectors have unit norm and sqrt(1/k) entries") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = 1 + static_cast<int>(rng.below(12));
    const auto catalog = testing::random_catalog(rng, c, 30, false);
    for (int j = 0; j < catalog.item_count(); ++j) {
      CHECK(std::abs(catalog.item(j).norm() - 1.0) <= 1e-12);
      const auto& cats = catalog.categories(j);
      const double w = std::sqrt(1.0 / static_cast<double>(cats.size()));
      for (int o = 0; o < c; ++o) {
        const bool listed = std::find(cats.begin(), cats.end(), o) != cats.end();
        CHECK(catalog.item(j)(o) == (listed ? w : 0.0));
      }
    }
  }
}

TEST_CASE("category mass") {
  const ItemCatalog three({{0}, {0}, {0}}, 2);
  CHECK(category_mass(three) == Vector((Vector(2) << 3.0, 0.0).finished()));

  const ItemCatalog mixed({{0}, {1}, {0, 1}}, 2);
  const Vector n = category_mass(mixed);
  CHECK(n(0) == doctest::Approx(1.0 + std::sqrt(0.5)).epsilon(1e-15));
  CHECK(n(1) == doctest::Approx(1.7071067811865475).epsilon(1e-15));
  CHECK_FALSE(mixed.all_single_category());

  const ItemCatalog empty({}, 3);
  CHECK(category_mass(empty) == Vector::Zero(3));
  CHECK(empty.item_count() == 0);

  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = static_cast<int>(rng.below(200));
    const auto single = testing::random_catalog(rng, 7, m, true);
    CHECK(single.all_single_category());
    CHECK(single.mass().sum() == static_cast<double>(m));
  }
  CHECK_CODE(ItemCatalog({{0}}, 0), ErrorCode::InvalidRequest);
}

TEST_CASE("history initialization") {
  const ItemCatalog catalog({{0}, {1}, {2}}, 3);
  const std::vector<int> first{0};
  const std::vector<int> none;
  CHECK(init_user_from_history(first, none, catalog) == basis(3, 0));
  CHECK_CODE(init_user_from_history(first, first, catalog), ErrorCode::DegenerateHistory);
  CHECK_CODE(init_user_from_history(none, none, catalog), ErrorCode::DegenerateHistory);

  const std::vector<int> both{0, 1};
  const Vector u = init_user_from_history(both, none, catalog);
  CHECK(u(0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(u(1) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(u(2) == 0.0);

  const std::vector<int> bad{7};
  CHECK_CODE(init_user_from_history(bad, none, catalog), ErrorCode::IndexOutOfRange);
}

TEST_CASE("history initialization ignores scaling of the history") {
  Rng rng(3);
  const auto catalog = testing::random_catalog(rng, 6, 40, false);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> pos, neg;
    for (int r = 0; r < 5; ++r) pos.push_back(static_cast<int>(rng.below(40)));
    for (int r = 0; r < 2; ++r) neg.push_back(static_cast<int>(rng.below(40)));
    std::vector<int> pos2 = pos, neg2 = neg;
    pos2.insert(pos2.end(), pos.begin(), pos.end());
    neg2.insert(neg2.end(), neg.begin(), neg.end());
    try {
      const Vector a = init_user_from_history(pos, neg, catalog);
      const Vector b = init_user_from_history(pos2, neg2, catalog);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
      CHECK(std::abs(a.norm() - 1.0) <= 1e-12);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateHistory);
    }
  }
}

TEST_CASE("random initialization") {
  const Vector a = init_user_random(42, 10);
  CHECK(std::abs(a.norm() - 1.0) <= 1e-12);
  CHECK(init_user_random(42, 10) == a);
  CHECK(init_user_random(43, 10) != a);
  CHECK(std::abs(init_user_random(1, 1).norm() - 1.0) <= 1e-12);
}

TEST_CASE("social graph") {
  const std::vector<Edge> fan{{0, 1}, {0, 2}};
  const SparseMatrix s = build_social_graph(fan, 3).influence_matrix();
  const Matrix d(s);
  CHECK(d(0, 0) == 0.0);
  CHECK(d(0, 1) == 0.5);
  CHECK(d(0, 2) == 0.5);
  CHECK(d(1, 1) == 1.0);
  CHECK(d(2, 2) == 1.0);

  const Matrix isolated(build_social_graph({}, 2).influence_matrix());
  CHECK(isolated == Matrix::Identity(2, 2));

  const std::vector<Edge> dup{{0, 1}, {0, 1}};
  const SocialGraph g = build_social_graph(dup, 2);
  CHECK(g.edges().size() == 1);
  CHECK(Matrix(g.influence_matrix())(0, 1) == 1.0);
  CHECK(g.is_isolated(1));
  CHECK(g.isolated_count() == 1);

  const std::vector<Edge> bad{{0, 2}};
  CHECK_CODE(build_social_graph(bad, 2), ErrorCode::IndexOutOfRange);
}

TEST_CASE("influence rows sum to one") {
  Rng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(40));
    const SocialGraph g = testing::random_graph(rng, n, 0.1);
    const Matrix s(g.influence_matrix());
    for (int i = 0; i < n; ++i) CHECK(std::abs(s.row(i).sum() - 1.0) <= 1e-12);

    const Matrix u = testing::random_unit_users(rng, 4, n);
    for (int i = 0; i < n; ++i) {
      CHECK((g.neighbor_mean(u, i) - u * s.row(i).transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK_NOTHROW(p.validate(20));
  CHECK_CODE(p.validate(19), ErrorCode::InvalidRequest);
  p.gamma = 1.5;
  CHECK_CODE(p.validate(100), ErrorCode::InvalidRequest);
  p = ModelParams{};
  p.alpha = std::nan("");
  CHECK_CODE(p.validate(100), ErrorCode::InvalidRequest);
  p = ModelParams{};
  p.epsilon = -1.5;
  CHECK_CODE(p.validate(100), ErrorCode::InvalidRequest);
  p = ModelParams{};
  p.h = 0;
  CHECK_CODE(p.validate(100), ErrorCode::InvalidRequest);
}
