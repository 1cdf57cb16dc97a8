#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nncis/boxes.hpp"
#include "oracles/cell_oracle.hpp"

using namespace nncis;

namespace {

Eigen::VectorXd v(std::initializer_list<double> xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

GridBox gb(std::vector<std::int64_t> lo, std::vector<std::int64_t> hi) { return {std::move(lo), std::move(hi)}; }

}  // namespace

TEST_SUITE("boxes") {

TEST_CASE("make_grid cell counts") {
  const auto g = make_grid(v({-1.5, -std::numbers::pi / 2}), v({1.5, std::numbers::pi / 2}), 1.5 / 32);
  CHECK(g.cells() == std::vector<std::int64_t>{64, 68});
  CHECK(make_grid(v({0}), v({4}), 1.0).cells() == std::vector<std::int64_t>{4});
  const auto c = make_grid(v({0}), v({1}), 0.3);
  CHECK(c.cells() == std::vector<std::int64_t>{4});
  CHECK(c.coord(0, 3) == doctest::Approx(0.9));
  CHECK(c.coord(0, 4) == 1.0);
}

TEST_CASE("make_grid errors") {
  CHECK_THROWS_AS(make_grid(v({0}), v({0}), 1.0), Error);
  CHECK_THROWS_AS(make_grid(v({0}), v({1}), 0.0), Error);
  try {
    make_grid(v({0}), v({1}), -1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveResolution);
  }
  try {
    make_grid(v({1}), v({0}), 1.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateDomain);
  }
}

TEST_CASE("linear index is row-major") {
  const auto g = make_grid(v({0, 0}), v({3, 2}), 1.0);
  std::vector<std::int64_t> cell{2, 1};
  CHECK(g.linear_index(cell) == 5);
  CHECK(g.cell_of(5) == cell);
}

TEST_CASE("quantize_safe_set from halfspaces") {
  const auto g = make_grid(v({0}), v({4}), 1.0);
  std::vector<Halfspace> hs{{v({1}), 2.5}, {v({-1}), 0.0}};
  const auto s = quantize_safe_set(g, hs);
  CHECK(s.indices() == std::vector<std::int64_t>{0, 1});
  std::vector<Halfspace> none{{v({1}), -1.0}};
  try {
    quantize_safe_set(g, none);
    FAIL("expected EmptySafeSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptySafeSet);
  }
}

TEST_CASE("quantize_safe_set from the lane-keeping box") {
  const auto g = make_grid(v({-1.5, -1.5}), v({1.5, 1.5}), 1.5 / 32);
  std::vector<RealBox> b{RealBox(v({-0.75, -0.75}), v({0.75, 0.75}))};
  CHECK(quantize_safe_set(g, b).cell_count() == 1024);
}

TEST_CASE("partition_box") {
  CHECK(partition_box(gb({0}, {4})) == std::pair{gb({0}, {2}), gb({2}, {4})});
  CHECK(partition_box(gb({0, 0}, {2, 2})) == std::pair{gb({0, 0}, {1, 2}), gb({1, 0}, {2, 2})});
  CHECK(partition_box(gb({0}, {3})) == std::pair{gb({0}, {1}), gb({1}, {3})});
  try {
    partition_box(gb({0}, {1}));
    FAIL("expected AlreadyBasis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlreadyBasis);
  }
}

TEST_CASE("set algebra on intervals") {
  const auto g = make_grid(v({0}), v({4}), 1.0);
  const BoxSet a(g, {gb({0}, {2})});
  const BoxSet b(g, {gb({1}, {3})});
  CHECK(a.intersect(b).boxes() == std::vector{gb({1}, {2})});
  CHECK(a.subtract(b).boxes() == std::vector{gb({0}, {1})});
  CHECK(a.unite(b).boxes() == std::vector{gb({0}, {3})});
  CHECK(a.complement().boxes() == std::vector{gb({2}, {4})});
  CHECK(a.subtract(a).empty());
  CHECK_THROWS_AS(BoxSet(g, {gb({0}, {2}), gb({1}, {3})}), Error);
}

TEST_CASE("set algebra agrees with the cell oracle") {
  std::mt19937_64 rng(7);
  const auto g = make_grid(v({0, 0, 0}), v({5, 4, 3}), 1.0);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> ia, ib;
    for (std::int64_t k = 0; k < g.basis_count(); ++k) {
      if (coin(rng)) ia.push_back(k);
      if (coin(rng)) ib.push_back(k);
    }
    const auto a = BoxSet::from_indices(g, ia);
    const auto b = BoxSet::from_indices(g, ib);
    const auto ca = oracle::cells_of(a.boxes());
    const auto cb = oracle::cells_of(b.boxes());
    std::set<std::vector<std::int64_t>> u, i, d;
    for (const auto& c : ca) (cb.count(c) ? i : d).insert(c);
    u = ca;
    u.insert(cb.begin(), cb.end());
    CHECK(oracle::cells_of(a.unite(b).boxes()) == u);
    CHECK(oracle::cells_of(a.intersect(b).boxes()) == i);
    CHECK(oracle::cells_of(a.subtract(b).boxes()) == d);
    CHECK(a.cell_count() == static_cast<std::int64_t>(ca.size()));
    CHECK(a.unite(a.complement()).same_cells(BoxSet::full(g)));
  }
}

TEST_CASE("complement_open_boxes") {
  const auto g = make_grid(v({0}), v({4}), 1.0);
  const BoxSet t(g, {gb({0}, {2})});
  const auto o = complement_open_boxes(g, t);
  REQUIRE(o.size() == 1);
  CHECK(o[0].lo(0) == 2.0);
  CHECK(o[0].hi(0) == 4.0);
  CHECK_FALSE(o[0].meets(RealBox(v({1.5}), v({2.0}))));
  CHECK(complement_open_boxes(g, BoxSet::full(g)).empty());
}

TEST_CASE("seamless cover reaches every outside point") {
  std::mt19937_64 rng(3);
  const auto g = make_grid(v({0, 0}), v({6, 5}), 1.0);
  std::bernoulli_distribution coin(0.6);
  std::uniform_real_distribution<double> ux(0.0, 6.0), uy(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::int64_t> idx;
    for (std::int64_t k = 0; k < g.basis_count(); ++k) {
      if (coin(rng)) idx.push_back(k);
    }
    const auto t = BoxSet::from_indices(g, idx);
    const auto cover = complement_open_boxes(g, t, CoverMode::Seamless);
    for (int s = 0; s < 500; ++s) {
      // Points on grid lines are the hard case for open boxes.
      Eigen::VectorXd x = v({std::round(ux(rng) * 2) / 2, std::round(uy(rng) * 2) / 2});
      const bool inside = t.contains_point(x);
      bool covered = false;
      for (const auto& o : cover) covered = covered || o.meets(RealBox::point(x));
      CHECK(inside != covered);
    }
  }
}

TEST_CASE("contains_box is conservative on shared faces") {
  const auto g = make_grid(v({0, 0}), v({4, 4}), 1.0);
  const BoxSet t(g, {gb({0, 0}, {2, 4})});
  CHECK(t.contains_box(RealBox(v({0.5, 0.5}), v({1.5, 3.5}))));
  CHECK_FALSE(t.contains_box(RealBox(v({0.5, 0.5}), v({2.0, 3.5}))));
  CHECK(t.contains_point(v({2.0, 1.0})));
  CHECK_FALSE(t.contains_point(v({2.5, 1.0})));
}

}  // TEST_SUITE
