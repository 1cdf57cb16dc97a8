#include <doctest.h>

#include <random>

#include "nncis/encode.hpp"
#include "nncis/synth.hpp"

using namespace nncis;

namespace {

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }
RealBox iv(double lo, double hi) { return RealBox(v1(lo), v1(hi)); }

Mlp integrator() {
  return linear_to_mlp(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Zero(1));
}

struct ReluOutcome {
  double a, b;
  int alpha, beta, gamma;
};

/// Solves one MILC_ReLU block with fixed inputs, minimizing sign * (a + b).
ReluOutcome relu_block(double ahat, double bhat, double zlo, double zhi, double sign) {
  MipModel m;
  const int ah = m.add_continuous(ahat, ahat);
  const int bh = m.add_continuous(bhat, bhat);
  const auto vars = encode_milc_relu(m, {ah}, {bh}, v1(zlo), v1(zhi));
  m.set_objective({{vars.a[0], sign}, {vars.b[0], sign}});
  const auto r = mip_solve(m);
  REQUIRE(r.status == MipStatus::Optimal);
  auto bit = [&](int v) { return static_cast<int>(std::lround(r.x[static_cast<std::size_t>(v)])); };
  return {r.x[static_cast<std::size_t>(vars.a[0])], r.x[static_cast<std::size_t>(vars.b[0])],
          bit(vars.alpha[0]), bit(vars.beta[0]), bit(vars.gamma[0])};
}

bool inclusion_feasible(const RealBox& candidate, const std::vector<OpenBox>& obstacles,
                        const RealBox& domain, std::vector<double> phi_fix = {}) {
  MipModel m;
  std::vector<int> lo, hi;
  for (Eigen::Index j = 0; j < candidate.dim(); ++j) {
    lo.push_back(m.add_continuous(candidate.lo(j), candidate.lo(j)));
    hi.push_back(m.add_continuous(candidate.hi(j), candidate.hi(j)));
  }
  const auto inc = encode_milc_inc(m, lo, hi, obstacles, domain);
  for (std::size_t j = 0; j < phi_fix.size(); ++j) {
    m.add_row({{inc.phi[0][j], 1.0}}, Sense::Eq, phi_fix[j]);
  }
  return mip_solve(m).has_solution();
}

OpenBox ob(Eigen::VectorXd lo, Eigen::VectorXd hi) { return {std::move(lo), std::move(hi)}; }

ControlAtlas integrator_atlas() {
  const auto g = make_grid(v1(-1), v1(1), 0.125);
  std::vector<RealBox> safe{iv(-0.5, 0.5)};
  return synthesize_cis(integrator(), quantize_safe_set(g, safe), iv(-0.1, 0.1));
}

}  // namespace

TEST_SUITE("encode") {

TEST_CASE("MILC_ReLU hand cases") {
  for (double sign : {1.0, -1.0}) {
    auto r = relu_block(-2, -1, -3, 3, sign);
    CHECK((r.alpha == 1 && r.beta == 0 && r.gamma == 0));
    CHECK(r.a == doctest::Approx(0.0));
    CHECK(r.b == doctest::Approx(0.0));
    r = relu_block(-1, 2, -3, 3, sign);
    CHECK((r.alpha == 0 && r.beta == 1 && r.gamma == 0));
    CHECK(r.a == doctest::Approx(0.0));
    CHECK(r.b == doctest::Approx(2.0));
    r = relu_block(1, 2, -3, 3, sign);
    CHECK((r.alpha == 0 && r.beta == 0 && r.gamma == 1));
    CHECK(r.a == doctest::Approx(1.0));
    CHECK(r.b == doctest::Approx(2.0));
  }
}

TEST_CASE("MILC_ReLU random instances") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const double zlo = -5 * unit(rng), zhi = 5 * unit(rng);
    double a = zlo + (zhi - zlo) * unit(rng), b = zlo + (zhi - zlo) * unit(rng);
    if (a > b) std::swap(a, b);
    for (double sign : {1.0, -1.0}) {
      const auto r = relu_block(a, b, zlo, zhi, sign);
      CHECK(r.a == doctest::Approx(std::max(0.0, a)).epsilon(1e-9));
      CHECK(r.b == doctest::Approx(std::max(0.0, b)).epsilon(1e-9));
      CHECK(r.alpha == int(b < 0));
      CHECK(r.gamma == int(a > 0));
      CHECK(r.beta == int(a < 0 && b > 0));
    }
  }
}

TEST_CASE("MILC_Inc hand cases") {
  const RealBox dom(Eigen::Vector2d(0, 0), Eigen::Vector2d(10, 10));
  const std::vector<OpenBox> obs{ob(Eigen::Vector2d(2, 2), Eigen::Vector2d(5, 5))};
  CHECK(inclusion_feasible(RealBox(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)), obs, dom, {1, 1}));
  CHECK_FALSE(inclusion_feasible(RealBox(Eigen::Vector2d(3, 3), Eigen::Vector2d(4, 4)), obs, dom));
  CHECK(inclusion_feasible(RealBox(Eigen::Vector2d(3, 5), Eigen::Vector2d(4, 6)), obs, dom));

  MipModel m;
  const int x = m.add_continuous(0, 1);
  const auto inc = encode_milc_inc(m, {x}, {x}, {}, iv(0, 1));
  CHECK(m.num_rows() == 0);
  CHECK(inc.phi.empty());
}

TEST_CASE("prune_obstacles") {
  const RealBox f(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1));
  CHECK(prune_obstacles(f, {ob(Eigen::Vector2d(2, 2), Eigen::Vector2d(3, 3))}).empty());
  CHECK(prune_obstacles(f, {ob(Eigen::Vector2d(1, 0), Eigen::Vector2d(3, 3))}).size() == 1);
}

TEST_CASE("pruning does not change feasibility") {
  std::mt19937_64 rng(14);
  const auto g = make_grid(Eigen::Vector2d(0, 0), Eigen::Vector2d(8, 8), 1.0);
  std::bernoulli_distribution coin(0.7);
  std::uniform_int_distribution<int> pos(0, 7);
  for (int t = 0; t < 100; ++t) {
    std::vector<std::int64_t> idx;
    for (std::int64_t k = 0; k < g.basis_count(); ++k) {
      if (coin(rng)) idx.push_back(k);
    }
    const auto target = BoxSet::from_indices(g, idx);
    if (target.empty()) continue;
    const auto obs = complement_open_boxes(g, target);
    int a = pos(rng), b = pos(rng), c = pos(rng), d = pos(rng);
    const RealBox cand(Eigen::Vector2d(std::min(a, b), std::min(c, d)),
                       Eigen::Vector2d(std::max(a, b) + 1, std::max(c, d) + 1));
    CHECK(inclusion_feasible(cand, obs, g.domain()) ==
          inclusion_feasible(cand, prune_obstacles(cand, obs), g.domain()));
  }
}

TEST_CASE("pointwise ReLU") {
  for (double zh : {-1.0, 2.0, 0.0}) {
    for (double sign : {1.0, -1.0}) {
      MipModel m;
      const int zhat = m.add_continuous(zh, zh);
      const int z = m.add_continuous(0, 3);
      const int s = m.add_binary();
      encode_pointwise_relu(m, {zhat}, {z}, {s}, v1(-3), v1(3));
      m.set_objective({{z, sign}});
      const auto r = mip_solve(m);
      REQUIRE(r.status == MipStatus::Optimal);
      CHECK(r.x[static_cast<std::size_t>(z)] == doctest::Approx(std::max(0.0, zh)));
      if (zh < 0) CHECK(r.x[static_cast<std::size_t>(s)] == doctest::Approx(0.0));
      if (zh > 0) CHECK(r.x[static_cast<std::size_t>(s)] == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("build_returnability examples") {
  const Mlp m = integrator();
  const auto g = make_grid(v1(-1), v1(1), 0.125);
  const RealBox U = iv(-0.1, 0.1);
  std::vector<RealBox> safe{iv(-0.5, 0.5)};
  const auto target = quantize_safe_set(g, safe);
  const auto bounds = global_bounds(m, g.domain(), U);

  auto rm = build_returnability(m, iv(0.375, 0.5), U, target, bounds);
  auto r = mip_solve(rm.model);
  REQUIRE(r.has_solution());
  const double u = r.x[static_cast<std::size_t>(rm.u[0])];
  CHECK(u >= -0.1);
  CHECK(u <= 0.1);
  CHECK(target.contains_box(reach_boxes(m, iv(0.375, 0.5), iv(u, u)).output));

  std::vector<RealBox> far{iv(-0.5, -0.375)};
  const auto t2 = quantize_safe_set(g, far);
  const RealBox U2 = iv(-0.01, 0.01);
  auto rm2 = build_returnability(m, iv(0.375, 0.5), U2, t2, global_bounds(m, g.domain(), U2));
  CHECK_FALSE(mip_solve(rm2.model).has_solution());

  auto rm3 = build_returnability(m, iv(0.375, 0.5), U, BoxSet::full(g), bounds);
  auto r3 = mip_solve(rm3.model);
  REQUIRE(r3.has_solution());
  CHECK(std::abs(r3.x[static_cast<std::size_t>(rm3.u[0])]) <= 0.1 + 1e-12);

  try {
    build_returnability(m, iv(0.375, 0.5), U, BoxSet(g), bounds);
    FAIL("expected EmptyTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyTarget);
  }
}

TEST_CASE("build_mpc examples") {
  const Mlp m = integrator();
  const auto g = make_grid(v1(-1), v1(1), 0.125);
  std::vector<RealBox> safe{iv(-0.5, 0.5)};
  const auto cis = quantize_safe_set(g, safe);
  const RealBox U = iv(-0.1, 0.1);
  MpcConfig cfg;
  cfg.N = 3;
  cfg.Q = v1(1);
  cfg.QN = v1(1);
  cfg.R = v1(0);
  cfg.variant = MpcVariant::Full;

  auto mm = build_mpc(m, v1(0), cfg, cis, U, v1(0));
  auto r = mip_solve(mm.model);
  REQUIRE(r.status == MipStatus::Optimal);
  CHECK(r.objective == doctest::Approx(0.0));

  mm = build_mpc(m, v1(0.4), cfg, cis, U, v1(0));
  r = mip_solve(mm.model);
  REQUIRE(r.status == MipStatus::Optimal);
  for (int n = 0; n < 3; ++n) {
    CHECK(r.x[static_cast<std::size_t>(mm.steps[n].u[0])] == doctest::Approx(-0.1));
    CHECK(r.x[static_cast<std::size_t>(mm.steps[n].x_next[0])] == doctest::Approx(0.3 - 0.1 * n));
  }

  try {
    build_mpc(m, v1(2.0), cfg, cis, U, v1(0));
    FAIL("expected X0OutsideDomain");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::X0OutsideDomain);
  }
  try {
    build_mpc(m, v1(0.0), cfg, BoxSet(g), U, v1(0));
    FAIL("expected EmptyCis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCis);
  }
}

TEST_CASE("warm_start satisfies the MPC rows") {
  const Mlp m = integrator();
  const auto atlas = integrator_atlas();
  for (auto variant : {MpcVariant::FirstStep, MpcVariant::Full}) {
    MpcConfig cfg;
    cfg.N = 4;
    cfg.Q = v1(2);
    cfg.QN = v1(2);
    cfg.R = v1(1);
    cfg.variant = variant;
    for (const auto& x0 : cell_centers(atlas.cis())) {
      const auto mm = build_mpc(m, x0, cfg, atlas.cis(), atlas.u_domain(), v1(0.3));
      const auto ws = warm_start(x0, atlas, m, mm);
      CHECK(max_violation(mm.model, ws) <= 1e-9);
    }
  }
  MpcConfig cfg;
  const auto mm = build_mpc(m, v1(0.0), cfg, atlas.cis(), atlas.u_domain(), v1(0));
  try {
    warm_start(v1(0.9), atlas, m, mm);
    FAIL("expected OutsideCis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutsideCis);
  }
}

}  // TEST_SUITE
