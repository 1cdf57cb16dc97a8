// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nncis/lane_keeping.hpp"
#include "nncis/mpc.hpp"
#include "nncis/synth.hpp"
#include "oracles/cell_oracle.hpp"
#include "oracles/grid_dp.hpp"
#include "oracles/milp_enum.hpp"
#include "oracles/random_milp.hpp"
#include "oracles/random_nets.hpp"

using namespace nncis;

namespace {

// Pinned tolerances.
constexpr double kReluTol = 1e-9;          // MILC_ReLU outputs vs max(0, .)
constexpr double kObjectiveTol = 1e-6;     // MILP objective vs enumeration
constexpr double kReachTol = 1e-12;        // relative slack for sampled activations
constexpr double kResidualTol = 1e-9;      // warm-start row residual
constexpr double kDominanceTol = 1e-9;     // warm-started objective vs rolled plan
constexpr double kMembershipTol = 1e-9;    // closed-loop state in the invariant set
constexpr double kDynamicsTol = 1e-9;      // trajectory consistency

// Runtime caps in seconds.
constexpr double kCap1 = 60, kCap2 = 120, kCap3 = 600, kCap4 = 300, kCap5 = 1800, kCapStep = 1.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }
RealBox iv(double lo, double hi) { return RealBox(v1(lo), v1(hi)); }

Mlp scalar_linear(double a) {
  return linear_to_mlp(Eigen::MatrixXd::Constant(1, 1, a), Eigen::MatrixXd::Ones(1, 1),
                       Eigen::VectorXd::Zero(1));
}

BoxSet safe_1d(double dom, double d, double lo, double hi) {
  const auto g = make_grid(v1(-dom), v1(dom), d);
  std::vector<RealBox> b{iv(lo, hi)};
  return quantize_safe_set(g, b);
}

bool nested(const ControlAtlas& a) {
  for (std::size_t i = 1; i < a.history.size(); ++i) {
    if (!a.history[i].subtract(a.history[i - 1]).empty()) return false;
  }
  return true;
}

bool same_atlas(const ControlAtlas& a, const ControlAtlas& b) {
  if (a.cis().boxes() != b.cis().boxes() || a.entries().size() != b.entries().size()) return false;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    if (a.entries()[i].box != b.entries()[i].box || a.entries()[i].u != b.entries()[i].u) return false;
  }
  return true;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

/// Shared state between criteria (synthesis runs feed criterion 8).
struct Shared {
  std::vector<std::pair<std::string, ControlAtlas>> runs;
  std::optional<ControlAtlas> lane;
  Mlp lane_model;
  std::vector<double> dominance_gaps;  // objective - warm objective per MPC step
  std::size_t warm_steps = 0;
};

// ---------------------------------------------------------------------------

Outcome criterion1() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int relu_bad = 0;
  for (int t = 0; t < 1000; ++t) {
    double zlo, zhi;
    const double kind = unit(rng);
    if (kind < 0.8) {
      zlo = -0.1 - 5 * unit(rng), zhi = 0.1 + 5 * unit(rng);
    } else if (kind < 0.9) {
      zlo = 0.1 + unit(rng), zhi = zlo + 0.1 + 4 * unit(rng);
    } else {
      zhi = -0.1 - unit(rng), zlo = zhi - 0.1 - 4 * unit(rng);
    }
    double a = zlo + (zhi - zlo) * unit(rng), b = zlo + (zhi - zlo) * unit(rng);
    if (a > b) std::swap(a, b);
    for (double sign : {1.0, -1.0}) {
      MipModel m;
      const int ah = m.add_continuous(a, a), bh = m.add_continuous(b, b);
      const auto vars = encode_milc_relu(m, {ah}, {bh}, v1(zlo), v1(zhi));
      m.set_objective({{vars.a[0], sign}, {vars.b[0], sign}});
      const auto r = mip_solve(m);
      if (r.status != MipStatus::Optimal) {
        ++relu_bad;
        continue;
      }
      auto at = [&](int v) { return r.x[static_cast<std::size_t>(v)]; };
      const bool values = std::abs(at(vars.a[0]) - std::max(0.0, a)) <= kReluTol * (1 + std::abs(a)) &&
                          std::abs(at(vars.b[0]) - std::max(0.0, b)) <= kReluTol * (1 + std::abs(b));
      const bool pattern = std::lround(at(vars.alpha[0])) == (b < 0) &&
                           std::lround(at(vars.beta[0])) == (a < 0 && b > 0) &&
                           std::lround(at(vars.gamma[0])) == (a > 0);
      if (!values || !pattern) ++relu_bad;
    }
  }

  int inc_bad = 0, inside = 0;
  for (int t = 0; t < 1000; ++t) {
    const int dim = t % 4 == 3 ? 3 : 2;
    Eigen::VectorXd lo(dim), hi(dim);
    const double d = 0.25 + unit(rng);
    for (int j = 0; j < dim; ++j) {
      lo(j) = -3 * unit(rng);
      // Some grids end with a clipped cell.
      hi(j) = lo(j) + d * (3 + static_cast<int>(5 * unit(rng))) - (unit(rng) < 0.3 ? 0.4 * d : 0.0);
    }
    const auto g = make_grid(lo, hi, d);
    const double density = 0.5 + 0.45 * unit(rng);
    std::vector<std::int64_t> idx;
    for (std::int64_t k = 0; k < g.basis_count(); ++k) {
      if (unit(rng) < density) idx.push_back(k);
    }
    if (idx.empty()) idx.push_back(0);
    const auto target = BoxSet::from_indices(g, idx);
    GridBox box;
    for (int j = 0; j < dim; ++j) {
      const auto n = g.cells()[static_cast<std::size_t>(j)];
      std::int64_t p = static_cast<std::int64_t>(unit(rng) * static_cast<double>(n));
      std::int64_t q = static_cast<std::int64_t>(unit(rng) * static_cast<double>(n));
      if (p > q) std::swap(p, q);
      // Favor small boxes so both outcomes are common.
      if (unit(rng) < 0.6) q = std::min(q, p + 1);
      box.lo.push_back(p);
      box.hi.push_back(q + 1);
    }
    const bool want = oracle::box_in_union(box, target.boxes());
    inside += want;
    const RealBox rb = box.to_real(g);
    const auto mode = t % 2 ? CoverMode::Runs : CoverMode::Seamless;
    MipModel m;
    std::vector<int> xl, xh;
    for (int j = 0; j < dim; ++j) {
      xl.push_back(m.add_continuous(rb.lo(j), rb.lo(j)));
      xh.push_back(m.add_continuous(rb.hi(j), rb.hi(j)));
    }
    encode_milc_inc(m, xl, xh, complement_open_boxes(g, target, mode), g.domain());
    if (mip_solve(m).has_solution() != want) ++inc_bad;
  }
  std::ostringstream os;
  os << "relu mismatches " << relu_bad << "/2000 solves, inclusion disagreements " << inc_bad
     << "/1000 (" << inside << " inside)";
  return {relu_bad == 0 && inc_bad == 0 && inside > 100 && inside < 900, os.str()};
}

Outcome criterion2() {
  std::mt19937_64 rng(202);
  int status_bad = 0, obj_bad = 0, feasible = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const int nb = 1 + i % 12, nc = 1 + (i * 7) % 15, nr = 3 + i % 10;
    const auto m = oracle::random_milp(rng, nb, nc, nr);
    const auto want = oracle::enumerate_milp(m);
    const auto got = mip_solve(m);
    const bool got_feasible = got.status == MipStatus::Optimal;
    if (got_feasible != want.feasible || !(got_feasible || got.status == MipStatus::Infeasible)) {
      ++status_bad;
      continue;
    }
    if (want.feasible) {
      ++feasible;
      const double gap = std::abs(got.objective - want.objective);
      worst = std::max(worst, gap);
      if (gap > kObjectiveTol || !is_feasible(m, got.x, 1e-7)) ++obj_bad;
    }
  }
  std::ostringstream os;
  os << "status mismatches " << status_bad << "/200, objective mismatches " << obj_bad << " ("
     << feasible << " feasible, worst gap " << worst << ")";
  return {status_bad == 0 && obj_bad == 0 && feasible > 50 && feasible < 200, os.str()};
}

Outcome criterion3() {
  std::mt19937_64 rng(303);
  std::size_t violations = 0, layer_mismatch = 0, layers_checked = 0;
  for (int net = 0; net < 5; ++net) {
    const Mlp m = oracle::random_mlp(2, 1, {8, 4}, rng);
    Eigen::VectorXd a = oracle::sample_box(RealBox(Eigen::Vector2d(-2, -2), Eigen::Vector2d(2, 2)), rng);
    Eigen::VectorXd b = a + oracle::sample_box(RealBox(Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(1.5, 1.5)), rng);
    const RealBox X(a, b);
    const RealBox U = iv(-0.5, 0.5);
    const auto r = reach_boxes(m, X, U);
    for (int s = 0; s < 100000; ++s) {
      const auto tr = forward_trace(m, oracle::sample_box(X, rng), oracle::sample_box(U, rng));
      for (std::size_t i = 0; i < m.depth(); ++i) {
        const auto& lo = r.bounds.pre_lo[i];
        const auto& hi = r.bounds.pre_hi[i];
        for (Eigen::Index j = 0; j < lo.size(); ++j) {
          const double z = tr.pre[i](j);
          if (z < lo(j) - kReachTol * (1 + std::abs(lo(j))) || z > hi(j) + kReachTol * (1 + std::abs(hi(j)))) {
            ++violations;
          }
        }
      }
    }
    // Every layer on its propagated input box, plus random boxes.
    Eigen::VectorXd in_lo(3), in_hi(3);
    in_lo << X.lo, U.lo;
    in_hi << X.hi, U.hi;
    for (std::size_t i = 0; i < m.depth(); ++i) {
      const auto& L = m.layer(i);
      const auto [lo, hi] = lin_layer(in_lo, in_hi, L.weights, L.bias);
      const auto [vlo, vhi] = oracle::vertex_image(in_lo, in_hi, L.weights, L.bias);
      layer_mismatch += !(lo == vlo && hi == vhi);
      ++layers_checked;
      for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd p = oracle::sample_box(RealBox(-in_hi.cwiseAbs() - Eigen::VectorXd::Ones(in_hi.size()),
                                                       in_hi.cwiseAbs() + Eigen::VectorXd::Ones(in_hi.size())), rng);
        Eigen::VectorXd q = oracle::sample_box(RealBox(-in_hi.cwiseAbs() - Eigen::VectorXd::Ones(in_hi.size()),
                                                       in_hi.cwiseAbs() + Eigen::VectorXd::Ones(in_hi.size())), rng);
        const Eigen::VectorXd bl = p.cwiseMin(q), bh = p.cwiseMax(q);
        const auto [l2, h2] = lin_layer(bl, bh, L.weights, L.bias);
        const auto [vl2, vh2] = oracle::vertex_image(bl, bh, L.weights, L.bias);
        layer_mismatch += !(l2 == vl2 && h2 == vh2);
        ++layers_checked;
      }
      in_lo = r.bounds.post_lo.size() > i ? r.bounds.post_lo[i] : lo;
      in_hi = r.bounds.post_hi.size() > i ? r.bounds.post_hi[i] : hi;
    }
  }
  std::ostringstream os;
  os << "containment violations " << violations << " over 5 x 100000 samples, lin_layer mismatches "
     << layer_mismatch << "/" << layers_checked;
  return {violations == 0 && layer_mismatch == 0, os.str()};
}

Outcome criterion4(Shared& shared) {
  SynthOptions opts;
  opts.keep_history = true;

  const double d = 1.0 / 16;
  const auto exp_safe = safe_1d(1, d, -1, 1);
  const Mlp two = scalar_linear(2);
  auto exp = synthesize_cis(two, exp_safe, iv(-0.5, 0.5), opts);
  const auto dp = oracle::grid_dp_1d(2, -0.5, 0.5, -1, d, std::vector<bool>(32, true));
  const auto mask = exp.cis().mask();
  int lo = 99, hi = -1, lo_dp = 99, hi_dp = -1;
  bool subset = true;
  for (int k = 0; k < 32; ++k) {
    if (mask[static_cast<std::size_t>(k)]) lo = std::min(lo, k), hi = std::max(hi, k);
    if (dp[static_cast<std::size_t>(k)]) lo_dp = std::min(lo_dp, k), hi_dp = std::max(hi_dp, k);
    subset = subset && (!mask[static_cast<std::size_t>(k)] || dp[static_cast<std::size_t>(k)]);
  }
  const bool exp_ok = !exp.empty() && subset && std::abs(lo - lo_dp) <= 1 && std::abs(hi - hi_dp) <= 1 &&
                      certify_atlas(two, exp).ok();

  const auto int_safe = safe_1d(1, 0.125, -0.5, 0.5);
  auto integ = synthesize_cis(scalar_linear(1), int_safe, iv(-0.1, 0.1), opts);
  const bool int_ok = integ.cis().same_cells(int_safe) && integ.iterations == 1;

  auto three = synthesize_cis(scalar_linear(3), safe_1d(1, 0.25, -1, 1), iv(-0.1, 0.1), opts);
  const bool three_ok = three.empty() && three.status == SynthStatus::Empty;

  std::ostringstream os;
  auto edge = [&](int k, bool upper) { return -1 + d * (k + (upper ? 1 : 0)); };
  os << "2x+u: C=[" << edge(lo, false) << "," << edge(hi, true) << "] vs oracle [" << edge(lo_dp, false)
     << "," << edge(hi_dp, true) << "]" << (exp_ok ? "" : " MISMATCH") << "; x+u: " << integ.cis().cell_count()
     << "/" << int_safe.cell_count() << " cells at iteration " << integ.iterations
     << "; 3x+u: " << (three.empty() ? "empty" : "nonempty");
  shared.runs.emplace_back("2x+u", std::move(exp));
  shared.runs.emplace_back("x+u", std::move(integ));
  shared.runs.emplace_back("3x+u", std::move(three));
  return {exp_ok && int_ok && three_ok, os.str()};
}

Outcome criterion5(Shared& shared) {
  const Scenario s = lane_keeping_scenario();
  const Mlp m = lane_keeping_model();
  const BoxSet safe = s.safe_set();
  const auto bound = termination_bound(safe);
  SynthOptions opts;
  opts.jobs = 0;
  opts.keep_history = true;
  const auto t0 = Clock::now();
  auto atlas = synthesize_cis(m, safe, s.control, opts);
  const double synth_s = seconds_since(t0);
  const auto cert = certify_atlas(m, atlas);
  const auto roll = closed_loop_rollouts(m, atlas, 500);
  std::ostringstream os;
  os << "N_T=" << bound << ", iterations=" << atlas.iterations << ", |C|=" << atlas.cis().cell_count()
     << " cells in " << atlas.entries().size() << " boxes, certificate " << cert.checked - cert.failed.size()
     << "/" << cert.checked << ", rollouts " << roll.starts - roll.exits << "/" << roll.starts
     << " stayed 500 steps, synthesis " << synth_s << " s on " << std::max(1u, std::thread::hardware_concurrency())
     << " worker(s)";
  const bool ok = bound == 1025 && safe.cell_count() == 1024 && !atlas.empty() && atlas.iterations <= bound &&
                  cert.ok() && cert.checked == atlas.entries().size() && roll.exits == 0 &&
                  roll.starts == static_cast<std::size_t>(atlas.cis().cell_count());
  shared.lane = atlas;
  shared.lane_model = m;
  shared.runs.emplace_back("lane-keeping", std::move(atlas));
  return {ok, os.str()};
}

Outcome criterion6(Shared& shared) {
  if (!shared.lane || shared.lane->empty()) return {false, "no lane-keeping invariant set"};
  const auto& atlas = *shared.lane;
  const Mlp& m = shared.lane_model;
  const double edge = 0.5 * (lane_keeping_scenario().lane_keeping->w - lane_keeping_scenario().lane_keeping->l2);
  MpcConfig cfg;
  cfg.N = 5;
  cfg.Q = Eigen::Vector2d(2, 2);
  cfg.QN = cfg.Q;
  cfg.R = v1(1);
  cfg.variant = MpcVariant::FirstStep;
  // Hold the lane center, then alternate between the lane boundaries.
  const Eigen::Vector2d right(edge, edge), left(-edge, -edge);
  cfg.reference.assign(10, Eigen::Vector2d::Zero());
  cfg.reference.resize(40, right);
  cfg.reference.resize(70, left);
  const int steps = static_cast<int>(cfg.reference.size());

  std::size_t infeasible = 0, fallbacks = 0, outside = 0, inconsistent = 0, total = 0;
  double ms = 0.0, worst_ms = 0.0;
  double max_y = -1.0, min_y = 1.0;
  for (const auto& x0 : cell_centers(atlas.cis())) {
    Trajectory t;
    try {
      t = simulate(m, atlas, cfg, x0, steps);
    } catch (const Error&) {
      ++outside;
      continue;
    }
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      const auto& d = t.steps[k];
      ++total;
      infeasible += !d.feasible;
      fallbacks += d.fallback;
      ms += d.solve_ms;
      worst_ms = std::max(worst_ms, d.solve_ms);
      if (std::isfinite(d.warm_objective)) {
        ++shared.warm_steps;
        shared.dominance_gaps.push_back(d.objective - d.warm_objective);
      }
      if ((t.states[k + 1] - forward(m, t.states[k], t.controls[k])).norm() > kDynamicsTol) ++inconsistent;
    }
    for (const auto& x : t.states) outside += !atlas.cis().contains_point(x, kMembershipTol);
    for (bool in : t.in_cis) outside += !in;
    max_y = std::max(max_y, t.states[40](0));
    min_y = std::min(min_y, t.states[70](0));
  }
  const double mean_ms = total ? ms / static_cast<double>(total) : 0.0;
  std::ostringstream os;
  os << total << " steps from " << atlas.cis().cell_count() << " cell centers: infeasible " << infeasible
     << ", fallbacks " << fallbacks << ", outside " << outside << ", inconsistent " << inconsistent
     << ", mean solve " << mean_ms << " ms (max " << worst_ms << " ms), lateral offset reached "
     << max_y << " / " << min_y;
  const bool ok = total > 0 && infeasible == 0 && fallbacks == 0 && outside == 0 && inconsistent == 0 &&
                  mean_ms < kCapStep * 1e3 && max_y > 0.5 * edge && min_y < -0.5 * edge;
  return {ok, os.str()};
}

Outcome criterion7(Shared& shared) {
  if (!shared.lane || shared.lane->empty()) return {false, "no lane-keeping invariant set"};
  const auto& atlas = *shared.lane;
  const Mlp& m = shared.lane_model;
  std::mt19937_64 rng(707);
  std::vector<Eigen::VectorXd> points = cell_centers(atlas.cis());
  std::uniform_int_distribution<std::size_t> pick(0, atlas.entries().size() - 1);
  for (int i = 0; i < 2000; ++i) {
    points.push_back(oracle::sample_box(atlas.entries()[pick(rng)].box.to_real(atlas.grid()), rng));
  }
  const Eigen::Vector2d ref(0.75, 0.75);
  double worst = 0.0;
  std::size_t bad = 0, checked = 0;
  for (auto variant : {MpcVariant::FirstStep, MpcVariant::Full}) {
    MpcConfig cfg;
    cfg.N = 5;
    cfg.Q = Eigen::Vector2d(2, 2);
    cfg.QN = cfg.Q;
    cfg.R = v1(1);
    cfg.variant = variant;
    for (const auto& x0 : points) {
      const auto mm = build_mpc(m, x0, cfg, atlas.cis(), atlas.u_domain(), ref);
      const double r = max_violation(mm.model, warm_start(x0, atlas, m, mm));
      worst = std::max(worst, r);
      bad += r > kResidualTol;
      ++checked;
    }
  }
  std::size_t worse = 0;
  double worst_gap = -std::numeric_limits<double>::infinity();
  for (double g : shared.dominance_gaps) {
    worst_gap = std::max(worst_gap, g);
    worse += g > kDominanceTol;
  }
  std::ostringstream os;
  os << "residual above tolerance " << bad << "/" << checked << " (worst " << worst
     << "), warm-started solves worse than the atlas plan " << worse << "/" << shared.dominance_gaps.size();
  const bool ok = bad == 0 && worse == 0 && shared.warm_steps > 0;
  return {ok, os.str()};
}

Outcome criterion8(Shared& shared) {
  std::size_t not_nested = 0, with_history = 0;
  for (const auto& [name, a] : shared.runs) {
    with_history += !a.history.empty();
    not_nested += !nested(a);
  }
  const Scenario s = lane_keeping_scenario();
  const Mlp m = lane_keeping_model();
  std::size_t differing = 0, repeats = 0;
  for (int jobs : {1, 2, 3, 8}) {
    for (int rep = 0; rep < 2; ++rep) {
      SynthOptions opts;
      opts.jobs = jobs;
      opts.keep_history = true;
      const auto a = synthesize_cis(m, s.safe_set(), s.control, opts);
      ++repeats;
      differing += !(shared.lane && same_atlas(a, *shared.lane));
      not_nested += !nested(a);
    }
  }
  const auto safe = safe_1d(1, 1.0 / 16, -1, 1);
  for (int jobs : {1, 4}) {
    SynthOptions opts;
    opts.jobs = jobs;
    const auto a = synthesize_cis(scalar_linear(2), safe, iv(-0.5, 0.5), opts);
    ++repeats;
    differing += !same_atlas(a, shared.runs.front().second);
  }
  std::ostringstream os;
  os << "non-nested sequences " << not_nested << " over " << with_history + 8 << " recorded runs, differing results "
     << differing << "/" << repeats << " repeated runs (jobs 1,2,3,4,8)";
  return {not_nested == 0 && differing == 0 && with_history == shared.runs.size(), os.str()};
}

}  // namespace

int main() {
  Shared shared;
  struct Item {
    int id;
    const char* name;
    double cap_s;
    std::function<Outcome()> run;
  };
  const std::vector<Item> items{
      {1, "encoding equivalence", kCap1, [] { return criterion1(); }},
      {2, "solver oracle equivalence", kCap2, [] { return criterion2(); }},
      {3, "reachability soundness", kCap3, [] { return criterion3(); }},
      {4, "1-D oracle synthesis", kCap4, [&] { return criterion4(shared); }},
      {5, "lane-keeping synthesis", kCap5, [&] { return criterion5(shared); }},
      {6, "MPC recursive feasibility", 0, [&] { return criterion6(shared); }},
      {7, "warm-start validity", 0, [&] { return criterion7(shared); }},
      {8, "nestedness and determinism", 0, [&] { return criterion8(shared); }},
  };
  int failed = 0;
  for (const auto& it : items) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = seconds_since(t0);
    const bool timely = it.cap_s <= 0 || sec < it.cap_s;
    const bool pass = o.pass && timely;
    failed += !pass;
    std::printf("[%s] criterion %d %s: %s%s (%.2f s)\n", pass ? "PASS" : "FAIL", it.id, it.name, o.detail.c_str(),
                timely ? "" : ", over time cap", sec);
    std::fflush(stdout);
  }
  std::printf("%s: %d/%zu criteria passed\n", failed ? "FAIL" : "PASS", static_cast<int>(items.size()) - failed,
              items.size());
  return failed ? 1 : 0;
}
