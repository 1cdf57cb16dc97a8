#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "nncis/mip.hpp"
#include "simplex.hpp"

namespace nncis {
namespace {

using detail::LpOutcome;
using detail::LpProblem;
using detail::LpState;
using detail::Simplex;

/// LP over the unfixed variables of a model: fixed columns are substituted,
/// empty and redundant rows dropped, rows with identical coefficients merged.
struct Compiled {
  LpProblem lp;
  std::vector<int> col_of;   // model var -> column or -1
  std::vector<int> var_of;   // column -> model var
  std::vector<int> binaries; // columns of binary variables
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  double obj_const = 0.0;
  bool infeasible = false;
};

Compiled compile(const MipModel& m, double feastol) {
  Compiled c;
  const int n = m.num_vars();
  c.col_of.assign(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    if (m.lower(v) < m.upper(v)) {
      c.col_of[static_cast<std::size_t>(v)] = static_cast<int>(c.var_of.size());
      c.var_of.push_back(v);
      if (m.is_binary(v)) c.binaries.push_back(static_cast<int>(c.var_of.size()) - 1);
    }
  }
  const int ncol = static_cast<int>(c.var_of.size());

  using Key = std::vector<std::pair<int, double>>;
  std::map<Key, std::size_t> seen;
  std::vector<Key> rows;
  std::vector<double> rlo;
  std::vector<double> rhi;
  for (const auto& r : m.rows()) {
    Key key;
    double shift = 0.0;
    double amin = 0.0;
    double amax = 0.0;
    double scale = 1.0;
    for (const auto& t : r.terms) {
      const int col = c.col_of[static_cast<std::size_t>(t.var)];
      if (col < 0) {
        shift += t.coef * m.lower(t.var);
        continue;
      }
      key.emplace_back(col, t.coef);
      const double l = t.coef * m.lower(t.var);
      const double h = t.coef * m.upper(t.var);
      amin += std::min(l, h);
      amax += std::max(l, h);
      scale = std::max({scale, std::abs(l), std::abs(h)});
    }
    const double lo = r.lo - shift;
    const double hi = r.hi - shift;
    const double tol = feastol * std::max(scale, std::abs(shift));
    if (amin > hi + tol || amax < lo - tol) {
      c.infeasible = true;
      return c;
    }
    if (key.empty() || (amin >= lo - tol && amax <= hi + tol)) continue;
    auto [it, fresh] = seen.try_emplace(key, rows.size());
    if (fresh) {
      rows.push_back(std::move(key));
      rlo.push_back(std::max(lo, amin));
      rhi.push_back(std::min(hi, amax));
    } else {
      rlo[it->second] = std::max(rlo[it->second], lo);
      rhi[it->second] = std::min(rhi[it->second], hi);
      if (rlo[it->second] > rhi[it->second] + tol) {
        c.infeasible = true;
        return c;
      }
      if (rlo[it->second] > rhi[it->second]) rlo[it->second] = rhi[it->second];
    }
  }

  const int mrows = static_cast<int>(rows.size());
  c.lp.m = mrows;
  c.lp.n = ncol;
  c.lp.M = Eigen::MatrixXd::Zero(mrows, ncol + mrows);
  for (int i = 0; i < mrows; ++i) {
    for (const auto& [col, coef] : rows[static_cast<std::size_t>(i)]) c.lp.M(i, col) = coef;
    c.lp.M(i, ncol + i) = -1.0;
  }
  c.lp.c = Eigen::VectorXd::Zero(ncol + mrows);
  c.lb.resize(ncol + mrows);
  c.ub.resize(ncol + mrows);
  c.obj_const = m.objective_constant();
  for (int v = 0; v < n; ++v) {
    const int col = c.col_of[static_cast<std::size_t>(v)];
    const double cv = m.objective()[static_cast<std::size_t>(v)];
    if (col < 0) {
      c.obj_const += cv * m.lower(v);
    } else {
      c.lp.c[col] = cv;
      c.lb[col] = m.lower(v);
      c.ub[col] = m.upper(v);
    }
  }
  for (int i = 0; i < mrows; ++i) {
    c.lb[ncol + i] = rlo[static_cast<std::size_t>(i)];
    c.ub[ncol + i] = rhi[static_cast<std::size_t>(i)];
  }
  return c;
}

std::vector<double> expand(const MipModel& m, const Compiled& c, const Eigen::VectorXd& x) {
  std::vector<double> out(static_cast<std::size_t>(m.num_vars()));
  for (int v = 0; v < m.num_vars(); ++v) {
    const int col = c.col_of[static_cast<std::size_t>(v)];
    double val = col < 0 ? m.lower(v) : x[col];
    val = std::clamp(val, m.lower(v), m.upper(v));
    if (m.is_binary(v)) val = std::round(val);
    out[static_cast<std::size_t>(v)] = val;
  }
  return out;
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

LpResult lp_solve(const MipModel& m, const MipConfig& cfg) {
  LpResult res;
  const Compiled c = compile(m, cfg.feastol);
  if (c.infeasible) return res;
  Simplex simplex(c.lp, cfg.feastol, cfg.iteration_limit);
  LpState s = simplex.initial_state(c.lb, c.ub);
  const LpOutcome out = simplex.solve(s, res.iterations);
  if (out == LpOutcome::IterationLimit) {
    res.status = MipStatus::IterationLimit;
    return res;
  }
  if (out == LpOutcome::Infeasible) return res;
  res.status = MipStatus::Optimal;
  res.x.resize(static_cast<std::size_t>(m.num_vars()));
  for (int v = 0; v < m.num_vars(); ++v) {
    const int col = c.col_of[static_cast<std::size_t>(v)];
    res.x[static_cast<std::size_t>(v)] = col < 0 ? m.lower(v) : s.x[col];
  }
  res.objective = simplex.objective(s) + c.obj_const;
  return res;
}

MipResult mip_solve(const MipModel& m, const MipConfig& cfg) {
  const auto start = Clock::now();
  MipResult res;
  auto finish = [&](MipStatus st) {
    res.status = st;
    res.solve_ms = elapsed_ms(start);
    return res;
  };

  bool have_incumbent = false;
  auto offer = [&](std::vector<double> x) {
    if (!is_feasible(m, x, cfg.feastol, cfg.inttol)) return false;
    const double obj = m.evaluate_objective(x);
    if (have_incumbent && obj >= res.objective) return false;
    res.x = std::move(x);
    res.objective = obj;
    have_incumbent = true;
    return true;
  };

  const bool warm = !m.initial().empty() && offer(m.initial());
  res.warm_start_used = warm;
  if (warm && cfg.feasibility_only) return finish(MipStatus::Feasible);

  MipModel work = m;
  if (cfg.presolve) {
    PresolveResult pre = presolve_propagate(m, cfg.feastol);
    if (pre.infeasible) return finish(have_incumbent ? MipStatus::Feasible : MipStatus::Infeasible);
    work = std::move(pre.model);
  }
  const Compiled c = compile(work, cfg.feastol);
  if (c.infeasible) return finish(have_incumbent ? MipStatus::Feasible : MipStatus::Infeasible);

  Simplex simplex(c.lp, cfg.feastol, cfg.iteration_limit);

  // Fixing every binary and re-solving yields a clean point with exactly
  // integral binaries and the best continuous completion.
  auto polish = [&](const LpState& from,
                    const Eigen::VectorXd& values) -> std::optional<std::vector<double>> {
    LpState s = from;
    for (int col : c.binaries) {
      const double v = std::round(std::clamp(values[col], 0.0, 1.0));
      simplex.set_bounds(s, col, v, v);
    }
    if (simplex.solve(s, res.lp_iterations) != LpOutcome::Optimal) return std::nullopt;
    return expand(work, c, s.x);
  };

  Eigen::VectorXd hint;
  const Eigen::VectorXd* hint_ptr = nullptr;
  if (!m.initial().empty()) {
    hint.resize(c.lp.n);
    for (int col = 0; col < c.lp.n; ++col) {
      hint[col] = m.initial()[static_cast<std::size_t>(c.var_of[static_cast<std::size_t>(col)])];
    }
    hint_ptr = &hint;
  }
  LpState root = simplex.initial_state(c.lb, c.ub, hint_ptr);

  if (warm) {
    if (auto x = polish(root, hint)) offer(std::move(*x));
  }

  struct Node {
    LpState state;
    double bound;
  };
  std::vector<Node> stack;
  stack.push_back(Node{std::move(root), -std::numeric_limits<double>::infinity()});
  bool limit_hit = false;

  while (!stack.empty()) {
    if (res.nodes >= cfg.node_limit || elapsed_ms(start) > cfg.time_limit_s * 1e3) {
      limit_hit = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    if (have_incumbent && node.bound >= res.objective - cfg.gap) continue;
    ++res.nodes;

    const LpOutcome out = simplex.solve(node.state, res.lp_iterations);
    if (out == LpOutcome::IterationLimit) {
      limit_hit = true;
      continue;
    }
    if (out == LpOutcome::Infeasible) continue;
    const double bound = simplex.objective(node.state) + c.obj_const;
    if (have_incumbent && bound >= res.objective - cfg.gap) continue;

    int branch = -1;
    double most = cfg.inttol;
    for (int col : c.binaries) {
      const double frac = std::abs(node.state.x[col] - std::round(node.state.x[col]));
      if (frac > most) {
        most = frac;
        branch = col;
      }
    }
    if (branch < 0) {
      if (auto x = polish(node.state, node.state.x); x && offer(std::move(*x)) && cfg.feasibility_only) {
        return finish(MipStatus::Feasible);
      }
      continue;
    }

    const double val = node.state.x[branch];
    const double first = val > 0.5 ? 1.0 : 0.0;
    Node other{node.state, bound};
    simplex.set_bounds(other.state, branch, 1.0 - first, 1.0 - first);
    stack.push_back(std::move(other));
    simplex.set_bounds(node.state, branch, first, first);
    node.bound = bound;
    stack.push_back(std::move(node));
  }

  if (limit_hit) return finish(have_incumbent ? MipStatus::Feasible : MipStatus::IterationLimit);
  if (!have_incumbent) return finish(MipStatus::Infeasible);
  return finish(cfg.feasibility_only ? MipStatus::Feasible : MipStatus::Optimal);
}

}  // namespace nncis
