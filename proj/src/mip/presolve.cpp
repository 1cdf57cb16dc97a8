#include <algorithm>
#include <cmath>

#include "nncis/mip.hpp"

namespace nncis {
namespace {

constexpr int kMaxPasses = 50;
constexpr double kBinaryTol = 1e-7;
// Derived continuous bounds are widened by this relative amount to absorb
// rounding; kept far below the acceptance tolerance of candidate points.
constexpr double kRelax = 1e-12;

}  // namespace

PresolveResult presolve_propagate(const MipModel& m, double feastol) {
  PresolveResult res{m, 0, false};
  const int n = m.num_vars();
  std::vector<double> lb(static_cast<std::size_t>(n));
  std::vector<double> ub(static_cast<std::size_t>(n));
  int fixed_before = 0;
  for (int v = 0; v < n; ++v) {
    lb[static_cast<std::size_t>(v)] = m.lower(v);
    ub[static_cast<std::size_t>(v)] = m.upper(v);
    if (m.is_binary(v) && m.lower(v) == m.upper(v)) ++fixed_before;
  }

  for (int pass = 0; pass < kMaxPasses; ++pass) {
    bool changed = false;
    for (const auto& row : m.rows()) {
      double minact = 0.0;
      double maxact = 0.0;
      double scale = 1.0;
      for (const auto& t : row.terms) {
        const double l = t.coef * lb[static_cast<std::size_t>(t.var)];
        const double h = t.coef * ub[static_cast<std::size_t>(t.var)];
        minact += std::min(l, h);
        maxact += std::max(l, h);
        scale = std::max({scale, std::abs(l), std::abs(h)});
      }
      const double tol = feastol * scale;
      if (minact > row.hi + tol || maxact < row.lo - tol) {
        res.infeasible = true;
        return res;
      }
      for (const auto& t : row.terms) {
        const auto j = static_cast<std::size_t>(t.var);
        if (lb[j] == ub[j]) continue;
        const double cl = std::min(t.coef * lb[j], t.coef * ub[j]);
        const double ch = std::max(t.coef * lb[j], t.coef * ub[j]);
        // Range the term may take so that the row stays satisfiable.
        const double term_hi = row.hi - (minact - cl);
        const double term_lo = row.lo - (maxact - ch);
        double new_lb = t.coef > 0.0 ? term_lo / t.coef : term_hi / t.coef;
        double new_ub = t.coef > 0.0 ? term_hi / t.coef : term_lo / t.coef;
        if (std::isnan(new_lb)) new_lb = lb[j];
        if (std::isnan(new_ub)) new_ub = ub[j];
        double nl = lb[j];
        double nu = ub[j];
        if (m.is_binary(t.var)) {
          if (new_ub < 1.0 - kBinaryTol) nu = 0.0;
          if (new_lb > kBinaryTol) nl = 1.0;
        } else {
          new_lb -= kRelax * (1.0 + std::abs(new_lb));
          new_ub += kRelax * (1.0 + std::abs(new_ub));
          const double min_gain = 1e-7 * (1.0 + ub[j] - lb[j]);
          if (new_lb > lb[j] + min_gain) nl = new_lb;
          if (new_ub < ub[j] - min_gain) nu = new_ub;
        }
        if (nl == lb[j] && nu == ub[j]) continue;
        if (nl > nu) {
          if (nl > nu + feastol * (1.0 + std::abs(nu)) || m.is_binary(t.var)) {
            res.infeasible = true;
            return res;
          }
          nl = nu = 0.5 * (nl + nu);
        }
        const double nlc = std::min(t.coef * nl, t.coef * nu);
        const double nhc = std::max(t.coef * nl, t.coef * nu);
        minact += nlc - cl;
        maxact += nhc - ch;
        lb[j] = nl;
        ub[j] = nu;
        changed = true;
      }
    }
    if (!changed) break;
  }

  int fixed_after = 0;
  for (int v = 0; v < n; ++v) {
    const auto j = static_cast<std::size_t>(v);
    res.model.set_bounds(v, lb[j], ub[j]);
    if (m.is_binary(v) && lb[j] == ub[j]) ++fixed_after;
  }
  res.fixed_binaries = fixed_after - fixed_before;
  return res;
}

}  // namespace nncis
