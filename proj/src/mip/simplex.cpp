#include "simplex.hpp"

#include <cmath>
#include <limits>

namespace nncis::detail {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kStepTol = 1e-12;
constexpr int kReinvertEvery = 50;
constexpr int kBlandAfter = 30;

}  // namespace

LpState Simplex::initial_state(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                               const Eigen::VectorXd* hint) const {
  const int total = p_.n + p_.m;
  LpState s;
  s.lb = lb;
  s.ub = ub;
  s.x = Eigen::VectorXd::Zero(total);
  s.T = -p_.M;
  s.basis.resize(static_cast<std::size_t>(p_.m));
  s.row_of.assign(static_cast<std::size_t>(total), -1);
  for (int i = 0; i < p_.m; ++i) {
    s.basis[static_cast<std::size_t>(i)] = p_.n + i;
    s.row_of[static_cast<std::size_t>(p_.n + i)] = i;
  }
  for (int j = 0; j < p_.n; ++j) {
    const double target = hint ? (*hint)[j] : 0.0;
    s.x[j] = std::abs(target - lb[j]) <= std::abs(ub[j] - target) ? lb[j] : ub[j];
  }
  if (p_.m > 0) s.x.tail(p_.m) = p_.M.leftCols(p_.n) * s.x.head(p_.n);
  return s;
}

void Simplex::set_bounds(LpState& s, int j, double lb, double ub) const {
  const bool at_lower = s.x[j] <= s.lb[j];
  s.lb[j] = lb;
  s.ub[j] = ub;
  if (s.row_of[static_cast<std::size_t>(j)] >= 0) return;
  const double next = at_lower ? lb : ub;
  const double delta = next - s.x[j];
  if (delta == 0.0) return;
  s.x[j] = next;
  for (int i = 0; i < p_.m; ++i) {
    s.x[s.basis[static_cast<std::size_t>(i)]] -= s.T(i, j) * delta;
  }
}

void Simplex::reinvert(LpState& s) const {
  s.since_reinvert = 0;
  if (p_.m == 0) return;
  Eigen::MatrixXd B(p_.m, p_.m);
  for (int i = 0; i < p_.m; ++i) B.col(i) = p_.M.col(s.basis[static_cast<std::size_t>(i)]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  RowMatrix T = lu.solve(p_.M);
  // Keep the updated tableau if the factorization is visibly unreliable.
  for (int i = 0; i < p_.m; ++i) {
    if (std::abs(T(i, s.basis[static_cast<std::size_t>(i)]) - 1.0) > 1e-6 || !T.row(i).allFinite()) {
      return;
    }
  }
  s.T = std::move(T);
  Eigen::VectorXd xn = s.x;
  for (int i = 0; i < p_.m; ++i) xn[s.basis[static_cast<std::size_t>(i)]] = 0.0;
  const Eigen::VectorXd xb = -lu.solve(p_.M * xn);
  for (int i = 0; i < p_.m; ++i) s.x[s.basis[static_cast<std::size_t>(i)]] = xb[i];
}

LpOutcome Simplex::solve(LpState& s, std::int64_t& iterations) const {
  const int m = p_.m;
  const int total = p_.n + p_.m;
  Eigen::VectorXd cb(m);
  Eigen::VectorXd d(total);
  int degenerate = 0;
  std::int64_t local = 0;

  while (true) {
    if (local >= iteration_limit_) return LpOutcome::IterationLimit;
    if (s.since_reinvert >= kReinvertEvery) reinvert(s);

    bool phase1 = false;
    for (int i = 0; i < m; ++i) {
      const int b = s.basis[static_cast<std::size_t>(i)];
      if (s.x[b] < s.lb[b] - feastol_) {
        cb[i] = -1.0;
        phase1 = true;
      } else if (s.x[b] > s.ub[b] + feastol_) {
        cb[i] = 1.0;
        phase1 = true;
      } else {
        cb[i] = 0.0;
      }
    }
    if (!phase1) {
      for (int i = 0; i < m; ++i) cb[i] = p_.c[s.basis[static_cast<std::size_t>(i)]];
    }
    if (m > 0) {
      d.noalias() = -(s.T.transpose() * cb);
    } else {
      d.setZero();
    }
    if (!phase1) d += p_.c;

    // Pricing.
    const bool bland = degenerate >= kBlandAfter;
    int enter = -1;
    double dir = 0.0;
    double best = 0.0;
    for (int j = 0; j < total; ++j) {
      if (s.row_of[static_cast<std::size_t>(j)] >= 0 || s.lb[j] >= s.ub[j]) continue;
      double sgn = 0.0;
      if (d[j] < -kDualTol && s.x[j] < s.ub[j]) {
        sgn = 1.0;
      } else if (d[j] > kDualTol && s.x[j] > s.lb[j]) {
        sgn = -1.0;
      } else {
        continue;
      }
      if (bland) {
        enter = j;
        dir = sgn;
        break;
      }
      if (std::abs(d[j]) > best) {
        best = std::abs(d[j]);
        enter = j;
        dir = sgn;
      }
    }

    if (enter < 0) {
      if (s.since_reinvert > 0) {
        reinvert(s);
        continue;
      }
      return phase1 ? LpOutcome::Infeasible : LpOutcome::Optimal;
    }

    // Ratio test. Basic i moves by delta_i per unit step of the entering column.
    double step = s.ub[enter] - s.lb[enter];
    int leave_row = -1;
    double leave_value = 0.0;
    double leave_pivot = 0.0;
    for (int i = 0; i < m; ++i) {
      const double alpha = s.T(i, enter);
      if (std::abs(alpha) <= kPivotTol) continue;
      const double delta = -alpha * dir;
      const int b = s.basis[static_cast<std::size_t>(i)];
      const double xb = s.x[b];
      double limit = std::numeric_limits<double>::infinity();
      double bound = 0.0;
      if (xb < s.lb[b] - feastol_) {
        if (delta > 0.0) {
          limit = (s.lb[b] - xb) / delta;
          bound = s.lb[b];
        }
      } else if (xb > s.ub[b] + feastol_) {
        if (delta < 0.0) {
          limit = (s.ub[b] - xb) / delta;
          bound = s.ub[b];
        }
      } else if (delta < 0.0) {
        limit = std::max(0.0, (xb - s.lb[b]) / -delta);
        bound = s.lb[b];
      } else {
        limit = std::max(0.0, (s.ub[b] - xb) / delta);
        bound = s.ub[b];
      }
      if (!std::isfinite(limit)) continue;
      bool take = false;
      if (leave_row < 0 ? limit < step : limit < step - kStepTol) {
        take = true;
      } else if (leave_row >= 0 && limit <= step + kStepTol) {
        take = bland ? b < s.basis[static_cast<std::size_t>(leave_row)]
                     : std::abs(alpha) > std::abs(leave_pivot);
      }
      if (take) {
        step = std::min(step, limit);
        leave_row = i;
        leave_value = bound;
        leave_pivot = alpha;
      }
    }

    ++local;
    ++iterations;
    degenerate = step <= kStepTol ? degenerate + 1 : 0;

    // Move along the edge.
    s.x[enter] += dir * step;
    for (int i = 0; i < m; ++i) {
      s.x[s.basis[static_cast<std::size_t>(i)]] -= s.T(i, enter) * dir * step;
    }
    if (leave_row < 0) {
      // Bound flip of the entering column.
      s.x[enter] = dir > 0.0 ? s.ub[enter] : s.lb[enter];
      continue;
    }

    const int leaving = s.basis[static_cast<std::size_t>(leave_row)];
    s.x[leaving] = leave_value;
    const double piv = s.T(leave_row, enter);
    s.T.row(leave_row) /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == leave_row) continue;
      const double f = s.T(i, enter);
      if (f != 0.0) s.T.row(i) -= f * s.T.row(leave_row);
    }
    s.basis[static_cast<std::size_t>(leave_row)] = enter;
    s.row_of[static_cast<std::size_t>(enter)] = leave_row;
    s.row_of[static_cast<std::size_t>(leaving)] = -1;
    ++s.since_reinvert;
  }
}

}  // namespace nncis::detail
