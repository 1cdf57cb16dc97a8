#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace nncis::detail {

/// Equality form [A | -I] (x, s) = 0 over structural columns x and one
/// logical column s_i = a_i . x per row. All columns carry finite bounds.
struct LpProblem {
  int m = 0;
  int n = 0;
  Eigen::MatrixXd M;  // m x (n + m)
  Eigen::VectorXd c;  // n + m, zero on logicals
};

enum class LpOutcome { Optimal, Infeasible, IterationLimit };

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense tableau T = B^-1 M with basic/nonbasic bookkeeping. Copyable, so a
/// branch-and-bound child can resume from its parent's basis.
struct LpState {
  RowMatrix T;
  std::vector<int> basis;   // row -> column
  std::vector<int> row_of;  // column -> row, or -1 when nonbasic
  Eigen::VectorXd x;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  int since_reinvert = 0;
};

/// Bounded-variable primal simplex with a composite phase 1. Dantzig pricing,
/// switching to Bland's rule on long degenerate stalls.
class Simplex {
 public:
  Simplex(const LpProblem& p, double feastol, std::int64_t iteration_limit)
      : p_(p), feastol_(feastol), iteration_limit_(iteration_limit) {}

  /// Slack basis; nonbasic structurals at the bound nearest `hint` (or zero).
  LpState initial_state(const Eigen::VectorXd& lb, const Eigen::VectorXd& ub,
                        const Eigen::VectorXd* hint = nullptr) const;

  LpOutcome solve(LpState& s, std::int64_t& iterations) const;

  void set_bounds(LpState& s, int j, double lb, double ub) const;
  void reinvert(LpState& s) const;
  double objective(const LpState& s) const { return p_.c.dot(s.x); }

 private:
  const LpProblem& p_;
  double feastol_;
  std::int64_t iteration_limit_;
};

}  // namespace nncis::detail
