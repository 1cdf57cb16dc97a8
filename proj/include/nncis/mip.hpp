#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nncis/error.hpp"

namespace nncis {

enum class Sense { Le, Eq, Ge };

enum class MipStatus { Optimal, Feasible, Infeasible, IterationLimit };

std::string_view to_string(MipStatus s);

struct Term {
  int var;
  double coef;
};

/// Linear row lo <= sum coef * x[var] <= hi. One side may be infinite.
struct Row {
  std::vector<Term> terms;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

/// Mixed-integer linear model: bounded continuous variables, binaries, linear
/// rows and a linear objective (minimized).
class MipModel {
 public:
  int add_continuous(double lb, double ub, std::string name = {});
  int add_binary(std::string name = {});
  /// Duplicate variables in `terms` are summed; zero coefficients are dropped.
  int add_row(std::vector<Term> terms, Sense sense, double rhs);
  int add_range_row(std::vector<Term> terms, double lo, double hi);
  void set_objective(std::vector<Term> terms, double constant = 0.0);
  /// Full assignment tried first by the solver as an incumbent.
  void set_initial(std::vector<double> values);
  void clear_initial() { initial_.clear(); }

  int num_vars() const { return static_cast<int>(lb_.size()); }
  int num_rows() const { return static_cast<int>(rows_.size()); }
  int num_binaries() const;
  double lower(int v) const { return lb_[static_cast<std::size_t>(v)]; }
  double upper(int v) const { return ub_[static_cast<std::size_t>(v)]; }
  bool is_binary(int v) const { return binary_[static_cast<std::size_t>(v)]; }
  const std::string& name(int v) const { return names_[static_cast<std::size_t>(v)]; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return obj_const_; }
  const std::vector<double>& initial() const { return initial_; }

  /// Tightens the bounds of an existing variable (used by presolve).
  void set_bounds(int v, double lb, double ub);
  double evaluate_objective(std::span<const double> x) const;

 private:
  std::vector<Term> normalize(std::vector<Term> terms) const;

  std::vector<double> lb_;
  std::vector<double> ub_;
  std::vector<bool> binary_;
  std::vector<std::string> names_;
  std::vector<Row> rows_;
  std::vector<double> obj_;
  double obj_const_ = 0.0;
  std::vector<double> initial_;
};

struct MipConfig {
  double feastol = 1e-9;
  double inttol = 1e-7;
  double gap = 1e-9;
  double time_limit_s = std::numeric_limits<double>::infinity();
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  std::int64_t iteration_limit = 1'000'000;
  bool feasibility_only = false;
  bool presolve = true;
};

struct LpResult {
  MipStatus status = MipStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::int64_t iterations = 0;
};

struct MipResult {
  MipStatus status = MipStatus::Infeasible;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::infinity();
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  double solve_ms = 0.0;
  bool warm_start_used = false;

  bool has_solution() const {
    return status == MipStatus::Optimal || status == MipStatus::Feasible;
  }
};

struct PresolveResult {
  MipModel model;
  int fixed_binaries = 0;
  bool infeasible = false;
};

/// Interval bound propagation to a fixpoint (at most 50 passes). Binaries
/// whose value is forced are fixed. Variable ids are preserved.
PresolveResult presolve_propagate(const MipModel& m, double feastol = 1e-9);

/// LP relaxation (binaries relaxed to [0, 1]).
LpResult lp_solve(const MipModel& m, const MipConfig& cfg = {});

MipResult mip_solve(const MipModel& m, const MipConfig& cfg = {});

/// Largest violation of variable bounds, rows and binary integrality.
double max_violation(const MipModel& m, std::span<const double> x);

/// Whether x satisfies every bound and row within feastol (scaled by the row
/// magnitude) and every binary within inttol.
bool is_feasible(const MipModel& m, std::span<const double> x, double feastol = 1e-9,
                 double inttol = 1e-7);

/// CPLEX LP text rendering of the model.
std::string to_lp_text(const MipModel& m);

}  // namespace nncis
