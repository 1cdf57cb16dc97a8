#include <algorithm>
#include <cmath>
#include <string>

#include "nncis/error.hpp"
#include "nncis/mip.hpp"

namespace nncis {

std::string_view to_string(MipStatus s) {
  switch (s) {
    case MipStatus::Optimal: return "Optimal";
    case MipStatus::Feasible: return "Feasible";
    case MipStatus::Infeasible: return "Infeasible";
    case MipStatus::IterationLimit: return "IterationLimit";
  }
  return "Unknown";
}

int MipModel::add_continuous(double lb, double ub, std::string name) {
  if (!std::isfinite(lb) || !std::isfinite(ub)) {
    throw Error(ErrorCode::InfiniteBound, "continuous variable needs finite bounds");
  }
  if (lb > ub) throw Error(ErrorCode::InvalidBox, "variable lower bound exceeds upper bound");
  const int id = num_vars();
  lb_.push_back(lb);
  ub_.push_back(ub);
  binary_.push_back(false);
  names_.push_back(name.empty() ? "x" + std::to_string(id) : std::move(name));
  obj_.push_back(0.0);
  return id;
}

int MipModel::add_binary(std::string name) {
  const int id = num_vars();
  lb_.push_back(0.0);
  ub_.push_back(1.0);
  binary_.push_back(true);
  names_.push_back(name.empty() ? "b" + std::to_string(id) : std::move(name));
  obj_.push_back(0.0);
  return id;
}

int MipModel::num_binaries() const {
  return static_cast<int>(std::count(binary_.begin(), binary_.end(), true));
}

std::vector<Term> MipModel::normalize(std::vector<Term> terms) const {
  for (const auto& t : terms) {
    if (t.var < 0 || t.var >= num_vars()) {
      throw Error(ErrorCode::UnknownVar, "row references variable " + std::to_string(t.var));
    }
    if (!std::isfinite(t.coef)) throw Error(ErrorCode::InfiniteBound, "non-finite coefficient");
  }
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> out;
  for (const auto& t : terms) {
    if (!out.empty() && out.back().var == t.var) {
      out.back().coef += t.coef;
    } else {
      out.push_back(t);
    }
  }
  std::erase_if(out, [](const Term& t) { return t.coef == 0.0; });
  return out;
}

int MipModel::add_row(std::vector<Term> terms, Sense sense, double rhs) {
  if (!std::isfinite(rhs)) throw Error(ErrorCode::InfiniteBound, "non-finite right-hand side");
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (sense) {
    case Sense::Le: return add_range_row(std::move(terms), -inf, rhs);
    case Sense::Ge: return add_range_row(std::move(terms), rhs, inf);
    case Sense::Eq: return add_range_row(std::move(terms), rhs, rhs);
  }
  return -1;
}

int MipModel::add_range_row(std::vector<Term> terms, double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw Error(ErrorCode::InvalidBox, "row range is empty");
  }
  rows_.push_back(Row{normalize(std::move(terms)), lo, hi});
  return num_rows() - 1;
}

void MipModel::set_objective(std::vector<Term> terms, double constant) {
  std::fill(obj_.begin(), obj_.end(), 0.0);
  for (const auto& t : normalize(std::move(terms))) obj_[static_cast<std::size_t>(t.var)] = t.coef;
  obj_const_ = constant;
}

void MipModel::set_initial(std::vector<double> values) {
  if (static_cast<int>(values.size()) != num_vars()) {
    throw Error(ErrorCode::DimMismatch, "initial assignment length differs from variable count");
  }
  initial_ = std::move(values);
}

void MipModel::set_bounds(int v, double lb, double ub) {
  if (v < 0 || v >= num_vars()) throw Error(ErrorCode::UnknownVar, "set_bounds");
  lb_[static_cast<std::size_t>(v)] = lb;
  ub_[static_cast<std::size_t>(v)] = ub;
}

double MipModel::evaluate_objective(std::span<const double> x) const {
  double v = obj_const_;
  for (std::size_t j = 0; j < obj_.size(); ++j) v += obj_[j] * x[j];
  return v;
}

double max_violation(const MipModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.num_vars()) {
    throw Error(ErrorCode::DimMismatch, "assignment length differs from variable count");
  }
  double worst = 0.0;
  for (int v = 0; v < m.num_vars(); ++v) {
    const double xv = x[static_cast<std::size_t>(v)];
    worst = std::max({worst, m.lower(v) - xv, xv - m.upper(v)});
    if (m.is_binary(v)) worst = std::max(worst, std::abs(xv - std::round(xv)));
  }
  for (const auto& r : m.rows()) {
    double act = 0.0;
    for (const auto& t : r.terms) act += t.coef * x[static_cast<std::size_t>(t.var)];
    worst = std::max({worst, r.lo - act, act - r.hi});
  }
  return worst;
}

bool is_feasible(const MipModel& m, std::span<const double> x, double feastol, double inttol) {
  if (static_cast<int>(x.size()) != m.num_vars()) return false;
  for (int v = 0; v < m.num_vars(); ++v) {
    const double xv = x[static_cast<std::size_t>(v)];
    if (!std::isfinite(xv)) return false;
    const double tol = feastol * std::max(1.0, std::abs(xv));
    if (xv < m.lower(v) - tol || xv > m.upper(v) + tol) return false;
    if (m.is_binary(v) && std::abs(xv - std::round(xv)) > inttol) return false;
  }
  for (const auto& r : m.rows()) {
    double act = 0.0;
    double scale = 1.0;
    for (const auto& t : r.terms) {
      const double p = t.coef * x[static_cast<std::size_t>(t.var)];
      act += p;
      scale = std::max(scale, std::abs(p));
    }
    const double tol = feastol * scale;
    if (act < r.lo - tol || act > r.hi + tol) return false;
  }
  return true;
}

}  // namespace nncis
