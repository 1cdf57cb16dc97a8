#include <cmath>
#include <iomanip>
#include <sstream>

#include "nncis/mip.hpp"

namespace nncis {
namespace {

void write_terms(std::ostringstream& os, const std::vector<Term>& terms, const MipModel& m) {
  if (terms.empty()) {
    os << " 0 " << m.name(0);
    return;
  }
  for (const auto& t : terms) {
    os << (t.coef < 0.0 ? " - " : " + ") << std::abs(t.coef) << ' ' << m.name(t.var);
  }
}

}  // namespace

std::string to_lp_text(const MipModel& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "\\ nncis model: " << m.num_vars() << " variables, " << m.num_rows() << " rows\n";
  os << "\\ objective constant " << m.objective_constant() << "\n";
  os << "Minimize\n obj:";
  std::vector<Term> obj;
  for (int v = 0; v < m.num_vars(); ++v) {
    if (m.objective()[static_cast<std::size_t>(v)] != 0.0) {
      obj.push_back({v, m.objective()[static_cast<std::size_t>(v)]});
    }
  }
  if (m.num_vars() > 0) write_terms(os, obj, m);
  os << "\nSubject To\n";
  for (int i = 0; i < m.num_rows(); ++i) {
    const Row& r = m.rows()[static_cast<std::size_t>(i)];
    if (r.terms.empty()) continue;
    if (r.lo == r.hi) {
      os << " r" << i << ':';
      write_terms(os, r.terms, m);
      os << " = " << r.hi << '\n';
      continue;
    }
    if (std::isfinite(r.lo)) {
      os << " r" << i << (std::isfinite(r.hi) ? "_lo:" : ":");
      write_terms(os, r.terms, m);
      os << " >= " << r.lo << '\n';
    }
    if (std::isfinite(r.hi)) {
      os << " r" << i << (std::isfinite(r.lo) ? "_hi:" : ":");
      write_terms(os, r.terms, m);
      os << " <= " << r.hi << '\n';
    }
  }
  os << "Bounds\n";
  for (int v = 0; v < m.num_vars(); ++v) {
    if (m.is_binary(v) && m.lower(v) == 0.0 && m.upper(v) == 1.0) continue;
    os << ' ' << m.lower(v) << " <= " << m.name(v) << " <= " << m.upper(v) << '\n';
  }
  if (m.num_binaries() > 0) {
    os << "Binaries\n";
    for (int v = 0; v < m.num_vars(); ++v) {
      if (m.is_binary(v)) os << ' ' << m.name(v) << '\n';
    }
  }
  os << "End\n";
  return os.str();
}

}  // namespace nncis
