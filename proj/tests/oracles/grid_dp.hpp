#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

/// Greatest cell-wise control invariant subset of a 1-D safe interval for
/// x+ = a x + u with a > 0, u in [u_lo, u_hi]. Cells are [l + k d, l + (k+1) d].
/// A cell stays if one u maps the whole cell into one run of kept cells.
inline std::vector<bool> grid_dp_1d(double a, double u_lo, double u_hi, double l, double d,
                                    std::vector<bool> keep) {
  const std::size_t n = keep.size();
  for (bool changed = true; changed;) {
    changed = false;
    // Maximal runs of kept cells as real intervals.
    std::vector<std::pair<double, double>> runs;
    for (std::size_t k = 0; k < n;) {
      if (!keep[k]) {
        ++k;
        continue;
      }
      std::size_t e = k;
      while (e < n && keep[e]) ++e;
      runs.emplace_back(l + static_cast<double>(k) * d, l + static_cast<double>(e) * d);
      k = e;
    }
    std::vector<bool> next(n, false);
    for (std::size_t k = 0; k < n; ++k) {
      if (!keep[k]) continue;
      const double lo = l + static_cast<double>(k) * d, hi = lo + d;
      for (const auto& [p, q] : runs) {
        // u in [p - a lo, q - a hi] intersected with U.
        if (std::max(p - a * lo, u_lo) <= std::min(q - a * hi, u_hi) + 1e-12) next[k] = true;
      }
    }
    if (next != keep) {
      keep = next;
      changed = true;
    }
  }
  return keep;
}

}  // namespace oracle
