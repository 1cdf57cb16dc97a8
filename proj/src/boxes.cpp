#include "nncis/boxes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nncis {
namespace {

/// Calls fn(cell) for every integer point lo <= cell < hi (last dim fastest).
template <typename Fn>
void for_each_cell(const std::vector<std::int64_t>& lo, const std::vector<std::int64_t>& hi,
                   Fn&& fn) {
  const std::size_t n = lo.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (lo[j] >= hi[j]) return;
  }
  std::vector<std::int64_t> cell = lo;
  while (true) {
    fn(std::as_const(cell));
    std::size_t j = n;
    while (j > 0) {
      --j;
      if (++cell[j] < hi[j]) break;
      cell[j] = lo[j];
      if (j == 0) return;
    }
    if (n == 0) return;
  }
}

std::vector<std::int64_t> zeros(std::size_t n) { return std::vector<std::int64_t>(n, 0); }

/// Greedy run merge: maximal runs along dim 0, then runs with equal extents
/// are merged along dims 1, 2, ...
std::vector<GridBox> run_merge(const GridSpec& grid, const std::vector<bool>& mask) {
  const std::size_t n = grid.dim();
  const auto& cells = grid.cells();
  std::vector<GridBox> boxes;

  std::vector<std::int64_t> other_lo = zeros(n);
  std::vector<std::int64_t> other_hi = cells;
  other_hi[0] = 1;
  for_each_cell(other_lo, other_hi, [&](const std::vector<std::int64_t>& base) {
    std::vector<std::int64_t> cell = base;
    std::int64_t k = 0;
    while (k < cells[0]) {
      cell[0] = k;
      if (!mask[static_cast<std::size_t>(grid.linear_index(cell))]) {
        ++k;
        continue;
      }
      std::int64_t end = k + 1;
      while (end < cells[0]) {
        cell[0] = end;
        if (!mask[static_cast<std::size_t>(grid.linear_index(cell))]) break;
        ++end;
      }
      GridBox b{base, base};
      for (std::size_t j = 0; j < n; ++j) b.hi[j] = base[j] + 1;
      b.lo[0] = k;
      b.hi[0] = end;
      boxes.push_back(std::move(b));
      k = end;
    }
  });

  for (std::size_t d = 1; d < n; ++d) {
    auto key_less = [d, n](const GridBox& a, const GridBox& b) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == d) continue;
        if (a.lo[j] != b.lo[j]) return a.lo[j] < b.lo[j];
        if (a.hi[j] != b.hi[j]) return a.hi[j] < b.hi[j];
      }
      return a.lo[d] < b.lo[d];
    };
    auto same_key = [d, n](const GridBox& a, const GridBox& b) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == d) continue;
        if (a.lo[j] != b.lo[j] || a.hi[j] != b.hi[j]) return false;
      }
      return true;
    };
    std::sort(boxes.begin(), boxes.end(), key_less);
    std::vector<GridBox> merged;
    merged.reserve(boxes.size());
    for (auto& b : boxes) {
      if (!merged.empty() && same_key(merged.back(), b) && merged.back().hi[d] == b.lo[d]) {
        merged.back().hi[d] = b.hi[d];
      } else {
        merged.push_back(std::move(b));
      }
    }
    boxes = std::move(merged);
  }
  std::sort(boxes.begin(), boxes.end());
  return boxes;
}

void mark(const GridSpec& grid, const GridBox& b, std::vector<bool>& mask) {
  for_each_cell(b.lo, b.hi, [&](const std::vector<std::int64_t>& c) {
    mask[static_cast<std::size_t>(grid.linear_index(c))] = true;
  });
}

bool all_in(const GridSpec& grid, const GridBox& b, const std::vector<bool>& mask) {
  bool ok = true;
  for_each_cell(b.lo, b.hi, [&](const std::vector<std::int64_t>& c) {
    if (ok && !mask[static_cast<std::size_t>(grid.linear_index(c))]) ok = false;
  });
  return ok;
}

}  // namespace

// ---------------------------------------------------------------------------
// RealBox

RealBox::RealBox(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) {
    throw Error(ErrorCode::DimMismatch, "RealBox bounds have different dimensions");
  }
}

bool RealBox::contains(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != lo.size()) throw Error(ErrorCode::DimMismatch, "RealBox::contains");
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
  }
  return true;
}

bool RealBox::contains(const RealBox& other, double tol) const {
  if (other.dim() != dim()) throw Error(ErrorCode::DimMismatch, "RealBox::contains");
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (other.lo[j] < lo[j] - tol || other.hi[j] > hi[j] + tol) return false;
  }
  return true;
}

bool RealBox::intersects(const RealBox& other) const {
  if (other.dim() != dim()) throw Error(ErrorCode::DimMismatch, "RealBox::intersects");
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (other.hi[j] < lo[j] || other.lo[j] > hi[j]) return false;
  }
  return true;
}

bool OpenBox::meets(const RealBox& b) const {
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (b.hi[j] <= lo[j] || b.lo[j] >= hi[j]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// GridSpec

GridSpec make_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, double d_min) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorCode::DimMismatch, "grid bounds must be nonempty and of equal length");
  }
  if (!(d_min > 0.0) || !std::isfinite(d_min)) {
    throw Error(ErrorCode::NonPositiveResolution, "d_min must be positive and finite");
  }
  GridSpec g;
  g.lower_ = lower;
  g.upper_ = upper;
  g.d_min_ = d_min;
  g.cells_.resize(static_cast<std::size_t>(lower.size()));
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || !(lower[j] < upper[j])) {
      std::ostringstream os;
      os << "lower[" << j << "] must be strictly below upper[" << j << "]";
      throw Error(ErrorCode::DegenerateDomain, os.str());
    }
    // Ratios within 1e-9 of an integer are treated as exact so that decimal
    // resolutions (e.g. 0.3) do not gain a sliver cell.
    const double ratio = (upper[j] - lower[j]) / d_min;
    const double rounded = std::round(ratio);
    const double c = std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio) ? rounded
                                                                              : std::ceil(ratio);
    g.cells_[static_cast<std::size_t>(j)] = std::max<std::int64_t>(1, static_cast<std::int64_t>(c));
  }
  return g;
}

std::int64_t GridSpec::basis_count() const {
  std::int64_t n = 1;
  for (auto c : cells_) n *= c;
  return n;
}

double GridSpec::coord(std::size_t j, std::int64_t k) const {
  const auto jj = static_cast<Eigen::Index>(j);
  if (k >= cells_[j]) return upper_[jj];
  return std::min(lower_[jj] + static_cast<double>(k) * d_min_, upper_[jj]);
}

std::int64_t GridSpec::linear_index(std::span<const std::int64_t> cell) const {
  std::int64_t idx = 0;
  for (std::size_t j = 0; j < cells_.size(); ++j) idx = idx * cells_[j] + cell[j];
  return idx;
}

std::vector<std::int64_t> GridSpec::cell_of(std::int64_t index) const {
  std::vector<std::int64_t> cell(cells_.size());
  for (std::size_t j = cells_.size(); j > 0; --j) {
    cell[j - 1] = index % cells_[j - 1];
    index /= cells_[j - 1];
  }
  return cell;
}

std::pair<std::int64_t, std::int64_t> GridSpec::cells_touching(std::size_t j, double lo,
                                                               double hi) const {
  const auto n = cells_[j];
  const auto jj = static_cast<Eigen::Index>(j);
  auto guess = static_cast<std::int64_t>(std::floor((lo - lower_[jj]) / d_min_));
  std::int64_t first = std::clamp<std::int64_t>(guess, 0, n - 1);
  while (first > 0 && coord(j, first) >= lo) --first;
  while (first < n && coord(j, first + 1) < lo) ++first;
  guess = static_cast<std::int64_t>(std::floor((hi - lower_[jj]) / d_min_));
  std::int64_t last = std::clamp<std::int64_t>(guess, 0, n - 1);
  while (last + 1 < n && coord(j, last + 1) <= hi) ++last;
  while (last >= 0 && coord(j, last) > hi) --last;
  if (first > last) return {0, 0};
  return {first, last + 1};
}

bool GridSpec::operator==(const GridSpec& other) const {
  return d_min_ == other.d_min_ && cells_ == other.cells_ && lower_.size() == other.lower_.size() &&
         lower_ == other.lower_ && upper_ == other.upper_;
}

// ---------------------------------------------------------------------------
// GridBox

std::int64_t GridBox::cell_count() const {
  std::int64_t n = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) n *= hi[j] - lo[j];
  return n;
}

bool GridBox::is_basis() const {
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (hi[j] - lo[j] != 1) return false;
  }
  return true;
}

bool GridBox::overlaps(const GridBox& other) const {
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (hi[j] <= other.lo[j] || other.hi[j] <= lo[j]) return false;
  }
  return true;
}

bool GridBox::contains(const GridBox& other) const {
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (other.lo[j] < lo[j] || other.hi[j] > hi[j]) return false;
  }
  return true;
}

RealBox GridBox::to_real(const GridSpec& grid) const {
  Eigen::VectorXd l(static_cast<Eigen::Index>(lo.size()));
  Eigen::VectorXd h(static_cast<Eigen::Index>(lo.size()));
  for (std::size_t j = 0; j < lo.size(); ++j) {
    l[static_cast<Eigen::Index>(j)] = grid.coord(j, lo[j]);
    h[static_cast<Eigen::Index>(j)] = grid.coord(j, hi[j]);
  }
  return {std::move(l), std::move(h)};
}

// ---------------------------------------------------------------------------
// BoxSet

BoxSet::BoxSet(GridSpec grid, std::vector<GridBox> boxes)
    : grid_(std::move(grid)), boxes_(std::move(boxes)) {
  const auto& cells = grid_.cells();
  for (const auto& b : boxes_) {
    if (b.lo.size() != grid_.dim() || b.hi.size() != grid_.dim()) {
      throw Error(ErrorCode::DimMismatch, "grid box dimension differs from grid");
    }
    for (std::size_t j = 0; j < b.lo.size(); ++j) {
      if (b.lo[j] < 0 || b.lo[j] >= b.hi[j] || b.hi[j] > cells[j]) {
        throw Error(ErrorCode::InvalidBox, "grid box is empty or outside the grid");
      }
    }
  }
  std::sort(boxes_.begin(), boxes_.end());
  std::vector<bool> seen(static_cast<std::size_t>(grid_.basis_count()), false);
  for (const auto& b : boxes_) {
    for_each_cell(b.lo, b.hi, [&](const std::vector<std::int64_t>& c) {
      auto slot = seen[static_cast<std::size_t>(grid_.linear_index(c))];
      if (slot) throw Error(ErrorCode::InvalidBox, "grid boxes are not pairwise disjoint");
      slot = true;
    });
  }
}

BoxSet BoxSet::full(const GridSpec& grid) {
  GridBox b{zeros(grid.dim()), grid.cells()};
  return BoxSet(grid, {b});
}

BoxSet BoxSet::from_indices(const GridSpec& grid, std::span<const std::int64_t> indices) {
  std::vector<bool> mask(static_cast<std::size_t>(grid.basis_count()), false);
  for (auto i : indices) {
    if (i < 0 || i >= grid.basis_count()) {
      throw Error(ErrorCode::InvalidBox, "basis index outside the grid");
    }
    mask[static_cast<std::size_t>(i)] = true;
  }
  BoxSet out(grid);
  out.boxes_ = run_merge(grid, mask);
  return out;
}

std::vector<bool> BoxSet::mask() const {
  std::vector<bool> m(static_cast<std::size_t>(grid_.basis_count()), false);
  for (const auto& b : boxes_) mark(grid_, b, m);
  return m;
}

std::vector<std::int64_t> BoxSet::indices() const {
  std::vector<std::int64_t> out;
  out.reserve(static_cast<std::size_t>(cell_count()));
  for (const auto& b : boxes_) {
    for_each_cell(b.lo, b.hi,
                  [&](const std::vector<std::int64_t>& c) { out.push_back(grid_.linear_index(c)); });
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t BoxSet::cell_count() const {
  std::int64_t sum = 0;
  for (const auto& b : boxes_) sum += b.cell_count();
  return sum;
}

bool BoxSet::contains_point(const Eigen::VectorXd& x, double tol) const {
  if (static_cast<std::size_t>(x.size()) != grid_.dim()) {
    throw Error(ErrorCode::DimMismatch, "point dimension differs from grid");
  }
  for (const auto& b : boxes_) {
    if (b.to_real(grid_).contains(x, tol)) return true;
  }
  return false;
}

bool BoxSet::contains_box(const RealBox& b) const {
  if (static_cast<std::size_t>(b.dim()) != grid_.dim()) {
    throw Error(ErrorCode::DimMismatch, "box dimension differs from grid");
  }
  if (!grid_.domain().contains(b)) return false;
  GridBox touched{zeros(grid_.dim()), zeros(grid_.dim())};
  for (std::size_t j = 0; j < grid_.dim(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    auto [first, last] = grid_.cells_touching(j, b.lo[jj], b.hi[jj]);
    if (first >= last) return false;
    touched.lo[j] = first;
    touched.hi[j] = last;
  }
  // Every touched cell must be covered by a member box.
  std::int64_t covered = 0;
  for (const auto& m : boxes_) {
    std::int64_t overlap = 1;
    for (std::size_t j = 0; j < grid_.dim() && overlap > 0; ++j) {
      overlap *= std::max<std::int64_t>(
          0, std::min(m.hi[j], touched.hi[j]) - std::max(m.lo[j], touched.lo[j]));
    }
    covered += overlap;
  }
  return covered == touched.cell_count();
}

bool BoxSet::intersects(const RealBox& b) const {
  for (const auto& m : boxes_) {
    if (m.to_real(grid_).intersects(b)) return true;
  }
  return false;
}

void BoxSet::check_same_grid(const BoxSet& other) const {
  if (!(grid_ == other.grid_)) throw Error(ErrorCode::GridMismatch, "box sets use different grids");
}

BoxSet BoxSet::unite(const BoxSet& other) const {
  check_same_grid(other);
  auto m = mask();
  for (const auto& b : other.boxes_) mark(grid_, b, m);
  BoxSet out(grid_);
  out.boxes_ = run_merge(grid_, m);
  return out;
}

BoxSet BoxSet::intersect(const BoxSet& other) const {
  check_same_grid(other);
  auto a = mask();
  auto b = other.mask();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
  BoxSet out(grid_);
  out.boxes_ = run_merge(grid_, a);
  return out;
}

BoxSet BoxSet::subtract(const BoxSet& other) const {
  check_same_grid(other);
  auto a = mask();
  auto b = other.mask();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && !b[i];
  BoxSet out(grid_);
  out.boxes_ = run_merge(grid_, a);
  return out;
}

BoxSet BoxSet::complement() const {
  auto m = mask();
  m.flip();
  BoxSet out(grid_);
  out.boxes_ = run_merge(grid_, m);
  return out;
}

bool BoxSet::same_cells(const BoxSet& other) const {
  check_same_grid(other);
  return indices() == other.indices();
}

// ---------------------------------------------------------------------------
// Quantization and partitioning

BoxSet quantize_safe_set(const GridSpec& grid, std::span<const Halfspace> halfspaces) {
  const std::size_t n = grid.dim();
  for (const auto& h : halfspaces) {
    if (static_cast<std::size_t>(h.normal.size()) != n) {
      throw Error(ErrorCode::DimMismatch, "halfspace normal dimension differs from grid");
    }
  }
  std::vector<std::int64_t> members;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for_each_cell(zeros(n), grid.cells(), [&](const std::vector<std::int64_t>& c) {
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      for (std::size_t j = 0; j < n; ++j) {
        v[static_cast<Eigen::Index>(j)] = grid.coord(j, c[j] + ((corner >> j) & 1U));
      }
      for (const auto& h : halfspaces) {
        if (h.normal.dot(v) > h.offset) return;
      }
    }
    members.push_back(grid.linear_index(c));
  });
  if (members.empty()) throw Error(ErrorCode::EmptySafeSet, "no basis cell satisfies the halfspaces");
  return BoxSet::from_indices(grid, members);
}

BoxSet quantize_safe_set(const GridSpec& grid, std::span<const RealBox> boxes) {
  const std::size_t n = grid.dim();
  // Decimal box corners may miss the grid lines by rounding noise.
  const double snap = 1e-9 * grid.d_min();
  std::vector<GridBox> inner;
  for (const auto& b : boxes) {
    if (static_cast<std::size_t>(b.dim()) != n) {
      throw Error(ErrorCode::DimMismatch, "safe box dimension differs from grid");
    }
    GridBox g{zeros(n), zeros(n)};
    bool empty = false;
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      std::int64_t lo = 0;
      while (lo < grid.cells()[j] && grid.coord(j, lo) < b.lo[jj] - snap) ++lo;
      std::int64_t hi = grid.cells()[j];
      while (hi > lo && grid.coord(j, hi) > b.hi[jj] + snap) --hi;
      if (hi <= lo) empty = true;
      g.lo[j] = lo;
      g.hi[j] = hi;
    }
    if (!empty) inner.push_back(std::move(g));
  }
  if (inner.empty()) throw Error(ErrorCode::EmptySafeSet, "no basis cell lies inside the safe boxes");
  bool disjoint = true;
  for (std::size_t a = 0; a < inner.size() && disjoint; ++a) {
    for (std::size_t b = a + 1; b < inner.size(); ++b) {
      if (inner[a].overlaps(inner[b])) {
        disjoint = false;
        break;
      }
    }
  }
  if (disjoint) return BoxSet(grid, std::move(inner));
  std::vector<bool> m(static_cast<std::size_t>(grid.basis_count()), false);
  for (const auto& g : inner) mark(grid, g, m);
  std::vector<std::int64_t> idx;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) idx.push_back(static_cast<std::int64_t>(i));
  }
  return BoxSet::from_indices(grid, idx);
}

std::pair<GridBox, GridBox> partition_box(const GridBox& b) {
  std::size_t axis = 0;
  std::int64_t longest = 0;
  for (std::size_t j = 0; j < b.dim(); ++j) {
    const auto len = b.hi[j] - b.lo[j];
    if (len > longest) {
      longest = len;
      axis = j;
    }
  }
  if (longest < 2) throw Error(ErrorCode::AlreadyBasis, "cannot partition a basis hyperbox");
  const std::int64_t mid = b.lo[axis] + longest / 2;
  GridBox left = b;
  GridBox right = b;
  left.hi[axis] = mid;
  right.lo[axis] = mid;
  return {std::move(left), std::move(right)};
}

// ---------------------------------------------------------------------------
// Complement cover

std::vector<OpenBox> complement_open_boxes(const GridSpec& grid, const BoxSet& t, CoverMode mode) {
  if (!(grid == t.grid())) throw Error(ErrorCode::GridMismatch, "target uses a different grid");
  const std::size_t n = grid.dim();
  auto comp = t.mask();
  comp.flip();
  std::vector<GridBox> boxes = run_merge(grid, comp);

  if (mode == CoverMode::Seamless && !boxes.empty()) {
    // Every all-complement block of 1 or 2 cells per axis must sit inside one
    // emitted box; otherwise points on the shared faces escape all open boxes.
    const auto& cells = grid.cells();
    for (std::size_t pattern = 1; pattern < (std::size_t{1} << n); ++pattern) {
      std::vector<std::int64_t> size(n);
      std::vector<std::int64_t> corner_hi(n);
      bool fits = true;
      for (std::size_t j = 0; j < n; ++j) {
        size[j] = 1 + static_cast<std::int64_t>((pattern >> j) & 1U);
        corner_hi[j] = cells[j] - size[j] + 1;
        if (corner_hi[j] <= 0) fits = false;
      }
      if (!fits) continue;
      for_each_cell(zeros(n), corner_hi, [&](const std::vector<std::int64_t>& c) {
        GridBox block{c, c};
        for (std::size_t j = 0; j < n; ++j) block.hi[j] = c[j] + size[j];
        if (!all_in(grid, block, comp)) return;
        for (const auto& b : boxes) {
          if (b.contains(block)) return;
        }
        for (std::size_t j = 0; j < n; ++j) {
          while (block.hi[j] < cells[j]) {
            GridBox slab = block;
            slab.lo[j] = block.hi[j];
            slab.hi[j] = block.hi[j] + 1;
            if (!all_in(grid, slab, comp)) break;
            block.hi[j] += 1;
          }
          while (block.lo[j] > 0) {
            GridBox slab = block;
            slab.hi[j] = block.lo[j];
            slab.lo[j] = block.lo[j] - 1;
            if (!all_in(grid, slab, comp)) break;
            block.lo[j] -= 1;
          }
        }
        boxes.push_back(std::move(block));
      });
    }
  }

  std::vector<OpenBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    RealBox r = b.to_real(grid);
    if (mode == CoverMode::Seamless) {
      for (std::size_t j = 0; j < n; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (b.lo[j] == 0) r.lo[jj] -= grid.d_min();
        if (b.hi[j] == grid.cells()[j]) r.hi[jj] += grid.d_min();
      }
    }
    out.push_back(OpenBox{std::move(r.lo), std::move(r.hi)});
  }
  return out;
}

}  // namespace nncis
