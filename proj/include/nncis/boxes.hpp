#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nncis/error.hpp"

namespace nncis {

/// Axis-aligned box with real endpoints. Used for reachable sets, control
/// domains and the real image of grid boxes.
struct RealBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  RealBox() = default;
  RealBox(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static RealBox point(const Eigen::VectorXd& x) { return {x, x}; }

  Eigen::Index dim() const { return lo.size(); }
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
  bool contains(const RealBox& other, double tol = 0.0) const;
  /// Closed intersection test; touching faces count as intersecting.
  bool intersects(const RealBox& other) const;
};

/// Uniform quantization of the state domain [lower, upper] into basis cells
/// of side d_min. The last cell in each dimension is clipped to `upper`.
class GridSpec {
 public:
  GridSpec() = default;

  std::size_t dim() const { return cells_.size(); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  double d_min() const { return d_min_; }
  const std::vector<std::int64_t>& cells() const { return cells_; }
  std::int64_t basis_count() const;

  /// Real coordinate of grid index k in dimension j.
  double coord(std::size_t j, std::int64_t k) const;
  /// Row-major linear index of a basis cell (last dimension fastest).
  std::int64_t linear_index(std::span<const std::int64_t> cell) const;
  std::vector<std::int64_t> cell_of(std::int64_t index) const;
  RealBox domain() const { return {lower_, upper_}; }

  /// Range [first, last) of cell indices in dimension j whose closed extent
  /// meets [lo, hi] (clamped to the grid).
  std::pair<std::int64_t, std::int64_t> cells_touching(std::size_t j, double lo,
                                                       double hi) const;

  bool operator==(const GridSpec& other) const;

  friend GridSpec make_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                            double d_min);

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  double d_min_ = 0.0;
  std::vector<std::int64_t> cells_;
};

GridSpec make_grid(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, double d_min);

/// Box in integer grid coordinates, covering cells lo_j <= k < hi_j.
struct GridBox {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;

  std::size_t dim() const { return lo.size(); }
  std::int64_t cell_count() const;
  bool is_basis() const;
  bool overlaps(const GridBox& other) const;
  bool contains(const GridBox& other) const;
  RealBox to_real(const GridSpec& grid) const;

  friend auto operator<=>(const GridBox&, const GridBox&) = default;
  friend bool operator==(const GridBox&, const GridBox&) = default;
};

/// Open box ]lo, hi[ in real coordinates.
struct OpenBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  /// Whether the closed box `b` meets the open interior.
  bool meets(const RealBox& b) const;
  RealBox closure() const { return {lo, hi}; }
};

/// Halfspace normal . x <= offset.
struct Halfspace {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

/// Finite union of pairwise disjoint grid boxes, kept sorted by (lo, hi).
class BoxSet {
 public:
  explicit BoxSet(GridSpec grid) : grid_(std::move(grid)) {}
  /// Validates bounds and pairwise disjointness.
  BoxSet(GridSpec grid, std::vector<GridBox> boxes);

  static BoxSet full(const GridSpec& grid);
  /// Greedy run-merged cover of a set of basis-cell indices.
  static BoxSet from_indices(const GridSpec& grid, std::span<const std::int64_t> indices);

  const GridSpec& grid() const { return grid_; }
  const std::vector<GridBox>& boxes() const { return boxes_; }
  bool empty() const { return boxes_.empty(); }
  std::size_t size() const { return boxes_.size(); }

  /// Sorted basis-cell index set covered by this union.
  std::vector<std::int64_t> indices() const;
  std::int64_t cell_count() const;
  /// Per-cell membership mask of length basis_count().
  std::vector<bool> mask() const;

  /// Whether x lies in the closed union, allowing `tol` slack at faces.
  bool contains_point(const Eigen::VectorXd& x, double tol = 0.0) const;
  /// Whether the closed real box lies in the union: every cell whose closed
  /// extent touches `b` must be a member. Exact whenever `b` is not flush
  /// with the outer boundary of the union.
  bool contains_box(const RealBox& b) const;
  bool intersects(const RealBox& b) const;

  BoxSet unite(const BoxSet& other) const;
  BoxSet intersect(const BoxSet& other) const;
  BoxSet subtract(const BoxSet& other) const;
  BoxSet complement() const;
  bool same_cells(const BoxSet& other) const;

 private:
  void check_same_grid(const BoxSet& other) const;

  GridSpec grid_;
  std::vector<GridBox> boxes_;
};

/// Inner approximation of the convex set {x : normal . x <= offset} by all basis
/// cells whose vertices satisfy every halfspace.
BoxSet quantize_safe_set(const GridSpec& grid, std::span<const Halfspace> halfspaces);
/// Safe set given as explicit real boxes; each box is replaced by the grid
/// cells it fully contains.
BoxSet quantize_safe_set(const GridSpec& grid, std::span<const RealBox> boxes);

/// Split along the longest integer side (lowest dimension on ties) at the
/// floor midpoint.
std::pair<GridBox, GridBox> partition_box(const GridBox& b);

enum class CoverMode {
  /// Greedy run-merged complement boxes with corners on the domain.
  Runs,
  /// Runs plus extra boxes so that every point of the domain outside the set
  /// lies inside some open box; faces on the domain boundary are pushed one
  /// cell outward. Required when candidates can be degenerate (points).
  Seamless,
};

/// Open boxes O with  X \ t = X intersected with the union of O.
std::vector<OpenBox> complement_open_boxes(const GridSpec& grid, const BoxSet& t,
                                           CoverMode mode = CoverMode::Runs);

}  // namespace nncis
