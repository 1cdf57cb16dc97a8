#include "nncis/atlas.hpp"

#include <algorithm>
#include <limits>

namespace nncis {

ControlAtlas::ControlAtlas(BoxSet cis, std::vector<AtlasEntry> entries, ControlDomain u_domain)
    : cis_(std::move(cis)), entries_(std::move(entries)), u_domain_(std::move(u_domain)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const AtlasEntry& a, const AtlasEntry& b) { return a.box < b.box; });
  const auto& grid = cis_.grid();
  owner_.assign(static_cast<std::size_t>(grid.basis_count()), -1);
  for (std::size_t e = 0; e < entries_.size(); ++e) {
    const auto& b = entries_[e].box;
    if (entries_[e].u.size() != u_domain_.dim()) {
      throw Error(ErrorCode::DimMismatch, "atlas control dimension differs from control domain");
    }
    std::vector<std::int64_t> cell = b.lo;
    const std::size_t n = b.dim();
    while (true) {
      auto& slot = owner_[static_cast<std::size_t>(grid.linear_index(cell))];
      if (slot >= 0) throw Error(ErrorCode::InvalidBox, "atlas boxes overlap");
      slot = static_cast<int>(e);
      std::size_t j = n;
      bool done = true;
      while (j > 0) {
        --j;
        if (++cell[j] < b.hi[j]) {
          done = false;
          break;
        }
        cell[j] = b.lo[j];
      }
      if (done) break;
    }
  }
  const auto mask = cis_.mask();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i] != (owner_[i] >= 0)) {
      throw Error(ErrorCode::InvalidBox, "atlas boxes do not cover the invariant set exactly");
    }
  }
  status = entries_.empty() ? SynthStatus::Empty : SynthStatus::NonEmpty;
}

const AtlasEntry* ControlAtlas::lookup(const Eigen::VectorXd& x, double tol) const {
  const auto& grid = cis_.grid();
  const std::size_t n = grid.dim();
  if (static_cast<std::size_t>(x.size()) != n) {
    throw Error(ErrorCode::DimMismatch, "point dimension differs from atlas grid");
  }
  std::vector<std::int64_t> lo(n);
  std::vector<std::int64_t> hi(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    auto [first, last] = grid.cells_touching(j, x[jj] - tol, x[jj] + tol);
    if (first >= last) return nullptr;
    lo[j] = first;
    hi[j] = last;
  }
  int best = std::numeric_limits<int>::max();
  std::vector<std::int64_t> cell = lo;
  while (true) {
    const int o = owner_[static_cast<std::size_t>(grid.linear_index(cell))];
    if (o >= 0) best = std::min(best, o);
    std::size_t j = n;
    bool done = true;
    while (j > 0) {
      --j;
      if (++cell[j] < hi[j]) {
        done = false;
        break;
      }
      cell[j] = lo[j];
    }
    if (done) break;
  }
  if (best == std::numeric_limits<int>::max()) return nullptr;
  return &entries_[static_cast<std::size_t>(best)];
}

Eigen::VectorXd atlas_control(const ControlAtlas& atlas, const Eigen::VectorXd& x) {
  const AtlasEntry* e = atlas.lookup(x);
  if (!e) throw Error(ErrorCode::OutsideCis, "state lies outside the invariant set");
  return e->u;
}

}  // namespace nncis
