#pragma once

#include <vector>

#include "nncis/boxes.hpp"
#include "nncis/network.hpp"

namespace nncis {

struct AtlasEntry {
  GridBox box;
  Eigen::VectorXd u;
};

enum class SynthStatus { NonEmpty, Empty };

/// Synthesized invariant set with one admissible control per verified box.
class ControlAtlas {
 public:
  ControlAtlas(BoxSet cis, std::vector<AtlasEntry> entries, ControlDomain u_domain);

  const BoxSet& cis() const { return cis_; }
  const GridSpec& grid() const { return cis_.grid(); }
  const std::vector<AtlasEntry>& entries() const { return entries_; }
  const ControlDomain& u_domain() const { return u_domain_; }
  bool empty() const { return entries_.empty(); }

  /// Entry whose closed box contains x (within tol); ties go to the smallest
  /// lexicographic box. Null when x lies outside the set.
  const AtlasEntry* lookup(const Eigen::VectorXd& x, double tol = 1e-9) const;

  int iterations = 0;
  SynthStatus status = SynthStatus::Empty;
  std::vector<BoxSet> history;

 private:
  BoxSet cis_;
  std::vector<AtlasEntry> entries_;
  ControlDomain u_domain_;
  std::vector<int> owner_;  // basis cell -> entry index, or -1
};

/// Feedback law of the atlas; throws OutsideCis when no box contains x.
Eigen::VectorXd atlas_control(const ControlAtlas& atlas, const Eigen::VectorXd& x);

}  // namespace nncis
