#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nncis/atlas.hpp"
#include "nncis/encode.hpp"

namespace nncis {

struct SynthProgress {
  int iteration = 0;
  std::int64_t cells = 0;
  std::int64_t verified = 0;
  std::int64_t partitioned = 0;
  std::int64_t discarded = 0;
  std::int64_t solver_calls = 0;
};

struct SynthOptions {
  /// Worker threads for box verification; 0 uses the hardware concurrency.
  int jobs = 1;
  bool keep_history = false;
  ReturnObjective objective = ReturnObjective::Feasibility;
  /// Robustness margin between accepted reachable boxes and the complement.
  double margin = 1e-6;
  /// Accept a box without a solve when every control keeps it inside.
  bool interval_shortcut = true;
  MipConfig solver;
  std::function<void(const SynthProgress&)> progress;
};

struct VerifyOutcome {
  std::vector<AtlasEntry> verified;
  std::vector<GridBox> undetermined;
  std::int64_t solver_calls = 0;
  std::int64_t limit_hits = 0;
};

/// Checks each box for a single control that returns it into `target`.
/// Output order follows input order.
VerifyOutcome returnable_verification(const Mlp& m, const std::vector<GridBox>& boxes,
                                      const BoxSet& target, const ControlDomain& u,
                                      const SynthOptions& opts = {});

struct OneStepResult {
  BoxSet subset;
  std::vector<AtlasEntry> entries;
  SynthProgress counts;
};

/// Largest union of verified boxes obtained by verifying, splitting failed
/// boxes and discarding failed basis cells.
OneStepResult one_step_returnable_q(const Mlp& m, const BoxSet& i_set, const BoxSet& target,
                                    const ControlDomain& u, const SynthOptions& opts = {});

/// Iterates A_{i+1} = Q(A_i, A_i) from the safe set to a fixed point.
ControlAtlas synthesize_cis(const Mlp& m, const BoxSet& safe, const ControlDomain& u,
                            const SynthOptions& opts = {});

std::int64_t termination_bound(const BoxSet& safe);

struct CertificateReport {
  std::size_t checked = 0;
  std::vector<std::size_t> failed;  // atlas entry indices
  bool ok() const { return failed.empty(); }
};

/// Independent check: each stored control lies in U and maps its box into
/// the invariant set under interval propagation.
CertificateReport certify_atlas(const Mlp& m, const ControlAtlas& atlas);

struct RolloutReport {
  std::size_t starts = 0;
  std::size_t exits = 0;
};

/// Closed-loop simulation under the atlas law from every basis-cell center.
RolloutReport closed_loop_rollouts(const Mlp& m, const ControlAtlas& atlas, int steps);

/// Center points of all basis cells of a set.
std::vector<Eigen::VectorXd> cell_centers(const BoxSet& s);

}  // namespace nncis
