#pragma once

#include <cstdint>
#include <vector>

#include "nncis/encode.hpp"

namespace nncis {

struct StepDiagnostics {
  bool feasible = false;
  bool fallback = false;
  MipStatus status = MipStatus::Infeasible;
  double objective = 0.0;
  /// Cost of the atlas-rolled plan used as warm start (NaN when unused).
  double warm_objective = std::numeric_limits<double>::quiet_NaN();
  double solve_ms = 0.0;
  std::int64_t nodes = 0;
};

struct Trajectory {
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> controls;
  std::vector<StepDiagnostics> steps;
  std::vector<bool> in_cis;  // one flag per state
};

/// One receding-horizon step: solves the MPC model at x_k and returns the
/// first control. Falls back to the atlas law (flagged) if the solve fails.
std::pair<Eigen::VectorXd, StepDiagnostics> mpc_step(const Mlp& m, const ControlAtlas& atlas,
                                                     const MpcConfig& cfg,
                                                     const Eigen::VectorXd& x_k, int k);

Trajectory simulate(const Mlp& m, const ControlAtlas& atlas, const MpcConfig& cfg,
                    const Eigen::VectorXd& x0, int steps);

}  // namespace nncis
