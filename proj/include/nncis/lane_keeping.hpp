#pragma once

#include "nncis/io.hpp"

namespace nncis {

/// Grid, control bounds and safe box of the lane-keeping benchmark in the
/// (y, y + l1 theta) coordinates. The second state axis is widened to the
/// nearest grid line beyond pi/2 measured from the safe box, so that the safe
/// box is a union of basis cells.
Scenario lane_keeping_scenario(const LaneKeepingParams& p = {});

/// Exact ReLU network of the small-angle kinematics
///   y+ = y + v dt theta,  theta+ = theta + (v dt / l1) u
/// expressed in the (y, y + l1 theta) coordinates.
Mlp lane_keeping_model(const LaneKeepingParams& p = {});

/// The linear map (A, Bu) behind lane_keeping_model.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lane_keeping_linear(const LaneKeepingParams& p = {});

}  // namespace nncis
