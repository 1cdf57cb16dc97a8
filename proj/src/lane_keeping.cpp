#include "nncis/lane_keeping.hpp"

#include <cmath>
#include <numbers>

namespace nncis {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> lane_keeping_linear(const LaneKeepingParams& p) {
  const double c = p.v * p.dt / p.l1;
  Eigen::MatrixXd A(2, 2);
  A << 1.0 - c, c, -c, 1.0 + c;
  Eigen::MatrixXd Bu(2, 1);
  Bu << 0.0, p.v * p.dt;
  return {A, Bu};
}

Mlp lane_keeping_model(const LaneKeepingParams& p) {
  auto [A, Bu] = lane_keeping_linear(p);
  return linear_to_mlp(A, Bu, Eigen::VectorXd::Zero(2));
}

Scenario lane_keeping_scenario(const LaneKeepingParams& p) {
  if (!(p.w > p.l2) || p.divisor <= 0) {
    throw Error(ErrorCode::DegenerateDomain, "lane width must exceed vehicle width");
  }
  Scenario s;
  s.lane_keeping = p;
  s.d_min = (p.w - p.l2) / p.divisor;
  const double half_safe = 0.5 * (p.w - p.l2);
  // Cells from the safe edge to pi/2, rounded up.
  const double extra = std::ceil((std::numbers::pi / 2 - half_safe) / s.d_min - 1e-9);
  const double y_edge = p.w - p.l2;
  const double t_edge = half_safe + std::max(0.0, extra) * s.d_min;
  s.state_lower = Eigen::Vector2d(-y_edge, -t_edge);
  s.state_upper = Eigen::Vector2d(y_edge, t_edge);
  const double u_max = p.u_max_deg * std::numbers::pi / 180.0;
  s.control = RealBox(Eigen::VectorXd::Constant(1, -u_max), Eigen::VectorXd::Constant(1, u_max));
  s.safe_boxes.emplace_back(Eigen::Vector2d(-half_safe, -half_safe),
                            Eigen::Vector2d(half_safe, half_safe));
  return s;
}

}  // namespace nncis
