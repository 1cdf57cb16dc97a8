#pragma once

#include <vector>

#include "nncis/network.hpp"

namespace nncis {

/// Interval bounds per layer. pre_lo/pre_hi[i] bound the pre-activation of
/// layer i+1; post_lo/post_hi[i] bound its ReLU output (hidden layers only).
struct LayerBounds {
  std::vector<Eigen::VectorXd> pre_lo;
  std::vector<Eigen::VectorXd> pre_hi;
  std::vector<Eigen::VectorXd> post_lo;
  std::vector<Eigen::VectorXd> post_hi;

  std::size_t depth() const { return pre_lo.size(); }
};

struct ReachResult {
  LayerBounds bounds;
  RealBox output;
};

/// Interval image of z in [a, b] under W z + B (sign-split sums).
std::pair<Eigen::VectorXd, Eigen::VectorXd> lin_layer(const Eigen::VectorXd& a,
                                                      const Eigen::VectorXd& b,
                                                      const Eigen::MatrixXd& W,
                                                      const Eigen::VectorXd& B);

ReachResult reach_boxes(const Mlp& m, const RealBox& xk, const RealBox& uk);

/// Output box after n applications with the full control domain.
RealBox f_bar_n(const Mlp& m, const RealBox& x0, const ControlDomain& u, int n);

LayerBounds global_bounds(const Mlp& m, const RealBox& x, const ControlDomain& u);

/// Bounds for prediction steps 0..N-1, seeded from the point x0.
std::vector<LayerBounds> horizon_bounds(const Mlp& m, const Eigen::VectorXd& x0,
                                        const ControlDomain& u, int N);

/// Elementwise intersection of two bound sets (both must be sound).
LayerBounds intersect_bounds(const LayerBounds& a, const LayerBounds& b);

}  // namespace nncis
