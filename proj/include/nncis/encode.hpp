#pragma once

#include <vector>

#include "nncis/atlas.hpp"
#include "nncis/mip.hpp"
#include "nncis/reach.hpp"

namespace nncis {

/// Interval ReLU block variables for one hidden layer.
struct ReluBlockVars {
  std::vector<int> a, b;
  std::vector<int> ahat, bhat;
  std::vector<int> alpha, beta, gamma;
};

/// Box-inclusion binaries, one (phi, psi) pair of length n_x per obstacle.
struct InclusionVars {
  std::vector<OpenBox> obstacles;
  std::vector<std::vector<int>> phi;
  std::vector<std::vector<int>> psi;
};

/// Exact encoding of [a, b] = max(0, [ahat, bhat]) given zlo <= ahat <= bhat <= zhi.
/// Creates a, b and the three activation binaries per neuron.
ReluBlockVars encode_milc_relu(MipModel& model, const std::vector<int>& ahat,
                               const std::vector<int>& bhat, const Eigen::VectorXd& zlo,
                               const Eigen::VectorXd& zhi);

/// Rows forcing the box [xlo, xhi] inside `domain` and outside every open
/// obstacle. Pass the same ids for xlo and xhi to constrain a point.
InclusionVars encode_milc_inc(MipModel& model, const std::vector<int>& xlo,
                              const std::vector<int>& xhi, const std::vector<OpenBox>& obstacles,
                              const RealBox& domain);

/// Obstacles whose closure meets fbar.
std::vector<OpenBox> prune_obstacles(const RealBox& fbar, const std::vector<OpenBox>& obstacles);

/// Obstacles grown by `margin` on every side.
std::vector<OpenBox> inflate(const std::vector<OpenBox>& obstacles, double margin);

/// z = max(0, zhat) through one binary per neuron.
std::vector<int> encode_pointwise_relu(MipModel& model, const std::vector<int>& zhat,
                                       const std::vector<int>& z, const std::vector<int>& sigma,
                                       const Eigen::VectorXd& zlo, const Eigen::VectorXd& zhi);

enum class ReturnObjective { Feasibility, L1Center };

struct ReturnabilityOptions {
  ReturnObjective objective = ReturnObjective::Feasibility;
  /// Obstacles are grown and the domain shrunk by this amount, so accepted
  /// boxes keep a strictly positive distance from the complement.
  double margin = 0.0;
  CoverMode cover = CoverMode::Runs;
  bool prune = true;
};

struct ReturnabilityModel {
  MipModel model;
  std::vector<int> u;
  std::vector<int> xlo_next;
  std::vector<int> xhi_next;
  std::vector<ReluBlockVars> relu;
  InclusionVars inclusion;
  std::size_t obstacles_total = 0;
};

/// Mixed-integer model whose feasible points are controls u in U that send
/// every state of boxI into `target` (under interval propagation). `bounds`
/// supplies the big-M values.
ReturnabilityModel build_returnability(const Mlp& m, const RealBox& boxI, const ControlDomain& u,
                                       const BoxSet& target, const LayerBounds& bounds,
                                       const ReturnabilityOptions& opts = {});
/// Variant taking the precomputed complement cover of the target.
ReturnabilityModel build_returnability(const Mlp& m, const RealBox& boxI, const ControlDomain& u,
                                       const BoxSet& target, const std::vector<OpenBox>& cover,
                                       const LayerBounds& bounds, const ReturnabilityOptions& opts);

enum class MpcVariant { FirstStep, Full };

struct MpcConfig {
  int N = 5;
  Eigen::VectorXd Q;
  Eigen::VectorXd R;
  Eigen::VectorXd QN;
  MpcVariant variant = MpcVariant::FirstStep;
  /// Step-indexed reference with last-value hold; empty means the origin.
  std::vector<Eigen::VectorXd> reference;
  bool use_warm_start = true;
  /// Obstacle growth for the invariant-set rows (see ReturnabilityOptions).
  double margin = 1e-7;
  MipConfig solver;

  Eigen::VectorXd reference_at(int k, int n_x) const;
};

/// Per-step variable layout of an MPC model.
struct MpcStepVars {
  std::vector<int> u;
  std::vector<int> x_next;
  std::vector<std::vector<int>> zhat;  // per layer (last layer aliases x_next)
  std::vector<std::vector<int>> z;     // per hidden layer
  std::vector<std::vector<int>> sigma; // per hidden layer
  std::vector<int> state_slack;        // |Q (x_next - x_r)| (QN on the last step)
  std::vector<int> control_slack;      // |R u|
  Eigen::VectorXd state_weight;
  Eigen::VectorXd control_weight;
  InclusionVars inclusion;
};

struct MpcModel {
  MipModel model;
  std::vector<MpcStepVars> steps;
  Eigen::VectorXd x0;
  Eigen::VectorXd x_ref;
};

MpcModel build_mpc(const Mlp& m, const Eigen::VectorXd& x0, const MpcConfig& cfg,
                   const BoxSet& cis, const ControlDomain& u, const Eigen::VectorXd& x_ref);

/// Assignment obtained by rolling the atlas feedback law over the horizon.
std::vector<double> warm_start(const Eigen::VectorXd& x0, const ControlAtlas& atlas, const Mlp& m,
                               const MpcModel& mpc);

/// L1 cost of a control sequence under the model's weights and reference.
double rollout_cost(const Mlp& m, const MpcConfig& cfg, const Eigen::VectorXd& x0,
                    const std::vector<Eigen::VectorXd>& controls, const Eigen::VectorXd& x_ref);

}  // namespace nncis
