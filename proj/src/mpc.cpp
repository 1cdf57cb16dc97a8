#include "nncis/mpc.hpp"

#include <algorithm>

namespace nncis {

std::pair<Eigen::VectorXd, StepDiagnostics> mpc_step(const Mlp& m, const ControlAtlas& atlas,
                                                     const MpcConfig& cfg,
                                                     const Eigen::VectorXd& x_k, int k) {
  StepDiagnostics diag;
  const Eigen::VectorXd x_ref = cfg.reference_at(k, m.n_x());
  const bool in_cis = atlas.lookup(x_k) != nullptr;
  MpcModel mpc = build_mpc(m, x_k, cfg, atlas.cis(), atlas.u_domain(), x_ref);
  if (cfg.use_warm_start && in_cis) {
    std::vector<double> ws = warm_start(x_k, atlas, m, mpc);
    diag.warm_objective = mpc.model.evaluate_objective(ws);
    mpc.model.set_initial(std::move(ws));
  }
  const MipResult sol = mip_solve(mpc.model, cfg.solver);
  diag.status = sol.status;
  diag.solve_ms = sol.solve_ms;
  diag.nodes = sol.nodes;
  const ControlDomain& U = atlas.u_domain();
  if (sol.has_solution()) {
    Eigen::VectorXd u(m.n_u());
    const auto& ids = mpc.steps.front().u;
    for (int j = 0; j < m.n_u(); ++j) {
      u[j] = std::clamp(sol.x[static_cast<std::size_t>(ids[static_cast<std::size_t>(j)])], U.lo[j],
                        U.hi[j]);
    }
    diag.feasible = true;
    diag.objective = sol.objective;
    return {u, diag};
  }
  if (!in_cis) throw Error(ErrorCode::OutsideCis, "MPC infeasible and state lies outside the invariant set");
  diag.fallback = true;
  return {atlas_control(atlas, x_k), diag};
}

Trajectory simulate(const Mlp& m, const ControlAtlas& atlas, const MpcConfig& cfg,
                    const Eigen::VectorXd& x0, int steps) {
  Trajectory t;
  t.states.push_back(x0);
  t.in_cis.push_back(atlas.lookup(x0) != nullptr);
  Eigen::VectorXd x = x0;
  for (int k = 0; k < steps; ++k) {
    auto [u, diag] = mpc_step(m, atlas, cfg, x, k);
    x = forward(m, x, u);
    t.controls.push_back(std::move(u));
    t.steps.push_back(diag);
    t.states.push_back(x);
    t.in_cis.push_back(atlas.lookup(x) != nullptr);
  }
  return t;
}

}  // namespace nncis
