#include "nncis/encode.hpp"

#include <algorithm>
#include <cmath>

namespace nncis {
namespace {

double widen(double v) { return 1e-9 * (1.0 + std::abs(v)); }

/// Adds lhs == rhs as a pair of inequalities with shared coefficients.
void add_equality(MipModel& model, const std::vector<Term>& terms, double rhs) {
  model.add_row(terms, Sense::Le, rhs);
  model.add_row(terms, Sense::Ge, rhs);
}

void add_infeasible_marker(MipModel& model) { model.add_range_row({}, 1.0, 1.0); }

RealBox shrink(const RealBox& b, double margin) {
  return {(b.lo.array() + margin).matrix(), (b.hi.array() - margin).matrix()};
}

/// Creates one continuous variable per coordinate with bounds [lo, hi]; when
/// the range is empty (possible only through rounding) the model is marked
/// infeasible.
std::vector<int> add_vars(MipModel& model, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  std::vector<int> ids;
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (lo[j] > hi[j]) {
      add_infeasible_marker(model);
      ids.push_back(model.add_continuous(hi[j], hi[j]));
    } else {
      ids.push_back(model.add_continuous(lo[j], hi[j]));
    }
  }
  return ids;
}

struct Operand {
  int var = -1;        // -1 means constant
  double value = 0.0;  // used when var < 0
};

/// Adds rows out_j = sum_q W(j,q) * in_q + B_j.
void add_affine_rows(MipModel& model, const std::vector<int>& out, const Eigen::MatrixXd& W,
                     const Eigen::VectorXd& B, const std::vector<Operand>& in) {
  for (Eigen::Index j = 0; j < W.rows(); ++j) {
    std::vector<Term> terms{{out[static_cast<std::size_t>(j)], 1.0}};
    double rhs = B[j];
    for (Eigen::Index q = 0; q < W.cols(); ++q) {
      const auto& o = in[static_cast<std::size_t>(q)];
      if (W(j, q) == 0.0) continue;
      if (o.var < 0) {
        rhs += W(j, q) * o.value;
      } else {
        terms.push_back({o.var, -W(j, q)});
      }
    }
    add_equality(model, terms, rhs);
  }
}

std::vector<Operand> vars_as_operands(const std::vector<int>& ids) {
  std::vector<Operand> out;
  for (int id : ids) out.push_back({id, 0.0});
  return out;
}

}  // namespace

ReluBlockVars encode_milc_relu(MipModel& model, const std::vector<int>& ahat,
                               const std::vector<int>& bhat, const Eigen::VectorXd& zlo,
                               const Eigen::VectorXd& zhi) {
  const std::size_t n = ahat.size();
  if (bhat.size() != n || static_cast<std::size_t>(zlo.size()) != n ||
      static_cast<std::size_t>(zhi.size()) != n) {
    throw Error(ErrorCode::DimMismatch, "encode_milc_relu: vector lengths differ");
  }
  ReluBlockVars v{{}, {}, ahat, bhat, {}, {}, {}};
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double lo = zlo[jj];
    const double hi = zhi[jj];
    const int a = model.add_continuous(0.0, std::max(0.0, hi));
    const int b = model.add_continuous(0.0, std::max(0.0, hi));
    const int al = model.add_binary();
    const int be = model.add_binary();
    const int ga = model.add_binary();
    const int ah = ahat[j];
    const int bh = bhat[j];
    model.add_row({{al, 1.0}, {be, 1.0}, {ga, 1.0}}, Sense::Eq, 1.0);
    model.add_row({{a, 1.0}, {ah, -1.0}}, Sense::Ge, 0.0);
    model.add_row({{a, 1.0}, {ga, -hi}}, Sense::Le, 0.0);
    model.add_row({{a, 1.0}, {ah, -1.0}, {al, lo}, {be, lo}}, Sense::Le, 0.0);
    model.add_row({{b, 1.0}, {bh, -1.0}}, Sense::Ge, 0.0);
    model.add_row({{b, 1.0}, {bh, -1.0}, {al, lo}}, Sense::Le, 0.0);
    model.add_row({{b, 1.0}, {be, -hi}, {ga, -hi}}, Sense::Le, 0.0);
    model.add_row({{a, 1.0}, {b, -1.0}}, Sense::Le, 0.0);
    model.add_row({{ah, 1.0}, {bh, -1.0}}, Sense::Le, 0.0);
    v.a.push_back(a);
    v.b.push_back(b);
    v.alpha.push_back(al);
    v.beta.push_back(be);
    v.gamma.push_back(ga);
  }
  return v;
}

InclusionVars encode_milc_inc(MipModel& model, const std::vector<int>& xlo,
                              const std::vector<int>& xhi, const std::vector<OpenBox>& obstacles,
                              const RealBox& domain) {
  const std::size_t n = xlo.size();
  if (xhi.size() != n || static_cast<std::size_t>(domain.dim()) != n) {
    throw Error(ErrorCode::DimMismatch, "encode_milc_inc: dimensions differ");
  }
  InclusionVars inc;
  inc.obstacles = obstacles;
  for (const auto& o : obstacles) {
    if (static_cast<std::size_t>(o.lo.size()) != n) {
      throw Error(ErrorCode::DimMismatch, "encode_milc_inc: obstacle dimension differs");
    }
    std::vector<int> phi;
    std::vector<int> psi;
    std::vector<Term> any;
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      const double dlo = domain.lo[jj];
      const double dhi = domain.hi[jj];
      const double olo = o.lo[jj];
      const double ohi = o.hi[jj];
      const int f = model.add_binary();
      const int s = model.add_binary();
      model.add_row({{f, 1.0}, {s, 1.0}}, Sense::Le, 1.0);
      // phi = 1 puts the box below the obstacle in dimension j.
      model.add_row({{xhi[j], 1.0}, {f, -(olo - dhi)}}, Sense::Le, dhi);
      model.add_row({{xhi[j], 1.0}, {f, olo - dlo}}, Sense::Ge, olo);
      // psi = 1 puts the box above the obstacle in dimension j.
      model.add_row({{xlo[j], 1.0}, {s, -(ohi - dlo)}}, Sense::Ge, dlo);
      model.add_row({{xlo[j], 1.0}, {s, ohi - dhi}}, Sense::Le, ohi);
      any.push_back({f, 1.0});
      any.push_back({s, 1.0});
      phi.push_back(f);
      psi.push_back(s);
    }
    model.add_row(std::move(any), Sense::Ge, 1.0);
    inc.phi.push_back(std::move(phi));
    inc.psi.push_back(std::move(psi));
  }
  return inc;
}

std::vector<OpenBox> prune_obstacles(const RealBox& fbar, const std::vector<OpenBox>& obstacles) {
  std::vector<OpenBox> kept;
  for (const auto& o : obstacles) {
    if (o.closure().intersects(fbar)) kept.push_back(o);
  }
  return kept;
}

std::vector<OpenBox> inflate(const std::vector<OpenBox>& obstacles, double margin) {
  std::vector<OpenBox> out = obstacles;
  for (auto& o : out) {
    o.lo.array() -= margin;
    o.hi.array() += margin;
  }
  return out;
}

std::vector<int> encode_pointwise_relu(MipModel& model, const std::vector<int>& zhat,
                                       const std::vector<int>& z, const std::vector<int>& sigma,
                                       const Eigen::VectorXd& zlo, const Eigen::VectorXd& zhi) {
  const std::size_t n = zhat.size();
  if (z.size() != n || sigma.size() != n || static_cast<std::size_t>(zlo.size()) != n ||
      static_cast<std::size_t>(zhi.size()) != n) {
    throw Error(ErrorCode::DimMismatch, "encode_pointwise_relu: vector lengths differ");
  }
  std::vector<int> rows;
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    rows.push_back(model.add_row({{z[j], 1.0}}, Sense::Ge, 0.0));
    rows.push_back(model.add_row({{z[j], 1.0}, {zhat[j], -1.0}}, Sense::Ge, 0.0));
    rows.push_back(
        model.add_row({{z[j], 1.0}, {zhat[j], -1.0}, {sigma[j], -zlo[jj]}}, Sense::Le, -zlo[jj]));
    rows.push_back(model.add_row({{z[j], 1.0}, {sigma[j], -zhi[jj]}}, Sense::Le, 0.0));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Returnability model

ReturnabilityModel build_returnability(const Mlp& m, const RealBox& boxI, const ControlDomain& u,
                                       const BoxSet& target, const LayerBounds& bounds,
                                       const ReturnabilityOptions& opts) {
  return build_returnability(m, boxI, u, target,
                             complement_open_boxes(target.grid(), target, opts.cover), bounds,
                             opts);
}

ReturnabilityModel build_returnability(const Mlp& m, const RealBox& boxI, const ControlDomain& u,
                                       const BoxSet& target, const std::vector<OpenBox>& cover,
                                       const LayerBounds& bounds, const ReturnabilityOptions& opts) {
  if (target.empty()) throw Error(ErrorCode::EmptyTarget, "returnability target is empty");
  if (boxI.dim() != m.n_x() || u.dim() != m.n_u() ||
      static_cast<int>(target.grid().dim()) != m.n_x() || bounds.depth() != m.depth()) {
    throw Error(ErrorCode::DimMismatch, "build_returnability: dimensions differ");
  }
  ReturnabilityModel r;
  MipModel& model = r.model;
  r.u = add_vars(model, u.lo, u.hi);

  const RealBox domain = shrink(target.grid().domain(), opts.margin);
  std::vector<Operand> in_lo;
  std::vector<Operand> in_hi;
  for (Eigen::Index j = 0; j < m.n_x(); ++j) {
    in_lo.push_back({-1, boxI.lo[j]});
    in_hi.push_back({-1, boxI.hi[j]});
  }
  for (int id : r.u) {
    in_lo.push_back({id, 0.0});
    in_hi.push_back({id, 0.0});
  }

  for (std::size_t i = 0; i < m.depth(); ++i) {
    const Layer& layer = m.layer(i);
    const bool last = i + 1 == m.depth();
    Eigen::VectorXd zlo = bounds.pre_lo[i];
    Eigen::VectorXd zhi = bounds.pre_hi[i];
    for (Eigen::Index j = 0; j < zlo.size(); ++j) {
      zlo[j] -= widen(zlo[j]);
      zhi[j] += widen(zhi[j]);
    }
    if (last) {
      zlo = zlo.cwiseMax(domain.lo);
      zhi = zhi.cwiseMin(domain.hi);
    }
    const std::vector<int> ahat = add_vars(model, zlo, zhi);
    const std::vector<int> bhat = add_vars(model, zlo, zhi);
    // ahat = W+ a + W- b + B and bhat = W+ b + W- a + B, one row pair each.
    for (Eigen::Index j = 0; j < layer.weights.rows(); ++j) {
      for (int side = 0; side < 2; ++side) {
        const auto& pos = side == 0 ? in_lo : in_hi;
        const auto& neg = side == 0 ? in_hi : in_lo;
        const int out = side == 0 ? ahat[static_cast<std::size_t>(j)] : bhat[static_cast<std::size_t>(j)];
        std::vector<Term> terms{{out, 1.0}};
        double rhs = layer.bias[j];
        for (Eigen::Index q = 0; q < layer.weights.cols(); ++q) {
          const double w = layer.weights(j, q);
          if (w == 0.0) continue;
          const Operand& o = w > 0.0 ? pos[static_cast<std::size_t>(q)] : neg[static_cast<std::size_t>(q)];
          if (o.var < 0) {
            rhs += w * o.value;
          } else {
            terms.push_back({o.var, -w});
          }
        }
        add_equality(model, terms, rhs);
      }
    }
    if (last) {
      for (std::size_t j = 0; j < ahat.size(); ++j) {
        model.add_row({{ahat[j], 1.0}, {bhat[j], -1.0}}, Sense::Le, 0.0);
      }
      r.xlo_next = ahat;
      r.xhi_next = bhat;
    } else {
      ReluBlockVars block = encode_milc_relu(model, ahat, bhat, zlo, zhi);
      in_lo = vars_as_operands(block.a);
      in_hi = vars_as_operands(block.b);
      r.relu.push_back(std::move(block));
    }
  }

  std::vector<OpenBox> obstacles = inflate(cover, opts.margin);
  r.obstacles_total = obstacles.size();
  if (opts.prune) {
    obstacles = prune_obstacles(RealBox(bounds.pre_lo.back(), bounds.pre_hi.back()), obstacles);
  }
  r.inclusion = encode_milc_inc(model, r.xlo_next, r.xhi_next, obstacles, domain);

  if (opts.objective == ReturnObjective::L1Center) {
    std::vector<Term> obj;
    for (std::size_t j = 0; j < r.xlo_next.size(); ++j) {
      const double reach = 2.0 * std::max(std::abs(model.lower(r.xlo_next[j])),
                                          std::abs(model.upper(r.xhi_next[j])));
      const int t = model.add_continuous(0.0, reach);
      model.add_row({{t, 1.0}, {r.xlo_next[j], -1.0}, {r.xhi_next[j], -1.0}}, Sense::Ge, 0.0);
      model.add_row({{t, 1.0}, {r.xlo_next[j], 1.0}, {r.xhi_next[j], 1.0}}, Sense::Ge, 0.0);
      obj.push_back({t, 1.0});
    }
    model.set_objective(std::move(obj));
  }
  return r;
}

// ---------------------------------------------------------------------------
// MPC model

Eigen::VectorXd MpcConfig::reference_at(int k, int n_x) const {
  if (reference.empty()) return Eigen::VectorXd::Zero(n_x);
  const auto idx = static_cast<std::size_t>(std::clamp<int>(k, 0, static_cast<int>(reference.size()) - 1));
  return reference[idx];
}

namespace {

Eigen::VectorXd weights_or_zero(const Eigen::VectorXd& w, int n) {
  if (w.size() == 0) return Eigen::VectorXd::Zero(n);
  if (w.size() != n) throw Error(ErrorCode::DimMismatch, "MPC weight vector has wrong length");
  if ((w.array() < 0.0).any()) throw Error(ErrorCode::InvalidBox, "MPC weights must be nonnegative");
  return w;
}

/// Slack s_j >= |w_j (v_j - c_j)| for every positive weight; -1 elsewhere.
std::vector<int> add_l1_slacks(MipModel& model, const std::vector<int>& v, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& center, std::vector<Term>& obj) {
  std::vector<int> ids(v.size(), -1);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (w[jj] <= 0.0) continue;
    const double span = std::max(std::abs(model.lower(v[j]) - center[jj]),
                                 std::abs(model.upper(v[j]) - center[jj]));
    const int s = model.add_continuous(0.0, w[jj] * span * (1.0 + 1e-9) + 1e-12);
    model.add_row({{s, 1.0}, {v[j], -w[jj]}}, Sense::Ge, -w[jj] * center[jj]);
    model.add_row({{s, 1.0}, {v[j], w[jj]}}, Sense::Ge, w[jj] * center[jj]);
    obj.push_back({s, 1.0});
    ids[j] = s;
  }
  return ids;
}

}  // namespace

MpcModel build_mpc(const Mlp& m, const Eigen::VectorXd& x0, const MpcConfig& cfg,
                   const BoxSet& cis, const ControlDomain& u, const Eigen::VectorXd& x_ref) {
  if (cis.empty()) throw Error(ErrorCode::EmptyCis, "MPC needs a nonempty invariant set");
  if (cfg.N < 1) throw Error(ErrorCode::DimMismatch, "MPC horizon must be positive");
  const int nx = m.n_x();
  if (x0.size() != nx || x_ref.size() != nx || u.dim() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, "build_mpc: dimensions differ");
  }
  const RealBox X = cis.grid().domain();
  if (!X.contains(x0, 1e-9)) throw Error(ErrorCode::X0OutsideDomain, "x0 lies outside the state domain");

  const Eigen::VectorXd Q = weights_or_zero(cfg.Q, nx);
  const Eigen::VectorXd QN = weights_or_zero(cfg.QN, nx);
  const Eigen::VectorXd R = weights_or_zero(cfg.R, m.n_u());

  MpcModel out;
  out.x0 = x0;
  out.x_ref = x_ref;
  MipModel& model = out.model;
  const auto hb = horizon_bounds(m, x0, u, cfg.N);
  const auto cover = inflate(complement_open_boxes(cis.grid(), cis, CoverMode::Seamless), cfg.margin);
  const RealBox inc_domain = shrink(X, cfg.margin);

  std::vector<Term> obj;
  const double obj_const = (Q.array() * (x0 - x_ref).array().abs()).sum();

  std::vector<Operand> state;
  for (Eigen::Index j = 0; j < nx; ++j) state.push_back({-1, x0[j]});

  for (int n = 0; n < cfg.N; ++n) {
    MpcStepVars st;
    st.u = add_vars(model, u.lo, u.hi);
    std::vector<Operand> in = state;
    for (int id : st.u) in.push_back({id, 0.0});
    const LayerBounds& lb = hb[static_cast<std::size_t>(n)];
    for (std::size_t i = 0; i < m.depth(); ++i) {
      const bool last = i + 1 == m.depth();
      Eigen::VectorXd zlo = lb.pre_lo[i];
      Eigen::VectorXd zhi = lb.pre_hi[i];
      for (Eigen::Index j = 0; j < zlo.size(); ++j) {
        zlo[j] -= widen(zlo[j]);
        zhi[j] += widen(zhi[j]);
      }
      Eigen::VectorXd vlo = zlo;
      Eigen::VectorXd vhi = zhi;
      if (last) {
        vlo = vlo.cwiseMax(X.lo);
        vhi = vhi.cwiseMin(X.hi);
      }
      std::vector<int> zhat = add_vars(model, vlo, vhi);
      add_affine_rows(model, zhat, m.layer(i).weights, m.layer(i).bias, in);
      st.zhat.push_back(zhat);
      if (last) {
        st.x_next = zhat;
      } else {
        std::vector<int> z;
        std::vector<int> sigma;
        for (Eigen::Index j = 0; j < zlo.size(); ++j) {
          z.push_back(model.add_continuous(0.0, std::max(0.0, zhi[j])));
          sigma.push_back(model.add_binary());
        }
        encode_pointwise_relu(model, zhat, z, sigma, zlo, zhi);
        in = vars_as_operands(z);
        st.z.push_back(std::move(z));
        st.sigma.push_back(std::move(sigma));
      }
    }
    if (cfg.variant == MpcVariant::Full || n == 0) {
      const RealBox fbar(lb.pre_lo.back(), lb.pre_hi.back());
      st.inclusion = encode_milc_inc(model, st.x_next, st.x_next, prune_obstacles(fbar, cover),
                                     inc_domain);
    }
    st.state_weight = n + 1 == cfg.N ? QN : Q;
    st.control_weight = R;
    st.state_slack = add_l1_slacks(model, st.x_next, st.state_weight, x_ref, obj);
    st.control_slack = add_l1_slacks(model, st.u, R, Eigen::VectorXd::Zero(m.n_u()), obj);
    state = vars_as_operands(st.x_next);
    out.steps.push_back(std::move(st));
  }
  model.set_objective(std::move(obj), obj_const);
  return out;
}

std::vector<double> warm_start(const Eigen::VectorXd& x0, const ControlAtlas& atlas, const Mlp& m,
                               const MpcModel& mpc) {
  const MipModel& model = mpc.model;
  std::vector<double> v(static_cast<std::size_t>(model.num_vars()));
  for (int i = 0; i < model.num_vars(); ++i) v[static_cast<std::size_t>(i)] = model.lower(i);
  auto put = [&](int id, double value) { v[static_cast<std::size_t>(id)] = value; };

  auto put_slacks = [&](const std::vector<int>& slacks, const Eigen::VectorXd& w,
                        const Eigen::VectorXd& values, const Eigen::VectorXd& center) {
    for (std::size_t j = 0; j < slacks.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (slacks[j] >= 0) put(slacks[j], w[jj] * std::abs(values[jj] - center[jj]));
    }
  };

  Eigen::VectorXd x = x0;
  for (const auto& st : mpc.steps) {
    const Eigen::VectorXd uk = atlas_control(atlas, x);
    for (std::size_t j = 0; j < st.u.size(); ++j) put(st.u[j], uk[static_cast<Eigen::Index>(j)]);
    const Activations tr = forward_trace(m, x, uk);
    for (std::size_t i = 0; i < st.zhat.size(); ++i) {
      for (std::size_t j = 0; j < st.zhat[i].size(); ++j) {
        put(st.zhat[i][j], tr.pre[i][static_cast<Eigen::Index>(j)]);
      }
    }
    for (std::size_t i = 0; i < st.z.size(); ++i) {
      for (std::size_t j = 0; j < st.z[i].size(); ++j) {
        const double pre = tr.pre[i][static_cast<Eigen::Index>(j)];
        put(st.z[i][j], tr.post[i][static_cast<Eigen::Index>(j)]);
        put(st.sigma[i][j], pre >= 0.0 ? 1.0 : 0.0);
      }
    }
    const Eigen::VectorXd& xn = tr.pre.back();
    for (std::size_t k = 0; k < st.inclusion.obstacles.size(); ++k) {
      const auto& o = st.inclusion.obstacles[k];
      for (std::size_t j = 0; j < st.x_next.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        put(st.inclusion.phi[k][j], xn[jj] <= o.lo[jj] ? 1.0 : 0.0);
        put(st.inclusion.psi[k][j], xn[jj] >= o.hi[jj] ? 1.0 : 0.0);
      }
    }
    put_slacks(st.state_slack, st.state_weight, xn, mpc.x_ref);
    put_slacks(st.control_slack, st.control_weight, uk, Eigen::VectorXd::Zero(uk.size()));
    x = xn;
  }
  return v;
}

double rollout_cost(const Mlp& m, const MpcConfig& cfg, const Eigen::VectorXd& x0,
                    const std::vector<Eigen::VectorXd>& controls, const Eigen::VectorXd& x_ref) {
  const int nx = m.n_x();
  const Eigen::VectorXd Q = weights_or_zero(cfg.Q, nx);
  const Eigen::VectorXd QN = weights_or_zero(cfg.QN, nx);
  const Eigen::VectorXd R = weights_or_zero(cfg.R, m.n_u());
  double cost = (Q.array() * (x0 - x_ref).array().abs()).sum();
  Eigen::VectorXd x = x0;
  for (std::size_t n = 0; n < controls.size(); ++n) {
    x = forward(m, x, controls[n]);
    const Eigen::VectorXd& w = n + 1 == controls.size() ? QN : Q;
    cost += (w.array() * (x - x_ref).array().abs()).sum();
    cost += (R.array() * controls[n].array().abs()).sum();
  }
  return cost;
}

}  // namespace nncis
