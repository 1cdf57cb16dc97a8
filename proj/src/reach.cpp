#include "nncis/reach.hpp"

#include <algorithm>

namespace nncis {

std::pair<Eigen::VectorXd, Eigen::VectorXd> lin_layer(const Eigen::VectorXd& a,
                                                      const Eigen::VectorXd& b,
                                                      const Eigen::MatrixXd& W,
                                                      const Eigen::VectorXd& B) {
  if (a.size() != W.cols() || b.size() != W.cols() || B.size() != W.rows()) {
    throw Error(ErrorCode::DimMismatch, "lin_layer: dimensions do not chain");
  }
  Eigen::VectorXd lo(W.rows());
  Eigen::VectorXd hi(W.rows());
  for (Eigen::Index j = 0; j < W.rows(); ++j) {
    double l = 0.0;
    double h = 0.0;
    for (Eigen::Index q = 0; q < W.cols(); ++q) {
      const double w = W(j, q);
      if (w >= 0.0) {
        l += w * a[q];
        h += w * b[q];
      } else {
        l += w * b[q];
        h += w * a[q];
      }
    }
    lo[j] = l + B[j];
    hi[j] = h + B[j];
  }
  return {std::move(lo), std::move(hi)};
}

ReachResult reach_boxes(const Mlp& m, const RealBox& xk, const RealBox& uk) {
  if (xk.dim() != m.n_x() || uk.dim() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, "reach_boxes: input box dimension differs from network");
  }
  ReachResult r;
  Eigen::VectorXd a(m.n_x() + m.n_u());
  Eigen::VectorXd b(m.n_x() + m.n_u());
  a << xk.lo, uk.lo;
  b << xk.hi, uk.hi;
  for (std::size_t i = 0; i < m.depth(); ++i) {
    auto [lo, hi] = lin_layer(a, b, m.layer(i).weights, m.layer(i).bias);
    r.bounds.pre_lo.push_back(lo);
    r.bounds.pre_hi.push_back(hi);
    if (i + 1 < m.depth()) {
      a = lo.cwiseMax(0.0);
      b = hi.cwiseMax(0.0);
      r.bounds.post_lo.push_back(a);
      r.bounds.post_hi.push_back(b);
    } else {
      r.output = RealBox(std::move(lo), std::move(hi));
    }
  }
  return r;
}

RealBox f_bar_n(const Mlp& m, const RealBox& x0, const ControlDomain& u, int n) {
  if (n < 1) throw Error(ErrorCode::DimMismatch, "f_bar_n: n must be positive");
  RealBox x = x0;
  for (int k = 0; k < n; ++k) x = reach_boxes(m, x, u).output;
  return x;
}

LayerBounds global_bounds(const Mlp& m, const RealBox& x, const ControlDomain& u) {
  return reach_boxes(m, x, u).bounds;
}

std::vector<LayerBounds> horizon_bounds(const Mlp& m, const Eigen::VectorXd& x0,
                                        const ControlDomain& u, int N) {
  if (N < 1) throw Error(ErrorCode::DimMismatch, "horizon_bounds: N must be positive");
  std::vector<LayerBounds> out;
  RealBox x = RealBox::point(x0);
  for (int n = 0; n < N; ++n) {
    auto r = reach_boxes(m, x, u);
    out.push_back(std::move(r.bounds));
    x = std::move(r.output);
  }
  return out;
}

LayerBounds intersect_bounds(const LayerBounds& a, const LayerBounds& b) {
  if (a.depth() != b.depth()) throw Error(ErrorCode::DimMismatch, "intersect_bounds: depth");
  LayerBounds r = a;
  for (std::size_t i = 0; i < a.depth(); ++i) {
    r.pre_lo[i] = a.pre_lo[i].cwiseMax(b.pre_lo[i]);
    r.pre_hi[i] = a.pre_hi[i].cwiseMin(b.pre_hi[i]);
  }
  for (std::size_t i = 0; i < a.post_lo.size(); ++i) {
    r.post_lo[i] = a.post_lo[i].cwiseMax(b.post_lo[i]);
    r.post_hi[i] = a.post_hi[i].cwiseMin(b.post_hi[i]);
  }
  return r;
}

}  // namespace nncis
