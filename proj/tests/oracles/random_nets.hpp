#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "nncis/network.hpp"

namespace oracle {

/// Random ReLU network with the given hidden widths and Gaussian weights.
inline nncis::Mlp random_mlp(int n_x, int n_u, const std::vector<int>& hidden, std::mt19937_64& rng,
                             double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<nncis::Layer> layers;
  int prev = n_x + n_u;
  std::vector<int> widths = hidden;
  widths.push_back(n_x);
  for (int w : widths) {
    nncis::Layer l;
    l.weights.resize(w, prev);
    l.bias.resize(w);
    for (int r = 0; r < w; ++r) {
      for (int c = 0; c < prev; ++c) l.weights(r, c) = g(rng) / std::sqrt(double(prev));
      l.bias(r) = 0.3 * g(rng);
    }
    layers.push_back(std::move(l));
    prev = w;
  }
  return nncis::Mlp(n_x, n_u, std::move(layers));
}

inline Eigen::VectorXd sample_box(const nncis::RealBox& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(b.dim());
  for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = b.lo(j) + unit(rng) * (b.hi(j) - b.lo(j));
  return x;
}

/// Interval image by enumerating every vertex of the input box. Sums run in
/// column order, then the bias, so extreme vertices reproduce sign-split sums.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> vertex_image(const Eigen::VectorXd& a,
                                                                const Eigen::VectorXd& b,
                                                                const Eigen::MatrixXd& W,
                                                                const Eigen::VectorXd& B) {
  const auto n = a.size();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(W.rows(), std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (Eigen::Index j = 0; j < W.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index q = 0; q < n; ++q) s += W(j, q) * ((mask >> q) & 1u ? b(q) : a(q));
      s += B(j);
      lo(j) = std::min(lo(j), s);
      hi(j) = std::max(hi(j), s);
    }
  }
  return {lo, hi};
}

}  // namespace oracle
