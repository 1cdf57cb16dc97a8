#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "nncis/boxes.hpp"

namespace nncis {

struct Layer {
  Eigen::MatrixXd weights;  // n_i x n_{i-1}
  Eigen::VectorXd bias;     // n_i
};

/// ReLU multilayer perceptron x_{k+1} = f(x_k, u_k). Hidden layers apply
/// max(0, .); the last layer is affine.
class Mlp {
 public:
  Mlp() = default;
  /// Validates the layer chain: first layer takes n_x + n_u inputs, the last
  /// produces n_x outputs, all entries finite.
  Mlp(int n_x, int n_u, std::vector<Layer> layers);

  int n_x() const { return n_x_; }
  int n_u() const { return n_u_; }
  /// Number of affine layers (hidden layers + 1).
  std::size_t depth() const { return layers_.size(); }
  const std::vector<Layer>& layers() const { return layers_; }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  /// Width of layer i (0 = input).
  int width(std::size_t i) const;

 private:
  int n_x_ = 0;
  int n_u_ = 0;
  std::vector<Layer> layers_;
};

using ControlDomain = RealBox;

Eigen::VectorXd forward(const Mlp& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

/// Forward pass that also records pre-activations zhat[i] and activations z[i]
/// for every layer i = 1..depth (z of the last layer equals zhat).
struct Activations {
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> post;
};
Activations forward_trace(const Mlp& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u);

Mlp load_mlp(const std::filesystem::path& path);
Mlp load_mlp(std::istream& in);
Mlp mlp_from_json_text(const std::string& text);
std::string mlp_to_json_text(const Mlp& m);
void save_mlp(const Mlp& m, const std::filesystem::path& path);

/// Exact one-hidden-layer ReLU representation of x+ = A x + Bu u + c, using
/// t = max(0, t) - max(0, -t).
Mlp linear_to_mlp(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Bu, const Eigen::VectorXd& c);

}  // namespace nncis
