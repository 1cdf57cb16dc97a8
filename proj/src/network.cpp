#include "nncis/network.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_util.hpp"

namespace nncis {

Mlp::Mlp(int n_x, int n_u, std::vector<Layer> layers)
    : n_x_(n_x), n_u_(n_u), layers_(std::move(layers)) {
  if (n_x <= 0 || n_u < 0) throw Error(ErrorCode::DimMismatch, "n_x must be positive, n_u nonnegative");
  if (layers_.empty()) throw Error(ErrorCode::DimMismatch, "network has no layers");
  Eigen::Index prev = n_x + n_u;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    std::ostringstream where;
    where << "layer " << i + 1;
    if (l.weights.cols() != prev) {
      throw Error(ErrorCode::DimMismatch, where.str() + ": weight column count " +
                                              std::to_string(l.weights.cols()) + " != " +
                                              std::to_string(prev));
    }
    if (l.bias.size() != l.weights.rows()) {
      throw Error(ErrorCode::DimMismatch, where.str() + ": bias length differs from row count");
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw Error(ErrorCode::SchemaError, where.str() + ": non-finite weight or bias");
    }
    prev = l.weights.rows();
  }
  if (prev != n_x) {
    throw Error(ErrorCode::DimMismatch, "output layer width " + std::to_string(prev) + " != n_x");
  }
}

int Mlp::width(std::size_t i) const {
  if (i == 0) return n_x_ + n_u_;
  return static_cast<int>(layers_[i - 1].weights.rows());
}

namespace {

Eigen::VectorXd stack_input(const Mlp& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  if (x.size() != m.n_x() || u.size() != m.n_u()) {
    throw Error(ErrorCode::DimMismatch, "state or control dimension differs from network");
  }
  Eigen::VectorXd z(m.n_x() + m.n_u());
  z << x, u;
  return z;
}

}  // namespace

Eigen::VectorXd forward(const Mlp& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  Eigen::VectorXd z = stack_input(m, x, u);
  for (std::size_t i = 0; i < m.depth(); ++i) {
    const auto& l = m.layer(i);
    Eigen::VectorXd next = l.weights * z + l.bias;
    if (i + 1 < m.depth()) next = next.cwiseMax(0.0);
    z = std::move(next);
  }
  return z;
}

Activations forward_trace(const Mlp& m, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  Activations out;
  Eigen::VectorXd z = stack_input(m, x, u);
  for (std::size_t i = 0; i < m.depth(); ++i) {
    const auto& l = m.layer(i);
    Eigen::VectorXd pre = l.weights * z + l.bias;
    z = i + 1 < m.depth() ? Eigen::VectorXd(pre.cwiseMax(0.0)) : pre;
    out.pre.push_back(std::move(pre));
    out.post.push_back(z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

Mlp mlp_from_json(const nlohmann::json& doc) {
  using detail::require;
  if (!doc.is_object()) throw Error(ErrorCode::SchemaError, "model: document is not an object");
  if (doc.contains("format") && doc["format"] != "nncis-mlp") {
    throw Error(ErrorCode::SchemaError, "model: format must be \"nncis-mlp\"");
  }
  const int n_x = require<int>(doc, "n_x", "model");
  const int n_u = require<int>(doc, "n_u", "model");
  const auto& jl = detail::require_field(doc, "layers", "model");
  if (!jl.is_array()) throw Error(ErrorCode::SchemaError, "model: layers must be an array");
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string where = "model.layers[" + std::to_string(i) + "]";
    const auto& e = jl[i];
    const auto rows = require<Eigen::Index>(e, "rows", where);
    const auto cols = require<Eigen::Index>(e, "cols", where);
    const auto w = require<std::vector<double>>(e, "weights", where);
    const auto b = require<std::vector<double>>(e, "bias", where);
    if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(w.size()) != rows * cols) {
      throw Error(ErrorCode::SchemaError, where + ".weights: expected rows*cols entries");
    }
    if (static_cast<Eigen::Index>(b.size()) != rows) {
      throw Error(ErrorCode::SchemaError, where + ".bias: expected rows entries");
    }
    Layer l;
    l.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data(), rows, cols);
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
    layers.push_back(std::move(l));
  }
  return Mlp(n_x, n_u, std::move(layers));
}

nlohmann::json mlp_to_json(const Mlp& m) {
  nlohmann::json doc;
  doc["format"] = "nncis-mlp";
  doc["version"] = 1;
  doc["n_x"] = m.n_x();
  doc["n_u"] = m.n_u();
  doc["layers"] = nlohmann::json::array();
  for (const auto& l : m.layers()) {
    nlohmann::json e;
    e["rows"] = l.weights.rows();
    e["cols"] = l.weights.cols();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) w.push_back(l.weights(r, c));
    }
    e["weights"] = w;
    e["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    doc["layers"].push_back(std::move(e));
  }
  return doc;
}

Mlp mlp_from_json_text(const std::string& text) {
  return mlp_from_json(detail::parse_json(text, "model"));
}

std::string mlp_to_json_text(const Mlp& m) { return mlp_to_json(m).dump(2); }

Mlp load_mlp(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return mlp_from_json_text(ss.str());
}

Mlp load_mlp(const std::filesystem::path& path) {
  return mlp_from_json(detail::read_json_file(path));
}

void save_mlp(const Mlp& m, const std::filesystem::path& path) {
  detail::write_text_file(path, mlp_to_json_text(m) + "\n");
}

Mlp linear_to_mlp(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Bu, const Eigen::VectorXd& c) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Bu.rows() != n || c.size() != n) {
    throw Error(ErrorCode::DimMismatch, "linear_to_mlp: A must be square with matching Bu and c");
  }
  const Eigen::Index nu = Bu.cols();
  Layer hidden;
  hidden.weights.resize(2 * n, n + nu);
  hidden.weights << A, Bu, -A, -Bu;
  hidden.bias.resize(2 * n);
  hidden.bias << c, -c;
  Layer out;
  out.weights.resize(n, 2 * n);
  out.weights << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  out.bias = Eigen::VectorXd::Zero(n);
  return Mlp(static_cast<int>(n), static_cast<int>(nu), {hidden, out});
}

}  // namespace nncis
