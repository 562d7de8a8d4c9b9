#include "slicesim/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slicesim/rng.hpp"

namespace slicesim {

namespace {

constexpr int kCheckpointVersion = 1;

Matrix apply_activation(const Matrix& z, Activation act) {
  if (act == Activation::Relu) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative of the activation expressed through the pre-activation.
Matrix activation_grad(const Matrix& z, Activation act) {
  if (act == Activation::Relu)
    return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - z.array().tanh().square()).matrix();
}

void check_finite(const Matrix& m, int layer, const char* what) {
  if (!m.allFinite()) {
    std::ostringstream oss;
    oss << "non-finite " << what << " at layer " << layer;
    throw NumericError(oss.str());
  }
}

}  // namespace

void ModelParams::validate() const {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("ModelParams: need at least input and output sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("ModelParams: non-positive layer size");
  if (layer_sizes.back() != 1)
    throw std::invalid_argument("ModelParams: output layer must have size 1");
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
    throw ShapeError("ModelParams: layer count mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l])
      throw ShapeError("ModelParams: weight shape does not chain");
    if (biases[l].size() != layer_sizes[l + 1])
      throw ShapeError("ModelParams: bias shape does not chain");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw std::invalid_argument("ModelParams: non-finite entries");
  }
}

ModelParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed,
                        Activation activation) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_params: need at least input and output sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("init_params: non-positive layer size");
  if (layer_sizes.back() != 1)
    throw std::invalid_argument("init_params: output layer must have size 1");

  ModelParams p;
  p.layer_sizes = layer_sizes;
  p.activation = activation;
  CounterRng rng(CounterRng::derive_key({seed, 0x1417ULL}));
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    int fan_in = layer_sizes[l];
    int fan_out = layer_sizes[l + 1];
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vector::Zero(fan_out));
  }
  return p;
}

ForwardTrace forward_trace(const ModelParams& params, const Matrix& X) {
  if (X.cols() != params.input_dim())
    throw ShapeError("forward: input width does not match model");
  ForwardTrace t;
  int n = params.n_layers();
  t.pre.reserve(n);
  t.act.reserve(n);
  const Matrix* cur = &X;
  for (int l = 0; l < n; ++l) {
    Matrix z = (*cur * params.weights[l].transpose()).rowwise() +
               params.biases[l].transpose();
    t.pre.push_back(std::move(z));
    if (l + 1 < n)
      t.act.push_back(apply_activation(t.pre.back(), params.activation));
    else
      t.act.push_back(t.pre.back());  // identity output
    cur = &t.act.back();
  }
  return t;
}

Vector forward(const ModelParams& params, const Matrix& X) {
  ForwardTrace t = forward_trace(params, X);
  return t.act.back().col(0);
}

double forward_one(const ModelParams& params, const RowVector& x) {
  Matrix X = x;
  return forward(params, X)(0);
}

double mse_loss(const Vector& preds, const Vector& targets) {
  if (preds.size() != targets.size())
    throw ShapeError("mse_loss: length mismatch");
  if (preds.size() == 0) throw std::invalid_argument("mse_loss: empty input");
  return (preds - targets).squaredNorm() / static_cast<double>(preds.size());
}

void grad_params_seeded(const ModelParams& params, const Matrix& X,
                        const ForwardTrace& trace, const Vector& seeds,
                        std::vector<Matrix>& d_weights, std::vector<Vector>& d_biases) {
  int n = params.n_layers();
  if (seeds.size() != X.rows()) throw ShapeError("grad_params_seeded: seed length");
  d_weights.resize(n);
  d_biases.resize(n);

  Matrix delta = seeds;  // D x 1 at the output
  for (int l = n - 1; l >= 0; --l) {
    const Matrix& below = (l == 0) ? X : trace.act[l - 1];
    d_weights[l] = delta.transpose() * below;
    d_biases[l] = delta.colwise().sum().transpose();
    check_finite(d_weights[l], l, "weight gradient");
    if (l > 0)
      delta = (delta * params.weights[l]).cwiseProduct(
          activation_grad(trace.pre[l - 1], params.activation));
  }
}

Matrix grad_inputs_seeded(const ModelParams& params, const ForwardTrace& trace,
                          const Vector& seeds) {
  int n = params.n_layers();
  Matrix delta = seeds;
  for (int l = n - 1; l > 0; --l) {
    delta = (delta * params.weights[l]).cwiseProduct(
        activation_grad(trace.pre[l - 1], params.activation));
    check_finite(delta, l - 1, "input gradient");
  }
  return delta * params.weights[0];
}

std::pair<double, GradientBundle> backward(const ModelParams& params, const Matrix& X,
                                           const Vector& targets) {
  if (X.rows() != targets.size()) throw ShapeError("backward: batch/target mismatch");
  ForwardTrace trace = forward_trace(params, X);
  Vector preds = trace.act.back().col(0);
  double loss = mse_loss(preds, targets);

  GradientBundle g;
  Vector loss_seeds = 2.0 * (preds - targets) / static_cast<double>(X.rows());
  grad_params_seeded(params, X, trace, loss_seeds, g.d_weights, g.d_biases);
  g.d_input = grad_inputs_seeded(params, trace, Vector::Ones(X.rows()));
  return {loss, std::move(g)};
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto& w : z.weights) w.setZero();
  for (auto& b : z.biases) b.setZero();
  return z;
}

void axpy_params(double a, const ModelParams& x, ModelParams& y) {
  if (!same_shape(x, y)) throw ShapeError("axpy_params: shape mismatch");
  for (std::size_t l = 0; l < x.weights.size(); ++l) {
    y.weights[l] += a * x.weights[l];
    y.biases[l] += a * x.biases[l];
  }
}

void scale_params(ModelParams& p, double a) {
  for (auto& w : p.weights) w *= a;
  for (auto& b : p.biases) b *= a;
}

double max_abs_param(const ModelParams& p) {
  double m = 0.0;
  for (const auto& w : p.weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : p.biases)
    if (b.size() > 0) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

bool same_shape(const ModelParams& a, const ModelParams& b) {
  if (a.layer_sizes != b.layer_sizes || a.weights.size() != b.weights.size())
    return false;
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (a.weights[l].rows() != b.weights[l].rows() ||
        a.weights[l].cols() != b.weights[l].cols() ||
        a.biases[l].size() != b.biases[l].size())
      return false;
  }
  return true;
}

std::string params_to_json(const ModelParams& params) {
  nlohmann::json doc;
  doc["format"] = "slicesim-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["layer_sizes"] = params.layer_sizes;
  doc["activation"] = to_string(params.activation);
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    nlohmann::json layer;
    std::vector<std::vector<double>> w(params.weights[l].rows());
    for (Eigen::Index r = 0; r < params.weights[l].rows(); ++r) {
      w[r].assign(params.weights[l].row(r).begin(), params.weights[l].row(r).end());
    }
    layer["weights"] = w;
    layer["biases"] = std::vector<double>(params.biases[l].begin(), params.biases[l].end());
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  return doc.dump(2);
}

ModelParams params_from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  if (doc.value("format", "") != "slicesim-checkpoint")
    throw std::runtime_error("params_from_json: not a checkpoint document");
  if (doc.value("version", 0) != kCheckpointVersion)
    throw std::runtime_error("params_from_json: unsupported checkpoint version");
  ModelParams p;
  p.layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
  p.activation = activation_from_string(doc.at("activation").get<std::string>());
  for (const auto& layer : doc.at("layers")) {
    auto w = layer.at("weights").get<std::vector<std::vector<double>>>();
    auto b = layer.at("biases").get<std::vector<double>>();
    if (w.empty()) throw std::runtime_error("params_from_json: empty weight matrix");
    Matrix wm(static_cast<Eigen::Index>(w.size()), static_cast<Eigen::Index>(w[0].size()));
    for (std::size_t r = 0; r < w.size(); ++r) {
      if (w[r].size() != w[0].size())
        throw std::runtime_error("params_from_json: ragged weight matrix");
      for (std::size_t c = 0; c < w[r].size(); ++c)
        wm(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = w[r][c];
    }
    p.weights.push_back(std::move(wm));
    p.biases.push_back(Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size())));
  }
  p.validate();
  return p;
}

void save_params(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_params: cannot open " + path);
  out << params_to_json(params);
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_params: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

}  // namespace slicesim
