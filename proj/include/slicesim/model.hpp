#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/common.hpp"

namespace slicesim {

/// Feedforward regressor parameters. Hidden layers use `activation`, the
/// scalar output is linear. Treated as immutable: training steps build new
/// instances.
struct ModelParams {
  std::vector<int> layer_sizes;        // {Q, hidden..., 1}
  std::vector<Matrix> weights;         // layer l: (size_{l+1} x size_l)
  std::vector<Vector> biases;
  Activation activation = Activation::Relu;

  int input_dim() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  int n_layers() const { return static_cast<int>(weights.size()); }
  void validate() const;
};

/// Gradients of the batch MSE w.r.t. every parameter, plus the per-sample
/// gradient of the model output w.r.t. its input row (consumed by the
/// attribution methods).
struct GradientBundle {
  std::vector<Matrix> d_weights;
  std::vector<Vector> d_biases;
  Matrix d_input;  // D x Q, row i = df(x_i)/dx
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
ModelParams init_params(const std::vector<int>& layer_sizes, std::uint64_t seed,
                        Activation activation = Activation::Relu);

Vector forward(const ModelParams& params, const Matrix& X);
double forward_one(const ModelParams& params, const RowVector& x);

double mse_loss(const Vector& preds, const Vector& targets);

std::pair<double, GradientBundle> backward(const ModelParams& params, const Matrix& X,
                                           const Vector& targets);

// --- low-level reverse-mode engine ---------------------------------------

/// Cached forward pass over a batch (pre-activations + activations).
struct ForwardTrace {
  std::vector<Matrix> pre;   // Z_l, D x size_{l+1}
  std::vector<Matrix> act;   // act(Z_l); last layer is identity
};

ForwardTrace forward_trace(const ModelParams& params, const Matrix& X);

/// Gradient of sum_i seeds_i * f(x_i) with respect to every parameter.
void grad_params_seeded(const ModelParams& params, const Matrix& X,
                        const ForwardTrace& trace, const Vector& seeds,
                        std::vector<Matrix>& d_weights, std::vector<Vector>& d_biases);

/// Row i of the result is seeds_i * df(x_i)/dx.
Matrix grad_inputs_seeded(const ModelParams& params, const ForwardTrace& trace,
                          const Vector& seeds);

// --- parameter algebra (used by averaging / aggregation) ------------------

ModelParams zeros_like(const ModelParams& params);
void axpy_params(double a, const ModelParams& x, ModelParams& y);  // y += a*x
void scale_params(ModelParams& p, double a);
double max_abs_param(const ModelParams& p);
bool same_shape(const ModelParams& a, const ModelParams& b);

// --- checkpoint serialization (versioned JSON document) -------------------

std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);
void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

}  // namespace slicesim
