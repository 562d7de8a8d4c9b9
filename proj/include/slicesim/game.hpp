#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slicesim/attribution.hpp"
#include "slicesim/common.hpp"
#include "slicesim/confidence.hpp"
#include "slicesim/model.hpp"

namespace slicesim {

/// State of the two-player game for one closed loop and round: the
/// multiplicative-weights matrix, its top eigenvector (the multipliers) and
/// the iterate history used for averaging.
struct GameState {
  Matrix a_matrix;            // (M+1)x(M+1), column-stochastic, positive
  Vector lambda;              // probability vector
  double multiplier_radius;   // scales the constraint coordinates inside L_W
  double eta_lambda;
  std::vector<ModelParams> iterates;

  static GameState init(int n_constraints, double multiplier_radius,
                        double eta_lambda);
};

/// Stationary distribution of a positive column-stochastic matrix by power
/// iteration (successive L1 gap <= 1e-10, capped at 1000 iterations).
Vector top_eigenvector(const Matrix& a_matrix);

/// Everything the model player needs to differentiate the surrogate
/// constraint: the mutated SLA-fulfilling rows and the band.
struct SurrogateContext {
  const Matrix* mutated_rows = nullptr;
  const SlaBand* band = nullptr;
  SurrogateMode mode = SurrogateMode::SmoothAnd;
};

/// `steps` gradient-descent updates on
///   L_W = mse(batch) + sum_m lambda~_m * Psi_m,
/// with lambda~_m = r_lambda * lambda_m / sum(lambda) for constraint
/// coordinates m >= 1. ctx may be null (or r_lambda zero) for unconstrained
/// descent; that path performs bit-identical arithmetic to plain MSE SGD.
/// If out_first_loss is non-null it receives the batch MSE at the incoming
/// parameters.
ModelParams oracle_step(const ModelParams& params, const Matrix& batch,
                        const Vector& targets, const SurrogateContext* ctx,
                        const Vector& lambda, double r_lambda, int steps, double lr,
                        double* out_first_loss = nullptr);

/// Gradient of the multiplier player's payoff: [0, phi_1, ..., phi_M].
Vector lambda_gradient(const Vector& phi_values);

/// Row m of a_matrix is multiplied by exp(eta_lambda * delta_m), then every
/// column is renormalized to sum 1. The max of delta is subtracted before
/// exponentiation (invariant under the normalization) to avoid overflow.
Matrix exponentiated_update(const Matrix& a_matrix, double eta_lambda,
                            const Vector& delta);

/// Coordinate-wise arithmetic mean of the stored iterates.
ModelParams average_iterates(const std::vector<ModelParams>& iterates);

struct LocalTrainConfig {
  int local_epochs = 100;
  int oracle_steps = 1;
  double lr = 0.01;
  int train_batch = 0;  // rows per oracle call; 0 = full local train split
  double r_lambda = 1e-5;
  double eta_lambda = 0.02;
  XaiMethod xai = XaiMethod::IntegratedGradients;
  XaiOptions xai_opts;
  SurrogateMode surrogate_mode = SurrogateMode::SmoothAnd;
  int test_batch = 64;          // rows the Tester draws per epoch
  bool mutation_enabled = true;
  bool in_hoc = true;           // false: plain descent, no explainer loop
};

struct EpochTrace {
  int epoch = 0;
  double loss = 0.0;        // training MSE at the epoch's incoming params
  double confidence = 0.0;  // NaN in post-hoc mode
  double psi = 0.0;         // smooth surrogate value; NaN in post-hoc mode
  double lambda1 = 0.0;     // constraint-coordinate multiplier weight
  double wall_time_s = 0.0;
};

struct LocalTrainResult {
  ModelParams params;  // iterate average over the epochs
  std::vector<EpochTrace> trace;
  bool failed = false;
  std::string error;
};

/// One closed loop's local optimization for one round: L epochs of
/// test -> attribute -> soften -> mutate -> confidence -> eigenvector ->
/// oracle step -> exponentiated ascent, returning the iterate average.
/// A numeric error inside an epoch marks the result as failed instead of
/// propagating. All randomness is keyed by (seed, slice, cl, round, epoch),
/// so concurrent closed loops are order-independent.
LocalTrainResult local_train(const ModelParams& global_params, const Matrix& train_x,
                             const Vector& train_y, const SlaBand& band,
                             const LocalTrainConfig& config, std::uint64_t master_seed,
                             int slice_index, int cl_id, int round_index);

}  // namespace slicesim
