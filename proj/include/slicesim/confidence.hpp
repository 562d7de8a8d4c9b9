#pragma once

#include <vector>

#include "slicesim/common.hpp"
#include "slicesim/model.hpp"
#include "slicesim/rng.hpp"

namespace slicesim {

/// SLA band for one slice: predictions in [lower, upper] fulfill the SLA.
/// `min_confidence` is the constraint threshold, `steepness` the logistic
/// steepness used by the smooth surrogate.
struct SlaBand {
  double lower = 0.0;           // percent
  double upper = 3.0;           // percent
  double min_confidence = 0.85; // in (0, 1)
  double steepness = 50.0;      // > 0

  bool contains(double v) const { return v >= lower && v <= upper; }
  void validate() const;
};

struct ConfidenceReport {
  double c_value = 1.0;          // fraction of mutated predictions still in band
  int u_size = 0;                // |U|: SLA-fulfilling samples considered
  double surrogate_value = 0.0;  // smooth-AND surrogate at the band steepness
  int mutated_flip_count = 0;    // samples pushed out of the band
  bool vacuous = false;          // U was empty; constraint holds vacuously
};

/// Indices whose prediction lies inside the band.
std::vector<Eigen::Index> sla_subset(const Vector& preds, const SlaBand& band);

/// Zeroes feature (i,j) with probability soft(i,j), independently per entry.
Matrix mutate_features(const Matrix& x_rows, const Matrix& soft, CounterRng& rng);

/// Fraction of mutated SLA-fulfilling samples whose prediction stays in the
/// band. Empty input yields the vacuous report (c = 1).
ConfidenceReport confidence_metric(const ModelParams& params,
                                   const Matrix& mutated_rows, const SlaBand& band);

/// 1 / (1 + exp(-mu * theta)).
double logistic(double theta, double mu);

struct SurrogateResult {
  double psi = 0.0;  // <= 0 encodes constraint satisfaction
  std::vector<Matrix> d_weights;
  std::vector<Vector> d_biases;
};

/// Differentiable surrogate of the confidence constraint on the mutated
/// rows. SmoothAnd (default): psi = nu - mean_i S(z_i - lower) * S(upper - z_i).
/// PaperLiteral: psi = nu - mean_i log(exp(S(z_i - lower)) + exp(S(upper - z_i))).
/// Empty input: psi = nu - 1 with zero gradients.
SurrogateResult surrogate_constraint(const ModelParams& params,
                                     const Matrix& mutated_rows, const SlaBand& band,
                                     SurrogateMode mode = SurrogateMode::SmoothAnd);

}  // namespace slicesim
