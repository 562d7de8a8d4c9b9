#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slicesim/common.hpp"
#include "slicesim/model.hpp"

namespace slicesim {

/// Per-sample per-feature attributions plus their derived forms:
/// `weighted` divides by the (guarded) feature value, `soft` is the rowwise
/// softmax over |weighted| and is a valid probability vector per row.
struct AttributionMatrix {
  Matrix raw;
  Matrix weighted;
  Matrix soft;
  XaiMethod method = XaiMethod::IntegratedGradients;
};

struct XaiOptions {
  int ig_steps = 64;
  int shap_coalitions = 256;
  double weight_eps = 1e-6;  // guard for the attribution/value ratio
};

/// Path-integral attribution along the straight line baseline -> x using a
/// midpoint Riemann sum of the input gradient. Satisfies completeness:
/// sum_j a_j ~= f(x) - f(baseline).
RowVector integrated_gradients(const ModelParams& params, const RowVector& x,
                               const RowVector& baseline, int steps);
Matrix integrated_gradients_batch(const ModelParams& params, const Matrix& X,
                                  const RowVector& baseline, int steps);

/// a_j = x_j * df/dx_j evaluated at x.
RowVector input_x_gradient(const ModelParams& params, const RowVector& x);
Matrix input_x_gradient_batch(const ModelParams& params, const Matrix& X);

struct ShapResult {
  RowVector values;
  double local_accuracy_residual = 0.0;  // |phi0 + sum(phi) - f(x)|
  bool regularized = false;              // WLS needed a ridge fallback
};

/// Kernel-weighted least-squares Shapley estimate. Masked features are
/// replaced by the background column means. Enumerates every coalition
/// when n_coalitions covers them all.
ShapResult shap_sampling(const ModelParams& params, const RowVector& x,
                         const Matrix& background, int n_coalitions,
                         std::uint64_t seed);

/// Exact Shapley values of the masked game by subset enumeration (Q <= 16).
RowVector shapley_exact(const ModelParams& params, const RowVector& x,
                        const RowVector& reference);

/// alpha_ij = raw_ij / (sign(x_ij) * max(|x_ij|, eps)); finite everywhere.
Matrix weighted_attributions(const Matrix& raw, const Matrix& features, double eps);

/// Rowwise softmax over |weighted|, stabilized by subtracting the row max.
Matrix soft_attributions(const Matrix& weighted);

struct FeatureSummary {
  double mean = 0, min = 0, p25 = 0, median = 0, p75 = 0, max = 0;
  int n_neg = 0, n_zero = 0, n_pos = 0;
};

/// Per-feature summary of the raw attributions (quantiles by linear
/// interpolation on the sorted column).
std::vector<FeatureSummary> attribution_distribution(const AttributionMatrix& attrs);

/// One-stop pipeline: raw by `method`, then weighted and soft.
/// For ShapSampling the batch itself serves as background.
AttributionMatrix compute_attributions(const ModelParams& params, const Matrix& X,
                                       XaiMethod method, const XaiOptions& opts,
                                       std::uint64_t seed);

/// CSV dump: header `sample_id,feature,raw,weighted,soft`.
void write_attributions_csv(const AttributionMatrix& attrs, std::ostream& out);

}  // namespace slicesim
