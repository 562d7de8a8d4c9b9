#include "slicesim/confidence.hpp"

#include <cmath>

namespace slicesim {

void SlaBand::validate() const {
  if (!(lower < upper)) throw std::invalid_argument("SlaBand: lower must be < upper");
  if (!(min_confidence > 0.0 && min_confidence < 1.0))
    throw std::invalid_argument("SlaBand: min_confidence must be in (0, 1)");
  if (!(steepness > 0.0)) throw std::invalid_argument("SlaBand: steepness must be > 0");
}

std::vector<Eigen::Index> sla_subset(const Vector& preds, const SlaBand& band) {
  band.validate();
  if (!preds.allFinite()) throw std::invalid_argument("sla_subset: non-finite predictions");
  std::vector<Eigen::Index> u;
  for (Eigen::Index i = 0; i < preds.size(); ++i)
    if (band.contains(preds(i))) u.push_back(i);
  return u;
}

Matrix mutate_features(const Matrix& x_rows, const Matrix& soft, CounterRng& rng) {
  if (x_rows.rows() != soft.rows() || x_rows.cols() != soft.cols())
    throw ShapeError("mutate_features: shape mismatch");
  Matrix out = x_rows;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (rng.bernoulli(soft(i, j))) out(i, j) = 0.0;
  return out;
}

ConfidenceReport confidence_metric(const ModelParams& params,
                                   const Matrix& mutated_rows, const SlaBand& band) {
  band.validate();
  ConfidenceReport report;
  if (mutated_rows.rows() == 0) {
    report.vacuous = true;
    report.c_value = 1.0;
    report.surrogate_value = band.min_confidence - 1.0;
    return report;
  }
  Vector preds = forward(params, mutated_rows);
  report.u_size = static_cast<int>(preds.size());
  int stayed = 0;
  double smooth_sum = 0.0;
  for (Eigen::Index i = 0; i < preds.size(); ++i) {
    if (band.contains(preds(i))) ++stayed;
    smooth_sum += logistic(preds(i) - band.lower, band.steepness) *
                  logistic(band.upper - preds(i), band.steepness);
  }
  report.c_value = static_cast<double>(stayed) / report.u_size;
  report.mutated_flip_count = report.u_size - stayed;
  report.surrogate_value = band.min_confidence - smooth_sum / report.u_size;
  return report;
}

double logistic(double theta, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("logistic: mu must be > 0");
  return 1.0 / (1.0 + std::exp(-mu * theta));
}

SurrogateResult surrogate_constraint(const ModelParams& params,
                                     const Matrix& mutated_rows, const SlaBand& band,
                                     SurrogateMode mode) {
  band.validate();
  SurrogateResult result;
  if (mutated_rows.rows() == 0) {
    result.psi = band.min_confidence - 1.0;
    ModelParams z = zeros_like(params);
    result.d_weights = std::move(z.weights);
    result.d_biases = std::move(z.biases);
    return result;
  }

  const double mu = band.steepness;
  const double u = static_cast<double>(mutated_rows.rows());
  ForwardTrace trace = forward_trace(params, mutated_rows);
  Vector z = trace.act.back().col(0);

  // psi = nu - (1/u) sum_i g(z_i); seeds_i = -(1/u) g'(z_i).
  double acc = 0.0;
  Vector seeds(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    double sa = logistic(z(i) - band.lower, mu);   // d/dz = mu sa (1-sa)
    double sb = logistic(band.upper - z(i), mu);   // d/dz = -mu sb (1-sb)
    double da = mu * sa * (1.0 - sa);
    double db = -mu * sb * (1.0 - sb);
    if (mode == SurrogateMode::SmoothAnd) {
      acc += sa * sb;
      seeds(i) = -(da * sb + sa * db) / u;
    } else {
      double ea = std::exp(sa);
      double eb = std::exp(sb);
      acc += std::log(ea + eb);
      seeds(i) = -(ea * da + eb * db) / (ea + eb) / u;
    }
  }
  result.psi = band.min_confidence - acc / u;
  grad_params_seeded(params, mutated_rows, trace, seeds, result.d_weights,
                     result.d_biases);
  return result;
}

}  // namespace slicesim
