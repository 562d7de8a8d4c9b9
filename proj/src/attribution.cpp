#include "slicesim/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "slicesim/rng.hpp"

namespace slicesim {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - i + 1) / i;
  return r;
}

// KernelSHAP weight for a proper coalition of size s out of q features.
double kernel_weight(int q, int s) {
  return (q - 1.0) / (binomial(q, s) * s * (q - s));
}

}  // namespace

Matrix integrated_gradients_batch(const ModelParams& params, const Matrix& X,
                                  const RowVector& baseline, int steps) {
  if (steps < 2) throw std::invalid_argument("integrated_gradients: steps must be >= 2");
  if (baseline.size() != X.cols())
    throw ShapeError("integrated_gradients: baseline width mismatch");
  const Eigen::Index d = X.rows();
  const Eigen::Index q = X.cols();

  // All D*steps midpoint path samples evaluated as a single batch.
  Matrix path(d * steps, q);
  for (Eigen::Index i = 0; i < d; ++i) {
    RowVector diff = X.row(i) - baseline;
    for (int s = 0; s < steps; ++s) {
      double t = (s + 0.5) / steps;
      path.row(i * steps + s) = baseline + t * diff;
    }
  }
  ForwardTrace trace = forward_trace(params, path);
  Matrix grads = grad_inputs_seeded(params, trace, Vector::Ones(path.rows()));

  Matrix out(d, q);
  for (Eigen::Index i = 0; i < d; ++i) {
    RowVector mean_grad = grads.middleRows(i * steps, steps).colwise().mean();
    out.row(i) = (X.row(i) - baseline).cwiseProduct(mean_grad);
  }
  return out;
}

RowVector integrated_gradients(const ModelParams& params, const RowVector& x,
                               const RowVector& baseline, int steps) {
  Matrix X = x;
  return integrated_gradients_batch(params, X, baseline, steps).row(0);
}

Matrix input_x_gradient_batch(const ModelParams& params, const Matrix& X) {
  ForwardTrace trace = forward_trace(params, X);
  Matrix grads = grad_inputs_seeded(params, trace, Vector::Ones(X.rows()));
  return grads.cwiseProduct(X);
}

RowVector input_x_gradient(const ModelParams& params, const RowVector& x) {
  Matrix X = x;
  return input_x_gradient_batch(params, X).row(0);
}

ShapResult shap_sampling(const ModelParams& params, const RowVector& x,
                         const Matrix& background, int n_coalitions,
                         std::uint64_t seed) {
  const int q = static_cast<int>(x.size());
  if (n_coalitions < q + 2)
    throw std::invalid_argument("shap_sampling: n_coalitions must be >= Q+2");
  if (background.rows() == 0)
    throw std::invalid_argument("shap_sampling: background must be non-empty");
  if (background.cols() != q) throw ShapeError("shap_sampling: background width");

  RowVector reference = background.colwise().mean();

  // Coalition masks. Enumerate when the budget covers all proper subsets;
  // otherwise sample sizes from the kernel-mass distribution and pick a
  // uniform subset of that size.
  std::vector<std::uint32_t> masks;
  std::vector<double> weights;
  const std::uint32_t full = (1u << q) - 1u;
  const bool enumerate = (q <= 20) && (n_coalitions >= (1 << q) - 2);
  if (enumerate) {
    for (std::uint32_t m = 1; m < full; ++m) {
      masks.push_back(m);
      weights.push_back(kernel_weight(q, __builtin_popcount(m)));
    }
  } else {
    // p(s) proportional to kernel_weight(s) * #subsets(s) = (q-1)/(s(q-s)).
    std::vector<double> size_mass(q);
    double total = 0.0;
    for (int s = 1; s <= q - 1; ++s) {
      size_mass[s - 1] = (q - 1.0) / (static_cast<double>(s) * (q - s));
      total += size_mass[s - 1];
    }
    CounterRng rng(CounterRng::derive_key({seed, 0x5AAB17ULL}));
    std::vector<int> idx(q);
    for (int c = 0; c < n_coalitions; ++c) {
      double u = rng.uniform01() * total;
      int s = 1;
      for (int k = 1; k <= q - 1; ++k) {
        u -= size_mass[k - 1];
        if (u <= 0.0) { s = k; break; }
        s = k;
      }
      // Partial Fisher-Yates to pick s distinct feature indices.
      for (int k = 0; k < q; ++k) idx[k] = k;
      std::uint32_t m = 0;
      for (int k = 0; k < s; ++k) {
        int j = k + static_cast<int>(rng.uniform01() * (q - k));
        if (j >= q) j = q - 1;
        std::swap(idx[k], idx[j]);
        m |= (1u << idx[k]);
      }
      masks.push_back(m);
      weights.push_back(1.0);  // sampling already follows the kernel mass
    }
  }
  // Empty and full coalitions pin phi0 and local accuracy.
  const double big = 1e6;
  masks.push_back(0u);
  weights.push_back(big);
  masks.push_back(full);
  weights.push_back(big);

  const int m_count = static_cast<int>(masks.size());
  Matrix inputs(m_count, q);
  Matrix design(m_count, q + 1);
  for (int i = 0; i < m_count; ++i) {
    design(i, 0) = 1.0;
    for (int j = 0; j < q; ++j) {
      bool on = (masks[i] >> j) & 1u;
      design(i, j + 1) = on ? 1.0 : 0.0;
      inputs(i, j) = on ? x(j) : reference(j);
    }
  }
  Vector f_vals = forward(params, inputs);

  Vector w = Eigen::Map<Vector>(weights.data(), m_count);
  Matrix wd = design.array().colwise() * w.array();
  Matrix ata = wd.transpose() * design;
  Vector atb = wd.transpose() * f_vals;

  ShapResult result;
  Eigen::LDLT<Matrix> solver(ata);
  Vector phi;
  bool bad = solver.info() != Eigen::Success;
  if (!bad) {
    phi = solver.solve(atb);
    bad = !phi.allFinite();
  }
  if (bad) {
    // Degenerate sampling: fall back to a ridge-regularized solve.
    result.regularized = true;
    Matrix reg = ata + 1e-8 * Matrix::Identity(q + 1, q + 1);
    phi = Eigen::LDLT<Matrix>(reg).solve(atb);
  }

  result.values = phi.tail(q).transpose();
  double fx = forward_one(params, x);
  result.local_accuracy_residual = std::abs(phi(0) + result.values.sum() - fx);
  return result;
}

RowVector shapley_exact(const ModelParams& params, const RowVector& x,
                        const RowVector& reference) {
  const int q = static_cast<int>(x.size());
  if (q > 16) throw std::invalid_argument("shapley_exact: too many features");
  if (reference.size() != q) throw ShapeError("shapley_exact: reference width");

  const std::uint32_t n_masks = 1u << q;
  Matrix inputs(n_masks, q);
  for (std::uint32_t m = 0; m < n_masks; ++m)
    for (int j = 0; j < q; ++j)
      inputs(m, j) = ((m >> j) & 1u) ? x(j) : reference(j);
  Vector f_vals = forward(params, inputs);

  // factor[s] = s! (q-1-s)! / q!
  std::vector<double> factor(q);
  for (int s = 0; s < q; ++s)
    factor[s] = 1.0 / (binomial(q - 1, s) * q);

  RowVector phi = RowVector::Zero(q);
  for (int j = 0; j < q; ++j) {
    for (std::uint32_t m = 0; m < n_masks; ++m) {
      if ((m >> j) & 1u) continue;
      int s = __builtin_popcount(m);
      phi(j) += factor[s] * (f_vals(m | (1u << j)) - f_vals(m));
    }
  }
  return phi;
}

Matrix weighted_attributions(const Matrix& raw, const Matrix& features, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("weighted_attributions: eps must be > 0");
  if (raw.rows() != features.rows() || raw.cols() != features.cols())
    throw ShapeError("weighted_attributions: shape mismatch");
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
      double v = features(i, j);
      double denom = (v < 0.0 ? -1.0 : 1.0) * std::max(std::abs(v), eps);
      out(i, j) = raw(i, j) / denom;
    }
  }
  return out;
}

Matrix soft_attributions(const Matrix& weighted) {
  if (!weighted.allFinite())
    throw std::invalid_argument("soft_attributions: non-finite entries");
  Matrix abs = weighted.cwiseAbs();
  Matrix out(abs.rows(), abs.cols());
  for (Eigen::Index i = 0; i < abs.rows(); ++i) {
    double m = abs.row(i).maxCoeff();
    Eigen::ArrayXd e = (abs.row(i).array() - m).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  return out;
}

std::vector<FeatureSummary> attribution_distribution(const AttributionMatrix& attrs) {
  if (attrs.raw.rows() == 0 || attrs.raw.cols() == 0)
    throw std::invalid_argument("attribution_distribution: empty matrix");
  auto quantile = [](const std::vector<double>& sorted, double p) {
    double pos = p * (sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - lo;
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  };

  std::vector<FeatureSummary> out;
  for (Eigen::Index j = 0; j < attrs.raw.cols(); ++j) {
    std::vector<double> col(attrs.raw.col(j).begin(), attrs.raw.col(j).end());
    std::sort(col.begin(), col.end());
    FeatureSummary s;
    s.mean = attrs.raw.col(j).mean();
    s.min = col.front();
    s.p25 = quantile(col, 0.25);
    s.median = quantile(col, 0.5);
    s.p75 = quantile(col, 0.75);
    s.max = col.back();
    for (double v : col) {
      if (v < 0.0) ++s.n_neg;
      else if (v > 0.0) ++s.n_pos;
      else ++s.n_zero;
    }
    out.push_back(s);
  }
  return out;
}

AttributionMatrix compute_attributions(const ModelParams& params, const Matrix& X,
                                       XaiMethod method, const XaiOptions& opts,
                                       std::uint64_t seed) {
  AttributionMatrix attrs;
  attrs.method = method;
  switch (method) {
    case XaiMethod::IntegratedGradients:
      attrs.raw = integrated_gradients_batch(
          params, X, RowVector::Zero(X.cols()), opts.ig_steps);
      break;
    case XaiMethod::InputXGradient:
      attrs.raw = input_x_gradient_batch(params, X);
      break;
    case XaiMethod::ShapSampling: {
      attrs.raw.resize(X.rows(), X.cols());
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        ShapResult r = shap_sampling(
            params, X.row(i), X, opts.shap_coalitions,
            CounterRng::derive_key({seed, static_cast<std::uint64_t>(i)}));
        attrs.raw.row(i) = r.values;
      }
      break;
    }
  }
  attrs.weighted = weighted_attributions(attrs.raw, X, opts.weight_eps);
  attrs.soft = soft_attributions(attrs.weighted);
  return attrs;
}

void write_attributions_csv(const AttributionMatrix& attrs, std::ostream& out) {
  out << "sample_id,feature,raw,weighted,soft\n";
  for (Eigen::Index i = 0; i < attrs.raw.rows(); ++i) {
    for (Eigen::Index j = 0; j < attrs.raw.cols(); ++j) {
      const char* name = j < kFeatureCount ? kFeatureNames[j] : "f";
      out << i << ',' << name << ',' << format_double(attrs.raw(i, j)) << ','
          << format_double(attrs.weighted(i, j)) << ','
          << format_double(attrs.soft(i, j)) << '\n';
    }
  }
}

}  // namespace slicesim
