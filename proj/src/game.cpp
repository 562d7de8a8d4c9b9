#include "slicesim/game.hpp"

#include <chrono>
#include <cmath>

#include "slicesim/rng.hpp"

namespace slicesim {

namespace {

constexpr std::uint64_t kTagTesterBatch = 0x7E57B47CULL;
constexpr std::uint64_t kTagTrainBatch = 0x7124B47CULL;
constexpr std::uint64_t kTagMutation = 0x30747E0ULL;
constexpr std::uint64_t kTagXai = 0xA77817ULL;

// Sample `count` distinct row indices (all rows when count >= n or count<=0).
std::vector<Eigen::Index> sample_rows(Eigen::Index n, int count, CounterRng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (count <= 0 || count >= n) return idx;
  for (int k = 0; k < count; ++k) {
    auto j = k + static_cast<Eigen::Index>(rng.uniform01() * static_cast<double>(n - k));
    if (j >= n) j = n - 1;
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Vector take_rows(const Vector& v, const std::vector<Eigen::Index>& rows) {
  Vector out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

GameState GameState::init(int n_constraints, double multiplier_radius,
                          double eta_lambda) {
  if (n_constraints < 1)
    throw std::invalid_argument("GameState: need at least one constraint");
  if (eta_lambda <= 0.0)
    throw std::invalid_argument("GameState: eta_lambda must be > 0");
  GameState s;
  int dim = n_constraints + 1;
  s.a_matrix = Matrix::Constant(dim, dim, 1.0 / dim);
  s.lambda = Vector::Constant(dim, 1.0 / dim);
  s.multiplier_radius = multiplier_radius;
  s.eta_lambda = eta_lambda;
  return s;
}

Vector top_eigenvector(const Matrix& a_matrix) {
  if (a_matrix.rows() != a_matrix.cols() || a_matrix.rows() < 1)
    throw std::invalid_argument("top_eigenvector: matrix must be square");
  if ((a_matrix.array() <= 0.0).any())
    throw std::invalid_argument("top_eigenvector: entries must be positive");
  for (Eigen::Index c = 0; c < a_matrix.cols(); ++c) {
    if (std::abs(a_matrix.col(c).sum() - 1.0) > 1e-9)
      throw std::invalid_argument("top_eigenvector: columns must sum to 1");
  }

  Vector v = Vector::Constant(a_matrix.rows(), 1.0 / a_matrix.rows());
  for (int it = 0; it < 1000; ++it) {
    Vector next = a_matrix * v;
    next /= next.sum();
    double gap = (next - v).lpNorm<1>();
    v = next;
    // Keep iterating inside the cap until the fixed-point residual is tight.
    if (gap <= 1e-10 && (a_matrix * v - v).lpNorm<1>() <= 1e-10) break;
  }
  return v;
}

ModelParams oracle_step(const ModelParams& params, const Matrix& batch,
                        const Vector& targets, const SurrogateContext* ctx,
                        const Vector& lambda, double r_lambda, int steps, double lr,
                        double* out_first_loss) {
  if (steps < 1) throw std::invalid_argument("oracle_step: steps must be >= 1");
  ModelParams w = params;
  for (int s = 0; s < steps; ++s) {
    auto [loss, grad] = backward(w, batch, targets);
    if (s == 0 && out_first_loss) *out_first_loss = loss;

    bool constrained = ctx != nullptr && r_lambda != 0.0 &&
                       ctx->mutated_rows != nullptr && ctx->mutated_rows->rows() > 0;
    if (constrained) {
      double lambda_sum = lambda.sum();
      double scale = r_lambda * lambda(1) / lambda_sum;
      SurrogateResult sur =
          surrogate_constraint(w, *ctx->mutated_rows, *ctx->band, ctx->mode);
      for (std::size_t l = 0; l < grad.d_weights.size(); ++l) {
        grad.d_weights[l] += scale * sur.d_weights[l];
        grad.d_biases[l] += scale * sur.d_biases[l];
      }
    }
    for (std::size_t l = 0; l < w.weights.size(); ++l) {
      if (!grad.d_weights[l].allFinite() || !grad.d_biases[l].allFinite())
        throw NumericError("oracle_step: non-finite gradient at layer " +
                           std::to_string(l));
      w.weights[l] -= lr * grad.d_weights[l];
      w.biases[l] -= lr * grad.d_biases[l];
    }
  }
  return w;
}

Vector lambda_gradient(const Vector& phi_values) {
  if (!phi_values.allFinite())
    throw std::invalid_argument("lambda_gradient: non-finite constraint values");
  Vector delta = Vector::Zero(phi_values.size() + 1);
  delta.tail(phi_values.size()) = phi_values;
  return delta;
}

Matrix exponentiated_update(const Matrix& a_matrix, double eta_lambda,
                            const Vector& delta) {
  if (delta.size() != a_matrix.rows())
    throw ShapeError("exponentiated_update: delta size mismatch");
  double shift = delta.maxCoeff();
  Matrix out = a_matrix;
  for (Eigen::Index m = 0; m < out.rows(); ++m)
    out.row(m) *= std::exp(eta_lambda * (delta(m) - shift));
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    double s = out.col(c).sum();
    if (s <= 0.0 || !std::isfinite(s))
      throw NumericError("exponentiated_update: degenerate column");
    out.col(c) /= s;
  }
  return out;
}

ModelParams average_iterates(const std::vector<ModelParams>& iterates) {
  if (iterates.empty())
    throw std::invalid_argument("average_iterates: empty iterate list");
  ModelParams avg = zeros_like(iterates.front());
  for (const auto& it : iterates) axpy_params(1.0, it, avg);
  scale_params(avg, 1.0 / static_cast<double>(iterates.size()));
  return avg;
}

LocalTrainResult local_train(const ModelParams& global_params, const Matrix& train_x,
                             const Vector& train_y, const SlaBand& band,
                             const LocalTrainConfig& config, std::uint64_t master_seed,
                             int slice_index, int cl_id, int round_index) {
  if (train_x.rows() == 0) throw std::invalid_argument("local_train: empty dataset");
  if (train_x.rows() != train_y.size())
    throw ShapeError("local_train: feature/target mismatch");
  if (config.local_epochs < 1)
    throw std::invalid_argument("local_train: local_epochs must be >= 1");
  band.validate();

  const auto us = static_cast<std::uint64_t>(slice_index);
  const auto uk = static_cast<std::uint64_t>(cl_id);
  const auto ut = static_cast<std::uint64_t>(round_index);

  LocalTrainResult result;
  result.params = global_params;
  GameState game = GameState::init(1, config.r_lambda, config.eta_lambda);

  ModelParams w = global_params;
  try {
    for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
      auto t0 = std::chrono::steady_clock::now();
      const auto ul = static_cast<std::uint64_t>(epoch);
      EpochTrace row;
      row.epoch = epoch;

      Matrix mutated;  // empty unless in-hoc with a non-empty SLA subset
      if (config.in_hoc) {
        CounterRng tester_rng(
            CounterRng::derive_key({master_seed, kTagTesterBatch, us, uk, ut, ul}));
        auto tb = sample_rows(train_x.rows(), config.test_batch, tester_rng);
        Matrix tb_x = take_rows(train_x, tb);

        Vector preds = forward(w, tb_x);
        AttributionMatrix attrs = compute_attributions(
            w, tb_x, config.xai, config.xai_opts,
            CounterRng::derive_key({master_seed, kTagXai, us, uk, ut, ul}));

        auto in_band = sla_subset(preds, band);
        Matrix u_rows = take_rows(tb_x, in_band);
        Matrix u_soft = take_rows(attrs.soft, in_band);
        if (config.mutation_enabled) {
          CounterRng mut_rng(
              CounterRng::derive_key({master_seed, kTagMutation, us, uk, ut, ul}));
          mutated = mutate_features(u_rows, u_soft, mut_rng);
        } else {
          mutated = u_rows;
        }

        ConfidenceReport report = confidence_metric(w, mutated, band);
        row.confidence = report.c_value;
        row.psi = report.surrogate_value;

        game.lambda = top_eigenvector(game.a_matrix);
        row.lambda1 = game.lambda(1);

        CounterRng batch_rng(
            CounterRng::derive_key({master_seed, kTagTrainBatch, us, uk, ut, ul}));
        auto bi = sample_rows(train_x.rows(), config.train_batch, batch_rng);
        SurrogateContext ctx{&mutated, &band, config.surrogate_mode};
        w = oracle_step(w, take_rows(train_x, bi), take_rows(train_y, bi), &ctx,
                        game.lambda, game.multiplier_radius, config.oracle_steps,
                        config.lr, &row.loss);

        Vector phi(1);
        phi(0) = band.min_confidence - report.c_value;
        game.a_matrix = exponentiated_update(game.a_matrix, game.eta_lambda,
                                             lambda_gradient(phi));
      } else {
        row.confidence = std::nan("");
        row.psi = std::nan("");
        row.lambda1 = std::nan("");
        CounterRng batch_rng(
            CounterRng::derive_key({master_seed, kTagTrainBatch, us, uk, ut, ul}));
        auto bi = sample_rows(train_x.rows(), config.train_batch, batch_rng);
        w = oracle_step(w, take_rows(train_x, bi), take_rows(train_y, bi), nullptr,
                        game.lambda, 0.0, config.oracle_steps, config.lr, &row.loss);
      }

      game.iterates.push_back(w);
      row.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.trace.push_back(row);
    }
    result.params = average_iterates(game.iterates);
  } catch (const NumericError& e) {
    result.failed = true;
    result.error = e.what();
  }
  return result;
}

}  // namespace slicesim
