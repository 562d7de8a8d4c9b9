#include "slicesim/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "slicesim/rng.hpp"

namespace slicesim {

namespace {

// Substream purpose tags.
constexpr std::uint64_t kTagClParams = 0xC1D15701ULL;
constexpr std::uint64_t kTagSamples = 0x5A3B7E02ULL;

constexpr double kTrafficSigmaLog = 0.5;
constexpr double kCqiSd = 2.5;
constexpr double kMimoConcentration = 8.0;
constexpr double kCqiOffsetHalfRange = 2.5;

}  // namespace

SliceSpec SliceSpec::defaults(SliceId id) {
  SliceSpec s;
  s.slice_id = id;
  switch (id) {
    case SliceId::eMBB:
      s.ott_names = {"Netflix", "Youtube", "FacebookVideo"};
      s.traffic_scale = 10.0;
      s.cqi_mean = 9.0;
      s.mimo_fullrank_mean = 0.6;
      break;
    case SliceId::SocialMedia:
      s.ott_names = {"Facebook", "Whatsapp", "Instagram"};
      s.traffic_scale = 6.0;
      s.cqi_mean = 8.0;
      s.mimo_fullrank_mean = 0.45;
      break;
    case SliceId::Browsing:
      s.ott_names = {"Apple", "HTTP", "QUIC"};
      s.traffic_scale = 4.0;
      s.cqi_mean = 7.0;
      s.mimo_fullrank_mean = 0.3;
      break;
  }
  return s;
}

void SliceSpec::validate() const {
  for (const auto& name : ott_names) {
    if (name.empty()) throw std::invalid_argument("SliceSpec: empty OTT name");
  }
  if (traffic_scale <= 0.0)
    throw std::invalid_argument("SliceSpec: traffic_scale must be > 0");
  if (cqi_mean < 1.0 || cqi_mean > 15.0)
    throw std::invalid_argument("SliceSpec: cqi_mean must be in [1, 15]");
  if (mimo_fullrank_mean < 0.0 || mimo_fullrank_mean > 1.0)
    throw std::invalid_argument("SliceSpec: mimo_fullrank_mean must be in [0, 1]");
}

void SliceDataset::validate() const {
  if (features.cols() != kFeatureCount)
    throw ShapeError("SliceDataset: expected 5 feature columns");
  if (features.rows() != targets.size())
    throw ShapeError("SliceDataset: features/targets row mismatch");
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (int j = 0; j < 3; ++j) {
      if (features(i, j) < 0.0)
        throw std::invalid_argument("SliceDataset: negative traffic value");
    }
    if (features(i, 3) < 1.0 || features(i, 3) > 15.0)
      throw std::invalid_argument("SliceDataset: CQI out of [1, 15]");
    if (features(i, 4) < 0.0 || features(i, 4) > 1.0)
      throw std::invalid_argument("SliceDataset: MIMO out of [0, 1]");
    if (targets(i) < 0.0 || targets(i) > 100.0)
      throw std::invalid_argument("SliceDataset: target out of [0, 100]");
  }
}

ClDistParams cl_dist_params(const SliceSpec& spec, int cl_id, double noniid_shift,
                            std::uint64_t seed) {
  spec.validate();
  if (noniid_shift < 0.0)
    throw std::invalid_argument("cl_dist_params: noniid_shift must be >= 0");

  ClDistParams p;
  p.traffic_means = {spec.traffic_scale, spec.traffic_scale, spec.traffic_scale};
  p.cqi_mean = spec.cqi_mean;
  p.mimo_mean = spec.mimo_fullrank_mean;
  if (noniid_shift == 0.0) return p;

  CounterRng rng(CounterRng::derive_key(
      {seed, kTagClParams, static_cast<std::uint64_t>(spec.slice_id),
       static_cast<std::uint64_t>(cl_id)}));

  // Per-CL traffic mix: Dirichlet weights rescaled to mean multiplier 1.
  // Smaller concentration (larger shift) -> more heterogeneous mixes.
  double conc = 1.0 / noniid_shift;
  std::vector<double> w = rng.dirichlet({conc, conc, conc});
  for (int j = 0; j < 3; ++j) p.traffic_means[j] = spec.traffic_scale * 3.0 * w[j];

  double offset = noniid_shift * rng.uniform(-kCqiOffsetHalfRange, kCqiOffsetHalfRange);
  p.cqi_mean = std::clamp(spec.cqi_mean + offset, 1.0, 15.0);
  return p;
}

double ground_truth_cpu(const RowVector& x, const GroundTruthParams& gt) {
  if (x.size() != kFeatureCount) throw ShapeError("ground_truth_cpu: expected 5 features");
  double total_traffic = x(0) + x(1) + x(2);
  double radio = gt.cqi_increases_load ? x(3) / 15.0 : (16.0 - x(3)) / 15.0;
  double load = gt.idle_load +
                gt.traffic_gain * total_traffic * radio * (1.0 + gt.mimo_gain * x(4));
  return std::clamp(load, 0.0, 100.0);
}

SliceDataset generate_cl_dataset(const SliceSpec& spec, int cl_id, int size,
                                 double noniid_shift, std::uint64_t seed,
                                 const GroundTruthParams& gt) {
  if (size <= 0) throw std::invalid_argument("generate_cl_dataset: size must be >= 1");
  spec.validate();
  ClDistParams p = cl_dist_params(spec, cl_id, noniid_shift, seed);

  CounterRng rng(CounterRng::derive_key(
      {seed, kTagSamples, static_cast<std::uint64_t>(spec.slice_id),
       static_cast<std::uint64_t>(cl_id)}));

  SliceDataset ds;
  ds.features.resize(size, kFeatureCount);
  ds.targets.resize(size);
  ds.cl_id = cl_id;
  ds.slice_id = spec.slice_id;
  ds.seed = seed;

  double mimo_a = 0.0, mimo_b = 0.0;
  bool mimo_degenerate = p.mimo_mean < 1e-9 || p.mimo_mean > 1.0 - 1e-9;
  if (!mimo_degenerate) {
    mimo_a = p.mimo_mean * kMimoConcentration;
    mimo_b = (1.0 - p.mimo_mean) * kMimoConcentration;
  }

  // Fixed per-sample draw order: ott1..3, cqi, mimo, noise.
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < 3; ++j)
      ds.features(i, j) = rng.lognormal_mean(p.traffic_means[j], kTrafficSigmaLog);
    ds.features(i, 3) = rng.truncated_normal(p.cqi_mean, kCqiSd, 1.0, 15.0);
    ds.features(i, 4) = mimo_degenerate ? std::round(p.mimo_mean)
                                        : rng.beta(mimo_a, mimo_b);
    double y = ground_truth_cpu(ds.features.row(i), gt);
    if (gt.noise_std > 0.0) y += rng.normal(0.0, gt.noise_std);
    ds.targets(i) = std::clamp(y, 0.0, 100.0);
  }
  return ds;
}

void write_dataset_csv(const SliceDataset& ds, std::ostream& out) {
  out << "ott1,ott2,ott3,cqi,mimo,cpu\n";
  for (int i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < kFeatureCount; ++j)
      out << format_double(ds.features(i, j)) << ',';
    out << format_double(ds.targets(i)) << '\n';
  }
}

void write_dataset_csv(const SliceDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  write_dataset_csv(ds, out);
}

SliceDataset read_dataset_csv(std::istream& in, int cl_id, SliceId slice_id,
                              std::uint64_t seed) {
  std::string line;
  if (!std::getline(in, line) || line != "ott1,ott2,ott3,cqi,mimo,cpu")
    throw std::runtime_error("read_dataset_csv: bad or missing header");

  std::vector<std::array<double, 6>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 6> row{};
    std::stringstream ss(line);
    std::string cell;
    for (int j = 0; j < 6; ++j) {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error("read_dataset_csv: short row");
      row[j] = std::stod(cell);
    }
    rows.push_back(row);
  }

  SliceDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
  ds.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < kFeatureCount; ++j)
      ds.features(static_cast<Eigen::Index>(i), j) = rows[i][j];
    ds.targets(static_cast<Eigen::Index>(i)) = rows[i][5];
  }
  ds.cl_id = cl_id;
  ds.slice_id = slice_id;
  ds.seed = seed;
  return ds;
}

SliceDataset read_dataset_csv(const std::string& path, int cl_id, SliceId slice_id,
                              std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_dataset_csv: cannot open " + path);
  return read_dataset_csv(in, cl_id, slice_id, seed);
}

}  // namespace slicesim
