#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

#include "slicesim/common.hpp"

namespace slicesim {

/// Static description of one network slice's traffic/radio profile.
struct SliceSpec {
  SliceId slice_id = SliceId::eMBB;
  std::array<std::string, 3> ott_names{};
  double traffic_scale = 8.0;        // mean Mbps per OTT
  double cqi_mean = 8.0;             // in [1, 15]
  double mimo_fullrank_mean = 0.5;   // in [0, 1]

  static SliceSpec defaults(SliceId id);
  void validate() const;  // throws std::invalid_argument
};

/// Constants behind the synthetic CPU-load generator. The mapping is
///   cpu% = idle_load
///          + traffic_gain * (total OTT Mbps) * radio * (1 + mimo_gain * mimo)
///          + N(0, noise_std),       clamped to [0, 100],
/// with radio = cqi/15 when cqi_increases_load, else (16 - cqi)/15.
struct GroundTruthParams {
  double idle_load = 0.5;
  double traffic_gain = 0.12;
  double mimo_gain = 0.3;
  double noise_std = 0.2;
  bool cqi_increases_load = true;
};

/// One closed-loop's local dataset: D x 5 features + CPU-load targets.
struct SliceDataset {
  Matrix features;   // columns: ott1, ott2, ott3, cqi, mimo
  Vector targets;    // CPU load in percent, [0, 100]
  int cl_id = 0;
  SliceId slice_id = SliceId::eMBB;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(features.rows()); }
  void validate() const;
};

/// Effective per-closed-loop distribution parameters after the non-IID
/// shift. Exposed so heterogeneity is testable without sampling.
struct ClDistParams {
  std::array<double, 3> traffic_means{};
  double cqi_mean = 0.0;
  double mimo_mean = 0.0;
};

ClDistParams cl_dist_params(const SliceSpec& spec, int cl_id, double noniid_shift,
                            std::uint64_t seed);

/// Noise-free CPU load for one feature row (total on valid rows).
double ground_truth_cpu(const RowVector& x, const GroundTruthParams& gt);

/// Draws a reproducible non-IID dataset for closed loop `cl_id`.
/// Identical arguments yield a bit-identical dataset.
SliceDataset generate_cl_dataset(const SliceSpec& spec, int cl_id, int size,
                                 double noniid_shift, std::uint64_t seed,
                                 const GroundTruthParams& gt = {});

/// CSV with header `ott1,ott2,ott3,cqi,mimo,cpu`, one sample per line.
void write_dataset_csv(const SliceDataset& ds, std::ostream& out);
void write_dataset_csv(const SliceDataset& ds, const std::string& path);
SliceDataset read_dataset_csv(std::istream& in, int cl_id, SliceId slice_id,
                              std::uint64_t seed);
SliceDataset read_dataset_csv(const std::string& path, int cl_id, SliceId slice_id,
                              std::uint64_t seed);

}  // namespace slicesim
