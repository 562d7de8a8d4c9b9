#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace slicesim {

/// Counter-based pseudo-random generator.
///
/// The i-th raw output is a pure function of (key, i):
///
///     out_i = mix(key + (i+1) * 0x9E3779B97F4A7C15)
///
/// where mix() is the splitmix64 finalizer (Steele, Lea & Flood 2014).
/// Because draws are indexed rather than chained, independent substreams are
/// obtained purely by key derivation: derive_key() hash-combines a list of
/// 64-bit words (seed, purpose tag, slice, closed-loop id, round, epoch, ...)
/// so concurrent workers never share or reorder a stream. The integer stream
/// is platform-independent; floating-point transforms below rely on libm and
/// are bit-stable on a given platform/toolchain.
///
/// Rejection-based transforms (truncated normal, gamma) consume a
/// data-dependent number of raw draws; within one stream this is fine since
/// consumption is strictly sequential.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Hash-combines words into a stream key. Order-sensitive.
  static std::uint64_t derive_key(std::initializer_list<std::uint64_t> words);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform01();
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  /// Standard normal via Box-Muller; the paired value is cached.
  double normal();
  double normal(double mean, double sd);

  /// Log-normal parameterized by its mean E[X] and the log-space sigma.
  double lognormal_mean(double mean, double sigma_log);

  /// Normal conditioned on [lo, hi] by rejection (clamps after 1000 tries).
  double truncated_normal(double mean, double sd, double lo, double hi);

  /// Gamma(shape, 1), Marsaglia-Tsang; shape < 1 via the boost identity.
  double gamma(double shape);
  double beta(double a, double b);
  std::vector<double> dirichlet(const std::vector<double>& alpha);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace slicesim
