#include "slicesim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slicesim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::derive_key(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x5371C3B9F0A4D82DULL;
  for (std::uint64_t w : words) {
    h = mix(h ^ mix(w + kGolden));
    h += kGolden;
  }
  return mix(h);
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix(key_ + counter_ * kGolden);
}

double CounterRng::uniform01() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

bool CounterRng::bernoulli(double p) { return uniform01() < p; }

double CounterRng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; u1 shifted away from 0 so log stays finite.
  double u1 = uniform01();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log1p(-u1));
  double theta = 2.0 * std::numbers::pi * u2;
  cached_normal_ = r * std::sin(theta);
  has_cached_normal_ = true;
  return r * std::cos(theta);
}

double CounterRng::normal(double mean, double sd) { return mean + sd * normal(); }

double CounterRng::lognormal_mean(double mean, double sigma_log) {
  if (mean <= 0.0) throw std::invalid_argument("lognormal_mean: mean must be > 0");
  double mu_log = std::log(mean) - 0.5 * sigma_log * sigma_log;
  return std::exp(mu_log + sigma_log * normal());
}

double CounterRng::truncated_normal(double mean, double sd, double lo, double hi) {
  if (lo >= hi) throw std::invalid_argument("truncated_normal: lo >= hi");
  for (int i = 0; i < 1000; ++i) {
    double x = normal(mean, sd);
    if (x >= lo && x <= hi) return x;
  }
  double x = normal(mean, sd);
  return x < lo ? lo : (x > hi ? hi : x);
}

double CounterRng::gamma(double shape) {
  if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    // Gamma(a) = Gamma(a+1) * U^(1/a).
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    double v = t * t * t;
    double u = uniform01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double CounterRng::beta(double a, double b) {
  double x = gamma(a);
  double y = gamma(b);
  return x / (x + y);
}

std::vector<double> CounterRng::dirichlet(const std::vector<double>& alpha) {
  std::vector<double> out(alpha.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i]);
    sum += out[i];
  }
  if (sum <= 0.0) {
    for (double& v : out) v = 1.0 / static_cast<double>(out.size());
    return out;
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace slicesim
