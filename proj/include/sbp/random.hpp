#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace sbp {

// splitmix64 step; used to derive engine seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic child seed for (master, id); shared by replica substreams
// and by per-test seeds inside a suite.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t id) {
  std::uint64_t s = master ^ (0xd1342543de82ef95ULL * (id + 1));
  return splitmix64(s);
}

// Seeded random stream. The distribution transforms are implemented here
// rather than with std::*_distribution because the standard leaves those
// algorithms implementation-defined and the reproducibility contract
// (identical seed => identical draws, frozen test values) must not depend
// on the standard library vendor.
//
// Substream rule: substream id = replica index. The substream seed is the
// splitmix64 chain evaluated at (master, id); four outputs feed a seed_seq.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) {
    std::uint64_t s = seed;
    std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
    engine_.seed(seq);
  }

  static RandomStream substream(std::uint64_t master, std::uint64_t id) {
    return RandomStream(derive_seed(master, id));
  }

  std::uint64_t bits() { return engine_(); }

  // Uniform on the open interval (0,1); never returns 0 or 1, so logs are safe.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential() { return -std::log(uniform01()); }

  // Marsaglia polar method. The paired deviate is discarded to keep the
  // stream position a simple function of the accepted draw count.
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s >= 1.0 || s == 0.0) continue;
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  // Marsaglia-Tsang squeeze for shape >= 1, boosted by U^{1/shape} below 1.
  // Unit rate; divide by the rate for gamma(shape, rate).
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma shape must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  // Exact Poisson draw: multiplication method for small means, Hormann's
  // PTRS transformed rejection for large ones (point-process rank bookkeeping
  // can ask for very large means, so O(1) and exactness both matter).
  unsigned long poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson mean must be >= 0");
    if (mean > 1e15) throw std::domain_error("poisson mean too large for exact sampling");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
      const double limit = std::exp(-mean);
      unsigned long n = 0;
      double prod = uniform01();
      while (prod > limit) {
        ++n;
        prod *= uniform01();
      }
      return n;
    }
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
      double u = uniform01() - 0.5;
      double v = uniform01();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (kf < 0.0) continue;
      if (us >= 0.07 && v <= v_r) return static_cast<unsigned long>(kf);
      if (us < 0.013 && v > us) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      if (lhs <= kf * log_mean - mean - std::lgamma(kf + 1.0))
        return static_cast<unsigned long>(kf);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sbp
