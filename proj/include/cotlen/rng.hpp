#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>

namespace cotlen::rng {

// SplitMix64 finalizer. Used to turn (master seed, index) pairs into
// well-separated stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Seed for cell/record `index` of a run with seed `master`. Independent of
// evaluation order, so parallel and serial sweeps produce identical output.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + 0x9E3779B97F4A7C15ull * (index + 1));
}

// mt19937_64 engine with hand-rolled distributions. The standard pins the
// engine but not the distributions, so std::*_distribution output differs
// across standard libraries; these sampling routines keep seeded runs
// byte-identical everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Raw engine output; used to derive child seeds.
  std::uint64_t u64() { return engine_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  // Unbiased integer in [0, span) by rejection.
  std::uint64_t uniform_below(std::uint64_t span) {
    if (span == 0) throw std::invalid_argument("uniform_below: span must be positive");
    const std::uint64_t threshold = (0 - span) % span;  // 2^64 mod span
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % span;
    }
  }

  // Uniform integer in [lo, hi).
  long long uniform_int(long long lo, long long hi) {
    if (lo >= hi) throw std::invalid_argument("uniform_int: empty range");
    return lo + static_cast<long long>(
                    uniform_below(static_cast<std::uint64_t>(hi - lo)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller (one variate per pair of uniforms).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled with the
  // boost Gamma(a) = Gamma(a+1) * U^(1/a).
  double gamma(double shape) {
    if (shape <= 0.0) throw std::invalid_argument("gamma: shape must be positive");
    if (shape < 1.0) {
      return gamma(shape + 1.0) * std::pow(uniform_pos(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    const double s = x + y;
    return s > 0.0 ? x / s : 0.5;
  }

  // Index sampled from a probability vector (assumed to sum to 1).
  std::size_t categorical(std::span<const double> probs) {
    double u = uniform();
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      u -= probs[i];
      if (u < 0.0) return i;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
};

}  // namespace cotlen::rng
