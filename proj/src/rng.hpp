#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

// Deterministic randomness. mt19937_64 output is pinned by the standard, and
// all samplers below are written against raw engine output so that streams
// are reproducible across platforms and standard libraries.

namespace ildm {

/// splitmix64 step, used to derive independent seeds from a base seed.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a sweep cell: chains splitmix64 over the base seed and each field,
/// so any two distinct field tuples get decorrelated streams.
inline uint64_t mix_seed(uint64_t base, std::initializer_list<uint64_t> fields) {
  uint64_t s = splitmix64(base);
  for (uint64_t f : fields) s = splitmix64(s ^ (f + 0x9e3779b97f4a7c15ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t bits() { return eng_(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). Rejection-free modulo is fine here: n is tiny
  /// relative to 2^64, bias is far below anything observable.
  int uniform_int(int n) { return static_cast<int>(eng_() % static_cast<uint64_t>(n)); }

  /// Exponential(1) via inversion.
  double exponential() {
    double u = uniform();
    return -std::log(1.0 - u);
  }

  /// Index sample from nonnegative weights by CDF inversion over their sum.
  int categorical(std::span<const double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    double u = uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc) return static_cast<int>(i);
    }
    // Guard against accumulated rounding at the top of the CDF.
    for (size_t i = w.size(); i-- > 0;) {
      if (w[i] > 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(w.size()) - 1;
  }

  /// Flat Dirichlet row: normalized Exponential(1) draws.
  void dirichlet(std::span<double> out) {
    double total = 0.0;
    for (double& x : out) {
      x = exponential();
      total += x;
    }
    for (double& x : out) x /= total;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace ildm
