#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ccmdp {

/// Counter-based generator built on the SplitMix64 finalizer.
///
/// Each (seed, stream) pair keys an independent sequence; draws hash a
/// monotone counter, so state is two words and streams never collide in
/// practice. Fixed algorithm, fixed constants: the same (seed, stream,
/// draw index) yields the same bits on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ (GOLDEN * (stream + 1)))), counter_(0) {}

  /// Independent generator for a sub-task; deterministic in (this key, stream).
  Rng split(std::uint64_t stream) const { return Rng(key_, stream); }

  std::uint64_t next_u64() { return mix(key_ + GOLDEN * (++counter_)); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform integer in [0, n). Rejection-free modulo is fine at our scales
  /// but bias-free multiply-shift costs nothing.
  int next_below(int n) {
    return static_cast<int>((static_cast<unsigned __int128>(next_u64()) *
                             static_cast<unsigned __int128>(n)) >>
                            64);
  }

  /// Standard normal via Box-Muller (one value per call; no cached spare,
  /// keeping the draw count a pure function of call count).
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(TWO_PI * u2);
  }

  /// Exponential(1).
  double next_exponential() {
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return -std::log(u);
  }

  /// Flat Dirichlet(1,...,1) row: normalized iid exponentials.
  std::vector<double> next_simplex(int n) {
    std::vector<double> row(n);
    double total = 0.0;
    for (double& x : row) {
      x = next_exponential();
      total += x;
    }
    for (double& x : row) x /= total;
    return row;
  }

  /// Index sampled from a probability vector by inverse CDF; the final
  /// bucket absorbs rounding so the draw always lands.
  int next_categorical(const std::vector<double>& probs) {
    double u = next_double();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

 private:
  static constexpr std::uint64_t GOLDEN = 0x9E3779B97F4A7C15ull;
  static constexpr double TWO_PI = 6.283185307179586476925286766559;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace ccmdp
