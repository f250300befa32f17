#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace isobenefit {

/// SplitMix64 generator (Steele, Lea & Flood 2014). Chosen because the whole
/// engine must be byte-reproducible from a 64-bit seed: the state is a single
/// word, the algorithm has no ambiguity across platforms, and independent
/// streams can be split off by drawing a fresh seed.
class SplitMix64 {
 public:
  SplitMix64() = default;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  /// Derives an independent generator.
  SplitMix64 split() { return SplitMix64(next_u64()); }

  std::uint64_t state() const { return state_; }
  void set_state(std::uint64_t s) { state_ = s; }

  bool operator==(const SplitMix64&) const = default;

  static constexpr const char* algorithm_name() { return "splitmix64"; }

 private:
  std::uint64_t state_ = 0;
};

/// Uniform draw from the unit simplex (flat Dirichlet) via normalized
/// exponentials. dim >= 1; entries are non-negative and sum to 1 up to
/// floating-point rounding.
inline std::vector<double> draw_simplex(SplitMix64& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double total = 0.0;
  for (double& x : v) {
    // 1 - u is in (0, 1], so the log is finite.
    x = -std::log(1.0 - rng.next_double());
    total += x;
  }
  if (total <= 0.0) {
    // All draws collapsed to zero (astronomically unlikely); fall back to uniform.
    for (double& x : v) x = 1.0 / static_cast<double>(dim);
    return v;
  }
  for (double& x : v) x /= total;
  return v;
}

}  // namespace isobenefit
