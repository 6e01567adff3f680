#pragma once

#include <cmath>
#include <cstdint>

namespace fovstat {

/// splitmix64 step: finalizes `state + golden_gamma`. Pure integer mixing,
/// identical on every platform.
constexpr std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Mixes two 64-bit words into one (used to derive substream keys).
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return split_mix64(split_mix64(a) ^ b);
}

/// Counter-based random stream. The n-th draw is a pure function of
/// (seed, stream, n), so substreams keyed by trial/component/sample index are
/// independent and may be evaluated in any order with identical results.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(hash_combine(seed, stream)) {}

  std::uint64_t next_u64() {
    return split_mix64(key_ + 0x9e3779b97f4a7c15ull * counter_++);
  }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Standard normal draw, Box-Muller with cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] keeps the log finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fovstat
