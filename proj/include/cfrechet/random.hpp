#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cfrechet {

namespace detail {

// splitmix64 finalizer; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Seed for the index-th substream of a base seed. Streams derived from
/// distinct indices are independent of evaluation order, so per-trial or
/// per-worker results do not depend on scheduling.
inline std::uint64_t substream_seed(std::uint64_t base, std::uint64_t index) {
  return detail::splitmix64(base ^ detail::splitmix64(index + 1));
}

/// Deterministic seeded generator: mt19937_64 for uniforms (bit-exact per the
/// C++ standard) with a hand-rolled Box-Muller transform for normals, so the
/// produced streams are identical across platforms and standard libraries.
/// The algorithm name is recorded in emitted report metadata.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64+box-muller";

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform draw in (0, 1] from the top 53 bits of the engine output.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal draw (Box-Muller, both outputs used).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * kPi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, bound) via rejection-free multiply-shift; used
  /// only where a tiny modulo bias is irrelevant (shuffles in tests/demos).
  std::uint64_t below(std::uint64_t bound) { return engine_() % bound; }

  Rng substream(std::uint64_t index) const {
    return Rng(substream_seed(seed_, index));
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cfrechet
