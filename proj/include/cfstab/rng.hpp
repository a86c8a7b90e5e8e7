#ifndef CFSTAB_RNG_HPP
#define CFSTAB_RNG_HPP

// Platform-independent random streams.
//
// Engine: xoshiro256** seeded through SplitMix64. Every sampled block draws
// from its own substream, derived by mixing a stream id into the user seed,
// so adding a block never perturbs another block's draws. The variate
// transforms below are written out explicitly instead of using the
// <random> distributions, whose algorithms differ between standard libraries.
// Normal and Laplace variates call std::log/std::sqrt; results are
// bit-identical wherever those agree (same platform and libm).

#include <cmath>
#include <cstdint>

namespace cfstab {

inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for substream `stream` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t s = stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL;
  const std::uint64_t mixed = splitmix64(s);
  std::uint64_t t = seed ^ mixed;
  return splitmix64(t);
}

// Stream ids used by the library.
namespace streams {
inline constexpr std::uint64_t kContaminationGate = 1;
inline constexpr std::uint64_t kContaminationLatent = 2;
inline constexpr std::uint64_t kBootstrap = 3;
inline constexpr std::uint64_t kSystemSource = 1000;  // + source index
inline constexpr std::uint64_t kMixingSource = 2000;  // + coordinate index
}  // namespace streams

class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }
  Rng(std::uint64_t seed, std::uint64_t stream) noexcept : Rng(derive_seed(seed, stream)) {}

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

  /// Standard normal by the Marsaglia polar method (cached second variate).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double laplace(double location, double scale) noexcept {
    const double u = uniform_open() - 0.5;
    const double mag = -std::log(1.0 - 2.0 * std::abs(u));
    return u < 0 ? location - scale * mag : location + scale * mag;
  }

  double rademacher() noexcept { return (next() >> 63) ? 1.0 : -1.0; }

  std::uint64_t below(std::uint64_t bound) noexcept {
    // Lemire's nearly-divisionless method, with rejection for exactness.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cfstab

#endif  // CFSTAB_RNG_HPP
