#ifndef LWCP_RNG_HPP
#define LWCP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace lwcp {

// splitmix64 single step: add the golden-gamma increment, then finalize.
// Bijective on uint64, so distinct inputs never collide.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Per-replication seed stream: splitmix64 avalanche of master ^ rep_index.
inline std::uint64_t derive_rep_seed(std::uint64_t master_seed, std::uint64_t rep_index) {
  return splitmix64(master_seed ^ rep_index);
}

/// Deterministic random source used throughout the library.
///
/// The engine is std::mt19937_64, whose output sequence is pinned by the
/// C++ standard; all variate transforms below are written out explicitly
/// (no std::*_distribution, whose algorithms are implementation-defined).
/// Normals use the Marsaglia polar method, so the only libm calls on the
/// sampling path are sqrt (IEEE-exact) and log.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the polar method (rejection on the unit disk).
  double normal() {
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
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Student-t with 3 degrees of freedom: Z0 / sqrt((Z1^2+Z2^2+Z3^2)/3).
  double student_t3() {
    const double z0 = normal();
    const double z1 = normal(), z2 = normal(), z3 = normal();
    return z0 / std::sqrt((z1 * z1 + z2 * z2 + z3 * z3) / 3.0);
  }

  /// Uniform integer in [0, n) by 128-bit multiply (Lemire, unbiased).
  std::uint64_t bounded(std::uint64_t n) {
    std::uint64_t x = eng_();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        x = eng_();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lwcp

#endif  // LWCP_RNG_HPP
