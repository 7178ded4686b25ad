#pragma once

// Counter-based, splittable random streams.
//
// Every consumer owns an RngStream derived from (master_seed, path). The
// underlying block generator is Philox4x32-10, so a stream is nothing more
// than a 64-bit key plus a block counter: two streams with different paths
// never share state and replaying a path reproduces the same draws.
//
// Distribution samplers below are written out by hand (rather than using
// <random> distributions) because the standard ones are not specified
// bit-for-bit and differ between library implementations.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string_view>

namespace mbe {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> path)
      : key_(detail::splitmix64(master_seed)) {
    for (auto p : path) key_ = mix(key_, p);
  }
  explicit RngStream(std::uint64_t master_seed) : RngStream(master_seed, {}) {}

  /// Independent child stream; the parent is left untouched.
  [[nodiscard]] RngStream derive(std::uint64_t index) const { return RngStream(mix(key_, index), Raw{}); }
  [[nodiscard]] RngStream derive(std::initializer_list<std::uint64_t> path) const {
    std::uint64_t k = key_;
    for (auto p : path) k = mix(k, p);
    return RngStream(k, Raw{});
  }

  [[nodiscard]] std::uint64_t key() const { return key_; }

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngStream::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via the Marsaglia polar method (pairs are cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Exponential with unit rate.
  double exponential() { return -std::log(uniform_pos()); }

  /// Gamma(shape, 1), Marsaglia & Tsang with the shape < 1 boost.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("RngStream::gamma: shape must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      return g * std::pow(uniform_pos(), 1.0 / shape);
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
    return x / (x + y);
  }

  /// Binomial(n, p), exact: direct summation for small n, Beta splitting otherwise.
  std::uint64_t binomial(std::uint64_t n, double p) {
    std::uint64_t offset = 0;
    while (n > 48) {
      if (p <= 0.0) return offset;
      if (p >= 1.0) return offset + n;
      const std::uint64_t a = 1 + n / 2;
      const std::uint64_t b = n + 1 - a;
      const double x = beta(static_cast<double>(a), static_cast<double>(b));
      if (x >= p) {
        n = a - 1;
        p = p / x;
      } else {
        offset += a;
        n = b - 1;
        p = (p - x) / (1.0 - x);
      }
    }
    std::uint64_t k = 0;
    for (std::uint64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return offset + k;
  }

  /// Poisson(mean), exact: multiplication method for small means, Gamma/Binomial reduction above.
  std::uint64_t poisson(double mean) {
    if (mean < 0.0) throw std::invalid_argument("RngStream::poisson: negative mean");
    std::uint64_t offset = 0;
    while (mean > 16.0) {
      const auto m = static_cast<std::uint64_t>(std::floor(0.875 * mean));
      const double x = gamma(static_cast<double>(m));
      if (x < mean) {
        offset += m;
        mean -= x;
      } else {
        return offset + binomial(m - 1, mean / x);
      }
    }
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform_pos();
    while (prod > limit) {
      ++k;
      prod *= uniform_pos();
    }
    return offset + k;
  }

 private:
  struct Raw {};
  RngStream(std::uint64_t key, Raw) : key_(key) {}

  static std::uint64_t mix(std::uint64_t key, std::uint64_t p) {
    return detail::splitmix64(key ^ detail::splitmix64(p + 0x632BE59BD9B4E019ULL));
  }

  void refill() {
    const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(counter_),
                                           static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u};
    buf_ = philox4x32_10(ctr, {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    ++counter_;
    pos_ = 0;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stable 64-bit hash of a spec string, used to derive experiment stream paths.
inline std::uint64_t hash_label(std::string_view label) { return detail::fnv1a64(label); }

}  // namespace mbe
