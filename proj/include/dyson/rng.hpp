#pragma once

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: every draw is a pure
// function of (key, counter), so replicas, steps and particles can be
// addressed directly without carrying generator state around.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace dyson {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return c;
  }
};

// open interval (0,1), 53 bits
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

inline std::pair<double, double> box_muller(double u1, double u2) {
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

// Stateless normal source keyed by a 64-bit seed.
// Counter layout: (a lo, a hi, b, c); callers pick what a, b, c mean.
class CounterNormals {
 public:
  explicit CounterNormals(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  std::pair<double, double> pair(std::uint64_t a, std::uint32_t b, std::uint32_t c) const {
    const auto r = Philox4x32::block(
        {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b, c}, key_);
    return box_muller(to_unit(r[0], r[1]), to_unit(r[2], r[3]));
  }

  std::uint64_t seed() const {
    return (std::uint64_t{key_[1]} << 32) | key_[0];
  }

 private:
  Philox4x32::Key key_;
};

// Sequential stream for chains. Satisfies UniformRandomBitGenerator.
class PhiloxStream {
 public:
  using result_type = std::uint32_t;

  explicit PhiloxStream(std::uint64_t seed, std::uint32_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return 0xFFFFFFFFu; }

  result_type operator()() {
    if (used_ == 4) refill();
    return buf_[used_++];
  }

  double uniform() {
    const auto hi = (*this)();
    const auto lo = (*this)();
    return to_unit(hi, lo);
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const auto [z0, z1] = box_muller(u1, u2);
    spare_ = z1;
    has_spare_ = true;
    return z0;
  }

 private:
  void refill() {
    buf_ = Philox4x32::block({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                              stream_, 0x5EEDu},
                             key_);
    ++block_;
    used_ = 0;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buf_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Replica r of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t r) {
  const auto out = Philox4x32::block(
      {static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32), 0xD1CEu, 0xFFFFFFFFu},
      {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return (std::uint64_t{out[0]} << 32) | out[1];
}

}  // namespace dyson
