// rng.hpp: counter-based random numbers for reproducible ensembles.
//
// Philox4x32-10 block cipher drives every stream. A (seed, stream) pair maps
// to an independent sequence, so trajectory k of a Monte Carlo run can use
// stream k and be regenerated in isolation.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mk {

struct Philox4x32 {
  static constexpr std::uint32_t mul_a = 0xD2511F53u;
  static constexpr std::uint32_t mul_b = 0xCD9E8D57u;
  static constexpr std::uint32_t bump_a = 0x9E3779B9u;
  static constexpr std::uint32_t bump_b = 0xBB67AE85u;

  // One block: 10 rounds over a 128-bit counter with a 64-bit key.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t prod0 = std::uint64_t(mul_a) * ctr[0];
      const std::uint64_t prod1 = std::uint64_t(mul_b) * ctr[2];
      const std::uint32_t hi0 = std::uint32_t(prod0 >> 32);
      const std::uint32_t lo0 = std::uint32_t(prod0);
      const std::uint32_t hi1 = std::uint32_t(prod1 >> 32);
      const std::uint32_t lo1 = std::uint32_t(prod1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += bump_a;
      key[1] += bump_b;
    }
    return ctr;
  }
};

// Stateful wrapper over the block function. Counter words 0..1 index blocks
// within the stream; words 2..3 carry the stream id.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        ctr_{0u, 0u, std::uint32_t(stream), std::uint32_t(stream >> 32)} {}

  std::uint32_t next_u32() {
    if (fill_ == 0) {
      buf_ = Philox4x32::block(ctr_, key_);
      fill_ = 4;
      if (++ctr_[0] == 0) ++ctr_[1];
    }
    return buf_[4 - fill_--];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    cached_ = r * std::sin(two_pi * u2);
    have_cached_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 4> buf_{};
  int fill_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace mk
