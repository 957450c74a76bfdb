#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdint>

#include "mk/rng.hpp"

using mk::Philox4x32;
using mk::Rng;

TEST_CASE("block function reproduces published test vectors") {
  // Reference vectors from the Random123 distribution (kat_vectors).
  const std::array<std::uint32_t, 4> zero =
      Philox4x32::block({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(zero == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du,
                                             0xbc57ac4cu, 0x9b00dbd8u});

  const std::array<std::uint32_t, 4> ones = Philox4x32::block(
      {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
      {0xffffffffu, 0xffffffffu});
  CHECK(ones == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu,
                                             0xa20bc7c6u, 0x6d5451fdu});

  const std::array<std::uint32_t, 4> pi_digits = Philox4x32::block(
      {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
      {0xa4093822u, 0x299f31d0u});
  CHECK(pi_digits == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu,
                                                  0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool same_ab = true, same_ac = true, same_ad = true;
  for (int i = 0; i < 64; ++i) {
    const std::uint32_t va = a.next_u32();
    same_ab &= (va == b.next_u32());
    same_ac &= (va == c.next_u32());
    same_ad &= (va == d.next_u32());
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
  CHECK_FALSE(same_ad);
}

TEST_CASE("uniform stays in the half-open unit interval") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("normal variates have the right low moments") {
  Rng rng(2024);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
    s3 += x * x * x;
    s4 += x * x * x * x;
  }
  s1 /= n;
  s2 /= n;
  s3 /= n;
  s4 /= n;
  // Standard errors: ~1/sqrt(n) for mean, ~sqrt(2/n) for variance, etc.
  CHECK(std::abs(s1) < 5.0 / std::sqrt(double(n)));
  CHECK(std::abs(s2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s3) < 5.0 * std::sqrt(15.0 / n));
  CHECK(std::abs(s4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}
