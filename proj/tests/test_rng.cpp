// qlrs: QLRS-CDMA simulation and likelihood ascent search detection
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "qlrs/rng.hpp"

using namespace qlrs;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors from the Random123 test suite.
  auto out = philox4x32({0, 0, 0, 0}, {0, 0});
  CHECK(out == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du,
                                            0xbc57ac4cu, 0x9b00dbd8u});
  out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                   {0xffffffffu, 0xffffffffu});
  CHECK(out == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu,
                                            0xa20bc7c6u, 0x6d5451fdu});
  out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                   {0xa4093822u, 0x299f31d0u});
  CHECK(out == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu,
                                            0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are deterministic and address-separated") {
  RngStream a(42, 1, 7, StreamPurpose::Noise);
  RngStream b(42, 1, 7, StreamPurpose::Noise);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u32() == b.next_u32());

  RngStream c(42, 1, 7, StreamPurpose::Bits);
  RngStream d(42, 2, 7, StreamPurpose::Noise);
  RngStream e(42, 1, 8, StreamPurpose::Noise);
  RngStream f(43, 1, 7, StreamPurpose::Noise);
  RngStream base(42, 1, 7, StreamPurpose::Noise);
  int diff_c = 0, diff_d = 0, diff_e = 0, diff_f = 0;
  for (int i = 0; i < 16; ++i) {
    const std::uint32_t r = base.next_u32();
    diff_c += r != c.next_u32();
    diff_d += r != d.next_u32();
    diff_e += r != e.next_u32();
    diff_f += r != f.next_u32();
  }
  CHECK(diff_c > 0);
  CHECK(diff_d > 0);
  CHECK(diff_e > 0);
  CHECK(diff_f > 0);
}

TEST_CASE("uniform01 stays inside the open interval") {
  RngStream rng(1, 0, 0, StreamPurpose::Generic);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal moments and sign balance") {
  RngStream rng(2, 0, 0, StreamPurpose::Generic);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));

  RngStream bits(3, 0, 0, StreamPurpose::Generic);
  long long pos = 0;
  for (int i = 0; i < n; ++i) pos += bits.sign() > 0;
  CHECK(std::abs(pos - n / 2) < 4 * std::sqrt(n) / 2);
}

TEST_CASE("below is unbiased over small ranges") {
  RngStream rng(4, 0, 0, StreamPurpose::Generic);
  std::vector<int> counts(5, 0);
  const int n = 50000;
  for (int i = 0; i < n; ++i) ++counts[rng.below(5)];
  for (int c : counts) CHECK(c == doctest::Approx(n / 5.0).epsilon(0.05));
  CHECK_THROWS_AS((void)rng.below(0), std::invalid_argument);
}

TEST_CASE("sample index above 2^24 is refused") {
  CHECK_THROWS_AS(RngStream(1, 1u << 24, 0, StreamPurpose::Generic),
                  std::invalid_argument);
}
