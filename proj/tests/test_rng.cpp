#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fuzzymon/rng.hpp"
#include "oracles.hpp"

using namespace fuzzymon;

// Known-answer vectors from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const PhiloxCounter out =
      philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const PhiloxCounter out =
      philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(RngStream, Reproducible) {
  RngStream a(123, 4);
  RngStream b(123, 4);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.normal(), b.normal());
}

TEST(RngStream, SeekReproducesPosition) {
  RngStream a(5, 1);
  for (int i = 0; i < 20; ++i) a.next_u64();
  const std::uint64_t expect = a.next_u64();
  RngStream b(5, 1);
  b.seek(10);
  EXPECT_EQ(b.next_u64(), expect);
}

TEST(RngStream, StreamsDiffer) {
  RngStream a(1, 0);
  RngStream b(1, 1);
  RngStream c(2, 0);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, StreamsUncorrelated) {
  const int n = 200000;
  RngStream a(99, 0);
  RngStream b(99, 1);
  double sxy = 0.0;
  for (int i = 0; i < n; ++i) sxy += a.normal() * b.normal();
  EXPECT_LT(std::fabs(sxy / n), 4.0 / std::sqrt(n));
}

TEST(RngStream, UniformRange) {
  RngStream r(3, 0);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = r.uniform_pos();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(RngStream, NormalMatchesGaussianCdf) {
  RngStream r(11, 0);
  std::vector<double> x(1'000'000);
  for (double& v : x) v = r.normal();
  EXPECT_LT(oracle::ks(x, [](double t) { return oracle::normal_cdf(t, 0.0, 1.0); }), 0.002);
}

TEST(RngStream, NormalTailFrequency) {
  RngStream r(12, 0);
  const int n = 4'000'000;
  const double cut = 3.442619855899;
  int tail = 0;
  for (int i = 0; i < n; ++i) tail += std::fabs(r.normal()) > cut;
  const double p = std::erfc(cut / std::sqrt(2.0));
  const double expect = p * n;
  EXPECT_LT(std::fabs(tail - expect), 4.0 * std::sqrt(expect));
}

TEST(RngStream, NormalMoments) {
  RngStream r(13, 0);
  const int n = 1'000'000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}
