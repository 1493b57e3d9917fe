#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "msmf/rng.hpp"

namespace {

TEST(CounterRng, SameKeySameStream) {
  msmf::CounterRng a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(CounterRng, DistinctIndicesDiffer) {
  msmf::CounterRng a(42, 0), b(42, 1), c(43, 0);
  EXPECT_NE(a(), b());
  msmf::CounterRng a2(42, 0);
  EXPECT_NE(a2(), c());
}

TEST(CounterRng, UniformInUnitInterval) {
  msmf::CounterRng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(CounterRng, UniformChiSquare) {
  constexpr int kBins = 64;
  constexpr int kDraws = 640000;
  std::vector<int> counts(kBins, 0);
  msmf::CounterRng rng(2024);
  for (int i = 0; i < kDraws; ++i) ++counts[static_cast<int>(rng.uniform() * kBins)];
  const double expected = static_cast<double>(kDraws) / kBins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 63 degrees of freedom: the 0.999 quantile is about 103.4.
  EXPECT_LT(chi2, 103.4);
}

TEST(CounterRng, NormalMoments) {
  msmf::CounterRng rng(99);
  constexpr int n = 400000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(CounterRng, DrawCountAdvances) {
  msmf::CounterRng rng(5);
  rng.uniform();
  rng.normal();  // two uniforms, one cached normal
  rng.normal();
  EXPECT_EQ(rng.draws(), 3u);
}

}  // namespace
