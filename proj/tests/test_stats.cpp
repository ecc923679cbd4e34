#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fuzzymon/errors.hpp"
#include "fuzzymon/rng.hpp"
#include "fuzzymon/stats.hpp"
#include "oracles.hpp"

using namespace fuzzymon;

namespace {

double normal_pdf(double x, double mean) { return std::exp(-0.5 * (x - mean) * (x - mean)) / std::sqrt(2.0 * M_PI); }

}  // namespace

TEST(Histogram, SingleValueAtCentre) {
  const std::vector<double> e{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> v{1.5};
  const Histogram h = histogram(v, e);
  EXPECT_EQ(h.counts, (std::vector<std::int64_t>{0, 1, 0}));
  EXPECT_EQ(h.total(), 1);
}

TEST(Histogram, EdgesAndOutOfRange) {
  const std::vector<double> e{0.0, 1.0, 2.0};
  const std::vector<double> v{-0.1, 0.0, 1.0, 2.0, 2.1, NAN};
  const Histogram h = histogram(v, e);
  EXPECT_EQ(h.counts, (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(h.underflow, 1);
  EXPECT_EQ(h.overflow, 1);
  EXPECT_EQ(h.total(), 5);
  const std::vector<double> bad{0.0, 0.0};
  EXPECT_THROW(histogram(v, bad), ValidationError);
}

TEST(FreedmanDiaconis, WidthRule) {
  RngStream rng(61, 0);
  std::vector<double> v(10000);
  for (double& x : v) x = rng.normal();
  const auto e = freedman_diaconis_edges(v);
  const double width = e[1] - e[0];
  const double expect = 2.0 * 1.349 * std::cbrt(1.0 / 10000.0);
  EXPECT_NEAR(width / expect, 1.0, 0.1);
}

TEST(GoodnessOfFit, SelfConsistentSampleWithinBand) {
  RngStream rng(62, 0);
  std::vector<double> v(100000);
  for (double& x : v) x = rng.normal();
  const Histogram h = histogram(v, uniform_edges(-4.0, 4.0, 40));
  const GoodnessOfFit g = goodness_of_fit(h, [](double x) { return normal_pdf(x, 0.0); });
  EXPECT_TRUE(g.within_band()) << g.statistic << " not in [" << g.band_low << ", " << g.band_high << "]";
  EXPECT_GE(g.fraction_below(3.0), 0.95);
  const GoodnessOfFit c = goodness_of_fit_cdf(h, [](double x) { return oracle::normal_cdf(x, 0.0, 1.0); });
  EXPECT_NEAR(c.statistic, g.statistic, 1e-6 * g.statistic);
}

TEST(GoodnessOfFit, GrossMismatchFarAboveBand) {
  RngStream rng(63, 0);
  std::vector<double> v(100000);
  for (double& x : v) x = rng.normal();
  const Histogram h = histogram(v, uniform_edges(-4.0, 9.0, 52));
  const GoodnessOfFit g = goodness_of_fit(h, [](double x) { return normal_pdf(x, 5.0); });
  EXPECT_GT(g.statistic, 100.0 * g.band_high);
}

TEST(GoodnessOfFit, InsufficientData) {
  const std::vector<double> v{0.1, 0.2};
  const Histogram h = histogram(v, uniform_edges(-4.0, 4.0, 8));
  EXPECT_THROW(goodness_of_fit(h, [](double x) { return normal_pdf(x, 0.0); }), InsufficientDataError);
}

TEST(KsDistance, AgreesWithOracle) {
  RngStream rng(64, 0);
  std::vector<double> v(5000);
  for (double& x : v) x = rng.uniform();
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  EXPECT_DOUBLE_EQ(ks_distance(v, cdf), oracle::ks(v, cdf));
}

TEST(MeanStd, Moments) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, NAN};
  const MeanStd m = mean_std(v);
  EXPECT_EQ(m.n, 4u);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.stddev, std::sqrt(5.0 / 3.0), 1e-15);
}

TEST(HistogramMode, Fullest) {
  const std::vector<double> v{0.5, 1.5, 1.6, 2.5};
  EXPECT_DOUBLE_EQ(histogram_mode(histogram(v, uniform_edges(0.0, 3.0, 3))), 1.5);
}
