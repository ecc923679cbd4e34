#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fuzzymon {

struct Histogram {
  std::vector<double> edges;
  std::vector<std::int64_t> counts;  // edges.size() - 1 bins
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;

  std::size_t bins() const noexcept { return counts.size(); }
  std::int64_t total() const noexcept;
  double center(std::size_t i) const { return 0.5 * (edges.at(i) + edges.at(i + 1)); }
};

/// Bins are half-open [e_i, e_{i+1}); the last bin also takes its right edge.
/// NaN values are ignored.
Histogram histogram(std::span<const double> values, std::span<const double> edges);

/// n + 1 evenly spaced edges over [lo, hi].
std::vector<double> uniform_edges(double lo, double hi, std::size_t n);

/// Freedman-Diaconis bin width 2 IQR n^(-1/3) over the finite sample range,
/// capped at max_bins bins.
std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::size_t max_bins = 200);

struct BinZ {
  std::size_t bin;
  double observed;
  double expected;
  double z;
};

struct GoodnessOfFit {
  double statistic = 0.0;  // Pearson chi-square over usable bins
  std::size_t dof = 0;     // number of usable bins
  double band_low = 0.0;   // 0.5% quantile of chi-square(dof)
  double band_high = 0.0;  // 99.5% quantile
  std::vector<BinZ> per_bin;

  bool within_band() const noexcept { return statistic >= band_low && statistic <= band_high; }
  /// Fraction of usable bins with |z| < limit.
  double fraction_below(double limit) const;
};

inline constexpr double kMinExpectedCount = 5.0;

/// Expected counts are total * integral of pdf over each bin (adaptive
/// Gauss-Kronrod). Bins with expected count < 5 are skipped. Per-bin
/// z = (obs - exp) / sqrt(exp (1 - p)). Throws InsufficientDataError with
/// fewer than 3 usable bins.
GoodnessOfFit goodness_of_fit(const Histogram& hist, const std::function<double(double)>& pdf);

/// Same, with bin probabilities from a CDF.
GoodnessOfFit goodness_of_fit_cdf(const Histogram& hist, const std::function<double(double)>& cdf);

/// sup |F_n(x) - F(x)|.
double ks_distance(std::span<const double> values, const std::function<double(double)>& cdf);

/// Location of the fullest bin (centre); ties go to the lower bin.
double histogram_mode(const Histogram& hist);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_mean = 0.0;
  std::size_t n = 0;
};

/// Compensated two-pass moments; NaN values are skipped.
MeanStd mean_std(std::span<const double> values);

}  // namespace fuzzymon
