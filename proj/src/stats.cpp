#include "fuzzymon/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fuzzymon/compensated.hpp"
#include "fuzzymon/errors.hpp"

namespace fuzzymon {

std::int64_t Histogram::total() const noexcept {
  std::int64_t t = underflow + overflow;
  for (std::int64_t c : counts) t += c;
  return t;
}

Histogram histogram(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw ValidationError("histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw ValidationError("histogram edges must be strictly increasing");
  }
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (std::isnan(v)) continue;
    if (v < edges.front()) {
      ++h.underflow;
    } else if (v > edges.back()) {
      ++h.overflow;
    } else if (v == edges.back()) {
      ++h.counts.back();
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - edges.begin()) - 1];
    }
  }
  return h;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t n) {
  if (n < 1 || !(hi > lo)) throw ValidationError("uniform_edges needs n >= 1 and hi > lo");
  std::vector<double> e(n + 1);
  for (std::size_t i = 0; i <= n; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
  e.back() = hi;
  return e;
}

namespace {

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return i + 1 < s.size() ? s[i] + frac * (s[i + 1] - s[i]) : s[i];
}

std::vector<double> finite_sorted(std::span<const double> values) {
  std::vector<double> s;
  s.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v)) s.push_back(v);
  }
  std::sort(s.begin(), s.end());
  return s;
}

GoodnessOfFit finish_gof(const Histogram& hist, const std::vector<double>& prob) {
  const auto total = static_cast<double>(hist.total());
  GoodnessOfFit out;
  CompensatedSum stat;
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    const double p = prob[i];
    const double expected = total * p;
    if (!(expected >= kMinExpectedCount)) continue;
    const auto observed = static_cast<double>(hist.counts[i]);
    const double diff = observed - expected;
    stat.add(diff * diff / expected);
    out.per_bin.push_back({i, observed, expected, diff / std::sqrt(expected * std::max(1.0 - p, 1e-300))});
  }
  if (out.per_bin.size() < 3) throw InsufficientDataError("fewer than 3 bins with expected count >= 5");
  out.statistic = stat.value();
  out.dof = out.per_bin.size();
  const boost::math::chi_squared dist(static_cast<double>(out.dof));
  out.band_low = boost::math::quantile(dist, 0.005);
  out.band_high = boost::math::quantile(dist, 0.995);
  return out;
}

}  // namespace

std::vector<double> freedman_diaconis_edges(std::span<const double> values, std::size_t max_bins) {
  const std::vector<double> s = finite_sorted(values);
  if (s.size() < 2) throw InsufficientDataError("Freedman-Diaconis edges need at least two finite values");
  const double lo = s.front();
  double hi = s.back();
  if (!(hi > lo)) hi = lo + 1.0;
  const double iqr = quantile_sorted(s, 0.75) - quantile_sorted(s, 0.25);
  std::size_t n = 1;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr * std::cbrt(1.0 / static_cast<double>(s.size()));
    n = static_cast<std::size_t>(std::ceil((hi - lo) / width));
  }
  n = std::clamp<std::size_t>(n, 1, std::max<std::size_t>(max_bins, 1));
  return uniform_edges(lo, hi, n);
}

double GoodnessOfFit::fraction_below(double limit) const {
  if (per_bin.empty()) return 0.0;
  std::size_t ok = 0;
  for (const BinZ& b : per_bin) {
    if (std::fabs(b.z) < limit) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(per_bin.size());
}

GoodnessOfFit goodness_of_fit(const Histogram& hist, const std::function<double(double)>& pdf) {
  std::vector<double> prob(hist.bins());
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    prob[i] = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(pdf, hist.edges[i], hist.edges[i + 1], 8,
                                                                             1e-12);
  }
  return finish_gof(hist, prob);
}

GoodnessOfFit goodness_of_fit_cdf(const Histogram& hist, const std::function<double(double)>& cdf) {
  std::vector<double> prob(hist.bins());
  for (std::size_t i = 0; i < hist.bins(); ++i) prob[i] = cdf(hist.edges[i + 1]) - cdf(hist.edges[i]);
  return finish_gof(hist, prob);
}

double ks_distance(std::span<const double> values, const std::function<double(double)>& cdf) {
  const std::vector<double> s = finite_sorted(values);
  if (s.empty()) throw InsufficientDataError("KS distance of an empty sample");
  const auto n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double histogram_mode(const Histogram& hist) {
  if (hist.bins() == 0) throw InsufficientDataError("empty histogram");
  const auto it = std::max_element(hist.counts.begin(), hist.counts.end());
  return hist.center(static_cast<std::size_t>(it - hist.counts.begin()));
}

MeanStd mean_std(std::span<const double> values) {
  CompensatedSum s;
  std::size_t n = 0;
  for (double v : values) {
    if (std::isnan(v)) continue;
    s.add(v);
    ++n;
  }
  MeanStd out;
  out.n = n;
  if (n == 0) return out;
  out.mean = s.value() / static_cast<double>(n);
  CompensatedSum ss;
  for (double v : values) {
    if (std::isnan(v)) continue;
    const double d = v - out.mean;
    ss.add(d * d);
  }
  if (n > 1) {
    out.stddev = std::sqrt(ss.value() / static_cast<double>(n - 1));
    out.stderr_mean = out.stddev / std::sqrt(static_cast<double>(n));
  }
  return out;
}

}  // namespace fuzzymon
