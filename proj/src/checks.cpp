#include "fuzzymon/checks.hpp"

#include <cmath>

#include "fuzzymon/errors.hpp"
#include "fuzzymon/theory.hpp"

namespace fuzzymon {

namespace {

std::string num(double x) { return format_number(x); }

}  // namespace

CheckResult check_within(const std::string& name, double observed, double expected, double se, double nsigma) {
  const double dev = std::fabs(observed - expected);
  const bool ok = std::isfinite(observed) && dev <= nsigma * se;
  return {name, ok,
          "observed=" + num(observed) + " expected=" + num(expected) + " se=" + num(se) +
              " z=" + num(se > 0.0 ? dev / se : INFINITY)};
}

CheckResult check_factor(const std::string& name, double observed, double expected, double factor) {
  const double ratio = observed / expected;
  const bool ok = std::isfinite(ratio) && ratio >= 1.0 / factor && ratio <= factor;
  return {name, ok, "observed=" + num(observed) + " expected=" + num(expected) + " ratio=" + num(ratio)};
}

CheckResult check_relative(const std::string& name, double observed, double expected, double tol) {
  const double rel = std::fabs(observed / expected - 1.0);
  const bool ok = std::isfinite(rel) && rel <= tol;
  return {name, ok,
          "observed=" + num(observed) + " expected=" + num(expected) + " rel_dev=" + num(rel) + " tol=" + num(tol)};
}

CheckResult check_runtime(const std::string& name, double seconds, double limit) {
  return {name, seconds < limit, "seconds=" + num(std::round(seconds * 100.0) / 100.0) + " limit=" + num(limit)};
}

CheckResult check_histogram_fit(const std::string& name, const Histogram& h, const std::function<double(double)>& pdf,
                                double fraction) {
  try {
    const GoodnessOfFit g = goodness_of_fit(h, pdf);
    const double below = g.fraction_below(kSigmaBand);
    return {name, below >= fraction,
            "bins=" + std::to_string(g.dof) + " frac_|z|<3=" + num(below) + " chi2=" + num(g.statistic) +
                " band=[" + num(g.band_low) + "," + num(g.band_high) + "]"};
  } catch (const InsufficientDataError& e) {
    return {name, false, e.what()};
  }
}

CheckResult check_walk_fit(const EnsembleSummary& s, const ExperimentConfig& c) {
  if (!s.walk_histogram) return {"walk_fit", false, "no walk histogram"};
  const Experiment exp = build_experiment(c);
  const WalkPdfParams p{exp.plan.coupling(),           exp.plan.total_time(),
                        exp.observable.value(0),       exp.observable.value(1),
                        std::norm(exp.initial_state[0]), std::norm(exp.initial_state[1])};
  return check_histogram_fit("walk_fit", *s.walk_histogram, [p](double x) { return walk_pdf(x, p); });
}

std::vector<CheckResult> check_leaning(const EnsembleSummary& s, const std::vector<double>& expected) {
  std::vector<CheckResult> out;
  const auto m = static_cast<double>(s.M);
  for (std::size_t j = 0; j < expected.size(); ++j) {
    const double p = expected[j];
    out.push_back(check_within("leaning_fraction_" + std::to_string(j + 1),
                               static_cast<double>(s.leaning_counts.at(j)) / m, p, std::sqrt(p * (1.0 - p) / m)));
  }
  return out;
}

CheckResult check_flat_curve(const EnsembleSummary& s, const std::string& label, double level) {
  for (const ConditionalMeanCurve& c : s.conditional_means) {
    if (c.label != label) continue;
    double worst = 0.0;
    std::int64_t worst_step = 0;
    std::size_t outside = 0;
    for (const ConditionalMeanPoint& p : c.points) {
      const double z = std::fabs(p.mean - level) / p.se_model;
      if (!(z <= kSigmaBand)) ++outside;
      if (!(z <= worst)) {
        worst = z;
        worst_step = p.step;
      }
    }
    const double m_eff = c.points.empty() ? 0.0 : c.points.front().m_eff;
    return {"flat_" + label, outside == 0 && !c.points.empty(),
            "level=" + num(level) + " points=" + std::to_string(c.points.size()) +
                " outside_3se=" + std::to_string(outside) + " max_z=" + num(worst) + " at_k=" +
                std::to_string(worst_step) + " m_eff=" + num(m_eff)};
  }
  return {"flat_" + label, false, "no curve labelled " + label};
}

bool all_passed(const std::vector<CheckResult>& checks) {
  for (const CheckResult& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

}  // namespace fuzzymon
