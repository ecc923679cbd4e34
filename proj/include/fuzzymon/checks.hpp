#pragma once

// Statistical verdicts shared by presets and the acceptance suite.

#include <string>
#include <vector>

#include "fuzzymon/config.hpp"
#include "fuzzymon/emit.hpp"
#include "fuzzymon/ensemble.hpp"

namespace fuzzymon {

inline constexpr double kSigmaBand = 3.0;
inline constexpr double kBinPassFraction = 0.95;

/// |observed - expected| <= nsigma * se.
CheckResult check_within(const std::string& name, double observed, double expected, double se,
                         double nsigma = kSigmaBand);

/// expected / factor <= observed <= expected * factor.
CheckResult check_factor(const std::string& name, double observed, double expected, double factor);

/// |observed / expected - 1| <= tol.
CheckResult check_relative(const std::string& name, double observed, double expected, double tol);

CheckResult check_runtime(const std::string& name, double seconds, double limit);

/// Binned goodness of fit; passes when at least `fraction` of the usable
/// bins have |z| < 3.
CheckResult check_histogram_fit(const std::string& name, const Histogram& h, const std::function<double(double)>& pdf,
                                double fraction = kBinPassFraction);

/// Final X(T) histogram against the two-branch normal mixture.
CheckResult check_walk_fit(const EnsembleSummary& s, const ExperimentConfig& c);

/// Fraction of runs leaning to each level (argmax of final occupation)
/// against expected probabilities, binomial 3 sigma per level.
std::vector<CheckResult> check_leaning(const EnsembleSummary& s, const std::vector<double>& expected);

/// Every grid point of the named curve within 3 * se_model of `level`.
CheckResult check_flat_curve(const EnsembleSummary& s, const std::string& label, double level);

bool all_passed(const std::vector<CheckResult>& checks);

}  // namespace fuzzymon
