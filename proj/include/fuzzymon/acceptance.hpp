#pragma once

// Desk-scale acceptance suite. Each criterion runs its own ensembles and
// returns one verdict per sub-check.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fuzzymon/checks.hpp"

namespace fuzzymon {

inline constexpr int kCriterionCount = 10;
inline constexpr std::uint64_t kAcceptanceSeed = 7031;

struct AcceptanceOptions {
  unsigned workers = 1;
  std::uint64_t seed = kAcceptanceSeed;
  std::ostream* log = nullptr;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const { return all_passed(checks); }
};

std::string criterion_title(int id);

/// Throws ValidationError for an id outside 1..kCriterionCount.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

/// "PASS 1 decoherence law (12.3 s)" followed by indented sub-check lines.
std::string format_result(const CriterionResult& r);

}  // namespace fuzzymon
