#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "fuzzymon/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  std::vector<int> only;
  fuzzymon::AcceptanceOptions opt;
  bool quiet = false;
  app.add_option("--only", only, "Criterion ids")->check(CLI::Range(1, fuzzymon::kCriterionCount));
  app.add_option("--workers", opt.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "Master seed");
  app.add_flag("--quiet", quiet, "No progress notes on stderr");
  CLI11_PARSE(app, argc, argv);
  if (!quiet) opt.log = &std::cerr;
  if (only.empty()) {
    for (int i = 1; i <= fuzzymon::kCriterionCount; ++i) only.push_back(i);
  }
  bool ok = true;
  for (int id : only) {
    try {
      const fuzzymon::CriterionResult r = fuzzymon::run_criterion(id, opt);
      std::cout << fuzzymon::format_result(r) << std::flush;
      ok = ok && r.passed();
    } catch (const std::exception& e) {
      std::cout << "FAIL " << id << ' ' << fuzzymon::criterion_title(id) << " (error: " << e.what() << ")\n";
      ok = false;
    }
  }
  return ok ? 0 : 1;
}
