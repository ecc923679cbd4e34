#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fuzzymon/acceptance.hpp"
#include "fuzzymon/config.hpp"
#include "fuzzymon/emit.hpp"
#include "fuzzymon/errors.hpp"
#include "fuzzymon/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitCheckFailed = 2;

void log_derived(const fuzzymon::ExperimentConfig& c) {
  const fuzzymon::DerivedQuantities d = fuzzymon::derive(c);
  std::cerr << "derived: " << fuzzymon::derived_to_json(d).dump() << '\n';
}

int cmd_run(const std::string& path, std::optional<unsigned> workers, std::optional<std::string> out) {
  fuzzymon::ExperimentConfig c = fuzzymon::load_config(path);
  if (out) c.output.directory = *out;
  log_derived(c);
  const unsigned w = workers.value_or(c.run.workers);
  const fuzzymon::EnsembleSummary s =
      fuzzymon::run_batch(fuzzymon::build_experiment(c), fuzzymon::build_analysis(c), c.run.M, c.run.master_seed, w);
  const fuzzymon::OutputMetadata meta{c.run.master_seed, c.plan.K, c.run.M, 1.0, "unscaled"};
  for (const std::string& f : fuzzymon::write_artifacts(c.output.directory, c, s, meta, {})) {
    std::cout << c.output.directory << '/' << f << '\n';
  }
  return kExitOk;
}

int cmd_preset(const std::string& name, const fuzzymon::PresetRunOptions& opt) {
  const fuzzymon::PresetReport r = fuzzymon::run_preset(name, opt, &std::cerr);
  for (const auto& f : r.files) std::cout << f.string() << '\n';
  for (const fuzzymon::CheckResult& c : r.checks) {
    std::cerr << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
  }
  return r.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_check(const std::vector<int>& only, unsigned workers) {
  std::vector<int> ids = only;
  if (ids.empty()) {
    for (int i = 1; i <= fuzzymon::kCriterionCount; ++i) ids.push_back(i);
  }
  fuzzymon::AcceptanceOptions opt;
  opt.workers = workers;
  opt.log = &std::cerr;
  bool ok = true;
  for (int id : ids) {
    const fuzzymon::CriterionResult r = fuzzymon::run_criterion(id, opt);
    std::cout << fuzzymon::format_result(r) << std::flush;
    ok = ok && r.passed();
  }
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator of continuous fuzzy measurement"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<unsigned> run_workers;
  std::optional<std::string> run_out;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Path to the config file")->required();
  run->add_option("--workers", run_workers, "Worker threads (overrides run.workers)")->check(CLI::PositiveNumber);
  run->add_option("--out", run_out, "Output directory (overrides output.directory)");

  std::string preset_name;
  std::optional<double> scale;
  std::optional<std::uint64_t> seed;
  std::string preset_out = "out";
  unsigned preset_workers = 1;
  auto* preset = app.add_subcommand("preset", "Reproduce a figure preset");
  preset->add_option("name", preset_name, "fig1..fig8")->required()->check(CLI::IsMember(fuzzymon::preset_names()));
  preset->add_option("--scale", scale, "Multiply K (single runs) or M (ensembles) by s in (0, 1]; default applies desk caps");
  preset->add_option("--seed", seed, "Master seed");
  preset->add_option("--out", preset_out, "Output root directory");
  preset->add_option("--workers", preset_workers, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<int> only;
  unsigned check_workers = 1;
  auto* check = app.add_subcommand("check", "Run the acceptance suite");
  check->add_option("--only", only, "Criterion ids to run")->check(CLI::Range(1, fuzzymon::kCriterionCount));
  check->add_option("--workers", check_workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(config_path, run_workers, run_out);
    if (*preset) {
      fuzzymon::PresetRunOptions opt;
      opt.scale = scale;
      opt.seed = seed;
      opt.out = preset_out;
      opt.workers = preset_workers;
      return cmd_preset(preset_name, opt);
    }
    if (*check) return cmd_check(only, check_workers);
  } catch (const fuzzymon::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
  return kExitInvalid;
}
