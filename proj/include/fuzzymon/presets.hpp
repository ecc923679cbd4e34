#pragma once

// Figure presets. Each preset holds full-scale parameters; runs default to
// desk scale (K <= 1e7, M <= 1e4) with the coupling and T held fixed, so the
// dimensionless groups are preserved and only delta_f changes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fuzzymon/checks.hpp"
#include "fuzzymon/config.hpp"
#include "fuzzymon/emit.hpp"

namespace fuzzymon {

inline constexpr std::int64_t kDeskMaxSteps = 10'000'000;
inline constexpr std::int64_t kDeskMaxRuns = 10'000;
inline constexpr std::uint64_t kPresetSeed = 20240611;

struct PresetCase {
  std::string name;
  ExperimentConfig config;
};

struct Preset {
  std::string name;
  std::string summary;
  std::vector<PresetCase> cases;
};

std::vector<std::string> preset_names();

/// Throws ValidationError for an unknown name.
Preset make_preset(const std::string& name);

struct ScaledCase {
  ExperimentConfig config;
  OutputMetadata meta;
};

/// No scale: desk caps. With a scale s in (0, 1]: K is multiplied by s for
/// single-trajectory presets and M for ensemble presets; no caps apply.
ScaledCase scale_case(const ExperimentConfig& full, std::optional<double> scale);

std::vector<CheckResult> preset_checks(const std::string& preset, const ExperimentConfig& c, const EnsembleSummary& s);

struct PresetRunOptions {
  std::optional<double> scale;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  unsigned workers = 1;
};

struct PresetReport {
  std::vector<CheckResult> checks;
  std::vector<std::filesystem::path> files;

  bool passed() const { return all_passed(checks); }
};

/// Runs every case and writes its artifacts under out/<preset>[/<case>].
PresetReport run_preset(const std::string& name, const PresetRunOptions& opt, std::ostream* log = nullptr);

}  // namespace fuzzymon
