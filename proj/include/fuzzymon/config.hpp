#pragma once

// Experiment configuration: JSON ingestion with strict key checking,
// derived quantities, and a canonical echo that loads back unchanged.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzymon/ensemble.hpp"
#include "fuzzymon/meter.hpp"

namespace fuzzymon {

struct SystemSpec {
  std::vector<double> eigenvalues;
  /// Diagonal of H in the observable basis; empty = all zero.
  std::vector<double> energies;
  /// Coupling between neighbouring basis states.
  double omega = 0.0;

  bool operator==(const SystemSpec&) const = default;
};

struct MeterSpec {
  MeterKind kind = MeterKind::gaussian;
  std::optional<double> delta_f;
  std::optional<double> coupling;

  bool operator==(const MeterSpec&) const = default;
};

struct PlanSpec {
  double T = 1.0;
  std::int64_t K = 1;

  bool operator==(const PlanSpec&) const = default;
};

struct InitialStateSpec {
  std::vector<Complex> amplitudes;
  bool normalize = false;

  bool operator==(const InitialStateSpec&) const = default;
};

struct RunSpec {
  std::int64_t M = 1;
  std::uint64_t master_seed = 0;
  std::int64_t s_max = kDefaultSampleCap;
  unsigned workers = 1;

  bool operator==(const RunSpec&) const = default;
};

struct HistogramSpec {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 1;

  bool operator==(const HistogramSpec&) const = default;
};

struct PostSelectionSpec {
  std::vector<Complex> target;
  PostSelectionMode mode = PostSelectionMode::born_weight;
  std::string label;

  bool operator==(const PostSelectionSpec&) const = default;
};

struct AnalysisConfig {
  std::int64_t grid_points = 0;
  std::int64_t survival_points = 0;
  std::int64_t keep_traces = 1;
  std::optional<HistogramSpec> walk_histogram;
  std::optional<HistogramSpec> theta_histogram;
  std::vector<PostSelectionSpec> post_selection;

  bool operator==(const AnalysisConfig&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  SystemSpec system;
  MeterSpec meter;
  PlanSpec plan;
  InitialStateSpec initial_state;
  RunSpec run;
  AnalysisConfig analysis;
  OutputSpec output;

  bool operator==(const ExperimentConfig&) const = default;
};

struct DerivedQuantities {
  double tau = 0.0;
  double delta_f = 0.0;
  double coupling = 0.0;  // kappa or kappa'
  /// Smallest gap between neighbouring eigenvalues.
  double delta_a = 0.0;
  std::optional<double> delta_a_T;   // Gaussian only
  std::optional<double> t_lr;        // Gaussian only
  std::optional<double> t_lr_prime;  // hard wall only
  std::optional<double> t_r;         // omega != 0
  std::optional<double> t_stay;      // hard wall with omega != 0
};

/// Throws ValidationError naming the offending key path, e.g. "meter.delta_f".
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical echo; parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig& c);

/// Revalidates every invariant of the referenced library types.
void validate(const ExperimentConfig& c);

DerivedQuantities derive(const ExperimentConfig& c);
nlohmann::json derived_to_json(const DerivedQuantities& d);

Hamiltonian build_hamiltonian(const SystemSpec& s);
MeterModel build_meter(const ExperimentConfig& c);
Experiment build_experiment(const ExperimentConfig& c);
AnalysisSpec build_analysis(const ExperimentConfig& c);

}  // namespace fuzzymon
