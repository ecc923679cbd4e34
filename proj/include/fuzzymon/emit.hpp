#pragma once

// Deterministic text output: CSV traces and tables, JSON summaries. Numbers
// use the shortest round-trip decimal form, so identical inputs give
// byte-identical files.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fuzzymon/config.hpp"
#include "fuzzymon/ensemble.hpp"

namespace fuzzymon {

/// Provenance stamped into every file.
struct OutputMetadata {
  std::uint64_t master_seed = 0;
  std::int64_t K = 0;
  std::int64_t M = 0;
  double scale = 1.0;
  std::string scale_note = "unscaled";
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Shortest round-trip decimal; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double x);

nlohmann::json metadata_to_json(const OutputMetadata& meta);

/// "# key=value" comment lines followed by the header row
/// k,t,f,occ_1..occ_N,X and one row per sample in step order.
void write_trace_csv(std::ostream& out, const SampleSeries& samples, std::size_t dim, const OutputMetadata& meta);

/// Bin table lo,hi,count[,expected]; expected = total * bin probability.
void write_histogram_csv(std::ostream& out, const Histogram& h, const std::function<double(double)>* cdf,
                         const OutputMetadata& meta);

void write_conditional_means_csv(std::ostream& out, const std::vector<ConditionalMeanCurve>& curves,
                                 const OutputMetadata& meta);

void write_survival_csv(std::ostream& out, const std::vector<SurvivalPoint>& points,
                        const std::function<double(std::int64_t)>* theory, const OutputMetadata& meta);

/// One row per run: stream,final_walk,theta,readout_mean,first_reduction_step,switches.
void write_runs_csv(std::ostream& out, const EnsembleSummary& s, const OutputMetadata& meta);

nlohmann::json summary_to_json(const EnsembleSummary& s);
nlohmann::json checks_to_json(const std::vector<CheckResult>& checks);

/// Two-space indented JSON with a trailing newline.
std::string dump_json(const nlohmann::json& j);

/// IoError carries the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Theory overlays that apply to this configuration, if any.
std::optional<std::function<double(double)>> walk_theory_cdf(const ExperimentConfig& c);
std::optional<std::function<double(double)>> theta_theory_cdf(const ExperimentConfig& c);
std::optional<std::function<double(std::int64_t)>> survival_theory(const ExperimentConfig& c);

/// Writes summary.json and the CSV tables enabled by c.output.formats into
/// dir. Returns the file names written, relative to dir.
std::vector<std::string> write_artifacts(const std::filesystem::path& dir, const ExperimentConfig& c,
                                         const EnsembleSummary& s, const OutputMetadata& meta,
                                         const std::vector<CheckResult>& checks, const nlohmann::json& extra = {});

}  // namespace fuzzymon
