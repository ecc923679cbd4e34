#pragma once

// Batches of independent trajectories on streams 0..M-1 of one master seed.
// Runs are grouped in fixed chunks whose partial sums are merged in chunk
// order, so results do not depend on the number of worker threads.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fuzzymon/compensated.hpp"
#include "fuzzymon/meter.hpp"
#include "fuzzymon/qcore.hpp"
#include "fuzzymon/stats.hpp"
#include "fuzzymon/trajectory.hpp"

namespace fuzzymon {

inline constexpr std::int64_t kChunkSize = 256;

struct Experiment {
  Hamiltonian system;
  Observable observable;
  StateVector initial_state;
  MeterModel meter;
  MonitoringPlan plan;
  std::int64_t s_max = kDefaultSampleCap;

  /// Dimensions agree and the plan matches the meter.
  void validate() const;
};

enum class PostSelectionMode { born_weight, verdict_indicator };

std::string_view to_string(PostSelectionMode mode) noexcept;

struct PostSelection {
  StateVector target;
  PostSelectionMode mode = PostSelectionMode::born_weight;
  std::string label;

  /// Weight of a run ending in final_state; verdict_indicator needs a basis target.
  double weight(const StateVector& final_state, const std::optional<std::size_t>& verdict) const;
};

struct AnalysisSpec {
  /// Number of grid times for conditional means (0 = none).
  std::int64_t grid_points = 0;
  std::vector<PostSelection> post_selection;
  /// Explicit histogram edges; empty = Freedman-Diaconis on the pooled sample.
  std::vector<double> walk_edges;
  std::vector<double> theta_edges;
  /// Points on the survival curve (0 = none).
  std::int64_t survival_points = 0;
  /// Full sample series are kept for streams 0..keep_traces-1.
  std::int64_t keep_traces = 1;
};

struct ConditionalMeanPoint {
  std::int64_t step;
  double time;
  double mean;
  /// df / sqrt(2 M_eff) with M_eff = (sum w)^2 / sum w^2.
  double se_model;
  /// Weighted sample standard deviation / sqrt(M_eff).
  double se_empirical;
  double total_weight;
  double m_eff;
};

struct ConditionalMeanCurve {
  std::string label;  // "unconditional" when no post-selection applies
  std::optional<PostSelectionMode> mode;
  std::vector<ConditionalMeanPoint> points;
};

/// Streaming accumulator of weighted readout moments on a grid.
class ConditionalMeanAccumulator {
 public:
  explicit ConditionalMeanAccumulator(std::size_t grid_size = 0);

  void add(std::span<const double> readouts, double weight);
  void merge(const ConditionalMeanAccumulator& other);

  /// Throws EmptySelectionError if the total weight is zero.
  std::vector<ConditionalMeanPoint> finish(std::span<const std::int64_t> steps, double tau, double delta_f) const;

 private:
  std::vector<CompensatedSum> wf_;
  std::vector<CompensatedSum> wf2_;
  CompensatedSum w_;
  CompensatedSum w2_;
};

/// Weighted mean of the readout at each grid step over stored records; every
/// record must hold a sample at each grid step. ps = nullopt gives the
/// unconditional mean.
std::vector<ConditionalMeanPoint> conditional_mean_readout(std::span<const TrajectoryRecord> records,
                                                           const std::optional<PostSelection>& ps,
                                                           std::span<const std::int64_t> grid, double tau,
                                                           double delta_f);

struct SurvivalPoint {
  std::int64_t step;
  double time;
  double fraction;
  double se;
};

struct FirstReductionStats {
  std::int64_t events = 0;
  std::int64_t exposure_steps = 0;
  /// tau * exposure / events (censored exponential MLE); NaN without events.
  double mean_time = 0.0;
  double se = 0.0;
};

struct ElementStats {
  CompensatedSum re, im, re2, im2, reim;

  void add(Complex z);
  void merge(const ElementStats& o);
};

struct EnsembleSummary {
  std::int64_t M = 0;
  std::uint64_t master_seed = 0;
  std::size_t dim = 0;

  DensityMatrix rho_hat{DensityMatrix::pure(StateVector::basis(2, 0))};
  Eigen::MatrixXd rho_se_re;
  Eigen::MatrixXd rho_se_im;
  /// Delta-method standard error of |rho_hat_ij|.
  Eigen::MatrixXd rho_abs_se;

  std::vector<std::int64_t> verdict_counts;  // per eigenstate
  std::int64_t mixed_count = 0;
  std::vector<std::int64_t> leaning_counts;  // argmax of final occupation

  /// Per run, indexed by stream id.
  std::vector<double> final_walk;
  std::vector<double> theta;
  std::vector<double> readout_mean;
  std::vector<std::int64_t> first_reduction_step;  // -1 = none
  std::vector<std::int64_t> switch_count;

  std::optional<Histogram> walk_histogram;
  std::optional<Histogram> theta_histogram;
  std::vector<SurvivalPoint> survival_curve;
  FirstReductionStats first_reduction;
  ReductionDiagnostic reduction_diagnostic = ReductionDiagnostic::none;

  std::int64_t total_switches = 0;
  /// M T / total switches; NaN without switches.
  double mean_residence_time = 0.0;

  std::vector<std::int64_t> grid_steps;
  std::vector<ConditionalMeanCurve> conditional_means;

  std::vector<TrajectoryRecord> traces;
};

/// Runs streams 0..M-1 with `workers` threads. Any trajectory error aborts the
/// batch with a BatchError naming the lowest failing stream id.
EnsembleSummary run_batch(const Experiment& exp, const AnalysisSpec& analysis, std::int64_t M,
                          std::uint64_t master_seed, unsigned workers);

/// Survival fraction at each step from first-reduction steps (-1 = none).
std::vector<SurvivalPoint> survival_curve(std::span<const std::int64_t> first_reduction, std::int64_t K, double tau,
                                          std::int64_t points);

FirstReductionStats first_reduction_stats(std::span<const std::int64_t> first_reduction, std::int64_t K, double tau);

}  // namespace fuzzymon
