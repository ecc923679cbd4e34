#pragma once

// Single-realisation Monte Carlo of continuous fuzzy monitoring.
//
// Each of the K steps evolves the state freely for tau = T/K, picks an
// eigenstate index i with the Born probabilities of the evolved state, draws
// a readout f ~ G^2(f - a_i), and updates every amplitude by G(f - a_j)
// followed by renormalisation.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fuzzymon/meter.hpp"
#include "fuzzymon/qcore.hpp"
#include "fuzzymon/rng.hpp"

namespace fuzzymon {

inline constexpr std::int64_t kDefaultSampleCap = 100000;
inline constexpr double kCollapseThreshold = 1.0 - 1e-6;
/// Gaussian meters never reduce the state in one step; |X_k| > 10 (the
/// occupation ratio changed by e^10) is used as a labelled stand-in.
inline constexpr double kWalkReductionThreshold = 10.0;
/// Occupation above which the state counts as residing in an eigenstate
/// when counting telegraph switches.
inline constexpr double kSettleThreshold = 0.9;

/// K measurements over total time T. The coupling is kappa = 1/(2 tau df^2)
/// for Gaussian meters and kappa' = 1/(tau df) for hard walls.
class MonitoringPlan {
 public:
  MonitoringPlan(double total_time, std::int64_t steps, const MeterModel& meter);

  /// Meter width that realises a given coupling at step tau.
  static double delta_f_for_coupling(MeterKind kind, double coupling, double tau);

  double total_time() const noexcept { return total_time_; }
  std::int64_t steps() const noexcept { return steps_; }
  double tau() const noexcept { return tau_; }
  MeterKind meter_kind() const noexcept { return kind_; }
  double delta_f() const noexcept { return delta_f_; }
  /// kappa (Gaussian) or kappa' (hard wall).
  double coupling() const noexcept { return coupling_; }
  /// 1/sqrt(kappa T); Gaussian meters only.
  double delta_a_T() const;

 private:
  double total_time_;
  std::int64_t steps_;
  double tau_;
  MeterKind kind_;
  double delta_f_;
  double coupling_;
};

/// Decimated trace of a run, stored column-wise.
struct SampleSeries {
  std::size_t dim = 0;
  std::vector<std::int64_t> step;
  std::vector<double> time;
  std::vector<double> readout;
  std::vector<double> walk;        // NaN when the walk is undefined
  std::vector<double> occupation;  // size() * dim, row-major

  std::size_t size() const noexcept { return step.size(); }
  double occupation_at(std::size_t sample, std::size_t level) const { return occupation.at(sample * dim + level); }
};

enum class ReductionDiagnostic { hard_wall_region, walk_threshold, none };

struct TrajectoryRecord {
  std::int64_t steps = 0;
  SampleSeries samples;
  /// Sum over all K readouts of (f_k - a_1)^2 / K.
  double theta = 0.0;
  /// Sum over all K readouts of f_k / K.
  double readout_mean = 0.0;
  /// X_K; NaN unless N = 2 with a Gaussian meter.
  double final_walk = 0.0;
  StateVector final_state;
  std::optional<std::int64_t> first_reduction_step;
  ReductionDiagnostic reduction_diagnostic = ReductionDiagnostic::none;
  /// Basis index j with final occupation above 1 - 1e-6; empty = mixed.
  std::optional<std::size_t> collapse_verdict;
  /// Steps at which the occupied eigenstate (occupation >= 0.9) changed.
  std::vector<std::int64_t> switch_steps;
};

struct StepResult {
  double readout;
  StateVector next;
};

/// One measurement cycle (evolve, select, read, update).
StepResult step(const StateVector& psi, const UnitaryMatrix& u, const MeterModel& m, const Observable& obs,
                RngStream& rng);

/// The update for a given readout f applied to an already evolved state phi:
/// psi_j = G(f - a_j) phi_j / M_f with M_f^2 = sum_j G^2(f - a_j) |phi_j|^2.
/// Throws ConsistencyError when M_f = 0.
StateVector apply_readout(const StateVector& phi, double f, const MeterModel& m, const Observable& obs);

/// Full realisation: K steps with U = exp(-i H tau), decimated to at most
/// s_max samples (always including k = 1 and k = K).
TrajectoryRecord run(const Hamiltonian& system, const Observable& obs, const StateVector& psi0, const MeterModel& m,
                     const MonitoringPlan& plan, RngStream& rng, std::int64_t s_max = kDefaultSampleCap);

/// As above, additionally recording the readout at each of the ascending
/// probe_steps (1-based) into probe_readouts.
TrajectoryRecord run(const Hamiltonian& system, const Observable& obs, const StateVector& psi0, const MeterModel& m,
                     const MonitoringPlan& plan, RngStream& rng, std::int64_t s_max,
                     std::span<const std::int64_t> probe_steps, std::vector<double>& probe_readouts);

/// X_k = X_{k-1} + 2 (a2 - a1) / df^2 * (f_k - (a1 + a2) / 2).
/// Defined only for N = 2 with a Gaussian meter (UnsupportedError otherwise).
double walk_update(double walk, double readout, const Observable& obs, const MeterModel& m);

/// running_sum + (f - a_ref)^2; divide the final sum by K to obtain Theta.
inline double theta(double running_sum, double readout, double a_ref) noexcept {
  const double d = readout - a_ref;
  return running_sum + d * d;
}

/// Step indices kept by decimation: all of 1..K when K <= s_max, otherwise
/// s_max evenly spaced indices from 1 to K inclusive.
std::vector<std::int64_t> decimation_steps(std::int64_t steps, std::int64_t s_max);

}  // namespace fuzzymon
