#pragma once

// Closed-form reference laws and exact small-scale oracles.

#include <cstdint>
#include <span>

#include "fuzzymon/meter.hpp"
#include "fuzzymon/qcore.hpp"
#include "fuzzymon/trajectory.hpp"

namespace fuzzymon {

/// Density of Theta = sum (f_k - a_1)^2 / K for readouts drawn from an
/// eigenstate: Gamma(K/2, scale delta_a_T^2 / 2), evaluated in the log domain.
double theta_pdf(double x, std::int64_t K, double delta_a_T);
/// Location of the maximum of theta_pdf: (delta_a_T^2 / 2)(K/2 - 1) ~ df^2 / 2.
double theta_mode(std::int64_t K, double delta_a_T);
/// CDF of theta_pdf (regularised lower incomplete gamma).
double theta_cdf(double x, std::int64_t K, double delta_a_T);

/// |rho_12(T)| / |rho_12(0)| = exp(-kappa T da^2 / 2).
double coherence_decay(double kappa, double T, double delta_a);

/// exp(-kappa' T |da|).
double survival_prob(double kappa_prime, double T, double delta_a);
/// (1 - kappa' T |da| / K)^K; the hard-wall survival after K windows.
double survival_prob_discrete(double kappa_prime, double T, double delta_a, std::int64_t K);

struct WalkPdfParams {
  double kappa;
  double T;
  double a1;
  double a2;
  double w1;  // |alpha_0|^2
  double w2;  // |beta_0|^2

  void validate() const;
};

/// Mixture of two normals with means -/+ 2 kappa T (a1 - a2)^2 and common
/// std 2 sqrt(kappa T) |a1 - a2|. The w1 branch carries the negative drift.
double walk_pdf(double X, const WalkPdfParams& p);
double walk_cdf(double X, const WalkPdfParams& p);

struct LevelResolutionTimes {
  double t_lr;        // 1 / (kappa da^2)
  double t_lr_prime;  // 1 / (kappa' |da|)
  double t_stay;      // T_R^2 / (4 pi^2 T'_LR)
};

/// The same coupling value is used for kappa and kappa'.
LevelResolutionTimes level_resolution_times(double coupling, double delta_a, double T_R);

struct ZenoResult {
  double beta2;
  double ratio;  // beta2 / (omega T)^2
};

/// omega^2 times the double integral of exp(-lambda |T' - T''|) over
/// [0, T]^2 with lambda = kappa a^2 / 2 (the continuum limit of the discrete
/// sum below): 2 omega^2 (lambda T - 1 + exp(-lambda T)) / lambda^2.
ZenoResult zeno_beta2(double omega, double kappa, double a, double T);
/// omega^2 tau^2 sum_{K',K''} q^|K'-K''| with q = exp(-a^2 / (4 df^2)).
ZenoResult zeno_beta2_discrete(double omega, double a, double delta_f, double tau, std::int64_t K);
/// Large kappa a^2 T limit of the ratio: 4 / (kappa a^2 T).
double zeno_ratio_asymptote(double kappa, double a, double T);

struct NormalMoments {
  double mean;
  double stddev;
};

/// Law of the log path factor Z_K' for a path that jumps at step K':
/// mean -a^2 (K - K') / df^2, std a sqrt(2 (K - K')) / df.
NormalMoments zeno_log_factor_moments(double a, double delta_f, std::int64_t K, std::int64_t K_prime);

/// K iterations of rho <- D(U rho U^dagger), D_ij = overlap(a_i, a_j).
DensityMatrix master_recursion(const DensityMatrix& rho0, const UnitaryMatrix& u, const MeterModel& m,
                               const Observable& obs, std::int64_t K);

inline constexpr std::uint64_t kMaxPathCount = std::uint64_t{1} << 24;

/// Explicit sum over all N^K eigenbasis paths of the free amplitude times
/// prod_k G(f_k - a_{i_k}). Unnormalised. Refuses when N^K > 2^24.
CVector path_sum_amplitude(std::span<const double> readout, const UnitaryMatrix& u, const MeterModel& m,
                           const Observable& obs, const StateVector& psi0);

/// prod_k G(f_k - A) U |psi0>, unnormalised.
CVector product_form_amplitude(std::span<const double> readout, const UnitaryMatrix& u, const MeterModel& m,
                               const Observable& obs, const StateVector& psi0);

enum class NonHermitianScheme {
  split,  // exp(-kappa tau (A - f_k)^2) exp(-i H tau) per step
  exact,  // exp(-i (H - i kappa (A - f_k)^2) tau) per step
};

/// Evolution under H - i kappa (A - f(t))^2 with f piecewise constant on
/// the K steps of the plan. Gaussian meters only. Unnormalised.
CVector nonhermitian_evolve(std::span<const double> readout, const Hamiltonian& h, const MeterModel& m,
                            const Observable& obs, const MonitoringPlan& plan, const StateVector& psi0,
                            NonHermitianScheme scheme = NonHermitianScheme::split);

/// Commuting case: alpha_j(T) = exp(-i E_j T - kappa tau sum_k (f_k - a_j)^2) alpha_j(0).
/// Requires a diagonal Hamiltonian.
CVector nonhermitian_closed_form(std::span<const double> readout, const Hamiltonian& h, const Observable& obs,
                                 const MonitoringPlan& plan, const StateVector& psi0);

}  // namespace fuzzymon
