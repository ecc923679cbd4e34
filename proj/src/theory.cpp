#include "fuzzymon/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "fuzzymon/compensated.hpp"
#include "fuzzymon/errors.hpp"

namespace fuzzymon {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite and > 0");
}

void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite and >= 0");
}

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

}  // namespace

// ---------------------------------------------------------------------------
// Theta

double theta_pdf(double x, std::int64_t K, double delta_a_T) {
  if (K < 2) throw ValidationError("theta_pdf needs K >= 2");
  require_positive(delta_a_T, "delta_a_T");
  if (!(x >= 0.0)) throw ValidationError("theta_pdf needs x >= 0");
  const double shape = 0.5 * static_cast<double>(K);
  const double scale = 0.5 * delta_a_T * delta_a_T;
  if (x == 0.0) return K == 2 ? 1.0 / scale : 0.0;
  const double log_pdf = (shape - 1.0) * std::log(x / scale) - x / scale - std::log(scale) - std::lgamma(shape);
  return std::exp(log_pdf);
}

double theta_mode(std::int64_t K, double delta_a_T) {
  if (K < 2) throw ValidationError("theta_mode needs K >= 2");
  require_positive(delta_a_T, "delta_a_T");
  return 0.5 * delta_a_T * delta_a_T * (0.5 * static_cast<double>(K) - 1.0);
}

double theta_cdf(double x, std::int64_t K, double delta_a_T) {
  if (K < 2) throw ValidationError("theta_cdf needs K >= 2");
  require_positive(delta_a_T, "delta_a_T");
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(0.5 * static_cast<double>(K), x / (0.5 * delta_a_T * delta_a_T));
}

// ---------------------------------------------------------------------------
// Decoherence and survival

double coherence_decay(double kappa, double T, double delta_a) {
  require_nonnegative(kappa, "kappa");
  require_nonnegative(T, "T");
  return std::exp(-0.5 * kappa * T * delta_a * delta_a);
}

double survival_prob(double kappa_prime, double T, double delta_a) {
  require_nonnegative(kappa_prime, "kappa'");
  require_nonnegative(T, "T");
  return std::exp(-kappa_prime * T * std::fabs(delta_a));
}

double survival_prob_discrete(double kappa_prime, double T, double delta_a, std::int64_t K) {
  require_nonnegative(kappa_prime, "kappa'");
  require_nonnegative(T, "T");
  if (K < 1) throw ValidationError("K must be >= 1");
  const double p = kappa_prime * T * std::fabs(delta_a) / static_cast<double>(K);
  if (p >= 1.0) return 0.0;
  return std::exp(static_cast<double>(K) * std::log1p(-p));
}

// ---------------------------------------------------------------------------
// Walk

void WalkPdfParams::validate() const {
  require_positive(kappa, "kappa");
  require_positive(T, "T");
  if (!(a1 != a2)) throw ValidationError("walk_pdf needs a1 != a2");
  if (!(w1 >= 0.0) || !(w2 >= 0.0) || std::fabs(w1 + w2 - 1.0) > 1e-12) {
    throw ValidationError("walk_pdf weights must be >= 0 and sum to 1");
  }
}

double walk_pdf(double X, const WalkPdfParams& p) {
  p.validate();
  const double da = p.a1 - p.a2;
  const double drift = 2.0 * p.kappa * p.T * da * da;
  const double sd = 2.0 * std::sqrt(p.kappa * p.T) * std::fabs(da);
  return p.w1 * normal_pdf(X, -drift, sd) + p.w2 * normal_pdf(X, drift, sd);
}

double walk_cdf(double X, const WalkPdfParams& p) {
  p.validate();
  const double da = p.a1 - p.a2;
  const double drift = 2.0 * p.kappa * p.T * da * da;
  const double sd = 2.0 * std::sqrt(p.kappa * p.T) * std::fabs(da);
  return p.w1 * normal_cdf(X, -drift, sd) + p.w2 * normal_cdf(X, drift, sd);
}

LevelResolutionTimes level_resolution_times(double coupling, double delta_a, double T_R) {
  require_positive(coupling, "coupling");
  require_positive(std::fabs(delta_a), "|delta_a|");
  require_positive(T_R, "T_R");
  LevelResolutionTimes out{};
  out.t_lr = 1.0 / (coupling * delta_a * delta_a);
  out.t_lr_prime = 1.0 / (coupling * std::fabs(delta_a));
  out.t_stay = T_R * T_R / (4.0 * std::numbers::pi * std::numbers::pi * out.t_lr_prime);
  return out;
}

// ---------------------------------------------------------------------------
// Zeno

ZenoResult zeno_beta2(double omega, double kappa, double a, double T) {
  require_nonnegative(kappa, "kappa");
  require_positive(T, "T");
  const double x = 0.5 * kappa * a * a * T;
  double g;
  if (x < 1e-2) {
    g = 1.0 + x * (-1.0 / 3.0 + x * (1.0 / 12.0 + x * (-1.0 / 60.0 + x / 360.0)));
  } else {
    g = 2.0 * (x + std::expm1(-x)) / (x * x);
  }
  const double wt = omega * T;
  return {wt * wt * g, g};
}

ZenoResult zeno_beta2_discrete(double omega, double a, double delta_f, double tau, std::int64_t K) {
  require_positive(delta_f, "delta_f");
  require_positive(tau, "tau");
  if (K < 1) throw ValidationError("K must be >= 1");
  const double c = a * a / (4.0 * delta_f * delta_f);
  const double k = static_cast<double>(K);
  double sum;
  if (K <= 10'000'000) {
    // K + 2 sum_{d=1}^{K-1} (K - d) q^d
    const double q = std::exp(-c);
    CompensatedSum s;
    double qd = 1.0;
    for (std::int64_t d = 1; d < K; ++d) {
      qd *= q;
      if (qd == 0.0) break;
      s.add(static_cast<double>(K - d) * qd);
    }
    sum = k + 2.0 * s.value();
  } else {
    const double one_minus_q = -std::expm1(-c);
    const double q = 1.0 - one_minus_q;
    sum = k * (1.0 + q) / one_minus_q + 2.0 * q * std::expm1(-c * k) / (one_minus_q * one_minus_q);
  }
  return {omega * omega * tau * tau * sum, sum / (k * k)};
}

double zeno_ratio_asymptote(double kappa, double a, double T) {
  require_positive(kappa, "kappa");
  require_positive(T, "T");
  return 4.0 / (kappa * a * a * T);
}

NormalMoments zeno_log_factor_moments(double a, double delta_f, std::int64_t K, std::int64_t K_prime) {
  require_positive(delta_f, "delta_f");
  if (K_prime < 0 || K_prime > K) throw ValidationError("need 0 <= K' <= K");
  const double n = static_cast<double>(K - K_prime);
  return {-a * a * n / (delta_f * delta_f), std::fabs(a) * std::sqrt(2.0 * n) / delta_f};
}

// ---------------------------------------------------------------------------
// Oracles

DensityMatrix master_recursion(const DensityMatrix& rho0, const UnitaryMatrix& u, const MeterModel& m,
                               const Observable& obs, std::int64_t K) {
  const std::size_t n = obs.dim();
  if (rho0.dim() != n || u.dim() != n) throw ValidationError("density matrix, propagator and observable dimensions differ");
  if (K < 0) throw ValidationError("K must be >= 0");
  Eigen::MatrixXd d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) d(i, j) = overlap(m, obs.value(i), obs.value(j));
  }
  CMatrix rho = rho0.matrix();
  const CMatrix& um = u.matrix();
  for (std::int64_t k = 0; k < K; ++k) {
    if (!u.is_identity()) rho = um * rho * um.adjoint();
    rho = rho.cwiseProduct(d.cast<Complex>());
  }
  return DensityMatrix(std::move(rho));
}

namespace {

std::vector<double> meter_table(std::span<const double> readout, const MeterModel& m, const Observable& obs) {
  const std::size_t n = obs.dim();
  std::vector<double> g(readout.size() * n);
  for (std::size_t k = 0; k < readout.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j) g[k * n + j] = weight(m, readout[k], obs.value(j));
  }
  return g;
}

void check_oracle_dims(const UnitaryMatrix& u, const Observable& obs, const StateVector& psi0) {
  if (u.dim() != obs.dim() || psi0.dim() != obs.dim()) {
    throw ValidationError("propagator, observable and state dimensions differ");
  }
}

struct PathSum {
  std::size_t n;
  std::size_t K;
  const std::vector<double>& g;
  const UnitaryMatrix& u;
  CVector& out;

  void descend(std::size_t k, std::size_t prev, Complex acc) {
    if (k == K) {
      out(static_cast<Eigen::Index>(prev)) += acc;
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double w = g[k * n + j];
      if (w == 0.0) continue;
      descend(k + 1, j, acc * u(j, prev) * w);
    }
  }
};

}  // namespace

CVector path_sum_amplitude(std::span<const double> readout, const UnitaryMatrix& u, const MeterModel& m,
                           const Observable& obs, const StateVector& psi0) {
  check_oracle_dims(u, obs, psi0);
  const std::size_t n = obs.dim();
  std::uint64_t paths = 1;
  for (std::size_t k = 0; k < readout.size(); ++k) {
    paths *= n;
    if (paths > kMaxPathCount) throw ValidationError("path enumeration refused: N^K exceeds 2^24");
  }
  const std::vector<double> g = meter_table(readout, m, obs);
  CVector out = CVector::Zero(static_cast<Eigen::Index>(n));
  PathSum walker{n, readout.size(), g, u, out};
  for (std::size_t j0 = 0; j0 < n; ++j0) {
    if (psi0[j0] == Complex{}) continue;
    walker.descend(0, j0, psi0[j0]);
  }
  return out;
}

CVector product_form_amplitude(std::span<const double> readout, const UnitaryMatrix& u, const MeterModel& m,
                               const Observable& obs, const StateVector& psi0) {
  check_oracle_dims(u, obs, psi0);
  const std::size_t n = obs.dim();
  const std::vector<double> g = meter_table(readout, m, obs);
  CVector psi = psi0.amplitudes();
  for (std::size_t k = 0; k < readout.size(); ++k) {
    if (!u.is_identity()) psi = u.matrix() * psi;
    for (std::size_t j = 0; j < n; ++j) psi(static_cast<Eigen::Index>(j)) *= g[k * n + j];
  }
  return psi;
}

CVector nonhermitian_evolve(std::span<const double> readout, const Hamiltonian& h, const MeterModel& m,
                            const Observable& obs, const MonitoringPlan& plan, const StateVector& psi0,
                            NonHermitianScheme scheme) {
  if (m.kind() != MeterKind::gaussian) throw UnsupportedError("non-Hermitian evolution needs a Gaussian meter");
  if (plan.meter_kind() != m.kind() || plan.delta_f() != m.delta_f()) {
    throw ValidationError("monitoring plan was built for a different meter");
  }
  const std::size_t n = obs.dim();
  if (h.dim() != n || psi0.dim() != n) throw ValidationError("Hamiltonian, observable and state dimensions differ");
  if (readout.size() != static_cast<std::size_t>(plan.steps())) {
    throw ValidationError("readout length differs from K");
  }
  const double kt = plan.coupling() * plan.tau();
  CVector psi = psi0.amplitudes();
  if (scheme == NonHermitianScheme::split) {
    const UnitaryMatrix u = propagator(h, plan.tau());
    for (double f : readout) {
      if (!u.is_identity()) psi = u.matrix() * psi;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = obs.value(j) - f;
        psi(static_cast<Eigen::Index>(j)) *= std::exp(-kt * d * d);
      }
    }
    return psi;
  }
  const Complex minus_i_tau(0.0, -plan.tau());
  CMatrix step_matrix;
  double cached_f = std::numeric_limits<double>::quiet_NaN();
  for (double f : readout) {
    if (!(f == cached_f)) {
      CMatrix gen = h.matrix();
      for (std::size_t j = 0; j < n; ++j) {
        const double d = obs.value(j) - f;
        gen(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) -= Complex(0.0, plan.coupling() * d * d);
      }
      step_matrix = (minus_i_tau * gen).exp();
      cached_f = f;
    }
    psi = step_matrix * psi;
  }
  return psi;
}

CVector nonhermitian_closed_form(std::span<const double> readout, const Hamiltonian& h, const Observable& obs,
                                 const MonitoringPlan& plan, const StateVector& psi0) {
  const std::size_t n = obs.dim();
  if (h.dim() != n || psi0.dim() != n) throw ValidationError("Hamiltonian, observable and state dimensions differ");
  if (!h.commutes_with_observable()) throw UnsupportedError("closed form needs a Hamiltonian diagonal in the observable basis");
  if (readout.size() != static_cast<std::size_t>(plan.steps())) throw ValidationError("readout length differs from K");
  const double kt = plan.coupling() * plan.tau();
  CVector out(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    CompensatedSum s;
    for (double f : readout) {
      const double d = f - obs.value(j);
      s.add(d * d);
    }
    const double e = h.matrix()(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)).real();
    out(static_cast<Eigen::Index>(j)) = std::exp(Complex(-kt * s.value(), -e * plan.total_time())) * psi0[j];
  }
  return out;
}

}  // namespace fuzzymon
