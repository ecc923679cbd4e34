#include "fuzzymon/trajectory.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fuzzymon/compensated.hpp"
#include "fuzzymon/errors.hpp"

namespace fuzzymon {

// ---------------------------------------------------------------------------
// MonitoringPlan

MonitoringPlan::MonitoringPlan(double total_time, std::int64_t steps, const MeterModel& meter)
    : total_time_(total_time), steps_(steps), kind_(meter.kind()), delta_f_(meter.delta_f()) {
  if (!(total_time > 0.0) || !std::isfinite(total_time)) throw ValidationError("monitoring time T must be finite and > 0");
  if (steps < 1) throw ValidationError("number of measurements K must be >= 1");
  tau_ = total_time_ / static_cast<double>(steps_);
  if (std::fabs(tau_ * static_cast<double>(steps_) - total_time_) > 1e-12 * total_time_) {
    throw ConsistencyError("tau * K differs from T");
  }
  coupling_ = kind_ == MeterKind::gaussian ? 1.0 / (2.0 * tau_ * delta_f_ * delta_f_) : 1.0 / (tau_ * delta_f_);
  if (kind_ == MeterKind::gaussian) {
    const double via_coupling = delta_a_T();
    const double via_width = delta_f_ * std::sqrt(2.0 / static_cast<double>(steps_));
    if (std::fabs(via_coupling - via_width) > 1e-12 * via_width) {
      throw ConsistencyError("delta_a_T from kappa T differs from delta_f sqrt(2/K)");
    }
  }
}

double MonitoringPlan::delta_f_for_coupling(MeterKind kind, double coupling, double tau) {
  if (!(coupling > 0.0) || !(tau > 0.0)) throw ValidationError("coupling and tau must be > 0");
  return kind == MeterKind::gaussian ? 1.0 / std::sqrt(2.0 * tau * coupling) : 1.0 / (tau * coupling);
}

double MonitoringPlan::delta_a_T() const {
  if (kind_ != MeterKind::gaussian) throw UnsupportedError("delta_a_T is defined for Gaussian meters only");
  return 1.0 / std::sqrt(coupling_ * total_time_);
}

// ---------------------------------------------------------------------------
// Step kernel

namespace {

struct StepOutcome {
  double readout;
  /// Some populated level received zero weight (hard wall outside overlap).
  bool reduced;
};

/// Preallocated per-trajectory engine. The two-level path is written out by
/// hand; every run of a given dimension goes through the same code so that
/// `step` and `run` agree bit for bit.
class StepKernel {
 public:
  StepKernel(const UnitaryMatrix& u, const MeterModel& m, const Observable& obs)
      : n_(obs.dim()),
        identity_(u.is_identity()),
        hard_wall_(m.kind() == MeterKind::hard_wall),
        sigma_(m.readout_stddev()),
        delta_f_(m.delta_f()),
        half_width_(0.5 * m.delta_f()),
        inv_two_df2_(1.0 / (2.0 * m.delta_f() * m.delta_f())),
        a_(obs.values().begin(), obs.values().end()),
        u_(n_ * n_),
        phi_(n_),
        p_(n_),
        w_(n_) {
    if (u.dim() != n_) throw ValidationError("propagator and observable dimensions differ");
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) u_[i * n_ + j] = u(i, j);
    }
  }

  std::size_t dim() const noexcept { return n_; }

  StepOutcome advance(Complex* psi, RngStream& rng) {
    return n_ == 2 ? advance2(psi, rng) : advance_n(psi, rng);
  }

  /// Steps 11-12 for a given readout; psi holds phi on entry.
  bool measure(Complex* psi, double f) {
    if (n_ == 2) {
      const double p0 = std::norm(psi[0]);
      const double p1 = std::norm(psi[1]);
      return update2(psi, psi[0], psi[1], p0, p1, f);
    }
    for (std::size_t j = 0; j < n_; ++j) {
      phi_[j] = psi[j];
      p_[j] = std::norm(psi[j]);
    }
    return update_n(psi, f);
  }

 private:
  void check_norm(double s) const {
    if (std::fabs(s - 1.0) > kStateNormTolerance) {
      std::ostringstream msg;
      msg << "state norm drifted to " << s;
      throw ConsistencyError(msg.str());
    }
  }

  double draw_readout(std::size_t level, RngStream& rng) const {
    if (hard_wall_) return a_[level] + delta_f_ * (rng.uniform() - 0.5);
    return a_[level] + sigma_ * rng.normal();
  }

  StepOutcome advance2(Complex* psi, RngStream& rng) {
    Complex phi0 = psi[0];
    Complex phi1 = psi[1];
    if (!identity_) {
      phi0 = u_[0] * psi[0] + u_[1] * psi[1];
      phi1 = u_[2] * psi[0] + u_[3] * psi[1];
    }
    if (hard_wall_) {
      const double p0 = std::norm(phi0);
      const double p1 = std::norm(phi1);
      const double s = p0 + p1;
      check_norm(s);
      const std::size_t level = rng.uniform() * s < p0 ? 0 : 1;
      const double f = draw_readout(level, rng);
      const bool reduced = update2(psi, phi0, phi1, p0, p1, f);
      return {f, reduced};
    }
    // Both candidate readouts and their weights depend only on the random
    // draws, so they are formed before the state-dependent selection.
    const double u = rng.uniform();
    const double z = rng.normal();
    const double f0 = a_[0] + sigma_ * z;
    const double f1 = a_[1] + sigma_ * z;
    const double e0 = (a_[1] - a_[0]) * (2.0 * f0 - a_[0] - a_[1]) * inv_two_df2_;
    const double e1 = (a_[1] - a_[0]) * (2.0 * f1 - a_[0] - a_[1]) * inv_two_df2_;
    const double t0 = std::exp(-std::fabs(e0));
    const double t1 = std::exp(-std::fabs(e1));

    const double p0 = std::norm(phi0);
    const double p1 = std::norm(phi1);
    const double s = p0 + p1;
    check_norm(s);
    const bool upper = !(u * s < p0);
    const double f = upper ? f1 : f0;
    const double e = upper ? e1 : e0;
    const double t = upper ? t1 : t0;
    double w0 = e <= 0.0 ? 1.0 : t;
    double w1 = e <= 0.0 ? t : 1.0;
    if (p0 == 0.0) [[unlikely]] {
      w0 = 0.0;
      w1 = 1.0;
    } else if (p1 == 0.0) [[unlikely]] {
      w0 = 1.0;
      w1 = 0.0;
    }
    const double m2 = w0 * w0 * p0 + w1 * w1 * p1;
    if (!(m2 > 0.0)) [[unlikely]] throw ConsistencyError("readout has zero likelihood under the evolved state");
    const double inv = 1.0 / std::sqrt(m2);
    psi[0] = phi0 * (w0 * inv);
    psi[1] = phi1 * (w1 * inv);
    return {f, false};
  }

  bool update2(Complex* psi, Complex phi0, Complex phi1, double p0, double p1, double f) const {
    double w0;
    double w1;
    bool reduced = false;
    if (hard_wall_) {
      w0 = std::fabs(f - a_[0]) <= half_width_ ? 1.0 : 0.0;
      w1 = std::fabs(f - a_[1]) <= half_width_ ? 1.0 : 0.0;
      reduced = (w0 == 0.0) || (w1 == 0.0);
    } else if (p0 == 0.0) {
      w0 = 0.0;
      w1 = 1.0;
    } else if (p1 == 0.0) {
      w0 = 1.0;
      w1 = 0.0;
    } else {
      // ln(w1/w0) = (a1 - a0)(2f - a0 - a1) / (2 df^2); keep the larger weight at 1.
      const double e = (a_[1] - a_[0]) * (2.0 * f - a_[0] - a_[1]) * inv_two_df2_;
      if (e <= 0.0) {
        w0 = 1.0;
        w1 = std::exp(e);
      } else {
        w0 = std::exp(-e);
        w1 = 1.0;
      }
    }
    const double m2 = w0 * w0 * p0 + w1 * w1 * p1;
    if (!(m2 > 0.0)) throw ConsistencyError("readout has zero likelihood under the evolved state");
    const double inv = 1.0 / std::sqrt(m2);
    psi[0] = phi0 * (w0 * inv);
    psi[1] = phi1 * (w1 * inv);
    return reduced;
  }

  StepOutcome advance_n(Complex* psi, RngStream& rng) {
    if (identity_) {
      for (std::size_t j = 0; j < n_; ++j) phi_[j] = psi[j];
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        Complex acc{};
        for (std::size_t j = 0; j < n_; ++j) acc += u_[i * n_ + j] * psi[j];
        phi_[i] = acc;
      }
    }
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      p_[j] = std::norm(phi_[j]);
      s += p_[j];
    }
    check_norm(s);
    const double target = rng.uniform() * s;
    std::size_t level = n_ - 1;
    double cumulative = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      cumulative += p_[j];
      if (target < cumulative) {
        level = j;
        break;
      }
    }
    const double f = draw_readout(level, rng);
    const bool reduced = update_n(psi, f);
    return {f, reduced};
  }

  bool update_n(Complex* psi, double f) {
    bool reduced = false;
    if (hard_wall_) {
      for (std::size_t j = 0; j < n_; ++j) {
        w_[j] = std::fabs(f - a_[j]) <= half_width_ ? 1.0 : 0.0;
        if (w_[j] == 0.0) reduced = true;
      }
    } else {
      // Reference: the populated level whose eigenvalue is closest to f.
      std::size_t ref = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (p_[j] > 0.0 && (ref == n_ || std::fabs(f - a_[j]) < std::fabs(f - a_[ref]))) ref = j;
      }
      if (ref == n_) throw ConsistencyError("state has no populated level");
      for (std::size_t j = 0; j < n_; ++j) {
        w_[j] = p_[j] > 0.0 ? std::exp(-(a_[ref] - a_[j]) * (2.0 * f - a_[j] - a_[ref]) * inv_two_df2_) : 0.0;
      }
    }
    double m2 = 0.0;
    for (std::size_t j = 0; j < n_; ++j) m2 += w_[j] * w_[j] * p_[j];
    if (!(m2 > 0.0)) throw ConsistencyError("readout has zero likelihood under the evolved state");
    const double inv = 1.0 / std::sqrt(m2);
    for (std::size_t j = 0; j < n_; ++j) psi[j] = phi_[j] * (w_[j] * inv);
    return reduced;
  }

  std::size_t n_;
  bool identity_;
  bool hard_wall_;
  double sigma_;
  double delta_f_;
  double half_width_;
  double inv_two_df2_;
  std::vector<double> a_;
  std::vector<Complex> u_;
  std::vector<Complex> phi_;
  std::vector<double> p_;
  std::vector<double> w_;
};

void check_dims(const StateVector& psi, const MeterModel&, const Observable& obs) {
  if (psi.dim() != obs.dim()) throw ValidationError("state and observable dimensions differ");
}

}  // namespace

// ---------------------------------------------------------------------------
// Public single-step API

StepResult step(const StateVector& psi, const UnitaryMatrix& u, const MeterModel& m, const Observable& obs,
                RngStream& rng) {
  check_dims(psi, m, obs);
  StepKernel kernel(u, m, obs);
  CVector buf = psi.amplitudes();
  const StepOutcome out = kernel.advance(buf.data(), rng);
  return {out.readout, StateVector(std::move(buf))};
}

StateVector apply_readout(const StateVector& phi, double f, const MeterModel& m, const Observable& obs) {
  check_dims(phi, m, obs);
  StepKernel kernel(UnitaryMatrix::identity(phi.dim()), m, obs);
  CVector buf = phi.amplitudes();
  kernel.measure(buf.data(), f);
  return StateVector(std::move(buf));
}

double walk_update(double walk, double readout, const Observable& obs, const MeterModel& m) {
  if (obs.dim() != 2) throw UnsupportedError("the readout walk X_k is defined for two-level systems only");
  if (m.kind() != MeterKind::gaussian) throw UnsupportedError("the readout walk X_k is defined for Gaussian meters only");
  const double a1 = obs.value(0);
  const double a2 = obs.value(1);
  const double df = m.delta_f();
  return walk + 2.0 * (a2 - a1) / (df * df) * (readout - 0.5 * (a1 + a2));
}

std::vector<std::int64_t> decimation_steps(std::int64_t steps, std::int64_t s_max) {
  if (steps < 1) throw ValidationError("decimation needs K >= 1");
  if (s_max < 2) throw ValidationError("s_max must be >= 2");
  std::vector<std::int64_t> out;
  if (steps <= s_max) {
    out.resize(static_cast<std::size_t>(steps));
    for (std::int64_t k = 0; k < steps; ++k) out[static_cast<std::size_t>(k)] = k + 1;
    return out;
  }
  out.resize(static_cast<std::size_t>(s_max));
  const __int128 span = steps - 1;
  for (std::int64_t m = 0; m < s_max; ++m) {
    out[static_cast<std::size_t>(m)] = 1 + static_cast<std::int64_t>(span * m / (s_max - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full run

TrajectoryRecord run(const Hamiltonian& system, const Observable& obs, const StateVector& psi0, const MeterModel& m,
                     const MonitoringPlan& plan, RngStream& rng, std::int64_t s_max) {
  std::vector<double> unused;
  return run(system, obs, psi0, m, plan, rng, s_max, {}, unused);
}

TrajectoryRecord run(const Hamiltonian& system, const Observable& obs, const StateVector& psi0, const MeterModel& m,
                     const MonitoringPlan& plan, RngStream& rng, std::int64_t s_max,
                     std::span<const std::int64_t> probe_steps, std::vector<double>& probe_readouts) {
  const std::size_t n = obs.dim();
  if (system.dim() != n || psi0.dim() != n) throw ValidationError("Hamiltonian, observable and state dimensions differ");
  if (plan.meter_kind() != m.kind() || plan.delta_f() != m.delta_f()) {
    throw ValidationError("monitoring plan was built for a different meter");
  }
  const std::int64_t K = plan.steps();
  const double tau = plan.tau();
  const std::vector<std::int64_t> keep = decimation_steps(K, s_max);

  StepKernel kernel(propagator(system, tau), m, obs);
  CVector psi = psi0.amplitudes();

  const bool has_walk = n == 2 && m.kind() == MeterKind::gaussian;
  const double a_ref = obs.value(0);
  const double walk_scale = has_walk ? 2.0 * (obs.value(1) - obs.value(0)) / (m.delta_f() * m.delta_f()) : 0.0;
  const double walk_mid = has_walk ? 0.5 * (obs.value(0) + obs.value(1)) : 0.0;

  SampleSeries samples;
  samples.dim = n;
  samples.step.reserve(keep.size());
  samples.time.reserve(keep.size());
  samples.readout.reserve(keep.size());
  samples.walk.reserve(keep.size());
  samples.occupation.reserve(keep.size() * n);

  CompensatedSum theta_sum;
  CompensatedSum readout_sum;
  CompensatedSum walk;
  std::optional<std::int64_t> first_reduction;
  std::vector<std::int64_t> switches;

  auto settled_level = [&]() -> std::ptrdiff_t {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::norm(psi(static_cast<Eigen::Index>(j))) >= kSettleThreshold) return static_cast<std::ptrdiff_t>(j);
    }
    return -1;
  };
  std::ptrdiff_t settled = settled_level();

  for (std::size_t i = 0; i < probe_steps.size(); ++i) {
    if (probe_steps[i] < 1 || probe_steps[i] > K || (i > 0 && probe_steps[i] <= probe_steps[i - 1])) {
      throw ValidationError("probe steps must be strictly ascending within 1..K");
    }
  }
  probe_readouts.assign(probe_steps.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t next_probe = 0;

  std::size_t next_keep = 0;
  for (std::int64_t k = 1; k <= K; ++k) {
    const StepOutcome out = kernel.advance(psi.data(), rng);
    const double f = out.readout;
    {
      const double d = f - a_ref;
      theta_sum.add(d * d);
    }
    readout_sum.add(f);
    if (has_walk) walk.add(walk_scale * (f - walk_mid));

    if (!first_reduction) {
      if (m.kind() == MeterKind::hard_wall) {
        if (out.reduced) first_reduction = k;
      } else if (has_walk && std::fabs(walk.value()) > kWalkReductionThreshold) {
        first_reduction = k;
      }
    }

    const std::ptrdiff_t level = settled_level();
    if (level >= 0 && level != settled) {
      if (settled >= 0) switches.push_back(k);
      settled = level;
    }

    if (next_probe < probe_steps.size() && probe_steps[next_probe] == k) probe_readouts[next_probe++] = f;

    if (next_keep < keep.size() && keep[next_keep] == k) {
      samples.step.push_back(k);
      samples.time.push_back(static_cast<double>(k) * tau);
      samples.readout.push_back(f);
      samples.walk.push_back(has_walk ? walk.value() : std::numeric_limits<double>::quiet_NaN());
      for (std::size_t j = 0; j < n; ++j) samples.occupation.push_back(std::norm(psi(static_cast<Eigen::Index>(j))));
      ++next_keep;
    }
  }

  StateVector final_state(std::move(psi));
  std::optional<std::size_t> verdict;
  for (std::size_t j = 0; j < n; ++j) {
    if (std::norm(final_state[j]) > kCollapseThreshold) verdict = j;
  }

  const double k_real = static_cast<double>(K);
  return TrajectoryRecord{
      .steps = K,
      .samples = std::move(samples),
      .theta = theta_sum.value() / k_real,
      .readout_mean = readout_sum.value() / k_real,
      .final_walk = has_walk ? walk.value() : std::numeric_limits<double>::quiet_NaN(),
      .final_state = std::move(final_state),
      .first_reduction_step = first_reduction,
      .reduction_diagnostic = m.kind() == MeterKind::hard_wall
                                  ? ReductionDiagnostic::hard_wall_region
                                  : (has_walk ? ReductionDiagnostic::walk_threshold : ReductionDiagnostic::none),
      .collapse_verdict = verdict,
      .switch_steps = std::move(switches),
  };
}

}  // namespace fuzzymon
