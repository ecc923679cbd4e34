#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fuzzymon/errors.hpp"
#include "fuzzymon/trajectory.hpp"
#include "oracles.hpp"

using namespace fuzzymon;

namespace {

StateVector plus_state() {
  return StateVector((CVector(2) << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)).finished());
}

}  // namespace

TEST(MonitoringPlan, DerivedQuantities) {
  const MeterModel g = MeterModel::gaussian(5.0);
  const MonitoringPlan p(2.0, 400, g);
  EXPECT_DOUBLE_EQ(p.tau(), 0.005);
  EXPECT_DOUBLE_EQ(p.coupling(), 1.0 / (2.0 * 0.005 * 25.0));
  EXPECT_NEAR(p.delta_a_T(), 5.0 * std::sqrt(2.0 / 400.0), 1e-12 * p.delta_a_T());
  const MonitoringPlan h(1.0, 100, MeterModel::hard_wall(20.0));
  EXPECT_DOUBLE_EQ(h.coupling(), 1.0 / (0.01 * 20.0));
  EXPECT_THROW(h.delta_a_T(), UnsupportedError);
  EXPECT_THROW(MonitoringPlan(1.0, 0, g), ValidationError);
  EXPECT_THROW(MonitoringPlan(-1.0, 10, g), ValidationError);
}

TEST(MonitoringPlan, WidthFromCoupling) {
  const double df = MonitoringPlan::delta_f_for_coupling(MeterKind::gaussian, 5.0, 2.5e-4);
  EXPECT_NEAR(df, 20.0, 1e-12);
  EXPECT_NEAR(MonitoringPlan::delta_f_for_coupling(MeterKind::hard_wall, 2.5, 0.01), 40.0, 1e-12);
}

TEST(Step, EigenstateIsFixedPoint) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(3.0);
  RngStream rng(31, 0);
  StateVector psi = StateVector::basis(2, 0);
  std::vector<double> f;
  for (int k = 0; k < 100000; ++k) {
    StepResult r = step(psi, UnitaryMatrix::identity(2), g, obs, rng);
    ASSERT_EQ(r.next, psi);
    f.push_back(r.readout);
  }
  EXPECT_LT(oracle::ks(f, [](double x) { return oracle::normal_cdf(x, -1.0, 3.0 / std::sqrt(2.0)); }), 0.005);
}

TEST(ApplyReadout, HardWallRegionAReduces) {
  const StateVector out = apply_readout(plus_state(), -4.5, MeterModel::hard_wall(8.0), Observable({-1.0, 1.0}));
  EXPECT_EQ(out[0], Complex(1.0));
  EXPECT_EQ(out[1], Complex(0.0));
}

TEST(ApplyReadout, GaussianMidpointKeepsState) {
  const StateVector out = apply_readout(plus_state(), 1.0, MeterModel::gaussian(2.0), Observable({0.0, 2.0}));
  EXPECT_NEAR(std::abs(out[0]), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(std::abs(out[1]), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(ApplyReadout, MatchesDirectFormula) {
  // Direct evaluation of G(f - a_j) phi_j / M_f with the unscaled weights.
  const Observable obs({-0.5, 0.2, 1.4});
  const MeterModel g = MeterModel::gaussian(0.8);
  const StateVector phi =
      StateVector::normalized((CVector(3) << Complex(0.3, 0.1), Complex(-0.5, 0.4), Complex(0.2, -0.6)).finished());
  for (double f : {-2.0, 0.0, 0.7, 3.0}) {
    CVector expect(3);
    double m2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      expect(j) = weight(g, f, obs.value(j)) * phi[j];
      m2 += std::norm(expect(j));
    }
    expect /= std::sqrt(m2);
    const StateVector out = apply_readout(phi, f, g, obs);
    for (int j = 0; j < 3; ++j) EXPECT_LT(std::abs(out[j] - expect(j)), 1e-14);
  }
}

TEST(ApplyReadout, ZeroLikelihoodIsConsistencyError) {
  EXPECT_THROW(apply_readout(plus_state(), 50.0, MeterModel::hard_wall(8.0), Observable({-1.0, 1.0})),
               ConsistencyError);
}

TEST(Step, DrivenStepKeepsNorm) {
  const Observable obs({0.0, 1.0});
  const UnitaryMatrix u = propagator(Hamiltonian::two_level(0.1, -0.3, 2.0), 0.01);
  RngStream rng(32, 0);
  StateVector psi = plus_state();
  for (int k = 0; k < 10000; ++k) {
    psi = step(psi, u, MeterModel::gaussian(4.0), obs, rng).next;
    ASSERT_LT(std::fabs(psi.norm_squared() - 1.0), 1e-12);
  }
}

TEST(WalkUpdate, Increments) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(2.0);
  EXPECT_EQ(walk_update(0.0, 0.0, obs, g), 0.0);
  EXPECT_DOUBLE_EQ(walk_update(0.0, 1.0, obs, g), 1.0);
  EXPECT_THROW(walk_update(0.0, 1.0, Observable({0.0, 1.0, 2.0}), g), UnsupportedError);
  EXPECT_THROW(walk_update(0.0, 1.0, obs, MeterModel::hard_wall(4.0)), UnsupportedError);
}

TEST(Theta, Accumulation) {
  EXPECT_EQ(theta(theta(0.0, 2.0, 2.0), 2.0, 2.0), 0.0);
  EXPECT_EQ(theta(theta(0.0, 1.0, 0.0), -1.0, 0.0) / 2.0, 1.0);
}

TEST(Decimation, Indices) {
  EXPECT_EQ(decimation_steps(10, 3), (std::vector<std::int64_t>{1, 5, 10}));
  EXPECT_EQ(decimation_steps(3, 10), (std::vector<std::int64_t>{1, 2, 3}));
  const auto big = decimation_steps(1'000'000'000, 100000);
  EXPECT_EQ(big.size(), 100000u);
  EXPECT_EQ(big.front(), 1);
  EXPECT_EQ(big.back(), 1'000'000'000);
  for (std::size_t i = 1; i < big.size(); ++i) ASSERT_GT(big[i], big[i - 1]);
  EXPECT_THROW(decimation_steps(10, 1), ValidationError);
}

TEST(Run, FreeEigenstateCollapsesImmediately) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(10.0);
  const MonitoringPlan plan(1.0, 500, g);
  RngStream rng(33, 0);
  const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 0), obs, StateVector::basis(2, 0), g, plan, rng);
  ASSERT_TRUE(r.collapse_verdict.has_value());
  EXPECT_EQ(*r.collapse_verdict, 0u);
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    ASSERT_EQ(r.samples.occupation_at(s, 0), 1.0);
    ASSERT_EQ(r.samples.occupation_at(s, 1), 0.0);
  }
}

TEST(Run, SamplesRespectCapAndEndpoints) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(10.0);
  const MonitoringPlan plan(1.0, 12345, g);
  RngStream rng(34, 0);
  const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 1.0), obs, plus_state(), g, plan, rng, 100);
  EXPECT_EQ(r.samples.size(), 100u);
  EXPECT_EQ(r.samples.step.front(), 1);
  EXPECT_EQ(r.samples.step.back(), 12345);
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    ASSERT_NEAR(r.samples.occupation_at(s, 0) + r.samples.occupation_at(s, 1), 1.0, 1e-9);
  }
  EXPECT_EQ(r.samples.walk.back(), r.final_walk);
}

TEST(Run, Deterministic) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(7.0);
  const MonitoringPlan plan(2.0, 5000, g);
  RngStream a(35, 3);
  RngStream b(35, 3);
  const Hamiltonian h = Hamiltonian::two_level(0.2, 0.0, 1.5);
  const TrajectoryRecord x = run(h, obs, plus_state(), g, plan, a);
  const TrajectoryRecord y = run(h, obs, plus_state(), g, plan, b);
  EXPECT_EQ(x.samples.readout, y.samples.readout);
  EXPECT_EQ(x.samples.occupation, y.samples.occupation);
  EXPECT_EQ(x.final_state, y.final_state);
  EXPECT_EQ(x.theta, y.theta);
  EXPECT_EQ(x.final_walk, y.final_walk);
}

TEST(Run, WalkTracksOccupationRatio) {
  // |alpha_K / beta_K|^2 = exp(-X_K) |alpha_0 / beta_0|^2 for a free system.
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(20.0);
  const MonitoringPlan plan(1.0, 1000, g);
  const StateVector psi0((CVector(2) << std::sqrt(0.3), std::sqrt(0.7)).finished());
  for (std::uint64_t s = 0; s < 20; ++s) {
    RngStream rng(36, s);
    const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 0), obs, psi0, g, plan, rng);
    const double direct = std::norm(r.final_state[0]) / std::norm(r.final_state[1]);
    const double via_walk = std::exp(-r.final_walk) * 0.3 / 0.7;
    EXPECT_NEAR(direct / via_walk, 1.0, 1e-9);
  }
}

TEST(Run, ThetaMatchesRecordedReadouts) {
  const Observable obs({0.5, 2.0});
  const MeterModel g = MeterModel::gaussian(3.0);
  const MonitoringPlan plan(1.0, 2000, g);
  RngStream rng(37, 0);
  const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 0.4), obs, plus_state(), g, plan, rng, 2000);
  double s = 0.0, sf = 0.0, x = 0.0;
  for (double f : r.samples.readout) {
    s += (f - 0.5) * (f - 0.5);
    sf += f;
    x = walk_update(x, f, obs, g);
  }
  EXPECT_NEAR(r.theta, s / 2000.0, 1e-12);
  EXPECT_NEAR(r.readout_mean, sf / 2000.0, 1e-12);
  EXPECT_NEAR(r.final_walk, x, 1e-9);
}

TEST(Run, StepChainMatchesRun) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(4.0);
  const MonitoringPlan plan(1.0, 300, g);
  const Hamiltonian h = Hamiltonian::two_level(0.0, 0.0, 2.0);
  RngStream a(38, 0);
  const TrajectoryRecord r = run(h, obs, plus_state(), g, plan, a, 300);
  RngStream b(38, 0);
  StateVector psi = plus_state();
  const UnitaryMatrix u = propagator(h, plan.tau());
  for (int k = 0; k < 300; ++k) {
    StepResult s = step(psi, u, g, obs, b);
    ASSERT_EQ(s.readout, r.samples.readout[k]);
    psi = s.next;
  }
  EXPECT_EQ(psi, r.final_state);
}

TEST(Run, MarginalReadoutLaw) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(5.0);
  const MonitoringPlan plan(1.0, 1000, g);
  std::vector<double> pooled;
  for (std::uint64_t s = 0; s < 100; ++s) {
    RngStream rng(39, s);
    const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 0), obs, StateVector::basis(2, 0), g, plan, rng, 1000);
    pooled.insert(pooled.end(), r.samples.readout.begin(), r.samples.readout.end());
  }
  EXPECT_LT(oracle::ks(pooled, [](double f) { return oracle::normal_cdf(f, -1.0, 5.0 / std::sqrt(2.0)); }), 0.005);
}

TEST(Run, HardWallFreezesAfterReduction) {
  const Observable obs({-1.0, 1.0});
  const MeterModel h = MeterModel::hard_wall(20.0);
  const MonitoringPlan plan(1.0, 2000, h);
  int reduced = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    RngStream rng(40, s);
    const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 0), obs, plus_state(), h, plan, rng, 2000);
    EXPECT_EQ(r.reduction_diagnostic, ReductionDiagnostic::hard_wall_region);
    if (!r.first_reduction_step) continue;
    ++reduced;
    const auto k0 = static_cast<std::size_t>(*r.first_reduction_step - 1);
    const double o = r.samples.occupation_at(k0, 0);
    ASSERT_TRUE(o == 0.0 || o == 1.0);
    for (std::size_t k = k0; k < r.samples.size(); ++k) ASSERT_EQ(r.samples.occupation_at(k, 0), o);
    for (std::size_t k = 0; k < k0; ++k) ASSERT_NEAR(r.samples.occupation_at(k, 0), 0.5, 1e-15);
  }
  EXPECT_GT(reduced, 40);
}

TEST(Run, ThreeLevelSystem) {
  const Observable obs({-1.0, 0.0, 1.0});
  const MeterModel g = MeterModel::gaussian(2.0);
  const MonitoringPlan plan(1.0, 3000, g);
  CMatrix hm = CMatrix::Zero(3, 3);
  hm(0, 1) = hm(1, 0) = 0.8;
  hm(1, 2) = hm(2, 1) = 0.8;
  RngStream rng(41, 0);
  const StateVector psi0 = StateVector::normalized((CVector(3) << 1.0, 1.0, 1.0).finished());
  const TrajectoryRecord r = run(Hamiltonian::general(hm), obs, psi0, g, plan, rng, 50);
  EXPECT_TRUE(std::isnan(r.final_walk));
  EXPECT_EQ(r.reduction_diagnostic, ReductionDiagnostic::none);
  for (std::size_t s = 0; s < r.samples.size(); ++s) {
    double t = 0.0;
    for (std::size_t j = 0; j < 3; ++j) t += r.samples.occupation_at(s, j);
    ASSERT_NEAR(t, 1.0, 1e-9);
  }
}

TEST(Run, ProbeReadoutsMatchSamples) {
  const Observable obs({-1.0, 1.0});
  const MeterModel g = MeterModel::gaussian(4.0);
  const MonitoringPlan plan(1.0, 100, g);
  RngStream rng(42, 0);
  std::vector<double> probe;
  const std::vector<std::int64_t> at{1, 17, 100};
  const TrajectoryRecord r = run(Hamiltonian::two_level(0, 0, 1), obs, plus_state(), g, plan, rng, 100, at, probe);
  EXPECT_EQ(probe[0], r.samples.readout[0]);
  EXPECT_EQ(probe[1], r.samples.readout[16]);
  EXPECT_EQ(probe[2], r.samples.readout[99]);
}
