#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fuzzymon/errors.hpp"
#include "fuzzymon/qcore.hpp"
#include "fuzzymon/rng.hpp"
#include "oracles.hpp"

using namespace fuzzymon;

namespace {

const Complex I{0.0, 1.0};

double max_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

CMatrix random_hermitian(std::size_t n, RngStream& rng) {
  CMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    h(i, i) = rng.normal();
    for (std::size_t j = i + 1; j < n; ++j) {
      h(i, j) = Complex(rng.normal(), rng.normal());
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

}  // namespace

TEST(StateVector, RejectsUnnormalised) {
  CVector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(StateVector{v}, ValidationError);
  EXPECT_NO_THROW(StateVector::normalized(v));
  CVector one(1);
  one << 1.0;
  EXPECT_THROW(StateVector{one}, ValidationError);
}

TEST(StateVector, OccupationsSumToOne) {
  CVector v(3);
  v << Complex(0.6, 0.0), Complex(0.0, 0.48), Complex(0.64, 0.0);
  const StateVector s = StateVector::normalized(v);
  const auto occ = s.occupations();
  EXPECT_NEAR(occ[0] + occ[1] + occ[2], 1.0, 1e-15);
}

TEST(Observable, SortedViewAndDistinctness) {
  const Observable a({2.0, -1.0, 0.5});
  EXPECT_EQ(a.sorted_values()[0], -1.0);
  EXPECT_EQ(a.sorted_index(0), 1u);
  EXPECT_EQ(a.sorted_index(2), 0u);
  EXPECT_THROW(Observable({1.0, 1.0}), ValidationError);
}

TEST(Hamiltonian, GeneralRejectsNonHermitian) {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 3.0, 1.0;
  EXPECT_THROW(Hamiltonian::general(m), ValidationError);
}

TEST(Propagator, ZeroTimeIsIdentity) {
  const UnitaryMatrix u = propagator(Hamiltonian::two_level(0.0, 0.0, 3.0), 0.0);
  EXPECT_TRUE(u.is_identity());
}

TEST(Propagator, QuarterRabiPeriod) {
  const double omega = 2.0;
  const UnitaryMatrix u = propagator(Hamiltonian::two_level(0.0, 0.0, omega), std::numbers::pi / (2.0 * omega));
  CMatrix expect(2, 2);
  expect << 0.0, -I, -I, 0.0;
  EXPECT_LT(max_diff(u.matrix(), expect), 1e-15);
}

TEST(Propagator, NegativeTimeRejected) {
  EXPECT_THROW(propagator(Hamiltonian::two_level(0.0, 0.0, 1.0), -1.0), ValidationError);
}

TEST(Propagator, TwoLevelMatchesSeries) {
  for (double e1 : {0.0, 0.7, -1.3}) {
    const Hamiltonian h = Hamiltonian::two_level(e1, 0.4, 0.9);
    const double tau = 0.05;
    const CMatrix series = oracle::expm_series(-I * tau * h.matrix());
    EXPECT_LT(max_diff(propagator(h, tau).matrix(), series), 1e-14);
  }
}

TEST(Propagator, GeneralMatchesSeries) {
  RngStream rng(7, 0);
  for (std::size_t n : {2u, 3u, 5u}) {
    for (int rep = 0; rep < 5; ++rep) {
      const Hamiltonian h = Hamiltonian::general(random_hermitian(n, rng));
      const double tau = 0.02;
      const UnitaryMatrix u = propagator(h, tau);
      EXPECT_LT(max_diff(u.matrix(), oracle::expm_series(-I * tau * h.matrix())), 1e-13);
      EXPECT_LT(max_diff(u.matrix() * u.matrix().adjoint(), CMatrix::Identity(n, n)), 1e-10);
    }
  }
}

TEST(Propagator, GroupProperty) {
  RngStream rng(8, 0);
  const Hamiltonian g = Hamiltonian::general(random_hermitian(3, rng));
  const Hamiltonian t = Hamiltonian::two_level(0.3, -0.2, 1.1);
  for (const Hamiltonian* h : {&g, &t}) {
    const CMatrix lhs = (propagator(*h, 0.37) * propagator(*h, 1.21)).matrix();
    EXPECT_LT(max_diff(lhs, propagator(*h, 1.58).matrix()), 1e-9);
  }
}

TEST(Propagator, CommutingCaseIsDiagonalPhases) {
  const double tau = 0.8;
  const UnitaryMatrix u = propagator(Hamiltonian::two_level(1.5, -0.5, 0.0), tau);
  EXPECT_LT(std::abs(u(0, 0) - std::exp(-I * 1.5 * tau)), 1e-15);
  EXPECT_LT(std::abs(u(1, 1) - std::exp(I * 0.5 * tau)), 1e-15);
  EXPECT_EQ(u(0, 1), Complex{});
}

TEST(Apply, IdentityAndQuarterPeriod) {
  const StateVector psi = StateVector::normalized((CVector(2) << Complex(0.6, 0.1), Complex(0.3, -0.7)).finished());
  EXPECT_EQ(apply(UnitaryMatrix::identity(2), psi), psi);
  const UnitaryMatrix u = propagator(Hamiltonian::two_level(0.0, 0.0, 1.0), std::numbers::pi / 2.0);
  const StateVector out = apply(u, StateVector::basis(2, 0));
  EXPECT_LT(std::abs(out[0]), 1e-15);
  EXPECT_LT(std::abs(out[1] - (-I)), 1e-15);
}

TEST(Apply, LongProductNormDrift) {
  const UnitaryMatrix u = propagator(Hamiltonian::two_level(0.2, -0.1, 0.7), 1e-3);
  StateVector psi = StateVector::basis(2, 0);
  for (int k = 0; k < 1'000'000; ++k) psi = apply(u, psi);
  EXPECT_LT(std::fabs(psi.norm_squared() - 1.0), 1e-9);
}

TEST(Apply, NormPreservedForRandomUnitaries) {
  RngStream rng(9, 0);
  for (int rep = 0; rep < 20; ++rep) {
    const Hamiltonian h = Hamiltonian::general(random_hermitian(4, rng));
    CVector v(4);
    for (int j = 0; j < 4; ++j) v(j) = Complex(rng.normal(), rng.normal());
    const StateVector psi = StateVector::normalized(v);
    EXPECT_LT(std::fabs(apply(propagator(h, 0.9), psi).norm_squared() - 1.0), 1e-12);
  }
}

TEST(OuterAccumulate, BasisProjectors) {
  const CMatrix zero = CMatrix::Zero(2, 2);
  const CMatrix one = outer_accumulate(zero, StateVector::basis(2, 0), 1.0);
  EXPECT_EQ(one(0, 0), Complex(1.0));
  EXPECT_EQ(one(1, 1), Complex(0.0));
  CMatrix mix = outer_accumulate(zero, StateVector::basis(2, 0), 0.5);
  mix = outer_accumulate(mix, StateVector::basis(2, 1), 0.5);
  EXPECT_EQ(mix(0, 0), Complex(0.5));
  EXPECT_EQ(mix(1, 1), Complex(0.5));
  EXPECT_EQ(mix(0, 1), Complex(0.0));
}

TEST(OuterAccumulate, BlochSphereAverageHasUnitTrace) {
  RngStream rng(10, 0);
  DensityAccumulator acc(2);
  for (int k = 0; k < 10000; ++k) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    const double theta = std::acos(z);
    CVector v(2);
    v << std::cos(theta / 2.0), std::exp(I * phi) * std::sin(theta / 2.0);
    acc.add(StateVector(v), 1.0);
  }
  const DensityMatrix rho = acc.normalized();
  EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(rho(0, 0).real(), 0.5, 0.02);
}

TEST(DensityMatrix, Invariants) {
  CMatrix bad(2, 2);
  bad << 0.5, 0.1, 0.2, 0.5;
  EXPECT_THROW(DensityMatrix{bad}, ValidationError);
  CMatrix neg(2, 2);
  neg << 1.5, 0.0, 0.0, -0.5;
  EXPECT_THROW(DensityMatrix{neg}, ValidationError);
  CMatrix tr(2, 2);
  tr << 0.6, 0.0, 0.0, 0.6;
  EXPECT_THROW(DensityMatrix{tr}, ValidationError);
}

TEST(UnitaryMatrix, RejectsNonUnitary) {
  CMatrix m(2, 2);
  m << 1.0, 0.1, 0.0, 1.0;
  EXPECT_THROW(UnitaryMatrix{m}, ValidationError);
}
