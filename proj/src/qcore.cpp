#include "fuzzymon/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fuzzymon/errors.hpp"

namespace fuzzymon {

namespace {

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool all_finite(const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() < 2) throw ValidationError("state vector needs at least two amplitudes");
  if (!all_finite(amps_)) throw ValidationError("state vector has non-finite amplitudes");
  const double n2 = amps_.squaredNorm();
  if (std::fabs(n2 - 1.0) > kStateNormTolerance) {
    std::ostringstream msg;
    msg << "state vector is not normalised: |psi|^2 = " << n2;
    throw ValidationError(msg.str());
  }
}

StateVector StateVector::normalized(CVector raw) {
  const double n = raw.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalise a zero or non-finite vector");
  raw /= n;
  return StateVector(std::move(raw));
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw ValidationError("basis index out of range");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return StateVector(std::move(v));
}

std::vector<double> StateVector::occupations() const {
  std::vector<double> occ(dim());
  for (std::size_t j = 0; j < occ.size(); ++j) occ[j] = std::norm((*this)[j]);
  return occ;
}

// ---------------------------------------------------------------------------
// Observable

Observable::Observable(std::vector<double> eigenvalues) : values_(std::move(eigenvalues)) {
  if (values_.size() < 2) throw ValidationError("observable needs at least two eigenvalues");
  for (double a : values_) {
    if (!std::isfinite(a)) throw ValidationError("observable eigenvalues must be finite");
  }
  order_.resize(values_.size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t l, std::size_t r) { return values_[l] < values_[r]; });
  sorted_.reserve(values_.size());
  for (std::size_t idx : order_) sorted_.push_back(values_[idx]);
  for (std::size_t r = 1; r < sorted_.size(); ++r) {
    if (!(sorted_[r] > sorted_[r - 1])) throw ValidationError("observable eigenvalues must be pairwise distinct");
  }
}

// ---------------------------------------------------------------------------
// Hamiltonian

Hamiltonian Hamiltonian::two_level(double e1, double e2, double omega) {
  if (!std::isfinite(e1) || !std::isfinite(e2) || !std::isfinite(omega)) {
    throw ValidationError("two-level Hamiltonian parameters must be finite");
  }
  CMatrix m(2, 2);
  m << e1, omega, omega, e2;
  return Hamiltonian(std::move(m), TwoLevelParams{e1, e2, omega});
}

Hamiltonian Hamiltonian::general(CMatrix matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 2) {
    throw ValidationError("Hamiltonian must be a square matrix of dimension >= 2");
  }
  if (!all_finite(matrix)) throw ValidationError("Hamiltonian has non-finite entries");
  const double asym = max_abs(matrix - matrix.adjoint());
  if (asym > kHermitianTolerance) {
    std::ostringstream msg;
    msg << "Hamiltonian is not Hermitian (max |H - H^dagger| = " << asym << ")";
    throw ValidationError(msg.str());
  }
  // Symmetrise away the sub-tolerance residue.
  CMatrix h = 0.5 * (matrix + matrix.adjoint());
  return Hamiltonian(std::move(h), std::nullopt);
}

bool Hamiltonian::commutes_with_observable() const {
  for (Eigen::Index i = 0; i < matrix_.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix_.cols(); ++j) {
      if (i != j && matrix_(i, j) != Complex{}) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// UnitaryMatrix

UnitaryMatrix::UnitaryMatrix(CMatrix u) : u_(std::move(u)) {
  if (u_.rows() != u_.cols() || u_.rows() < 2) throw ValidationError("unitary must be square, dimension >= 2");
  if (!all_finite(u_)) throw ValidationError("unitary has non-finite entries");
  const CMatrix id = CMatrix::Identity(u_.rows(), u_.cols());
  const double dev = max_abs(u_ * u_.adjoint() - id);
  if (dev > kUnitaryTolerance) {
    std::ostringstream msg;
    msg << "matrix is not unitary (max |U U^dagger - I| = " << dev << ")";
    throw ValidationError(msg.str());
  }
  identity_ = (u_ == id);
}

UnitaryMatrix UnitaryMatrix::identity(std::size_t dim) {
  return UnitaryMatrix(CMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));
}

UnitaryMatrix UnitaryMatrix::operator*(const UnitaryMatrix& rhs) const {
  if (dim() != rhs.dim()) throw ValidationError("unitary dimension mismatch");
  return UnitaryMatrix(u_ * rhs.u_);
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() < 2) throw ValidationError("density matrix must be square, dimension >= 2");
  if (!all_finite(rho_)) throw ValidationError("density matrix has non-finite entries");
  if (max_abs(rho_ - rho_.adjoint()) > 1e-10) throw ValidationError("density matrix is not Hermitian");
  const Complex tr = rho_.trace();
  if (std::abs(tr - Complex{1.0}) > 1e-9) {
    std::ostringstream msg;
    msg << "density matrix trace " << tr.real() << " differs from 1";
    throw ValidationError(msg.str());
  }
  if (hermitian_eigenvalues(rho_).minCoeff() < -1e-9) throw ValidationError("density matrix is not positive semidefinite");
}

DensityMatrix DensityMatrix::pure(const StateVector& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::from_accumulated(const CMatrix& sum, double total_weight) {
  if (!(total_weight > 0.0)) throw ValidationError("cannot normalise an accumulator with zero total weight");
  return DensityMatrix(sum / total_weight);
}

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

// ---------------------------------------------------------------------------
// Operations

UnitaryMatrix propagator(const Hamiltonian& h, double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("propagator time step must be finite and >= 0");
  const Complex i{0.0, 1.0};
  if (const auto& p = h.two_level_params()) {
    // H = e I + d sz + w sx  =>  exp(-iH tau) = e^{-i e tau} [cos(W tau) - i sin(W tau) (d sz + w sx)/W]
    const double mean = 0.5 * (p->e1 + p->e2);
    const double half_split = 0.5 * (p->e1 - p->e2);
    const double freq = std::hypot(half_split, p->omega);
    const Complex phase = std::exp(-i * (mean * tau));
    CMatrix u(2, 2);
    if (freq == 0.0) {
      u << phase, 0.0, 0.0, phase;
    } else {
      const double c = std::cos(freq * tau);
      const double s = std::sin(freq * tau) / freq;
      u(0, 0) = phase * Complex{c, -s * half_split};
      u(1, 1) = phase * Complex{c, s * half_split};
      u(0, 1) = phase * Complex{0.0, -s * p->omega};
      u(1, 0) = u(0, 1);
    }
    return UnitaryMatrix(std::move(u));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw ConsistencyError("Hermitian eigensolver did not converge");
  const CMatrix& v = solver.eigenvectors();
  CVector phases(v.rows());
  for (Eigen::Index k = 0; k < v.rows(); ++k) phases(k) = std::exp(-i * (solver.eigenvalues()(k) * tau));
  return UnitaryMatrix(v * phases.asDiagonal() * v.adjoint());
}

StateVector apply(const UnitaryMatrix& u, const StateVector& psi) {
  if (u.dim() != psi.dim()) throw ValidationError("apply: dimension mismatch");
  if (u.is_identity()) return psi;
  return StateVector(u.matrix() * psi.amplitudes());
}

void outer_accumulate_into(CMatrix& rho, const StateVector& psi, double weight) {
  if (!(weight >= 0.0)) throw ValidationError("accumulation weight must be >= 0");
  if (rho.rows() != static_cast<Eigen::Index>(psi.dim()) || rho.cols() != rho.rows()) {
    throw ValidationError("outer_accumulate: dimension mismatch");
  }
  const CVector& a = psi.amplitudes();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    for (Eigen::Index c = 0; c < rho.cols(); ++c) rho(r, c) += weight * a(r) * std::conj(a(c));
  }
}

CMatrix outer_accumulate(const CMatrix& rho, const StateVector& psi, double weight) {
  CMatrix out = rho;
  outer_accumulate_into(out, psi, weight);
  return out;
}

}  // namespace fuzzymon
