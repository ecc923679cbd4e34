#pragma once

// Small dense complex linear algebra for N-level systems (N <= 8 expected):
// states, observables, Hamiltonians, propagators and density matrices.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace fuzzymon {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kStateNormTolerance = 1e-9;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

/// Normalised amplitudes of the monitored system in the eigenbasis of the
/// measured observable.
class StateVector {
 public:
  /// Validates N >= 2, finite entries and unit norm (within 1e-9).
  explicit StateVector(CVector amplitudes);

  /// Divides by the norm; throws ValidationError for a zero vector.
  static StateVector normalized(CVector raw);
  static StateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const noexcept { return amps_; }
  Complex operator[](std::size_t j) const { return amps_(static_cast<Eigen::Index>(j)); }

  double norm_squared() const { return amps_.squaredNorm(); }
  /// |<a_j|psi>|^2 for every j.
  std::vector<double> occupations() const;

  bool operator==(const StateVector& other) const { return amps_ == other.amps_; }

 private:
  CVector amps_;
};

/// Eigenvalues a_j of the measured operator, in basis order. A sorted view
/// with the original index map is kept alongside.
class Observable {
 public:
  explicit Observable(std::vector<double> eigenvalues);

  std::size_t dim() const noexcept { return values_.size(); }
  double value(std::size_t j) const { return values_.at(j); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> sorted_values() const noexcept { return sorted_; }
  /// Basis index of the r-th smallest eigenvalue.
  std::size_t sorted_index(std::size_t r) const { return order_.at(r); }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
  std::vector<std::size_t> order_;
};

struct TwoLevelParams {
  double e1 = 0.0;
  double e2 = 0.0;
  double omega = 0.0;
};

/// Time-independent Hamiltonian (hbar = 1), either the two-level form
/// [[E1, w], [w, E2]] or an arbitrary Hermitian matrix.
class Hamiltonian {
 public:
  static Hamiltonian two_level(double e1, double e2, double omega);
  static Hamiltonian general(CMatrix matrix);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const CMatrix& matrix() const noexcept { return matrix_; }
  const std::optional<TwoLevelParams>& two_level_params() const noexcept { return params_; }
  /// True when H is diagonal in the observable basis, i.e. [H, A] = 0.
  bool commutes_with_observable() const;

 private:
  Hamiltonian(CMatrix m, std::optional<TwoLevelParams> p) : matrix_(std::move(m)), params_(p) {}

  CMatrix matrix_;
  std::optional<TwoLevelParams> params_;
};

class UnitaryMatrix {
 public:
  /// Validates U U^dagger = I within 1e-10 elementwise.
  explicit UnitaryMatrix(CMatrix u);
  static UnitaryMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(u_.rows()); }
  const CMatrix& matrix() const noexcept { return u_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return u_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Exactly the identity, bit for bit.
  bool is_identity() const noexcept { return identity_; }

  UnitaryMatrix operator*(const UnitaryMatrix& rhs) const;

 private:
  CMatrix u_;
  bool identity_ = false;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-10), unit trace (1e-9), eigenvalues >= -1e-9.
  explicit DensityMatrix(CMatrix rho);
  static DensityMatrix pure(const StateVector& psi);
  /// Normalises an accumulated sum of weighted projectors.
  static DensityMatrix from_accumulated(const CMatrix& sum, double total_weight);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(rho_.rows()); }
  const CMatrix& matrix() const noexcept { return rho_; }
  Complex operator()(std::size_t i, std::size_t j) const {
    return rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

 private:
  CMatrix rho_;
};

/// exp(-i H tau). Closed trigonometric form for the two-level case, spectral
/// decomposition otherwise.
UnitaryMatrix propagator(const Hamiltonian& h, double tau);

/// U psi. Does not renormalise.
StateVector apply(const UnitaryMatrix& u, const StateVector& psi);

/// rho + weight |psi><psi|. rho is a raw accumulator (not normalised).
CMatrix outer_accumulate(const CMatrix& rho, const StateVector& psi, double weight);

/// In-place variant used by the ensemble reducers.
void outer_accumulate_into(CMatrix& rho, const StateVector& psi, double weight);

/// Running sum of weighted projectors with its total weight.
class DensityAccumulator {
 public:
  explicit DensityAccumulator(std::size_t dim) : sum_(CMatrix::Zero(dim, dim)) {}

  void add(const StateVector& psi, double weight) {
    outer_accumulate_into(sum_, psi, weight);
    total_ += weight;
  }
  double total_weight() const noexcept { return total_; }
  const CMatrix& raw() const noexcept { return sum_; }
  DensityMatrix normalized() const { return DensityMatrix::from_accumulated(sum_, total_); }

 private:
  CMatrix sum_;
  double total_ = 0.0;
};

/// Eigenvalues of a Hermitian matrix, ascending.
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m);

}  // namespace fuzzymon
