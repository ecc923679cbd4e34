#pragma once

#include <string_view>

#include "fuzzymon/rng.hpp"

namespace fuzzymon {

enum class MeterKind { gaussian, hard_wall };

std::string_view to_string(MeterKind kind) noexcept;

/// Pointer response G(f) of one von Neumann meter, normalised so that
/// the integral of G^2 is 1.
///
///   gaussian:  G(f) = (pi df^2)^(-1/4) exp(-f^2 / (2 df^2))
///   hard_wall: G(f) = df^(-1/2) for |f| <= df/2, zero outside
class MeterModel {
 public:
  static MeterModel gaussian(double delta_f);
  static MeterModel hard_wall(double delta_f);

  MeterKind kind() const noexcept { return kind_; }
  double delta_f() const noexcept { return delta_f_; }
  /// Standard deviation of a readout about the selected eigenvalue.
  double readout_stddev() const noexcept;

  bool operator==(const MeterModel&) const = default;

 private:
  MeterModel(MeterKind kind, double delta_f) : kind_(kind), delta_f_(delta_f) {}

  MeterKind kind_;
  double delta_f_;
};

/// G(f - a).
double weight(const MeterModel& m, double f, double a);

/// Draws f with density G^2(f - a): normal(a, df/sqrt(2)) for the Gaussian
/// meter, uniform on [a - df/2, a + df/2) for the hard wall.
double sample_readout(const MeterModel& m, double a, RngStream& rng);

/// Analytic CDF of the readout density G^2(f - a).
double readout_cdf(const MeterModel& m, double f, double a);

/// Integral of G(f - a_i) G(f - a_j) df: exp(-(a_i - a_j)^2 / (4 df^2)) for
/// the Gaussian meter, max(0, 1 - |a_i - a_j| / df) for the hard wall.
double overlap(const MeterModel& m, double a_i, double a_j);

enum class RegionLabel { A, B, C };

std::string_view to_string(RegionLabel r) noexcept;

/// Hard-wall readout regions for a two-level system with a1 < a2 < a1 + df:
///   A = [a1 - df/2, a2 - df/2)   reduces to |a1>
///   C = [a2 - df/2, a1 + df/2]   leaves the state unchanged
///   B = (a1 + df/2, a2 + df/2]   reduces to |a2>
/// Both closed endpoints of C belong to C.
RegionLabel classify_region(double f, double a1, double a2, double delta_f);

}  // namespace fuzzymon
