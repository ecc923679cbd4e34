#include "fuzzymon/meter.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fuzzymon/errors.hpp"

namespace fuzzymon {

std::string_view to_string(MeterKind kind) noexcept {
  return kind == MeterKind::gaussian ? "gaussian" : "hard_wall";
}

std::string_view to_string(RegionLabel r) noexcept {
  switch (r) {
    case RegionLabel::A: return "A";
    case RegionLabel::B: return "B";
    case RegionLabel::C: return "C";
  }
  return "?";
}

MeterModel MeterModel::gaussian(double delta_f) {
  if (!(delta_f > 0.0) || !std::isfinite(delta_f)) throw ValidationError("meter width delta_f must be finite and > 0");
  return MeterModel(MeterKind::gaussian, delta_f);
}

MeterModel MeterModel::hard_wall(double delta_f) {
  if (!(delta_f > 0.0) || !std::isfinite(delta_f)) throw ValidationError("meter width delta_f must be finite and > 0");
  return MeterModel(MeterKind::hard_wall, delta_f);
}

double MeterModel::readout_stddev() const noexcept {
  return kind_ == MeterKind::gaussian ? delta_f_ / std::numbers::sqrt2 : delta_f_ / std::sqrt(12.0);
}

double weight(const MeterModel& m, double f, double a) {
  const double d = f - a;
  const double df = m.delta_f();
  if (m.kind() == MeterKind::gaussian) {
    return std::pow(std::numbers::pi * df * df, -0.25) * std::exp(-d * d / (2.0 * df * df));
  }
  return std::fabs(d) <= 0.5 * df ? 1.0 / std::sqrt(df) : 0.0;
}

double sample_readout(const MeterModel& m, double a, RngStream& rng) {
  if (m.kind() == MeterKind::gaussian) return a + m.readout_stddev() * rng.normal();
  return a + m.delta_f() * (rng.uniform() - 0.5);
}

double readout_cdf(const MeterModel& m, double f, double a) {
  const double d = f - a;
  const double df = m.delta_f();
  if (m.kind() == MeterKind::gaussian) return 0.5 * std::erfc(-d / df);
  if (d <= -0.5 * df) return 0.0;
  if (d >= 0.5 * df) return 1.0;
  return d / df + 0.5;
}

double overlap(const MeterModel& m, double a_i, double a_j) {
  const double d = a_i - a_j;
  const double df = m.delta_f();
  if (m.kind() == MeterKind::gaussian) return std::exp(-d * d / (4.0 * df * df));
  return std::fmax(0.0, 1.0 - std::fabs(d) / df);
}

RegionLabel classify_region(double f, double a1, double a2, double delta_f) {
  if (!(a2 > a1)) throw ValidationError("classify_region requires a2 > a1");
  if (!(delta_f > a2 - a1)) throw ValidationError("classify_region requires delta_f > a2 - a1 (non-empty overlap)");
  const double h = 0.5 * delta_f;
  if (!(f >= a1 - h && f <= a2 + h)) {
    std::ostringstream msg;
    msg << "readout " << f << " lies outside [" << a1 - h << ", " << a2 + h << "]";
    throw ImpossibleReadoutError(msg.str());
  }
  if (f < a2 - h) return RegionLabel::A;
  if (f > a1 + h) return RegionLabel::B;
  return RegionLabel::C;
}

}  // namespace fuzzymon
