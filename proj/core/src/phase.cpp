#include "ictus/phase.hpp"

#include <cmath>

#include "ictus/error.hpp"

namespace ictus {

double wrap_phase(double angle) {
  if (!std::isfinite(angle)) throw Error(Errc::undefined_phase, "wrap_phase: non-finite angle");
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative number plus 2*pi can round up to 2*pi itself.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double phase_diff(double current, double previous) {
  if (!std::isfinite(current) || !std::isfinite(previous)) {
    throw Error(Errc::undefined_phase, "phase_diff: non-finite phase");
  }
  // mod(d + pi, 2pi) - pi with a floored modulo, giving (-pi, pi].
  const double shifted = std::fmod(current - previous + std::numbers::pi, kTwoPi);
  double d = (shifted < 0.0 ? shifted + kTwoPi : shifted) - std::numbers::pi;
  if (d <= -std::numbers::pi) d += kTwoPi;
  return d;
}

double phase_from_sincos(double sin_part, double cos_part) {
  if (!std::isfinite(sin_part) || !std::isfinite(cos_part)) {
    throw Error(Errc::undefined_phase, "phase_from_sincos: non-finite input");
  }
  if (sin_part == 0.0 && cos_part == 0.0) {
    throw Error(Errc::undefined_phase, "phase_from_sincos: (0, 0) has no phase");
  }
  double phi = std::atan2(sin_part, cos_part);
  if (phi < 0.0) phi += kTwoPi;
  if (phi >= kTwoPi) phi = 0.0;
  return phi;
}

}  // namespace ictus
