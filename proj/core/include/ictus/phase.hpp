#pragma once

// Phase arithmetic on the circle. Phases are radians in [0, 2*pi).

#include <numbers>

namespace ictus {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Angle reduced into [0, 2*pi). Throws Errc::undefined_phase on non-finite input.
double wrap_phase(double angle);

/// Signed shortest step from `previous` to `current`, in (-pi, pi].
double phase_diff(double current, double previous);

/// Phase of the point (sin_part, cos_part), i.e. atan2(sin_part, cos_part)
/// wrapped into [0, 2*pi). The vector need not be unit length.
/// Throws Errc::undefined_phase for (0, 0).
double phase_from_sincos(double sin_part, double cos_part);

}  // namespace ictus
