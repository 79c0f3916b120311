#pragma once

// Ground-truth phase labels for a conducted take.
//
// Regular bars: phase rises linearly from 0 at the bar start to 2*pi at the
// next bar start.
//
// Waiting bars (fermata bars and bar 0): phase rises to kHoldPhase at the
// in-tempo rate of the previous bar, stays flat for the hold, then the silent
// upbeat carries it from kHoldPhase to 2*pi over the duration of the next
// conducted bar. The upbeat rises as a normalized exponential with time
// constant kUpbeatTimeConstant, so most of the lift happens in its first
// tenth of a second.

#include <optional>
#include <vector>

#include "ictus/phase.hpp"
#include "ictus/score.hpp"

namespace ictus {

inline constexpr double kHoldPhase = 1.5 * std::numbers::pi;
inline constexpr double kUpbeatTimeConstant = 0.05;

/// Timing of a waiting bar on the conducted (wall-clock) timeline.
struct WaitPlan {
  double bar_start = 0.0;
  double hold_start = 0.0;
  double upbeat_start = 0.0;
  double bar_end = 0.0;
};

/// Phase within a waiting bar at `u` seconds after the bar start. Shared
/// shape function, parameterized by the segment lengths.
double wait_bar_phase(double u, double ramp, double hold, double upbeat);

/// Maps conducted time to (bar, phase) for a score and its conducted bar
/// start times.
class LabelTimeline {
 public:
  /// `bar_starts` must be strictly increasing with one entry per bar.
  /// `end` closes the last bar; without it the last bar lasts as long as the
  /// one before it. Throws Errc::invalid_annotation.
  LabelTimeline(const Score& score, std::vector<double> bar_starts, std::optional<double> end = std::nullopt);

  PhaseSample at(double time) const;
  PhaseSample operator()(double time) const { return at(time); }

  double bar_start(int bar) const { return bounds_.at(static_cast<std::size_t>(bar)); }
  double bar_end(int bar) const { return bounds_.at(static_cast<std::size_t>(bar) + 1); }
  double end() const { return bounds_.back(); }
  int bar_count() const { return static_cast<int>(bounds_.size()) - 1; }

  /// Hold and upbeat timing for waiting bars; nullopt for regular bars.
  std::optional<WaitPlan> wait_plan(int bar) const;

 private:
  std::vector<double> bounds_;
  std::vector<bool> waits_;
};

}  // namespace ictus
