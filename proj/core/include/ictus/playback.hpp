#pragma once

// Variable-speed playback over the original recording timeline.
//
// Playback starts halted at the start of bar 0. In bars with a wait (bar 0
// and fermata bars) the playhead runs at the current stretch and stops
// exactly at the bar end; any speed command received in such a bar jumps
// to the start of the next bar. In regular bars a command only changes the
// stretch.

#include <string>
#include <vector>

#include "ictus/score.hpp"

namespace ictus {

struct PlaybackState {
  double playhead = 0.0;  // seconds on the original timeline
  int bar = 0;
  bool halted = true;
  bool finished = false;
  double stretch = 1.0;   // active s; rate is 1/s
  double wall = 0.0;      // seconds since session start
  long k = 0;
};

struct BarStart {
  int bar = 0;
  double wall = 0.0;
  bool jump = false;  // entered by a resume jump rather than by playing through
};

class Playback {
 public:
  explicit Playback(const Score& score);

  /// Applies a speed command. `resume` marks the first command after an
  /// upbeat. Returns a note when the command is unusual (resume flag in a
  /// regular bar); the speed is applied either way.
  std::string command(double s, bool resume);

  /// Advances the wall clock by dt and the playhead by dt / s.
  void advance(double dt);

  const PlaybackState& state() const { return state_; }
  const std::vector<BarStart>& bar_starts() const { return bar_starts_; }
  /// Fraction of the current bar already played, in [0, 1].
  double bar_fraction() const;
  /// First bar actually played, or -1.
  int first_played_bar() const { return bar_starts_.empty() ? -1 : bar_starts_.front().bar; }
  void reset();

 private:
  void enter_bar(int bar, double wall, bool jump);

  const Score* score_;
  PlaybackState state_;
  std::vector<BarStart> bar_starts_;
};

}  // namespace ictus
