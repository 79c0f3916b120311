#include "ictus/playback.hpp"

#include <algorithm>
#include <cmath>

#include "ictus/error.hpp"

namespace ictus {

Playback::Playback(const Score& score) : score_(&score) {}

void Playback::reset() {
  state_ = PlaybackState{};
  bar_starts_.clear();
}

double Playback::bar_fraction() const {
  const int b = state_.bar;
  const double f = (state_.playhead - score_->bar_start(b)) / score_->duration(b);
  return std::clamp(f, 0.0, 1.0);
}

void Playback::enter_bar(int bar, double wall, bool jump) {
  state_.bar = bar;
  bar_starts_.push_back({bar, wall, jump});
}

std::string Playback::command(double s, bool resume) {
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(Errc::config, "speed command must be positive and finite");
  state_.stretch = s;
  if (state_.finished) return "command after the end of the score ignored";
  const int b = state_.bar;
  if (score_->has_wait(b)) {
    if (b + 1 >= score_->bar_count()) {
      state_.playhead = score_->total_duration();
      state_.halted = true;
      state_.finished = true;
      return {};
    }
    state_.playhead = score_->bar_start(b + 1);
    state_.halted = false;
    enter_bar(b + 1, state_.wall, true);
    return {};
  }
  state_.halted = false;
  if (resume) return "resume command in regular bar " + std::to_string(b) + ": jump ignored, speed applied";
  return {};
}

void Playback::advance(double dt) {
  if (!(dt > 0.0)) throw Error(Errc::config, "dt must be positive");
  const double wall0 = state_.wall;
  state_.wall += dt;
  ++state_.k;
  if (state_.halted || state_.finished) return;
  const double s = state_.stretch;
  const double start = state_.playhead;
  double target = start + dt / s;
  for (;;) {
    const int b = state_.bar;
    const double end = score_->bar_start(b + 1);
    if (target < end) break;
    if (score_->has_wait(b)) {
      target = end;
      state_.halted = true;
      break;
    }
    if (b + 1 >= score_->bar_count()) {
      target = end;
      state_.halted = true;
      state_.finished = true;
      break;
    }
    // Wall time at which the playhead crosses the boundary.
    enter_bar(b + 1, wall0 + (end - start) * s, false);
  }
  state_.playhead = target;
}

}  // namespace ictus
