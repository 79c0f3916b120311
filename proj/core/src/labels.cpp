#include "ictus/labels.hpp"

#include <algorithm>
#include <cmath>

#include "ictus/error.hpp"

namespace ictus {

namespace {

constexpr double kBelowTwoPi = 6.283185307179585;  // largest double < 2*pi

double clip_phase(double phi) { return std::clamp(phi, 0.0, kBelowTwoPi); }

}  // namespace

double wait_bar_phase(double u, double ramp, double hold, double upbeat) {
  if (u < ramp) return clip_phase(kHoldPhase * u / ramp);
  if (u < ramp + hold) return kHoldPhase;
  const double tau = u - ramp - hold;
  const double frac = -std::expm1(-tau / kUpbeatTimeConstant) / -std::expm1(-upbeat / kUpbeatTimeConstant);
  return clip_phase(kHoldPhase + (kTwoPi - kHoldPhase) * frac);
}

LabelTimeline::LabelTimeline(const Score& score, std::vector<double> bar_starts, std::optional<double> end)
    : bounds_(std::move(bar_starts)) {
  if (static_cast<int>(bounds_.size()) != score.bar_count()) {
    throw Error(Errc::invalid_annotation, "expected " + std::to_string(score.bar_count()) + " bar starts, got " +
                                              std::to_string(bounds_.size()));
  }
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (!std::isfinite(bounds_[i]) || (i > 0 && !(bounds_[i] > bounds_[i - 1]))) {
      throw Error(Errc::invalid_annotation, "bar starts must be finite and strictly increasing (bar " +
                                                std::to_string(i) + ")");
    }
  }
  double last_end;
  if (end) {
    last_end = *end;
  } else if (bounds_.size() >= 2) {
    last_end = bounds_.back() + (bounds_.back() - bounds_[bounds_.size() - 2]);
  } else {
    last_end = bounds_.back() + score.duration(0);
  }
  if (!(last_end > bounds_.back())) throw Error(Errc::invalid_annotation, "take end must follow the last bar start");
  bounds_.push_back(last_end);
  waits_.resize(static_cast<std::size_t>(score.bar_count()));
  for (int b = 0; b < score.bar_count(); ++b) waits_[static_cast<std::size_t>(b)] = score.has_wait(b);
}

std::optional<WaitPlan> LabelTimeline::wait_plan(int bar) const {
  if (bar < 0 || bar >= bar_count() || !waits_[static_cast<std::size_t>(bar)]) return std::nullopt;
  const double start = bar_start(bar);
  const double stop = bar_end(bar);
  const double prev = bar > 0 ? start - bar_start(bar - 1) : 0.0;
  double ramp = 0.75 * prev;
  double upbeat = bar + 1 < bar_count() ? bar_end(bar + 1) - bar_start(bar + 1) : prev;
  if (upbeat <= 0.0) upbeat = stop - start;
  const double length = stop - start;
  if (ramp + upbeat > length) {
    const double scale = length / (ramp + upbeat);
    ramp *= scale;
    upbeat *= scale;
  }
  return WaitPlan{start, start + ramp, stop - upbeat, stop};
}

PhaseSample LabelTimeline::at(double time) const {
  if (!std::isfinite(time)) throw Error(Errc::invalid_annotation, "label query at non-finite time");
  const int last = bar_count() - 1;
  if (time <= bounds_.front()) {
    time = bounds_.front();
  }
  auto it = std::upper_bound(bounds_.begin(), bounds_.end(), time);
  int bar = std::clamp(static_cast<int>(it - bounds_.begin()) - 1, 0, last);
  const double start = bar_start(bar);
  const double stop = bar_end(bar);
  if (time >= stop) return {last, kBelowTwoPi};
  if (auto plan = wait_plan(bar)) {
    const double ramp = plan->hold_start - start;
    const double hold = plan->upbeat_start - plan->hold_start;
    const double upbeat = stop - plan->upbeat_start;
    return {bar, wait_bar_phase(time - start, ramp, hold, upbeat)};
  }
  return {bar, clip_phase(kTwoPi * (time - start) / (stop - start))};
}

}  // namespace ictus
