#include "ictus/controller.hpp"

#include <algorithm>
#include <cmath>

#include "ictus/error.hpp"

namespace ictus {

std::string_view to_string(SpeedStrategy s) {
  switch (s) {
    case SpeedStrategy::raw: return "raw";
    case SpeedStrategy::median: return "median";
    case SpeedStrategy::average: return "average";
  }
  return "?";
}

std::string_view to_string(FsmState s) {
  switch (s) {
    case FsmState::waiting_for_upbeat: return "waiting_for_upbeat";
    case FsmState::waiting_for_downbeat: return "waiting_for_downbeat";
    case FsmState::sleep: return "sleep";
  }
  return "?";
}

SpeedStrategy parse_strategy(std::string_view name) {
  if (name == "raw") return SpeedStrategy::raw;
  if (name == "median") return SpeedStrategy::median;
  if (name == "average") return SpeedStrategy::average;
  throw Error(Errc::config, "unknown speed strategy '" + std::string(name) + "'");
}

void ControllerConfig::validate() const {
  if (!(phase_high > phase_low)) throw Error(Errc::config, "phase_high must exceed phase_low");
  if (!(upbeat_threshold > 0.0)) throw Error(Errc::config, "upbeat threshold must be positive");
  if (sleep_steps < 0) throw Error(Errc::config, "sleep steps must be non-negative");
  if (rate_hz <= 0) throw Error(Errc::config, "control rate must be positive");
  if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-9) throw Error(Errc::config, "average weights must sum to 1");
  if (!(bar_start_window >= 0.0 && bar_start_window <= 1.0)) throw Error(Errc::config, "bar_start_window must be in [0, 1]");
}

bool detect_upbeat(double prev, double cur, const ControllerConfig& cfg) { return cur - prev > cfg.upbeat_threshold; }

bool detect_downbeat(double prev, double cur, const ControllerConfig& cfg) {
  return prev > cfg.phase_high && cur < cfg.phase_low;
}

std::optional<double> speed(const std::vector<long>& history, double bar_duration, const ControllerConfig& cfg) {
  if (history.size() < 2) return std::nullopt;
  if (!(bar_duration > 0.0)) throw Error(Errc::config, "bar duration must be positive");
  auto interval = [&](std::size_t i) {
    return static_cast<double>(history[i] - history[i + 1]) / static_cast<double>(cfg.rate_hz);
  };
  double dk = interval(0);
  if (history.size() >= 4 && cfg.strategy != SpeedStrategy::raw) {
    const double a = interval(0), b = interval(1), c = interval(2);
    if (cfg.strategy == SpeedStrategy::median) {
      dk = std::max(std::min(a, b), std::min(std::max(a, b), c));
    } else {
      dk = cfg.weights[0] * a + cfg.weights[1] * b + cfg.weights[2] * c;
    }
  }
  return dk / bar_duration;
}

Controller::Controller(const Score& score, ControllerConfig cfg) : score_(&score), cfg_(cfg) { cfg_.validate(); }

void Controller::reset() { state_ = ControllerState{}; }

int Controller::upcoming_bar(const BarCursor& cursor, bool resume) const {
  int bar = cursor.bar;
  // A resume always starts the bar after the waiting bar the playback sits in.
  if (resume && score_->has_wait(cursor.bar)) {
    bar = cursor.bar + 1;
  } else if (cursor.halted || cursor.fraction >= cfg_.bar_start_window) {
    bar = cursor.bar + 1;
  }
  return std::clamp(bar, 0, score_->bar_count() - 1);
}

ControllerStep Controller::step(double phase, long k, const BarCursor& cursor) {
  ControllerStep out;
  if (state_.last_k && k <= *state_.last_k) throw Error(Errc::config, "controller steps must increase");
  state_.last_k = k;
  const std::optional<double> prev = state_.last_phase;
  state_.last_phase = phase;

  switch (state_.fsm) {
    case FsmState::waiting_for_upbeat:
      if (prev && detect_upbeat(*prev, phase, cfg_)) {
        out.upbeat = true;
        state_.history.assign(1, k);
        state_.fsm = FsmState::waiting_for_downbeat;
      }
      break;
    case FsmState::waiting_for_downbeat:
      if (prev && detect_downbeat(*prev, phase, cfg_)) {
        out.downbeat = true;
        const bool resume = state_.history.size() == 1;
        const int bar = upcoming_bar(cursor, resume);
        out.target_bar = bar;
        if (score_->is_fermata(bar)) {
          state_.fsm = FsmState::sleep;
          state_.fermata_start = k;
          state_.s = 0.0;
        } else {
          state_.history.insert(state_.history.begin(), k);
          if (state_.history.size() > 8) state_.history.resize(8);
          if (auto s = speed(state_.history, score_->duration(bar), cfg_)) {
            state_.s = *s;
            out.command = SpeedCommand{*s, k, resume};
          }
        }
      }
      break;
    case FsmState::sleep:
      if (k > state_.fermata_start + cfg_.sleep_steps) {
        state_.fsm = FsmState::waiting_for_upbeat;
        state_.history.clear();
      }
      break;
  }
  if (state_.fsm != FsmState::waiting_for_downbeat) state_.s = 0.0;
  return out;
}

}  // namespace ictus
