#pragma once

// Beat detection on the phase stream and the three-state speed controller.
//
// s is a duration stretch: s = (beat interval in seconds) / (original bar
// duration). s = 1 plays at the original tempo, playback rate is 1/s.

#include <optional>
#include <string_view>
#include <vector>

#include "ictus/score.hpp"

namespace ictus {

enum class SpeedStrategy { raw, median, average };
enum class FsmState { waiting_for_upbeat, waiting_for_downbeat, sleep };

std::string_view to_string(SpeedStrategy s);
std::string_view to_string(FsmState s);
SpeedStrategy parse_strategy(std::string_view name);

struct ControllerConfig {
  double upbeat_threshold = 0.5;  // rad, minimum single-step phase rise
  double phase_high = 3.8;        // rad
  double phase_low = 2.5;         // rad
  int sleep_steps = 10;           // T_s
  SpeedStrategy strategy = SpeedStrategy::median;
  double weights[3] = {1.0 / 2.0, 1.0 / 3.0, 1.0 / 6.0};
  int rate_hz = 20;
  /// A downbeat in the first `bar_start_window` of the playback's current
  /// bar starts that bar; later downbeats start the following bar.
  double bar_start_window = 0.5;

  /// Throws Errc::config.
  void validate() const;
};

/// Raw single-step rise above the threshold (no wrap handling).
bool detect_upbeat(double prev, double cur, const ControllerConfig& cfg);
/// prev above phase_high and cur below phase_low.
bool detect_downbeat(double prev, double cur, const ControllerConfig& cfg);

/// Speed factor from a newest-first beat history of step indices. Returns
/// nullopt when the history has fewer than two beats.
std::optional<double> speed(const std::vector<long>& history, double bar_duration, const ControllerConfig& cfg);

struct SpeedCommand {
  double s = 0.0;
  long emitted_at = 0;
  bool resume = false;  // first command after an upbeat
};

/// Where the playback is when the controller steps.
struct BarCursor {
  int bar = 0;
  double fraction = 0.0;  // position inside the bar, in [0, 1]
  bool halted = false;
};

struct ControllerState {
  FsmState fsm = FsmState::waiting_for_upbeat;
  std::vector<long> history;  // newest first
  long fermata_start = 0;
  std::optional<double> last_phase;
  double s = 0.0;             // effective speed: 0 while waiting for an upbeat or sleeping
  std::optional<long> last_k;
};

struct ControllerStep {
  std::optional<SpeedCommand> command;
  bool upbeat = false;
  bool downbeat = false;
  int target_bar = -1;  // bar a detected downbeat was attributed to
};

class Controller {
 public:
  Controller(const Score& score, ControllerConfig cfg);

  /// One control step. Steps must have strictly increasing k.
  ControllerStep step(double phase, long k, const BarCursor& cursor);
  void reset();

  const ControllerState& state() const { return state_; }
  const ControllerConfig& config() const { return cfg_; }

 private:
  int upcoming_bar(const BarCursor& cursor, bool resume) const;

  const Score* score_;
  ControllerConfig cfg_;
  ControllerState state_;
};

}  // namespace ictus
