#pragma once

// The per-step interaction loop: phase -> controller -> playback, with a
// full per-step log.

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ictus/controller.hpp"
#include "ictus/estimator.hpp"
#include "ictus/playback.hpp"

namespace ictus {

struct StepRecord {
  long k = 0;
  double wall = 0.0;
  double phase = 0.0;
  FsmState fsm = FsmState::waiting_for_upbeat;
  double s = 0.0;        // controller speed (0 while waiting or sleeping)
  double stretch = 1.0;  // stretch the playback is running at
  double playhead = 0.0;
  int bar = 0;
  bool halted = true;
  bool upbeat = false;
  bool downbeat = false;
  std::optional<double> command;  // speed command issued this step, after clamping
  bool clamped = false;

  bool operator==(const StepRecord&) const = default;
};

struct SessionLog {
  int rate_hz = 20;
  std::vector<StepRecord> steps;
  std::vector<long> beat_steps;   // detected downbeats
  std::vector<double> beat_walls;
  std::vector<BarStart> bar_starts;
  std::vector<std::string> notes;
  double end_wall = 0.0;
  double end_playhead = 0.0;
  int first_played_bar = -1;
  bool finished = false;

  bool operator==(const SessionLog& other) const;
};

struct SessionOptions {
  bool clamp = false;
  double clamp_min = 0.25;
  double clamp_max = 4.0;
};

struct EndSummary {
  double original_duration = 0.0;   // span of the recording covered, seconds
  double conducted_duration = 0.0;  // wall time from the first bar start, seconds
  double percent_difference = 0.0;
  bool defined = false;             // false when nothing was played
};

/// Summary of a finished (or interrupted) session.
EndSummary end_summary(const SessionLog& log, const Score& score);

class SessionEngine {
 public:
  SessionEngine(const Score& score, const ControllerConfig& cfg, SessionOptions options = {});

  /// Runs one control step with the given phase estimate.
  const StepRecord& step(double phase);
  const SessionLog& log() const;
  SessionLog take_log();
  EndSummary summary() const { return end_summary(log(), *score_); }
  const Playback& playback() const { return playback_; }
  const Controller& controller() const { return controller_; }
  void reset();

 private:
  const Score* score_;
  Controller controller_;
  Playback playback_;
  SessionOptions options_;
  mutable SessionLog log_;
  long k_ = 0;
};

/// Runs a whole session from precomputed phase estimates.
SessionLog run_session(std::span<const double> phases, const Score& score, const ControllerConfig& cfg,
                       SessionOptions options = {});

/// Runs a session with an estimator over kinematic frames (estimator is reset first).
SessionLog run_session(PhaseEstimator& estimator, std::span<const KinematicFrame> frames, const Score& score,
                       const ControllerConfig& cfg, SessionOptions options = {});

/// One CSV row per step. Columns:
/// k,wall,phase,fsm,s,stretch,playhead,bar,halted,upbeat,downbeat,command,clamped
/// followed by a '#'-prefixed summary block.
void write_session_csv(const SessionLog& log, const Score& score, std::ostream& out);
void write_session_csv(const SessionLog& log, const Score& score, const std::filesystem::path& path);

}  // namespace ictus
