#include <gtest/gtest.h>

#include <sstream>

#include "ictus/metrics.hpp"
#include "ictus/session.hpp"
#include "ictus/synth.hpp"

using namespace ictus;

namespace {

Take steady_take(double g, std::uint64_t seed = 5, int bars = 0) {
  ConductorStyle style;
  style.tempo_jitter = 0.0;
  style.noise_std = 0.0;
  style.seed = seed;
  const Score score = bars > 0 ? Score::demo().truncated(bars) : Score::demo();
  return generate_take(score, style, g, Timebase{20});
}

std::vector<double> phases(const Take& t) {
  std::vector<double> out;
  for (const auto& l : t.labels) out.push_back(l.phase);
  return out;
}

}  // namespace

TEST(Session, ConstantPhaseNeverStarts) {
  const Score score = Score::demo();
  const std::vector<double> flat(400, 2.0);
  const SessionLog log = run_session(flat, score, ControllerConfig{});
  for (const auto& r : log.steps) {
    EXPECT_EQ(r.fsm, FsmState::waiting_for_upbeat);
    EXPECT_EQ(r.playhead, 0.0);
    EXPECT_EQ(r.s, 0.0);
  }
  EXPECT_EQ(log.first_played_bar, -1);
  EXPECT_FALSE(end_summary(log, score).defined);
  EXPECT_EQ(end_summary(log, score).conducted_duration, 0.0);
}

TEST(Session, OracleSessionFollowsTheConductor) {
  const Score score = Score::demo();
  const Take take = steady_take(1.0);
  const SessionLog log = run_session(phases(take), score, ControllerConfig{});
  EXPECT_TRUE(log.finished);
  EXPECT_EQ(log.first_played_bar, 1);
  EXPECT_GE(log.beat_steps.size(), 110u);
  EXPECT_LT(pct_of_bar(log, score), 25.0);
  EXPECT_TRUE(log.notes.empty());
  // every fermata resume lands on a bar start
  for (const auto& b : log.bar_starts) {
    if (b.jump) {
      EXPECT_TRUE(score.has_wait(b.bar - 1)) << b.bar;
    }
  }
}

TEST(Session, Deterministic) {
  const Score score = Score::demo();
  const Take take = steady_take(1.2, 9);
  EXPECT_EQ(run_session(phases(take), score, ControllerConfig{}), run_session(phases(take), score, ControllerConfig{}));
}

TEST(Session, StepRecordsAreConsistent) {
  const Score score = Score::demo();
  const Take take = steady_take(0.9);
  const SessionLog log = run_session(phases(take), score, ControllerConfig{});
  ASSERT_EQ(log.steps.size(), take.frames.size());
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const auto& r = log.steps[i];
    EXPECT_EQ(r.k, static_cast<long>(i));
    EXPECT_NEAR(r.wall, static_cast<double>(i) / 20.0, 1e-9);
    if (r.fsm != FsmState::waiting_for_downbeat) {
      EXPECT_EQ(r.s, 0.0);
    }
    if (r.command) {
      EXPECT_EQ(r.stretch, *r.command);
    }
  }
}

TEST(Session, ClampLimitsCommands) {
  const Score score = Score::demo();
  const Take take = steady_take(0.2, 4, 30);
  const Score piece = score.truncated(30);
  SessionOptions opts;
  opts.clamp = true;
  opts.clamp_max = 4.0;
  const SessionLog log = run_session(phases(take), piece, ControllerConfig{}, opts);
  bool clamped = false;
  for (const auto& r : log.steps) {
    if (r.command) {
      EXPECT_LE(*r.command, 4.0);
      EXPECT_GE(*r.command, 0.25);
    }
    clamped = clamped || r.clamped;
  }
  EXPECT_TRUE(clamped);
  EXPECT_FALSE(log.notes.empty());
}

TEST(EndSummary, PercentDifference) {
  const Score score = Score::demo();
  SessionLog log;
  log.first_played_bar = 1;
  log.bar_starts = {{1, 2.0, true}};
  log.end_playhead = score.bar_start(1) + 10.0;
  log.end_wall = 12.0;
  EndSummary s = end_summary(log, score);
  EXPECT_TRUE(s.defined);
  EXPECT_NEAR(s.percent_difference, 0.0, 1e-12);
  log.end_wall = 13.0;
  s = end_summary(log, score);
  EXPECT_NEAR(s.conducted_duration, 11.0, 1e-12);
  EXPECT_NEAR(s.percent_difference, 10.0, 1e-9);
}

TEST(EndSummary, SlowTakeStretchesDuration) {
  const Score score = Score::demo();
  const Take take = steady_take(0.8);
  const SessionLog log = run_session(phases(take), score, ControllerConfig{});
  const EndSummary s = end_summary(log, score);
  ASSERT_TRUE(s.defined);
  EXPECT_NEAR(s.conducted_duration / (s.original_duration / 0.8), 1.0, 0.02);
}

TEST(Session, ConductedDurationSpansFromFirstBarStart) {
  const Score score = Score::demo();
  const Take take = steady_take(1.1);
  const SessionLog log = run_session(phases(take), score, ControllerConfig{});
  ASSERT_FALSE(log.bar_starts.empty());
  const EndSummary s = end_summary(log, score);
  EXPECT_NEAR(s.conducted_duration, log.end_wall - log.bar_starts.front().wall, 1e-12);
  EXPECT_NEAR(s.original_duration, log.end_playhead - score.bar_start(log.first_played_bar), 1e-12);
  double played = 0.0;
  for (std::size_t i = 1; i < log.bar_starts.size(); ++i) played += log.bar_starts[i].wall - log.bar_starts[i - 1].wall;
  EXPECT_LE(played, s.conducted_duration + 1e-9);
}

TEST(SessionCsv, StableColumns) {
  const Score score = Score::demo();
  const SessionLog log = run_session(phases(steady_take(1.0, 3, 10)), score.truncated(10), ControllerConfig{});
  std::ostringstream out;
  write_session_csv(log, score.truncated(10), out);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "k,wall,phase,fsm,s,stretch,playhead,bar,halted,upbeat,downbeat,command,clamped");
  EXPECT_NE(text.find("# percent_difference="), std::string::npos);
}
