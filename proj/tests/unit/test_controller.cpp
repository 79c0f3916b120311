#include <gtest/gtest.h>

#include "ictus/controller.hpp"
#include "ictus/error.hpp"
#include "ictus/rng.hpp"

using namespace ictus;

namespace {

ControllerConfig with(SpeedStrategy s) {
  ControllerConfig c;
  c.strategy = s;
  return c;
}

}  // namespace

TEST(DetectUpbeat, Examples) {
  const ControllerConfig c;
  EXPECT_TRUE(detect_upbeat(1.0, 1.6, c));
  EXPECT_FALSE(detect_upbeat(1.0, 1.4, c));
  EXPECT_FALSE(detect_upbeat(6.0, 0.2, c));
}

TEST(DetectDownbeat, Examples) {
  const ControllerConfig c;
  EXPECT_TRUE(detect_downbeat(3.9, 0.3, c));
  EXPECT_FALSE(detect_downbeat(3.9, 2.6, c));
  EXPECT_FALSE(detect_downbeat(3.0, 0.1, c));
}

TEST(Speed, Raw) {
  const auto s = speed({7, 0}, 0.7, with(SpeedStrategy::raw));
  ASSERT_TRUE(s);
  EXPECT_DOUBLE_EQ(*s, 0.5);
  EXPECT_FALSE(speed({7}, 0.7, with(SpeedStrategy::raw)));
}

TEST(Speed, MedianOfThreeNewestIntervals) {
  // newest-first intervals 0.6, 0.8, 0.7, 0.9 s at 20 Hz
  const std::vector<long> h = {60, 48, 32, 18, 0};
  EXPECT_NEAR(*speed(h, 0.7, with(SpeedStrategy::median)), 1.0, 1e-12);
}

TEST(Speed, WeightedAverage) {
  const std::vector<long> h = {60, 48, 32, 18, 0};
  const double expect = (0.5 * 0.6 + 0.8 / 3.0 + 0.7 / 6.0) / 0.7;
  EXPECT_NEAR(*speed(h, 0.7, with(SpeedStrategy::average)), expect, 1e-12);
  EXPECT_NEAR(expect, 0.976, 1e-3);
}

TEST(Speed, ShortHistoryFallsBackToLatestInterval) {
  const std::vector<long> h = {30, 16, 0};
  EXPECT_NEAR(*speed(h, 0.7, with(SpeedStrategy::median)), 0.7 / 0.7, 1e-12);
  EXPECT_NEAR(*speed(h, 0.7, with(SpeedStrategy::average)), 1.0, 1e-12);
}

TEST(Controller, UpbeatStartsHistory) {
  const Score score = Score::demo();
  Controller c(score, ControllerConfig{});
  c.step(1.0, 0, BarCursor{0, 0.0, true});
  const ControllerStep st = c.step(1.6, 1, BarCursor{0, 0.0, true});
  EXPECT_TRUE(st.upbeat);
  EXPECT_EQ(c.state().fsm, FsmState::waiting_for_downbeat);
  EXPECT_EQ(c.state().history, (std::vector<long>{1}));
  EXPECT_EQ(c.state().s, 0.0);
}

TEST(Controller, FirstSpeedUsesUpbeatToDownbeatInterval) {
  const Score score = Score::demo();
  Controller c(score, ControllerConfig{});
  c.step(4.7, 9, BarCursor{0, 1.0, true});
  c.step(5.5, 10, BarCursor{0, 1.0, true});
  for (long k = 11; k < 24; ++k) c.step(6.0, k, BarCursor{0, 1.0, true});
  const ControllerStep st = c.step(0.1, 24, BarCursor{0, 1.0, true});
  ASSERT_TRUE(st.downbeat);
  ASSERT_TRUE(st.command);
  EXPECT_TRUE(st.command->resume);
  EXPECT_EQ(st.target_bar, 1);
  EXPECT_NEAR(st.command->s, (14.0 / 20.0) / 0.7, 1e-12);
  EXPECT_EQ(c.state().history, (std::vector<long>{24, 10}));
}

TEST(Controller, DownbeatBeforeFermataSleeps) {
  const Score score = Score::demo();
  Controller c(score, ControllerConfig{});
  c.step(1.0, 0, BarCursor{1, 0.2, false});
  c.step(1.6, 1, BarCursor{1, 0.3, false});
  c.step(4.0, 2, BarCursor{1, 0.6, false});
  const ControllerStep st = c.step(0.2, 3, BarCursor{1, 0.7, false});
  EXPECT_TRUE(st.downbeat);
  EXPECT_EQ(st.target_bar, 2);
  EXPECT_FALSE(st.command);
  EXPECT_EQ(c.state().fsm, FsmState::sleep);
  EXPECT_EQ(c.state().fermata_start, 3);
  EXPECT_EQ(c.state().s, 0.0);
}

TEST(Controller, SleepEndsAfterSleepSteps) {
  const Score score = Score::demo();
  ControllerConfig cfg;
  cfg.sleep_steps = 10;
  Controller c(score, cfg);
  c.step(1.0, 0, BarCursor{1, 0.2, false});
  c.step(1.6, 1, BarCursor{1, 0.3, false});
  c.step(4.0, 2, BarCursor{1, 0.6, false});
  c.step(0.2, 3, BarCursor{1, 0.7, false});
  // Large phase jumps while asleep are ignored.
  for (long k = 4; k <= 13; ++k) {
    c.step(k % 2 ? 1.0 : 3.0, k, BarCursor{2, 0.5, false});
    EXPECT_EQ(c.state().fsm, FsmState::sleep) << k;
  }
  c.step(4.7, 14, BarCursor{2, 1.0, true});
  EXPECT_EQ(c.state().fsm, FsmState::waiting_for_upbeat);
  EXPECT_TRUE(c.state().history.empty());
}

TEST(Controller, UpcomingBarRule) {
  const Score score = Score::demo();
  auto downbeat_target = [&](BarCursor cur, int beats_before) {
    Controller c(score, ControllerConfig{});
    long k = 0;
    c.step(1.0, k++, cur);
    c.step(1.6, k++, cur);
    for (int i = 0; i < beats_before; ++i) {
      c.step(4.0, k++, cur);
      c.step(0.1, k++, cur);
    }
    c.step(4.0, k++, cur);
    return c.step(0.1, k, cur).target_bar;
  };
  EXPECT_EQ(downbeat_target({10, 0.2, false}, 1), 10);
  EXPECT_EQ(downbeat_target({10, 0.6, false}, 1), 11);
  EXPECT_EQ(downbeat_target({10, 1.0, true}, 1), 11);
  // resume from a waiting bar always targets the next bar
  EXPECT_EQ(downbeat_target({4, 0.1, false}, 0), 5);
  // resume in a regular bar follows the fraction rule
  EXPECT_EQ(downbeat_target({10, 0.1, false}, 0), 10);
}

TEST(Controller, NeverPositiveSpeedOutsideWaitingForDownbeat) {
  const Score score = Score::demo();
  for (auto strategy : {SpeedStrategy::raw, SpeedStrategy::median, SpeedStrategy::average}) {
    Controller c(score, with(strategy));
    Rng rng(static_cast<std::uint64_t>(strategy) + 1);
    double phi = 0.0;
    for (long k = 0; k < 20000; ++k) {
      phi = std::fmod(phi + rng.uniform(-0.3, 1.2), 6.283185307179586);
      if (phi < 0) phi += 6.283185307179586;
      const BarCursor cur{static_cast<int>(rng.below(122)), rng.uniform(), rng.uniform() < 0.2};
      const ControllerStep st = c.step(phi, k, cur);
      if (c.state().fsm != FsmState::waiting_for_downbeat) {
        ASSERT_EQ(c.state().s, 0.0);
      }
      if (st.command) {
        ASSERT_GT(st.command->s, 0.0);
        ASSERT_FALSE(score.is_fermata(st.target_bar));
      }
    }
  }
}

TEST(Controller, RejectsNonIncreasingSteps) {
  const Score score = Score::demo();
  Controller c(score, ControllerConfig{});
  c.step(0.0, 5, {});
  EXPECT_THROW(c.step(0.0, 5, {}), Error);
  c.reset();
  EXPECT_NO_THROW(c.step(0.0, 0, {}));
}

TEST(ControllerConfig, Validation) {
  ControllerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.phase_low = 4.0;
  EXPECT_THROW(c.validate(), Error);
  c = ControllerConfig{};
  c.weights[0] = 0.9;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_strategy("average"), SpeedStrategy::average);
  EXPECT_THROW(parse_strategy("mode"), Error);
}
