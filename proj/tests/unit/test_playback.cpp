#include <gtest/gtest.h>

#include "ictus/error.hpp"
#include "ictus/playback.hpp"
#include "ictus/rng.hpp"

using namespace ictus;

namespace {

// Starts playing bar 1 at the given stretch.
Playback started(const Score& score, double s) {
  Playback p(score);
  p.command(s, true);
  return p;
}

}  // namespace

TEST(Playback, StartsHaltedAtZero) {
  const Score score = Score::demo();
  Playback p(score);
  EXPECT_TRUE(p.state().halted);
  p.advance(0.05);
  EXPECT_EQ(p.state().playhead, 0.0);
  EXPECT_EQ(p.state().wall, 0.05);
  EXPECT_EQ(p.first_played_bar(), -1);
}

TEST(Playback, RateIsInverseStretch) {
  const Score score = Score::demo();
  Playback a = started(score, 1.0);
  EXPECT_EQ(a.state().playhead, score.bar_start(1));
  a.advance(0.05);
  EXPECT_NEAR(a.state().playhead, score.bar_start(1) + 0.05, 1e-15);
  Playback b = started(score, 2.0);
  b.advance(0.05);
  EXPECT_NEAR(b.state().playhead, score.bar_start(1) + 0.025, 1e-15);
}

TEST(Playback, HaltsExactlyAtFermataEnd) {
  const Score score = Score::demo();
  Playback p = started(score, 1.0);
  for (int i = 0; i < 200; ++i) p.advance(0.05);
  EXPECT_TRUE(p.state().halted);
  EXPECT_EQ(p.state().bar, 2);
  EXPECT_EQ(p.state().playhead, score.bar_start(3));
  const double wall = p.state().wall;
  p.advance(0.05);
  EXPECT_EQ(p.state().playhead, score.bar_start(3));
  EXPECT_GT(p.state().wall, wall);
}

TEST(Playback, ResumeJumpsToNextBarStart) {
  const Score score = Score::demo();
  Playback p = started(score, 1.0);
  for (int i = 0; i < 200; ++i) p.advance(0.05);
  ASSERT_TRUE(p.state().halted);
  EXPECT_TRUE(p.command(0.9, true).empty());
  EXPECT_EQ(p.state().playhead, score.bar_start(3));
  EXPECT_EQ(p.state().bar, 3);
  EXPECT_EQ(p.state().stretch, 0.9);
  EXPECT_FALSE(p.state().halted);
  EXPECT_TRUE(p.bar_starts().back().jump);
}

TEST(Playback, CommandInsideWaitingBarJumpsImmediately) {
  const Score score = Score::demo();
  Playback p = started(score, 1.0);
  while (p.state().bar < 2) p.advance(0.05);
  p.advance(0.05);
  ASSERT_FALSE(p.state().halted);
  ASSERT_LT(p.state().playhead, score.bar_start(3));
  p.command(1.1, false);
  EXPECT_EQ(p.state().playhead, score.bar_start(3));
  EXPECT_EQ(p.state().bar, 3);
}

TEST(Playback, ResumeInRegularBarOnlyChangesSpeed) {
  const Score score = Score::demo();
  Playback p = started(score, 1.0);
  p.advance(0.05);
  const double head = p.state().playhead;
  EXPECT_FALSE(p.command(1.3, true).empty());
  EXPECT_EQ(p.state().playhead, head);
  EXPECT_EQ(p.state().stretch, 1.3);
  EXPECT_THROW(p.command(0.0, false), Error);
}

TEST(Playback, BoundariesFollowCumulativeSums) {
  const Score score = Score::demo();
  Playback p = started(score, 1.0);
  // resume past the fermatas, then play through at a fixed stretch
  for (int i = 0; i < 5000 && !p.state().finished; ++i) {
    if (p.state().halted) p.command(0.8, true);
    p.advance(0.05);
  }
  EXPECT_TRUE(p.state().finished);
  EXPECT_EQ(p.state().playhead, score.total_duration());
  const auto& starts = p.bar_starts();
  ASSERT_EQ(static_cast<int>(starts.size()), score.bar_count() - 1);
  for (std::size_t i = 0; i < starts.size(); ++i) EXPECT_EQ(starts[i].bar, static_cast<int>(i) + 1);
}

TEST(Playback, PlayheadIsPiecewiseLinearInWallTime) {
  const Score score = Score::demo();
  Playback p = started(score, 1.0);
  Rng rng(4);
  double s = 1.0;
  for (int i = 0; i < 3000 && !p.state().finished; ++i) {
    if (rng.uniform() < 0.05 || p.state().halted) {
      s = rng.uniform(0.5, 2.0);
      const int bar = p.state().bar;
      const bool waiting = score.has_wait(bar);
      p.command(s, p.state().halted);
      if (waiting) {
        EXPECT_EQ(p.state().playhead, score.bar_start(bar + 1));
        continue;
      }
    }
    const double before = p.state().playhead;
    const bool in_wait = score.has_wait(p.state().bar);
    p.advance(0.05);
    const double moved = p.state().playhead - before;
    if (!p.state().halted && !p.state().finished) {
      ASSERT_NEAR(moved, 0.05 / s, 1e-12);
    } else if (in_wait || p.state().halted) {
      ASSERT_LE(moved, 0.05 / s + 1e-12);
    }
  }
}

TEST(Playback, CrossingWallIsInterpolated) {
  const Score score({1.4, 0.7, 0.7}, {});
  Playback p(score);
  p.command(2.0, true);  // bar 1 at half speed, crossing after 1.4 s of wall time
  for (int i = 0; i < 30; ++i) p.advance(0.05);
  ASSERT_GE(p.bar_starts().size(), 2u);
  EXPECT_EQ(p.bar_starts()[1].bar, 2);
  EXPECT_NEAR(p.bar_starts()[1].wall, 1.4, 1e-12);
}
