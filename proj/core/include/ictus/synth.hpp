#pragma once

// Deterministic synthetic conducting takes.
//
// The dominant wrist traces a loop per bar: it rises from the ictus to a peak
// at phase 3*pi/2, then falls back into the next ictus. The fall meets the
// rise at a kink, which is the sharp acceleration peak marking each beat.
// In waiting bars the wrist rests at the peak during the hold, flicks
// upward at the start of the silent upbeat, and falls into the resume
// downbeat during the last quarter of the upbeat.

#include <cstdint>
#include <string>
#include <vector>

#include "ictus/kinematics.hpp"
#include "ictus/score.hpp"

namespace ictus {

enum class Hand { right, left };

struct ConductorStyle {
  double amplitude = 0.3;         // vertical half-range of the dominant wrist
  Hand hand = Hand::right;
  double smoothness = 0.5;        // AR(1) correlation of sensor noise, in [0, 1]
  double noise_std = 0.004;       // per-coordinate noise, normalized units
  double upbeat_sharpness = 1.5;  // height of the upbeat flick relative to amplitude / 4
  std::uint64_t seed = 1;

  double tempo_jitter = 0.03;     // log-normal sigma of per-bar duration noise
  double beat_slip_prob = 0.0;    // chance that a single ictus lands early or late
  double beat_slip = 0.25;        // size of a slip, fraction of the bar
  double loop_width = 0.6;        // horizontal loop radius relative to amplitude
  double off_hand_ratio = 0.4;    // non-dominant hand amplitude relative to dominant
  double centre_x = 0.3;
  double centre_y = 0.6;

  /// A plausible random subject.
  static ConductorStyle sample(std::uint64_t seed);
};

struct Take {
  std::string subject_id;
  double tempo_factor = 1.0;
  Timebase rate;
  KeypointSet keypoints = KeypointSet::upper_body_2d();
  bool mirrored = false;
  std::vector<KinematicFrame> frames;
  std::vector<PhaseSample> labels;
  std::vector<double> beat_times;  // downbeat instants, seconds from take start
  std::vector<double> bar_starts;  // conducted start of every bar
  double end_time = 0.0;

  bool operator==(const Take&) const = default;
};

/// Generates one take. Deterministic given (score, style, tempo_factor, rate).
Take generate_take(const Score& score, const ConductorStyle& style, double tempo_factor, Timebase rate,
                   std::string subject_id = "S");

/// Decimated copy of a take at `to_hz` (labels decimated, derivatives recomputed).
Take resample_take(const Take& take, int to_hz);

/// Mirrors every frame left-to-right and toggles `mirrored`.
Take mirror_take(const Take& take);

/// One entry of a corpus recording plan.
struct CorpusEntry {
  int subject = 1;  // 1-based
  double tempo_factor = 1.0;
  int bars = 0;     // 0 = whole score
};

/// 12 subjects, 130 takes: per-subject counts at tempo 1.0 / 0.8 / 1.2 plus
/// subject 1's extra takes (0.6, 1.3, three first-25-bar takes).
std::vector<CorpusEntry> recording_plan();

/// Subjects 3, 6, 9 and 12 conduct left-handed.
bool is_left_handed(int subject);

struct CorpusOptions {
  std::uint64_t seed = 2024;
  Timebase rate{20};
  /// Mirror left-handed takes so every take has a right dominant hand.
  bool mirror_left_handed = true;
};

/// Generates the takes of `plan`. Take seeds are derived from (seed, subject,
/// take index) so any subset reproduces the same takes.
std::vector<Take> generate_corpus(const Score& score, const std::vector<CorpusEntry>& plan,
                                  const CorpusOptions& options);

std::string subject_name(int subject);

}  // namespace ictus
