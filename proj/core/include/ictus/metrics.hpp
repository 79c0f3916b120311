#pragma once

// Evaluation metrics. All standard deviations are population (divide by N).

#include <optional>
#include <span>
#include <vector>

#include "ictus/controller.hpp"
#include "ictus/kinematics.hpp"
#include "ictus/score.hpp"
#include "ictus/session.hpp"
#include "ictus/synth.hpp"

namespace ictus {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

/// Throws Errc::undefined_metric when empty.
MeanStd mean_std(std::span<const double> values);

/// Mean squared phase error. Unwrapped uses raw differences; wrapped uses
/// the shortest signed angle. Throws Errc::length_mismatch / undefined_metric.
double mspe(std::span<const double> gt, std::span<const double> est, bool wrapped = false);
double mspe(std::span<const PhaseSample> gt, std::span<const double> est, bool wrapped = false);
/// MSPE restricted to steps where mask is true.
double mspe(std::span<const PhaseSample> gt, std::span<const double> est, const std::vector<bool>& mask,
            bool wrapped = false);

/// Steps in bars without a wait (regular bars) / steps in fermata bars.
std::vector<bool> regular_bar_mask(std::span<const PhaseSample> labels, const Score& score);
std::vector<bool> fermata_bar_mask(std::span<const PhaseSample> labels, const Score& score);

/// Distance from every beat to the nearest bar start, seconds.
MeanStd beat_bar_distance(std::span<const double> beats, std::span<const double> bar_starts);
MeanStd beat_bar_distance(const SessionLog& log);

/// Mean wall duration of played regular bars. Throws Errc::undefined_metric.
double mean_conducted_bar(const SessionLog& log, const Score& score);

double pct_of_bar(double mean_distance, double mean_bar_length);
double pct_of_bar(const SessionLog& log, const Score& score);

/// Std of the controller speed over steps in bars after `after_bar`
/// (default: the last fermata bar) where the speed is non-zero.
double speed_stability(const SessionLog& log, const Score& score, std::optional<int> after_bar = std::nullopt);
double speed_stability(std::span<const double> speeds);

/// Per-frame sum of the two wrist acceleration norms.
std::vector<double> arm_accel(std::span<const KinematicFrame> frames, const KeypointSet& set);

/// Steps from the start of each fermata upbeat to the first step whose
/// single-step phase rise exceeds the controller's upbeat threshold. A
/// resume that is not detected before the resume downbeat counts as the
/// full upbeat length.
std::vector<int> upbeat_delays(const Take& take, const Score& score, std::span<const double> est,
                               const ControllerConfig& cfg);

/// Score restricted to the bars a take covers.
Score score_for_take(const Score& score, const Take& take);

}  // namespace ictus
