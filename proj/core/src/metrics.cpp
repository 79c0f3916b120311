#include "ictus/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ictus/error.hpp"
#include "ictus/labels.hpp"
#include "ictus/phase.hpp"

namespace ictus {

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw Error(Errc::undefined_metric, "no values to average");
  MeanStd out;
  out.n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(out.n);
  double sq = 0.0;
  for (double v : values) sq += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(sq / static_cast<double>(out.n));
  return out;
}

double mspe(std::span<const double> gt, std::span<const double> est, bool wrapped) {
  if (gt.size() != est.size()) throw Error(Errc::length_mismatch, "ground truth and estimate lengths differ");
  if (gt.empty()) throw Error(Errc::undefined_metric, "empty phase sequence");
  double sum = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = wrapped ? phase_diff(gt[i], est[i]) : gt[i] - est[i];
    sum += d * d;
  }
  return sum / static_cast<double>(gt.size());
}

double mspe(std::span<const PhaseSample> gt, std::span<const double> est, bool wrapped) {
  std::vector<double> g;
  g.reserve(gt.size());
  for (const auto& s : gt) g.push_back(s.phase);
  return mspe(g, est, wrapped);
}

double mspe(std::span<const PhaseSample> gt, std::span<const double> est, const std::vector<bool>& mask, bool wrapped) {
  if (gt.size() != est.size() || mask.size() != gt.size()) throw Error(Errc::length_mismatch, "mask length differs");
  std::vector<double> g, e;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask[i]) continue;
    g.push_back(gt[i].phase);
    e.push_back(est[i]);
  }
  return mspe(g, e, wrapped);
}

std::vector<bool> regular_bar_mask(std::span<const PhaseSample> labels, const Score& score) {
  std::vector<bool> m(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = !score.has_wait(labels[i].bar);
  return m;
}

std::vector<bool> fermata_bar_mask(std::span<const PhaseSample> labels, const Score& score) {
  std::vector<bool> m(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = score.is_fermata(labels[i].bar);
  return m;
}

MeanStd beat_bar_distance(std::span<const double> beats, std::span<const double> bar_starts) {
  if (beats.empty() || bar_starts.empty()) throw Error(Errc::undefined_metric, "need at least one beat and one bar start");
  std::vector<double> d;
  d.reserve(beats.size());
  for (double b : beats) {
    double best = std::numeric_limits<double>::infinity();
    for (double s : bar_starts) best = std::min(best, std::abs(b - s));
    d.push_back(best);
  }
  return mean_std(d);
}

MeanStd beat_bar_distance(const SessionLog& log) {
  std::vector<double> starts;
  for (const auto& s : log.bar_starts) starts.push_back(s.wall);
  return beat_bar_distance(log.beat_walls, starts);
}

double mean_conducted_bar(const SessionLog& log, const Score& score) {
  std::vector<double> lengths;
  for (std::size_t i = 1; i < log.bar_starts.size(); ++i) {
    const auto& a = log.bar_starts[i - 1];
    const auto& b = log.bar_starts[i];
    if (b.bar == a.bar + 1 && !score.has_wait(a.bar)) lengths.push_back(b.wall - a.wall);
  }
  if (lengths.empty()) throw Error(Errc::undefined_metric, "no complete regular bar was played");
  return mean_std(lengths).mean;
}

double pct_of_bar(double mean_distance, double mean_bar_length) {
  if (!(mean_bar_length > 0.0)) throw Error(Errc::undefined_metric, "mean bar length must be positive");
  return 100.0 * mean_distance / mean_bar_length;
}

double pct_of_bar(const SessionLog& log, const Score& score) {
  return pct_of_bar(beat_bar_distance(log).mean, mean_conducted_bar(log, score));
}

double speed_stability(std::span<const double> speeds) { return mean_std(speeds).std; }

double speed_stability(const SessionLog& log, const Score& score, std::optional<int> after_bar) {
  const int from = after_bar.value_or(score.last_fermata());
  std::vector<double> s;
  for (const auto& r : log.steps) {
    if (r.bar > from && r.s > 0.0) s.push_back(r.s);
  }
  if (s.empty()) throw Error(Errc::undefined_metric, "no speed values after bar " + std::to_string(from));
  return speed_stability(s);
}

std::vector<double> arm_accel(std::span<const KinematicFrame> frames, const KeypointSet& set) {
  const auto r = set.index_of("r_wrist");
  const auto l = set.index_of("l_wrist");
  if (!r || !l) throw Error(Errc::config, "keypoint set has no wrists");
  const auto dims = static_cast<Eigen::Index>(set.dims);
  std::vector<double> out;
  out.reserve(frames.size());
  for (const auto& f : frames) {
    out.push_back(f.acc.segment(static_cast<Eigen::Index>(*r) * dims, dims).norm() +
                  f.acc.segment(static_cast<Eigen::Index>(*l) * dims, dims).norm());
  }
  return out;
}

Score score_for_take(const Score& score, const Take& take) {
  const auto bars = static_cast<int>(take.bar_starts.size());
  if (bars <= 0 || bars > score.bar_count()) throw Error(Errc::config, "take does not fit the score");
  return bars == score.bar_count() ? score : score.truncated(bars);
}

std::vector<int> upbeat_delays(const Take& take, const Score& score, std::span<const double> est,
                               const ControllerConfig& cfg) {
  if (est.size() != take.frames.size()) throw Error(Errc::length_mismatch, "estimate length differs from take");
  const Score piece = score_for_take(score, take);
  const LabelTimeline timeline(piece, take.bar_starts, take.end_time);
  const double hz = take.rate.hz;
  std::vector<int> delays;
  for (int f : piece.fermata_bars()) {
    const auto plan = timeline.wait_plan(f);
    if (!plan) continue;
    const auto start = static_cast<long>(std::ceil(plan->upbeat_start * hz - 1e-9));
    const auto span = std::max(1L, static_cast<long>(std::ceil((plan->bar_end - plan->upbeat_start) * hz - 1e-9)));
    if (start < 1 || start >= static_cast<long>(est.size())) continue;
    int delay = static_cast<int>(span);
    for (long k = start; k < std::min<long>(start + span, static_cast<long>(est.size())); ++k) {
      if (detect_upbeat(est[static_cast<std::size_t>(k - 1)], est[static_cast<std::size_t>(k)], cfg)) {
        delay = static_cast<int>(k - start);
        break;
      }
    }
    delays.push_back(delay);
  }
  return delays;
}

}  // namespace ictus
