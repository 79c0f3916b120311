#include "ictus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ictus/error.hpp"
#include "ictus/labels.hpp"
#include "ictus/rng.hpp"

namespace ictus {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFlickPeak = 0.12;  // seconds from upbeat start to flick apex

// Vertical profile of the loop, 0 at the ictus and 1 at the peak (3*pi/2).
// The rise has slope 1/3 per radian at the ictus and the fall arrives with
// slope -1, giving the kink that marks the beat.
double loop_height(double phi) {
  if (phi <= kHoldPhase) return std::sin(0.5 * kPi * phi / kHoldPhase);
  return std::sin(0.5 * kPi * (kTwoPi - phi) / (kTwoPi - kHoldPhase));
}

struct Segment {
  int bar = 0;
  double label = 0.0;   // ground-truth phase
  double motion = 0.0;  // phase driving the wrist path
  double flick = 0.0;   // upbeat flick envelope in [0, 1]
  bool still = false;
};

struct BarPlan {
  double start = 0.0;
  double length = 0.0;
  bool wait = false;
  double ramp = 0.0;
  double hold = 0.0;
  double upbeat = 0.0;
};

Segment segment_at(const std::vector<BarPlan>& plan, double t) {
  // Bars are few; linear search from a binary-search start keeps this simple.
  auto it = std::upper_bound(plan.begin(), plan.end(), t, [](double v, const BarPlan& p) { return v < p.start; });
  const int bar = std::max(0, static_cast<int>(it - plan.begin()) - 1);
  const BarPlan& p = plan[static_cast<std::size_t>(bar)];
  const double u = t - p.start;
  Segment s;
  s.bar = bar;
  if (!p.wait) {
    s.label = std::min(kTwoPi * u / p.length, 6.283185307179585);
    s.motion = s.label;
    return s;
  }
  s.label = wait_bar_phase(u, p.ramp, p.hold, p.upbeat);
  if (u < p.ramp) {
    s.motion = s.label;
  } else if (u < p.ramp + p.hold) {
    s.motion = kHoldPhase;
    s.still = true;
  } else {
    const double since = u - p.ramp - p.hold;
    const double tau = since / p.upbeat;
    s.motion = kHoldPhase + (kTwoPi - kHoldPhase) * std::clamp((tau - 0.75) / 0.25, 0.0, 1.0);
    s.flick = (since / kFlickPeak) * std::exp(1.0 - since / kFlickPeak);
  }
  return s;
}

// Raw (un-normalized) 2D pose for one instant, right-handed, y up.
Eigen::VectorXd body_pose(const ConductorStyle& st, const Segment& seg) {
  const double a = st.amplitude;
  const double w = st.loop_width * a;
  const double phi = seg.motion;
  const double h = loop_height(phi);
  const double lift = 0.25 * st.upbeat_sharpness * a * seg.flick;

  const Eigen::Vector2d r_wrist(st.centre_x + w * std::sin(phi), st.centre_y + a * (2.0 * h - 1.0) + lift);
  const double ra = st.off_hand_ratio;
  const Eigen::Vector2d l_wrist(-(st.centre_x + ra * w * std::sin(phi)), st.centre_y + ra * a * (2.0 * h - 1.0) + ra * lift);

  const double sway = 0.03 * (h - 0.5);
  const Eigen::Vector2d r_shoulder(0.2, 1.0 + sway);
  const Eigen::Vector2d l_shoulder(-0.2, 1.0 + 0.3 * sway);
  const Eigen::Vector2d r_elbow = r_shoulder + 0.5 * (r_wrist - r_shoulder) + Eigen::Vector2d(0.08, -0.12);
  const Eigen::Vector2d l_elbow = l_shoulder + 0.5 * (l_wrist - l_shoulder) + Eigen::Vector2d(-0.08, -0.12);
  const Eigen::Vector2d r_hand = r_wrist + 0.07 * (r_wrist - r_elbow).normalized();
  const Eigen::Vector2d l_hand = l_wrist + 0.07 * (l_wrist - l_elbow).normalized();

  Eigen::VectorXd pos(18);
  pos << r_shoulder, l_shoulder, r_elbow, l_elbow, r_wrist, l_wrist, r_hand, l_hand, 0.0, 0.0;
  return pos;
}

std::vector<BarPlan> plan_bars(const Score& score, const ConductorStyle& style, double tempo_factor, Rng& rng) {
  const int n = score.bar_count();
  std::vector<double> dur(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    const double jitter = style.tempo_jitter > 0.0 ? std::exp(style.tempo_jitter * rng.normal()) : 1.0;
    dur[static_cast<std::size_t>(b)] = score.duration(b) / tempo_factor * (b == 0 ? 1.0 : jitter);
  }
  if (style.beat_slip_prob > 0.0) {
    for (int b = 2; b < n; ++b) {
      const bool draw = rng.uniform() < style.beat_slip_prob;
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      if (!draw || score.has_wait(b) || score.has_wait(b - 1)) continue;
      const auto i = static_cast<std::size_t>(b);
      const double delta = sign * style.beat_slip * std::min(dur[i - 1], dur[i]);
      dur[i - 1] += delta;
      dur[i] -= delta;
    }
  }
  std::vector<BarPlan> plan(static_cast<std::size_t>(n));
  double t = 0.0;
  for (int b = 0; b < n; ++b) {
    auto& p = plan[static_cast<std::size_t>(b)];
    p.start = t;
    p.length = dur[static_cast<std::size_t>(b)];
    t += p.length;
  }
  for (int b = 0; b < n; ++b) {
    auto& p = plan[static_cast<std::size_t>(b)];
    if (!score.has_wait(b)) continue;
    p.wait = true;
    const double prev = b > 0 ? plan[static_cast<std::size_t>(b) - 1].length : 0.0;
    p.ramp = 0.75 * prev;
    p.upbeat = b + 1 < n ? plan[static_cast<std::size_t>(b) + 1].length : prev;
    if (p.upbeat <= 0.0) p.upbeat = p.length;
    if (p.ramp + p.upbeat > p.length) {
      const double scale = p.length / (p.ramp + p.upbeat);
      p.ramp *= scale;
      p.upbeat *= scale;
    }
    p.hold = std::max(0.0, p.length - p.ramp - p.upbeat);
  }
  return plan;
}

}  // namespace

ConductorStyle ConductorStyle::sample(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5717e));
  ConductorStyle s;
  s.seed = seed;
  s.amplitude = rng.uniform(0.22, 0.38);
  s.smoothness = rng.uniform(0.2, 0.8);
  s.noise_std = rng.uniform(0.002, 0.008);
  s.upbeat_sharpness = rng.uniform(1.0, 2.0);
  s.loop_width = rng.uniform(0.35, 0.8);
  s.off_hand_ratio = rng.uniform(0.2, 0.7);
  s.centre_x = rng.uniform(0.2, 0.4);
  s.centre_y = rng.uniform(0.5, 0.7);
  return s;
}

Take generate_take(const Score& score, const ConductorStyle& style, double tempo_factor, Timebase rate,
                   std::string subject_id) {
  if (!(tempo_factor > 0.0)) throw Error(Errc::config, "tempo_factor must be positive");
  if (rate.hz <= 0) throw Error(Errc::config, "frame rate must be positive");
  Rng rng(style.seed);
  const auto plan = plan_bars(score, style, tempo_factor, rng);
  const double end = plan.back().start + plan.back().length;

  Take take;
  take.subject_id = std::move(subject_id);
  take.tempo_factor = tempo_factor;
  take.rate = rate;
  take.end_time = end;
  for (const auto& p : plan) take.bar_starts.push_back(p.start);
  take.beat_times.assign(take.bar_starts.begin() + 1, take.bar_starts.end());

  // Camera placement: arbitrary origin and pixel scale, undone by normalization.
  const Eigen::Vector2d origin(rng.uniform(200.0, 440.0), rng.uniform(150.0, 330.0));
  const double pixels = rng.uniform(180.0, 320.0);
  const KeypointSet& set = take.keypoints;
  const double ar = std::clamp(style.smoothness, 0.0, 1.0) * 0.9;
  const double innovation = std::sqrt(1.0 - ar * ar) * style.noise_std;

  const auto frames = static_cast<std::size_t>(std::ceil(end * rate.hz));
  Eigen::VectorXd noise = Eigen::VectorXd::Zero(18);
  std::vector<PoseFrame> raw;
  raw.reserve(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const double t = static_cast<double>(i) / rate.hz;
    if (t >= end) break;
    const Segment seg = segment_at(plan, t);
    take.labels.push_back({seg.bar, seg.label});
    Eigen::VectorXd pose = body_pose(style, seg);
    for (Eigen::Index c = 0; c < 16; ++c) noise[c] = ar * noise[c] + innovation * rng.normal();
    pose += noise;
    PoseFrame f{static_cast<std::int64_t>(i), Eigen::VectorXd(18)};
    for (Eigen::Index k = 0; k < 9; ++k) f.pos.segment(2 * k, 2) = origin + pixels * pose.segment(2 * k, 2);
    if (style.hand == Hand::left) f = mirror_lr(f, set);
    raw.push_back(std::move(f));
  }
  const double height = height_proxy(raw.front(), set);
  std::vector<PoseFrame> normalized;
  normalized.reserve(raw.size());
  for (const auto& f : raw) normalized.push_back(normalize_pose(f, set, height));
  take.frames = derive_kinematics(std::span<const PoseFrame>(normalized));
  return take;
}

Take resample_take(const Take& take, int to_hz) {
  const int stride = resample_stride(take.rate.hz, to_hz);
  Take out = take;
  out.rate = Timebase{to_hz};
  out.frames = resample(take.frames, take.rate.hz, to_hz);
  out.labels.clear();
  for (std::size_t i = 0; i < take.labels.size(); i += static_cast<std::size_t>(stride)) out.labels.push_back(take.labels[i]);
  return out;
}

Take mirror_take(const Take& take) {
  Take out = take;
  for (auto& f : out.frames) f = mirror_lr(f, take.keypoints);
  out.mirrored = !take.mirrored;
  return out;
}

std::vector<CorpusEntry> recording_plan() {
  // subject: takes at 1.0, 0.8, 1.2
  constexpr int counts[12][3] = {{8, 2, 2}, {7, 2, 2}, {9, 2, 2}, {6, 2, 2}, {7, 0, 0}, {6, 2, 2},
                                 {8, 2, 2}, {6, 2, 2}, {7, 2, 3}, {7, 0, 0}, {6, 2, 2}, {7, 2, 2}};
  std::vector<CorpusEntry> plan;
  for (int s = 0; s < 12; ++s) {
    const int subject = s + 1;
    for (int i = 0; i < counts[s][0]; ++i) plan.push_back({subject, 1.0, 0});
    for (int i = 0; i < counts[s][1]; ++i) plan.push_back({subject, 0.8, 0});
    for (int i = 0; i < counts[s][2]; ++i) plan.push_back({subject, 1.2, 0});
    if (subject == 1) {
      plan.push_back({1, 0.6, 0});
      plan.push_back({1, 1.3, 0});
      for (int i = 0; i < 3; ++i) plan.push_back({1, 1.0, 25});
    }
  }
  return plan;
}

bool is_left_handed(int subject) { return subject % 3 == 0; }

std::string subject_name(int subject) {
  return (subject < 10 ? "S0" : "S") + std::to_string(subject);
}

std::vector<Take> generate_corpus(const Score& score, const std::vector<CorpusEntry>& plan,
                                  const CorpusOptions& options) {
  std::vector<Take> takes;
  takes.reserve(plan.size());
  std::vector<int> per_subject(64, 0);
  for (const auto& entry : plan) {
    if (entry.subject < 1 || entry.subject >= static_cast<int>(per_subject.size())) {
      throw Error(Errc::config, "subject index out of range");
    }
    const int index = per_subject[static_cast<std::size_t>(entry.subject)]++;
    ConductorStyle style = ConductorStyle::sample(mix_seed(options.seed, static_cast<std::uint64_t>(entry.subject)));
    style.hand = is_left_handed(entry.subject) ? Hand::left : Hand::right;
    style.seed = mix_seed(style.seed, 1000 + static_cast<std::uint64_t>(index));
    const Score piece = entry.bars > 0 ? score.truncated(entry.bars) : score;
    Take take = generate_take(piece, style, entry.tempo_factor, options.rate, subject_name(entry.subject));
    if (options.mirror_left_handed && style.hand == Hand::left) take = mirror_take(take);
    takes.push_back(std::move(take));
  }
  return takes;
}

}  // namespace ictus
