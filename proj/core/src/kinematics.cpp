#include "ictus/kinematics.hpp"

#include <cmath>
#include <set>

#include "ictus/error.hpp"

namespace ictus {

namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw Error(Errc::invalid_frame, std::string(what) + ": non-finite coordinate");
}

void check_shape(const PoseFrame& frame, const KeypointSet& set) {
  if (static_cast<std::size_t>(frame.pos.size()) != set.coord_count()) {
    throw Error(Errc::shape, "pose frame has " + std::to_string(frame.pos.size()) + " coordinates, keypoint set expects " +
                                 std::to_string(set.coord_count()));
  }
}

// Shared by the batch and streaming paths so both produce identical bits.
KinematicFrame difference(const Eigen::VectorXd& p, const Eigen::VectorXd& p1, const Eigen::VectorXd& p2) {
  KinematicFrame k;
  k.pos = p;
  k.vel = p - p1;
  k.acc = (p - 2.0 * p1) + p2;
  return k;
}

}  // namespace

KeypointSet KeypointSet::upper_body_2d() {
  return KeypointSet{{"r_shoulder", "l_shoulder", "r_elbow", "l_elbow", "r_wrist", "l_wrist", "r_hand", "l_hand",
                      "hip_center"},
                     2};
}

std::optional<std::size_t> KeypointSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<std::pair<std::size_t, std::size_t>> KeypointSet::lr_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].rfind("r_", 0) != 0) continue;
    if (auto j = index_of("l_" + names[i].substr(2))) pairs.emplace_back(i, *j);
  }
  return pairs;
}

void KeypointSet::validate() const {
  if (names.empty()) throw Error(Errc::config, "keypoint set is empty");
  if (dims != 2 && dims != 3) throw Error(Errc::config, "keypoint dims must be 2 or 3");
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw Error(Errc::config, "keypoint names are not unique");
}

Eigen::VectorXd KinematicFrame::features() const {
  Eigen::VectorXd f(pos.size() + vel.size() + acc.size());
  f << pos, vel, acc;
  return f;
}

Eigen::VectorXd hip_reference(const PoseFrame& frame, const KeypointSet& set) {
  check_shape(frame, set);
  const int d = set.dims;
  const auto r = set.index_of("r_hip");
  const auto l = set.index_of("l_hip");
  if (r && l) {
    return 0.5 * (frame.pos.segment(static_cast<Eigen::Index>(*r) * d, d) +
                  frame.pos.segment(static_cast<Eigen::Index>(*l) * d, d));
  }
  if (const auto c = set.index_of("hip_center")) return frame.pos.segment(static_cast<Eigen::Index>(*c) * d, d);
  throw Error(Errc::config, "keypoint set has neither r_hip/l_hip nor hip_center");
}

double height_proxy(const PoseFrame& frame, const KeypointSet& set) {
  const auto rs = set.index_of("r_shoulder");
  const auto ls = set.index_of("l_shoulder");
  if (!rs || !ls) throw Error(Errc::config, "height proxy needs r_shoulder and l_shoulder");
  check_finite(frame.pos, "height_proxy");
  const int d = set.dims;
  const Eigen::VectorXd mid = 0.5 * (frame.pos.segment(static_cast<Eigen::Index>(*rs) * d, d) +
                                     frame.pos.segment(static_cast<Eigen::Index>(*ls) * d, d));
  return (mid - hip_reference(frame, set)).norm();
}

PoseFrame normalize_pose(const PoseFrame& raw, const KeypointSet& set, double height_scale) {
  if (!(height_scale > 0.0) || !std::isfinite(height_scale)) {
    throw Error(Errc::config, "height_scale must be positive and finite");
  }
  check_shape(raw, set);
  check_finite(raw.pos, "normalize_pose");
  const Eigen::VectorXd hip = hip_reference(raw, set);
  PoseFrame out{raw.t, Eigen::VectorXd(raw.pos.size())};
  const int d = set.dims;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto off = static_cast<Eigen::Index>(k) * d;
    out.pos.segment(off, d) = (raw.pos.segment(off, d) - hip) / height_scale;
  }
  return out;
}

std::vector<KinematicFrame> derive_kinematics(std::span<const Eigen::VectorXd> positions) {
  std::vector<KinematicFrame> out;
  out.reserve(positions.size());
  KinematicStream stream;
  for (const auto& p : positions) out.push_back(stream.push(p));
  return out;
}

std::vector<KinematicFrame> derive_kinematics(std::span<const PoseFrame> frames) {
  std::vector<KinematicFrame> out;
  out.reserve(frames.size());
  KinematicStream stream;
  for (const auto& f : frames) out.push_back(stream.push(f.pos));
  return out;
}

namespace {

void mirror_coords(Eigen::VectorXd& v, const KeypointSet& set, int axis, const Eigen::VectorXd* centre) {
  const int d = set.dims;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k) * d + axis;
    v[i] = centre ? 2.0 * (*centre)[axis] - v[i] : -v[i];
  }
  for (const auto& [r, l] : set.lr_pairs()) {
    const auto ro = static_cast<Eigen::Index>(r) * d;
    const auto lo = static_cast<Eigen::Index>(l) * d;
    Eigen::VectorXd tmp = v.segment(ro, d);
    v.segment(ro, d) = v.segment(lo, d);
    v.segment(lo, d) = tmp;
  }
}

void check_mirrorable(const KeypointSet& set, int axis) {
  if (set.lr_pairs().empty()) throw Error(Errc::config, "keypoint set defines no left/right pairing");
  if (axis < 0 || axis >= set.dims) throw Error(Errc::config, "mirror axis out of range");
}

}  // namespace

PoseFrame mirror_lr(const PoseFrame& frame, const KeypointSet& set, int axis) {
  check_mirrorable(set, axis);
  check_shape(frame, set);
  const Eigen::VectorXd hip = hip_reference(frame, set);
  PoseFrame out = frame;
  mirror_coords(out.pos, set, axis, &hip);
  return out;
}

KinematicFrame mirror_lr(const KinematicFrame& frame, const KeypointSet& set, int axis) {
  check_mirrorable(set, axis);
  KinematicFrame out = frame;
  mirror_coords(out.pos, set, axis, nullptr);
  mirror_coords(out.vel, set, axis, nullptr);
  mirror_coords(out.acc, set, axis, nullptr);
  return out;
}

int resample_stride(int from_hz, int to_hz) {
  if (from_hz <= 0 || to_hz <= 0 || to_hz > from_hz || from_hz % to_hz != 0) {
    throw Error(Errc::unsupported_rate,
                "cannot resample " + std::to_string(from_hz) + " Hz to " + std::to_string(to_hz) + " Hz");
  }
  return from_hz / to_hz;
}

std::vector<KinematicFrame> resample(std::span<const KinematicFrame> frames, int from_hz, int to_hz) {
  const int stride = resample_stride(from_hz, to_hz);
  if (stride == 1) return {frames.begin(), frames.end()};
  std::vector<Eigen::VectorXd> kept;
  for (std::size_t i = 0; i < frames.size(); i += static_cast<std::size_t>(stride)) kept.push_back(frames[i].pos);
  return derive_kinematics(std::span<const Eigen::VectorXd>(kept));
}

KinematicFrame KinematicStream::push(const Eigen::VectorXd& pos) {
  if (count_ == 0) {
    prev1_ = pos;
    prev2_ = pos;
  }
  KinematicFrame k = difference(pos, prev1_, prev2_);
  prev2_ = std::move(prev1_);
  prev1_ = pos;
  ++count_;
  return k;
}

void KinematicStream::reset() {
  prev1_.resize(0);
  prev2_.resize(0);
  count_ = 0;
}

}  // namespace ictus
