#pragma once

// Keypoint frames, normalization and the (pos, vel, acc) feature stream.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace ictus {

/// Ordered keypoint identifiers. Left/right pairs are inferred from the
/// "r_" / "l_" name prefixes.
struct KeypointSet {
  std::vector<std::string> names;
  int dims = 2;

  /// r/l shoulder, elbow, wrist, hand and the hip centre, in 2D.
  static KeypointSet upper_body_2d();

  std::size_t size() const { return names.size(); }
  std::size_t coord_count() const { return names.size() * static_cast<std::size_t>(dims); }
  /// Length of a flattened (pos, vel, acc) feature vector.
  std::size_t feature_dim() const { return 3 * coord_count(); }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::vector<std::pair<std::size_t, std::size_t>> lr_pairs() const;

  /// Throws Errc::config if names repeat, the set is empty or dims is not 2 or 3.
  void validate() const;

  bool operator==(const KeypointSet&) const = default;
};

/// One frame of keypoint coordinates, keypoint-major: pos[k * dims + d].
struct PoseFrame {
  std::int64_t t = 0;
  Eigen::VectorXd pos;
};

struct KinematicFrame {
  Eigen::VectorXd pos;
  Eigen::VectorXd vel;
  Eigen::VectorXd acc;

  /// (pos, vel, acc) stacked into one vector.
  Eigen::VectorXd features() const;

  bool operator==(const KinematicFrame& other) const {
    return pos == other.pos && vel == other.vel && acc == other.acc;
  }
};

/// Hip reference of a raw frame: the mean of r_hip / l_hip when both exist,
/// otherwise the hip_center keypoint.
Eigen::VectorXd hip_reference(const PoseFrame& frame, const KeypointSet& set);

/// Shoulder-midpoint to hip distance, the height proxy used for upper-body sets.
double height_proxy(const PoseFrame& frame, const KeypointSet& set);

/// Moves the origin to the hip and divides by `height_scale`.
PoseFrame normalize_pose(const PoseFrame& raw, const KeypointSet& set, double height_scale);

/// Backward differences. Missing history before the first frame is filled
/// with copies of the first frame, so vel[0] = acc[0] = 0.
std::vector<KinematicFrame> derive_kinematics(std::span<const PoseFrame> frames);
std::vector<KinematicFrame> derive_kinematics(std::span<const Eigen::VectorXd> positions);

/// Reflects coordinate `axis` about the hip reference and swaps left/right labels.
PoseFrame mirror_lr(const PoseFrame& frame, const KeypointSet& set, int axis = 0);
/// Mirror of a hip-centred kinematic frame (reflection about the origin).
KinematicFrame mirror_lr(const KinematicFrame& frame, const KeypointSet& set, int axis = 0);

/// Decimates positions from `from_hz` to `to_hz` and recomputes derivatives
/// at the new rate. `from_hz` must be an integer multiple of `to_hz`.
std::vector<KinematicFrame> resample(std::span<const KinematicFrame> frames, int from_hz, int to_hz);

/// Stride for a from_hz -> to_hz decimation; throws Errc::unsupported_rate.
int resample_stride(int from_hz, int to_hz);

/// Incremental form of derive_kinematics; produces bit-identical frames.
class KinematicStream {
 public:
  KinematicFrame push(const Eigen::VectorXd& pos);
  void reset();
  std::size_t count() const { return count_; }

 private:
  Eigen::VectorXd prev1_;
  Eigen::VectorXd prev2_;
  std::size_t count_ = 0;
};

}  // namespace ictus
