#pragma once

// Wire protocol, version 1.
//
// Every message is a JSON object framed by a 4-byte big-endian payload
// length. Each message carries "v" (protocol version), "seq" (strictly
// increasing per sender) and "type".
//
// client -> server
//   hello       {keypoints: [names], dims: 2, rate_hz: 20}
//   pose_frame  {k: step, coords: [[x, y], ...]}     one row per keypoint
//   control     {command: start | stop | restart | record_on | record_off}
// server -> client
//   welcome     {session, rate_hz, keypoints, estimator}
//   state       {k, phase (rad), fsm, s, stretch, playhead (s), bar,
//                fermata, beat, upbeat, halted, command?}
//   end_summary {original_duration (s), conducted_duration (s),
//                percent_difference, defined}
//   error       {code, text, ref_seq?}

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "ictus/kinematics.hpp"
#include "ictus/session.hpp"

namespace ictus {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxMessageBytes = 1u << 20;

/// Length-prefixed encoding of one message.
std::string encode_frame(const nlohmann::json& message);

/// Incremental decoder for a byte stream of frames.
class FrameDecoder {
 public:
  void feed(std::string_view bytes);
  /// Next complete message, if any. Throws Errc::protocol on an oversized
  /// frame or a payload that is not a JSON object.
  std::optional<nlohmann::json> next();
  std::size_t buffered() const { return buffer_.size() - pos_; }

 private:
  std::string buffer_;
  std::size_t pos_ = 0;
};

enum class ControlCommand { start, stop, restart, record_on, record_off };
std::string_view to_string(ControlCommand c);
ControlCommand parse_control(std::string_view name);

struct HelloMsg {
  KeypointSet keypoints;
  int rate_hz = 20;
};

struct PoseFrameMsg {
  long k = 0;
  Eigen::VectorXd coords;  // keypoint-major
};

/// Envelope check: object with v == 1, integer seq and string type.
/// Throws Errc::protocol.
void check_envelope(const nlohmann::json& msg);

HelloMsg parse_hello(const nlohmann::json& msg);
/// Throws Errc::protocol on shape errors and Errc::invalid_frame on
/// non-finite coordinates.
PoseFrameMsg parse_pose_frame(const nlohmann::json& msg, const KeypointSet& set);

nlohmann::json make_hello(std::uint64_t seq, const KeypointSet& set, int rate_hz);
nlohmann::json make_pose_frame(std::uint64_t seq, long k, const Eigen::VectorXd& coords, const KeypointSet& set);
nlohmann::json make_control(std::uint64_t seq, ControlCommand c);

nlohmann::json make_welcome(std::uint64_t seq, const std::string& session, int rate_hz, const KeypointSet& set,
                            const std::string& estimator);
nlohmann::json make_state(std::uint64_t seq, const StepRecord& rec, bool fermata);
nlohmann::json make_end_summary(std::uint64_t seq, const EndSummary& summary);
nlohmann::json make_error(std::uint64_t seq, std::string_view code, std::string_view text,
                          std::optional<std::uint64_t> ref_seq = std::nullopt);

}  // namespace ictus
