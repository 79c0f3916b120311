#include "ictus/protocol.hpp"

#include <cmath>

#include "ictus/error.hpp"

namespace ictus {

namespace {

nlohmann::json envelope(std::uint64_t seq, std::string_view type) {
  return {{"v", kProtocolVersion}, {"seq", seq}, {"type", type}};
}

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::protocol, what); }

}  // namespace

std::string encode_frame(const nlohmann::json& message) {
  const std::string payload = message.dump();
  if (payload.size() > kMaxMessageBytes) bad("message exceeds the frame size limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(4 + payload.size());
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out += payload;
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  if (pos_ > 0 && pos_ == buffer_.size()) {
    buffer_.clear();
    pos_ = 0;
  }
  buffer_.append(bytes);
}

std::optional<nlohmann::json> FrameDecoder::next() {
  if (buffered() < 4) return std::nullopt;
  const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + pos_);
  const std::uint32_t n = (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
  if (n > kMaxMessageBytes) bad("incoming frame of " + std::to_string(n) + " bytes exceeds the limit");
  if (buffered() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  const std::string_view payload(buffer_.data() + pos_ + 4, n);
  pos_ += 4 + n;
  nlohmann::json j = nlohmann::json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) bad("frame payload is not a JSON object");
  if (pos_ > 65536 && pos_ * 2 > buffer_.size()) {
    buffer_.erase(0, pos_);
    pos_ = 0;
  }
  return j;
}

std::string_view to_string(ControlCommand c) {
  switch (c) {
    case ControlCommand::start: return "start";
    case ControlCommand::stop: return "stop";
    case ControlCommand::restart: return "restart";
    case ControlCommand::record_on: return "record_on";
    case ControlCommand::record_off: return "record_off";
  }
  return "?";
}

ControlCommand parse_control(std::string_view name) {
  if (name == "start") return ControlCommand::start;
  if (name == "stop") return ControlCommand::stop;
  if (name == "restart") return ControlCommand::restart;
  if (name == "record_on") return ControlCommand::record_on;
  if (name == "record_off") return ControlCommand::record_off;
  bad("unknown control command '" + std::string(name) + "'");
}

void check_envelope(const nlohmann::json& msg) {
  if (!msg.is_object()) bad("message is not an object");
  if (!msg.contains("v") || !msg["v"].is_number_integer() || msg["v"].get<int>() != kProtocolVersion) {
    bad("unsupported or missing protocol version");
  }
  if (!msg.contains("seq") || !msg["seq"].is_number_integer() || msg["seq"].get<std::int64_t>() < 0) bad("missing or invalid seq");
  if (!msg.contains("type") || !msg["type"].is_string()) bad("missing message type");
}

HelloMsg parse_hello(const nlohmann::json& msg) {
  HelloMsg h;
  try {
    h.keypoints.names = msg.at("keypoints").get<std::vector<std::string>>();
    h.keypoints.dims = msg.value("dims", 2);
    h.rate_hz = msg.value("rate_hz", 20);
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("bad hello: ") + e.what());
  }
  try {
    h.keypoints.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  if (h.rate_hz <= 0) bad("rate_hz must be positive");
  return h;
}

PoseFrameMsg parse_pose_frame(const nlohmann::json& msg, const KeypointSet& set) {
  PoseFrameMsg f;
  const auto n = set.size();
  const auto dims = static_cast<std::size_t>(set.dims);
  if (!msg.contains("k") || !msg["k"].is_number_integer()) bad("pose_frame needs an integer k");
  f.k = msg["k"].get<long>();
  const auto it = msg.find("coords");
  if (it == msg.end() || !it->is_array() || it->size() != n) bad("pose_frame needs " + std::to_string(n) + " coordinate rows");
  f.coords.resize(static_cast<Eigen::Index>(n * dims));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = (*it)[i];
    if (!row.is_array() || row.size() != dims) bad("coordinate row " + std::to_string(i) + " has the wrong size");
    for (std::size_t d = 0; d < dims; ++d) {
      const auto& v = row[d];
      if (v.is_null()) throw Error(Errc::invalid_frame, "coordinate is not finite");
      if (!v.is_number()) bad("coordinates must be numbers");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw Error(Errc::invalid_frame, "coordinate is not finite");
      f.coords[static_cast<Eigen::Index>(i * dims + d)] = x;
    }
  }
  return f;
}

nlohmann::json make_hello(std::uint64_t seq, const KeypointSet& set, int rate_hz) {
  auto j = envelope(seq, "hello");
  j["keypoints"] = set.names;
  j["dims"] = set.dims;
  j["rate_hz"] = rate_hz;
  return j;
}

nlohmann::json make_pose_frame(std::uint64_t seq, long k, const Eigen::VectorXd& coords, const KeypointSet& set) {
  auto j = envelope(seq, "pose_frame");
  j["k"] = k;
  auto rows = nlohmann::json::array();
  const auto dims = static_cast<Eigen::Index>(set.dims);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(set.size()); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < dims; ++d) {
      const double x = coords[i * dims + d];
      row.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    }
    rows.push_back(std::move(row));
  }
  j["coords"] = std::move(rows);
  return j;
}

nlohmann::json make_control(std::uint64_t seq, ControlCommand c) {
  auto j = envelope(seq, "control");
  j["command"] = to_string(c);
  return j;
}

nlohmann::json make_welcome(std::uint64_t seq, const std::string& session, int rate_hz, const KeypointSet& set,
                            const std::string& estimator) {
  auto j = envelope(seq, "welcome");
  j["session"] = session;
  j["rate_hz"] = rate_hz;
  j["keypoints"] = set.names;
  j["estimator"] = estimator;
  return j;
}

nlohmann::json make_state(std::uint64_t seq, const StepRecord& rec, bool fermata) {
  auto j = envelope(seq, "state");
  j["k"] = rec.k;
  j["phase"] = rec.phase;
  j["fsm"] = to_string(rec.fsm);
  j["s"] = rec.s;
  j["stretch"] = rec.stretch;
  j["playhead"] = rec.playhead;
  j["bar"] = rec.bar;
  j["fermata"] = fermata;
  j["beat"] = rec.downbeat;
  j["upbeat"] = rec.upbeat;
  j["halted"] = rec.halted;
  if (rec.command) j["command"] = *rec.command;
  return j;
}

nlohmann::json make_end_summary(std::uint64_t seq, const EndSummary& summary) {
  auto j = envelope(seq, "end_summary");
  j["original_duration"] = summary.original_duration;
  j["conducted_duration"] = summary.conducted_duration;
  j["percent_difference"] = summary.defined ? nlohmann::json(summary.percent_difference) : nlohmann::json(nullptr);
  j["defined"] = summary.defined;
  return j;
}

nlohmann::json make_error(std::uint64_t seq, std::string_view code, std::string_view text,
                          std::optional<std::uint64_t> ref_seq) {
  auto j = envelope(seq, "error");
  j["code"] = code;
  j["text"] = text;
  if (ref_seq) j["ref_seq"] = *ref_seq;
  return j;
}

}  // namespace ictus
