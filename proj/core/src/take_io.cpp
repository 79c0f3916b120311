#include "ictus/take_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "binio.hpp"
#include "ictus/phase.hpp"
#include "ictus/error.hpp"

namespace ictus {

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path);
}

}  // namespace detail

namespace {

constexpr char kMagic[4] = {'I', 'C', 'T', 'K'};

void fail(const std::string& what) { throw Error(Errc::invariant, "invalid take: " + what); }

}  // namespace

void validate_take(const Take& take) {
  take.keypoints.validate();
  if (!(take.tempo_factor > 0.0)) fail("tempo_factor must be positive");
  if (take.rate.hz <= 0) fail("rate must be positive");
  if (take.frames.size() != take.labels.size()) {
    fail(std::to_string(take.frames.size()) + " frames but " + std::to_string(take.labels.size()) + " labels");
  }
  const auto coords = static_cast<Eigen::Index>(take.keypoints.coord_count());
  for (const auto& f : take.frames) {
    if (f.pos.size() != coords || f.vel.size() != coords || f.acc.size() != coords) fail("frame size mismatch");
    if (!f.pos.allFinite() || !f.vel.allFinite() || !f.acc.allFinite()) fail("non-finite coordinate");
  }
  int last_bar = 0;
  for (const auto& l : take.labels) {
    if (!(l.phase >= 0.0 && l.phase < kTwoPi)) fail("label phase outside [0, 2pi)");
    if (l.bar < last_bar) fail("label bars decrease");
    last_bar = l.bar;
  }
  for (std::size_t i = 1; i < take.bar_starts.size(); ++i) {
    if (!(take.bar_starts[i] > take.bar_starts[i - 1])) fail("bar starts not strictly increasing");
  }
  for (std::size_t i = 1; i < take.beat_times.size(); ++i) {
    if (!(take.beat_times[i] > take.beat_times[i - 1])) fail("beat times not strictly increasing");
  }
  if (!take.bar_starts.empty() && !(take.end_time > take.bar_starts.back())) fail("end_time before last bar start");
  if (!take.labels.empty() && last_bar >= static_cast<int>(take.bar_starts.size())) fail("label bar beyond bar_starts");
}

void write_take(const Take& take, const std::filesystem::path& path) {
  validate_take(take);
  const nlohmann::json meta = {
      {"subject_id", take.subject_id},
      {"tempo_factor", take.tempo_factor},
      {"rate_hz", take.rate.hz},
      {"keypoints", {{"names", take.keypoints.names}, {"dims", take.keypoints.dims}}},
      {"mirrored", take.mirrored},
      {"frame_count", take.frames.size()},
      {"bar_count", take.bar_starts.size()},
      {"beat_count", take.beat_times.size()},
      {"end_time", take.end_time},
  };
  detail::Writer w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kTakeFormatVersion);
  // dump() prints doubles with round-trip precision
  w.put_string(meta.dump());
  const auto coords = take.keypoints.coord_count();
  for (const auto& f : take.frames) {
    if (static_cast<std::size_t>(f.pos.size()) != coords) throw Error(Errc::shape, "frame size does not match keypoints");
    w.put_doubles(f.pos.data(), coords);
  }
  for (const auto& l : take.labels) {
    w.put<std::int32_t>(l.bar);
    w.put<double>(l.phase);
  }
  w.put_doubles(take.beat_times.data(), take.beat_times.size());
  w.put_doubles(take.bar_starts.data(), take.bar_starts.size());
  detail::write_file(path.string(), w.bytes());
}

Take read_take(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path.string());
  detail::Reader r(bytes);
  if (r.remaining() < 4 || r.get_bytes(4) != std::string_view(kMagic, 4)) {
    throw Error(Errc::format, path.string() + " is not a take file");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kTakeFormatVersion) {
    throw Error(Errc::version_mismatch, "take format version " + std::to_string(version) + " is not supported");
  }
  Take take;
  std::size_t frames = 0, bars = 0, beats = 0;
  try {
    const auto meta = nlohmann::json::parse(r.get_string());
    take.subject_id = meta.at("subject_id").get<std::string>();
    take.tempo_factor = meta.at("tempo_factor").get<double>();
    take.rate.hz = meta.at("rate_hz").get<int>();
    take.keypoints.names = meta.at("keypoints").at("names").get<std::vector<std::string>>();
    take.keypoints.dims = meta.at("keypoints").at("dims").get<int>();
    take.mirrored = meta.value("mirrored", false);
    take.end_time = meta.at("end_time").get<double>();
    frames = meta.at("frame_count").get<std::size_t>();
    bars = meta.at("bar_count").get<std::size_t>();
    beats = meta.at("beat_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("bad take metadata: ") + e.what());
  }
  take.keypoints.validate();
  const auto coords = take.keypoints.coord_count();
  if (frames > r.remaining() / std::max<std::size_t>(1, coords * sizeof(double))) {
    throw Error(Errc::truncated, "take file ends inside the frame array");
  }
  std::vector<Eigen::VectorXd> positions(frames, Eigen::VectorXd(static_cast<Eigen::Index>(coords)));
  for (auto& p : positions) r.get_doubles(p.data(), coords);
  take.labels.resize(frames);
  for (auto& l : take.labels) {
    l.bar = r.get<std::int32_t>();
    l.phase = r.get<double>();
  }
  take.beat_times.resize(beats);
  r.get_doubles(take.beat_times.data(), beats);
  take.bar_starts.resize(bars);
  r.get_doubles(take.bar_starts.data(), bars);
  if (r.remaining() != 0) throw Error(Errc::format, "trailing bytes after take data");
  take.frames = derive_kinematics(std::span<const Eigen::VectorXd>(positions));
  validate_take(take);
  return take;
}

std::vector<std::filesystem::path> list_takes(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) throw Error(Errc::io, dir.string() + " is not a directory");
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".take") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Take> read_takes(const std::filesystem::path& dir) {
  std::vector<Take> takes;
  for (const auto& p : list_takes(dir)) takes.push_back(read_take(p));
  return takes;
}

}  // namespace ictus
