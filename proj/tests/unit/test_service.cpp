#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "ictus/error.hpp"
#include "ictus/kalman.hpp"
#include "ictus/lstm.hpp"
#include "ictus/service.hpp"
#include "ictus/synth.hpp"
#include "ictus/take_io.hpp"

using namespace ictus;
namespace fs = std::filesystem;

namespace {

const Score& piece() {
  static const Score s = Score::demo().truncated(30);
  return s;
}

const Take& take20() {
  static const Take t = generate_take(piece(), ConductorStyle::sample(3), 1.0, Timebase{20}, "S03");
  return t;
}

std::shared_ptr<const PhaseEstimator> kalman_estimator() {
  static const auto est = [] {
    std::vector<Take> fit;
    for (std::uint64_t s = 10; s < 13; ++s) fit.push_back(generate_take(piece(), ConductorStyle::sample(s), 1.0, Timebase{20}));
    return std::make_shared<const KalmanEstimator>(std::make_shared<const KalmanPhaseModel>(fit_kalman(fit)));
  }();
  return est;
}

std::shared_ptr<ServiceModel> make_model(double height_scale = 1.0) {
  auto m = std::make_shared<ServiceModel>();
  m->score = piece();
  m->estimator = kalman_estimator();
  m->height_scale = height_scale;
  return m;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ictus_service_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::uint64_t seq = 100;

nlohmann::json pose(long k, const Eigen::VectorXd& c) {
  return make_pose_frame(seq++, k, c, KeypointSet::upper_body_2d());
}

nlohmann::json control(ControlCommand c) { return make_control(seq++, c); }

}  // namespace

TEST(Session, HelloAndFirstFrame) {
  Session s("1", make_model());
  auto out = s.handle(make_hello(seq++, KeypointSet::upper_body_2d(), 20));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["type"], "welcome");
  EXPECT_EQ(out[0]["estimator"], "kalman");
  EXPECT_TRUE(s.handle(control(ControlCommand::start)).empty());
  out = s.handle(pose(0, take20().frames[0].pos));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["type"], "state");
  EXPECT_EQ(out[0]["fsm"], "waiting_for_upbeat");
  EXPECT_EQ(out[0]["s"], 0.0);
  EXPECT_EQ(out[0]["playhead"], 0.0);
}

TEST(Session, HelloMismatches) {
  Session s("1", make_model());
  auto out = s.handle(make_hello(seq++, KeypointSet::upper_body_2d(), 30));
  EXPECT_EQ(out[0]["type"], "error");
  EXPECT_EQ(out[0]["code"], "unsupported_rate");
  KeypointSet other = KeypointSet::upper_body_2d();
  other.names.pop_back();
  out = s.handle(make_hello(seq++, other, 20));
  EXPECT_EQ(out[0]["code"], "protocol");
}

TEST(Session, FrameBeforeStartIsAnError) {
  Session s("1", make_model());
  const auto out = s.handle(pose(0, take20().frames[0].pos));
  EXPECT_EQ(out[0]["type"], "error");
  EXPECT_TRUE(s.log().steps.empty());
}

TEST(Session, NonFiniteFrameLeavesStateUnchanged) {
  Session s("1", make_model());
  s.start();
  for (int k = 0; k < 5; ++k) s.handle(pose(k, take20().frames[static_cast<std::size_t>(k)].pos));
  const SessionLog before = s.log();
  Eigen::VectorXd bad = take20().frames[5].pos;
  bad(3) = std::numeric_limits<double>::quiet_NaN();
  const nlohmann::json msg = pose(5, bad);
  const auto out = s.handle(msg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["type"], "error");
  EXPECT_EQ(out[0]["code"], "invalid_frame");
  EXPECT_EQ(out[0]["ref_seq"], msg["seq"]);
  EXPECT_EQ(s.log(), before);

  // the stream continues as if the bad frame never arrived
  Session clean("2", make_model());
  clean.start();
  for (int k = 0; k < 6; ++k) clean.handle(pose(k, take20().frames[static_cast<std::size_t>(k)].pos));
  s.handle(pose(6, take20().frames[5].pos));
  EXPECT_EQ(s.log(), clean.log());
}

TEST(Session, SequenceMustIncrease) {
  Session s("1", make_model());
  s.handle(make_control(50, ControlCommand::start));
  const auto out = s.handle(make_control(50, ControlCommand::stop));
  EXPECT_EQ(out[0]["type"], "error");
  EXPECT_EQ(out[0]["ref_seq"], 50);
  EXPECT_TRUE(s.started());
}

TEST(Session, ServerSeqStrictlyIncreases) {
  Session s("1", make_model());
  std::vector<std::uint64_t> seen;
  for (const auto& m : s.handle(make_hello(seq++, KeypointSet::upper_body_2d(), 20))) seen.push_back(m["seq"]);
  s.handle(control(ControlCommand::start));
  for (int k = 0; k < 20; ++k) {
    for (const auto& m : s.handle(pose(k, take20().frames[static_cast<std::size_t>(k)].pos))) seen.push_back(m["seq"]);
  }
  for (const auto& m : s.handle(control(ControlCommand::stop))) seen.push_back(m["seq"]);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_GT(seen[i], seen[i - 1]);
}

TEST(Session, CalibratesHeightOnFirstFrame) {
  // Raw frames: the take scaled by 250 and shifted. Calibration recovers the
  // take up to the ratio of the height proxies.
  auto model = make_model(0.0);
  Session raw("raw", model);
  raw.start();
  const KeypointSet set = KeypointSet::upper_body_2d();
  for (int k = 0; k < 40; ++k) {
    Eigen::VectorXd c = take20().frames[static_cast<std::size_t>(k)].pos * 250.0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      c(static_cast<Eigen::Index>(2 * j)) += 320.0;
      c(static_cast<Eigen::Index>(2 * j + 1)) += 240.0;
    }
    const auto out = raw.handle(pose(k, c));
    ASSERT_EQ(out[0]["type"], "state");
  }
  EXPECT_EQ(raw.log().steps.size(), 40u);
}

TEST(Replay, EqualsOfflineSession) {
  const fs::path dir = scratch("replay");
  write_take(take20(), dir / "t.take");
  const auto model = make_model();
  std::vector<nlohmann::json> transcript;
  const SessionLog a = replay_file(*model, dir / "t.take", &transcript);
  const SessionLog b = replay_file(*model, dir / "t.take");
  EXPECT_EQ(a, b);
  EXPECT_EQ(transcript.size(), take20().frames.size() + 1);
  EXPECT_EQ(transcript.back()["type"], "end_summary");

  auto est = kalman_estimator()->fresh();
  const SessionLog offline = run_session(*est, take20().frames, piece(), model->controller, model->options);
  ASSERT_EQ(a.steps.size(), offline.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) ASSERT_EQ(a.steps[i], offline.steps[i]) << i;
  EXPECT_EQ(a, offline);
}

TEST(Replay, HigherRateTakeIsResampled) {
  const fs::path dir = scratch("resample");
  const Take t60 = generate_take(piece(), ConductorStyle::sample(3), 1.0, Timebase{60}, "S03");
  write_take(t60, dir / "t60.take");
  const SessionLog log = replay_file(*make_model(), dir / "t60.take");
  EXPECT_EQ(log.steps.size(), resample_take(t60, 20).frames.size());
  Take odd = t60;
  odd.rate = Timebase{50};
  write_take(odd, dir / "t50.take");
  EXPECT_THROW(replay_file(*make_model(), dir / "t50.take"), Error);
}

TEST(Session, RecordingWritesCsv) {
  const fs::path dir = scratch("record");
  auto model = make_model();
  model->record_dir = dir;
  Session s("7", model);
  s.handle(control(ControlCommand::record_on));
  s.handle(control(ControlCommand::start));
  for (int k = 0; k < 30; ++k) s.handle(pose(k, take20().frames[static_cast<std::size_t>(k)].pos));
  const auto out = s.handle(control(ControlCommand::stop));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0]["type"], "end_summary");
  const fs::path csv = dir / "session-7-0.csv";
  ASSERT_TRUE(fs::exists(csv));
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("k,wall,phase", 0), 0u);
  int rows = 0;
  for (std::string line; std::getline(in, line) && line[0] != '#';) ++rows;
  EXPECT_EQ(rows, 30);
}

namespace {

std::vector<nlohmann::json> run_client(int port, const Take& take) {
  Client c;
  c.connect("127.0.0.1", port);
  std::uint64_t n = 0;
  c.send(make_hello(n++, KeypointSet::upper_body_2d(), 20));
  std::vector<nlohmann::json> out;
  out.push_back(*c.receive());
  c.send(make_control(n++, ControlCommand::start));
  for (std::size_t k = 0; k < take.frames.size(); ++k) {
    c.send(make_pose_frame(n++, static_cast<long>(k), take.frames[k].pos, KeypointSet::upper_body_2d()));
    out.push_back(*c.receive());
  }
  c.send(make_control(n++, ControlCommand::stop));
  out.push_back(*c.receive());
  c.close();
  return out;
}

}  // namespace

TEST(Server, TcpRoundTripMatchesReplay) {
  Server server(make_model(), "127.0.0.1", 0);
  const int port = server.start();
  ASSERT_GT(port, 0);
  const auto replies = run_client(port, take20());
  server.stop();
  ASSERT_EQ(replies.size(), take20().frames.size() + 2);
  EXPECT_EQ(replies.front()["type"], "welcome");
  EXPECT_EQ(replies.back()["type"], "end_summary");

  const fs::path dir = scratch("tcp");
  write_take(take20(), dir / "t.take");
  const SessionLog log = replay_file(*make_model(), dir / "t.take");
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const auto& st = replies[i + 1];
    ASSERT_EQ(st["type"], "state");
    EXPECT_EQ(st["phase"].get<double>(), log.steps[i].phase);
    EXPECT_EQ(st["playhead"].get<double>(), log.steps[i].playhead);
    EXPECT_EQ(st["bar"].get<int>(), log.steps[i].bar);
  }
}

TEST(Server, ConcurrentSessionsAreIsolated) {
  Server server(make_model(), "127.0.0.1", 0);
  const int port = server.start();
  std::vector<nlohmann::json> a, b;
  std::thread ta([&] { a = run_client(port, take20()); });
  std::thread tb([&] { b = run_client(port, take20()); });
  ta.join();
  tb.join();
  server.stop();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 1; i < a.size(); ++i) {
    nlohmann::json x = a[i], y = b[i];
    EXPECT_EQ(x, y) << i;
  }
}

TEST(Client, ConnectionRefused) {
  Server probe(make_model(), "127.0.0.1", 0);
  const int port = probe.start();
  probe.stop();
  Client c;
  EXPECT_THROW(c.connect("127.0.0.1", port), Error);
}
