#pragma once

// Live sessions: pose frames in, state messages out.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ictus/estimator.hpp"
#include "ictus/protocol.hpp"
#include "ictus/score.hpp"
#include "ictus/session.hpp"

namespace ictus {

/// Read-only state shared by every session of a server.
struct ServiceModel {
  Score score;
  ControllerConfig controller;
  SessionOptions options{true, 0.25, 4.0};
  std::shared_ptr<const PhaseEstimator> estimator;  // prototype, never stepped
  KeypointSet keypoints = KeypointSet::upper_body_2d();
  double height_scale = 0.0;  // 0: calibrate on the first frame after start
  std::filesystem::path record_dir;
};

class Session {
 public:
  Session(std::string id, std::shared_ptr<const ServiceModel> model);

  /// Handles one client message and returns the replies, in order.
  std::vector<nlohmann::json> handle(const nlohmann::json& msg);

  /// normalize -> kinematics -> estimator -> controller -> playback.
  /// Throws Errc::invalid_frame (state unchanged) or Errc::protocol.
  nlohmann::json handle_pose(const PoseFrameMsg& frame);

  void start();
  void restart();
  /// Ends the session, persists the log when recording, returns end_summary.
  nlohmann::json stop();

  const SessionLog& log() const { return engine_.log(); }
  EndSummary summary() const { return engine_.summary(); }
  bool started() const { return started_; }
  bool recording() const { return recording_; }
  const std::string& id() const { return id_; }

 private:
  std::uint64_t next_seq() { return seq_++; }
  void reset_pipeline();

  std::string id_;
  std::shared_ptr<const ServiceModel> model_;
  std::unique_ptr<PhaseEstimator> estimator_;
  SessionEngine engine_;
  KinematicStream stream_;
  std::optional<double> height_;
  bool started_ = false;
  bool recording_ = false;
  std::optional<std::uint64_t> last_client_seq_;
  std::uint64_t seq_ = 0;
  int saved_logs_ = 0;
};

/// Replays a take file through the session pipeline at the controller rate
/// (resampling first when needed). Take positions are already normalized,
/// so the height scale is fixed to 1. `transcript` receives every server
/// message when non-null.
SessionLog replay_file(const ServiceModel& model, const std::filesystem::path& take_path,
                       std::vector<nlohmann::json>* transcript = nullptr);

/// TCP server, one thread per connection.
class Server {
 public:
  Server(std::shared_ptr<const ServiceModel> model, std::string bind, int port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting. Returns the bound port (useful with port 0).
  int start();
  void stop();
  /// Blocks until stop() is called.
  void wait();
  int port() const { return port_; }

 private:
  void accept_loop();
  void serve(int fd, std::string id);

  std::shared_ptr<const ServiceModel> model_;
  std::string bind_;
  int port_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> clients_;
  std::uint64_t next_id_ = 1;
};

/// Minimal blocking client, used by tools and tests.
class Client {
 public:
  Client() = default;
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  void connect(const std::string& host, int port);
  void send(const nlohmann::json& msg);
  /// Next message; nullopt when the connection closed.
  std::optional<nlohmann::json> receive();
  void close();

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace ictus
