#include "ictus/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ictus/error.hpp"
#include "ictus/take_io.hpp"

namespace ictus {

namespace {

void send_all(int fd, const std::string& bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw Error(Errc::io, std::string("send failed: ") + std::strerror(errno));
    off += static_cast<std::size_t>(n);
  }
}

std::string errc_name(const Error& e) { return std::string(to_string(e.code())); }

}  // namespace

Session::Session(std::string id, std::shared_ptr<const ServiceModel> model)
    : id_(std::move(id)),
      model_(std::move(model)),
      estimator_(model_->estimator->fresh()),
      engine_(model_->score, model_->controller, model_->options) {}

void Session::reset_pipeline() {
  estimator_->reset();
  engine_.reset();
  stream_.reset();
  height_ = model_->height_scale > 0.0 ? std::optional<double>(model_->height_scale) : std::nullopt;
}

void Session::start() {
  if (started_) return;
  reset_pipeline();
  started_ = true;
}

void Session::restart() {
  reset_pipeline();
  started_ = true;
}

nlohmann::json Session::stop() {
  started_ = false;
  if (recording_ && !model_->record_dir.empty()) {
    std::filesystem::create_directories(model_->record_dir);
    const auto path = model_->record_dir / ("session-" + id_ + "-" + std::to_string(saved_logs_++) + ".csv");
    write_session_csv(engine_.log(), model_->score, path);
  }
  return make_end_summary(next_seq(), engine_.summary());
}

nlohmann::json Session::handle_pose(const PoseFrameMsg& frame) {
  if (!started_) throw Error(Errc::protocol, "session not started");
  const KeypointSet& set = model_->keypoints;
  if (static_cast<std::size_t>(frame.coords.size()) != set.coord_count()) throw Error(Errc::protocol, "frame size mismatch");
  if (!frame.coords.allFinite()) throw Error(Errc::invalid_frame, "coordinate is not finite");
  const PoseFrame raw{frame.k, frame.coords};
  double height = 0.0;
  if (height_) {
    height = *height_;
  } else {
    height = height_proxy(raw, set);
    if (!(height > 0.0) || !std::isfinite(height)) throw Error(Errc::invalid_frame, "calibration frame has no usable height");
  }
  const PoseFrame pose = normalize_pose(raw, set, height);
  height_ = height;
  const KinematicFrame kf = stream_.push(pose.pos);
  const double phase = estimator_->step(kf);
  const StepRecord& rec = engine_.step(phase);
  return make_state(next_seq(), rec, model_->score.is_fermata(rec.bar));
}

std::vector<nlohmann::json> Session::handle(const nlohmann::json& msg) {
  std::optional<std::uint64_t> ref;
  try {
    check_envelope(msg);
    ref = msg["seq"].get<std::uint64_t>();
    if (last_client_seq_ && *ref <= *last_client_seq_) throw Error(Errc::protocol, "sequence number did not increase");
    last_client_seq_ = ref;
    const std::string type = msg["type"].get<std::string>();
    if (type == "hello") {
      const HelloMsg h = parse_hello(msg);
      if (!(h.keypoints == model_->keypoints)) throw Error(Errc::protocol, "keypoint set does not match the server");
      if (h.rate_hz != model_->controller.rate_hz) {
        throw Error(Errc::unsupported_rate, "server runs at " + std::to_string(model_->controller.rate_hz) + " Hz");
      }
      return {make_welcome(next_seq(), id_, model_->controller.rate_hz, model_->keypoints, estimator_->name())};
    }
    if (type == "pose_frame") return {handle_pose(parse_pose_frame(msg, model_->keypoints))};
    if (type == "control") {
      if (!msg.contains("command") || !msg["command"].is_string()) throw Error(Errc::protocol, "control needs a command");
      switch (parse_control(msg["command"].get<std::string>())) {
        case ControlCommand::start: start(); return {};
        case ControlCommand::restart: restart(); return {};
        case ControlCommand::stop: return {stop()};
        case ControlCommand::record_on: recording_ = true; return {};
        case ControlCommand::record_off: recording_ = false; return {};
      }
    }
    throw Error(Errc::protocol, "unknown message type '" + type + "'");
  } catch (const Error& e) {
    return {make_error(next_seq(), errc_name(e), e.what(), ref)};
  }
}

SessionLog replay_file(const ServiceModel& model, const std::filesystem::path& take_path,
                       std::vector<nlohmann::json>* transcript) {
  Take take = read_take(take_path);
  const int hz = model.controller.rate_hz;
  if (take.rate.hz != hz) take = resample_take(take, hz);
  if (!(take.keypoints == model.keypoints)) throw Error(Errc::config, "take keypoints do not match the service");
  auto m = std::make_shared<ServiceModel>(model);
  m->height_scale = 1.0;
  Session session("replay", m);
  session.start();
  for (std::size_t i = 0; i < take.frames.size(); ++i) {
    nlohmann::json reply = session.handle_pose(PoseFrameMsg{static_cast<long>(i), take.frames[i].pos});
    if (transcript != nullptr) transcript->push_back(std::move(reply));
  }
  nlohmann::json summary = session.stop();
  if (transcript != nullptr) transcript->push_back(std::move(summary));
  return session.log();
}

Server::Server(std::shared_ptr<const ServiceModel> model, std::string bind, int port)
    : model_(std::move(model)), bind_(std::move(bind)), port_(port) {}

Server::~Server() { stop(); }

int Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(Errc::io, "socket() failed");
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port_));
  if (::inet_pton(AF_INET, bind_.c_str(), &addr.sin_addr) != 1) throw Error(Errc::config, "bad bind address " + bind_);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(Errc::io, "bind failed: " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  if (::listen(listen_fd_, 16) < 0) throw Error(Errc::io, "listen failed");
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void Server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      if (errno == EINTR) continue;
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mutex_);
    clients_.push_back(fd);
    workers_.emplace_back([this, fd, id = std::to_string(next_id_++)] { serve(fd, id); });
  }
}

void Server::serve(int fd, std::string id) {
  Session session(std::move(id), model_);
  FrameDecoder decoder;
  char buf[8192];
  try {
    for (;;) {
      const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) break;
      decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      while (auto msg = decoder.next()) {
        for (const auto& reply : session.handle(*msg)) send_all(fd, encode_frame(reply));
      }
    }
  } catch (const Error& e) {
    try {
      send_all(fd, encode_frame(make_error(0, errc_name(e), e.what())));
    } catch (const Error&) {
    }
  }
  if (session.started()) {
    try {
      session.stop();
    } catch (const Error& e) {
      warn(std::string("session ") + session.id() + ": " + e.what());
    }
  }
  ::shutdown(fd, SHUT_RDWR);
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    for (int fd : clients_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  std::lock_guard lock(mutex_);
  for (int fd : clients_) ::close(fd);
  clients_.clear();
}

void Server::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

Client::~Client() { close(); }

void Client::connect(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || res == nullptr) {
    throw Error(Errc::io, "cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc < 0) {
    close();
    throw Error(Errc::io, "cannot connect to " + host + ":" + std::to_string(port));
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

void Client::send(const nlohmann::json& msg) { send_all(fd_, encode_frame(msg)); }

std::optional<nlohmann::json> Client::receive() {
  char buf[8192];
  for (;;) {
    if (auto msg = decoder_.next()) return msg;
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return std::nullopt;
    decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

void Client::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace ictus
