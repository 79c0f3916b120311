#pragma once

// JSON application config. Every field is optional; missing fields keep
// their defaults.

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ictus/controller.hpp"
#include "ictus/session.hpp"
#include "ictus/train.hpp"

namespace ictus {

struct CorpusConfig {
  std::uint64_t seed = 2024;
  int rate_hz = 20;
  bool mirror_left_handed = true;
};

struct ServiceConfig {
  std::string bind = "127.0.0.1";
  int port = 7878;
  std::string estimator = "lstm";  // "lstm" or "kalman"
  std::string checkpoint;
  std::string score;               // empty: built-in demo score
  double height_scale = 0.0;       // 0: calibrate on the first frame of a session
  std::string record_dir;          // where session logs go when recording is on
  SessionOptions session{true, 0.25, 4.0};
};

struct AppConfig {
  ControllerConfig controller;
  TrainConfig train;
  CorpusConfig corpus;
  ServiceConfig service;
  std::optional<int> stability_after_bar;  // default: last fermata bar
};

AppConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AppConfig& cfg);
/// Throws Errc::io / Errc::config.
AppConfig load_config(const std::filesystem::path& path);

}  // namespace ictus
