#include "ictus/config.hpp"

#include <fstream>

#include "ictus/error.hpp"

namespace ictus {

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

AppConfig config_from_json(const nlohmann::json& j) {
  AppConfig cfg;
  try {
    if (j.contains("controller")) {
      const auto& c = j.at("controller");
      auto& o = cfg.controller;
      read(c, "upbeat_threshold", o.upbeat_threshold);
      read(c, "phase_high", o.phase_high);
      read(c, "phase_low", o.phase_low);
      read(c, "sleep_steps", o.sleep_steps);
      read(c, "rate_hz", o.rate_hz);
      read(c, "bar_start_window", o.bar_start_window);
      if (c.contains("strategy")) o.strategy = parse_strategy(c.at("strategy").get<std::string>());
      if (c.contains("weights")) {
        const auto w = c.at("weights").get<std::vector<double>>();
        if (w.size() != 3) throw Error(Errc::config, "controller.weights needs three entries");
        for (int i = 0; i < 3; ++i) o.weights[i] = w[static_cast<std::size_t>(i)];
      }
      o.validate();
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      auto& o = cfg.train;
      read(t, "window", o.window);
      read(t, "beta", o.beta);
      read(t, "ramp_epochs", o.ramp_epochs);
      read(t, "epsilon", o.epsilon);
      read(t, "max_epochs", o.max_epochs);
      read(t, "patience", o.patience);
      read(t, "base_lr", o.base_lr);
      read(t, "max_lr", o.max_lr);
      read(t, "cycle_half_epochs", o.cycle_half_epochs);
      read(t, "weight_decay", o.weight_decay);
      read(t, "batch_size", o.batch_size);
      read(t, "grad_clip", o.grad_clip);
      read(t, "range_test_steps", o.range_test_steps);
      read(t, "seed", o.seed);
      read(t, "hidden", o.model.hidden);
      read(t, "layers", o.model.layers);
      read(t, "fc_hidden", o.model.fc_hidden);
      read(t, "dropout", o.model.dropout);
      o.validate();
    }
    if (j.contains("corpus")) {
      const auto& c = j.at("corpus");
      read(c, "seed", cfg.corpus.seed);
      read(c, "rate_hz", cfg.corpus.rate_hz);
      read(c, "mirror_left_handed", cfg.corpus.mirror_left_handed);
    }
    if (j.contains("service")) {
      const auto& s = j.at("service");
      auto& o = cfg.service;
      read(s, "bind", o.bind);
      read(s, "port", o.port);
      read(s, "estimator", o.estimator);
      read(s, "checkpoint", o.checkpoint);
      read(s, "score", o.score);
      read(s, "height_scale", o.height_scale);
      read(s, "record_dir", o.record_dir);
      read(s, "clamp", o.session.clamp);
      read(s, "clamp_min", o.session.clamp_min);
      read(s, "clamp_max", o.session.clamp_max);
      if (o.estimator != "lstm" && o.estimator != "kalman") throw Error(Errc::config, "service.estimator must be lstm or kalman");
    }
    if (j.contains("metrics") && j.at("metrics").contains("stability_after_bar")) {
      cfg.stability_after_bar = j.at("metrics").at("stability_after_bar").get<int>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config, std::string("bad config: ") + e.what());
  }
  return cfg;
}

nlohmann::json to_json(const AppConfig& cfg) {
  const auto& c = cfg.controller;
  const auto& t = cfg.train;
  const auto& s = cfg.service;
  nlohmann::json j = {
      {"controller",
       {{"upbeat_threshold", c.upbeat_threshold},
        {"phase_high", c.phase_high},
        {"phase_low", c.phase_low},
        {"sleep_steps", c.sleep_steps},
        {"strategy", to_string(c.strategy)},
        {"weights", {c.weights[0], c.weights[1], c.weights[2]}},
        {"rate_hz", c.rate_hz},
        {"bar_start_window", c.bar_start_window}}},
      {"train",
       {{"window", t.window},
        {"beta", t.beta},
        {"ramp_epochs", t.ramp_epochs},
        {"epsilon", t.epsilon},
        {"max_epochs", t.max_epochs},
        {"patience", t.patience},
        {"base_lr", t.base_lr},
        {"max_lr", t.max_lr},
        {"cycle_half_epochs", t.cycle_half_epochs},
        {"weight_decay", t.weight_decay},
        {"batch_size", t.batch_size},
        {"grad_clip", t.grad_clip},
        {"range_test_steps", t.range_test_steps},
        {"seed", t.seed},
        {"hidden", t.model.hidden},
        {"layers", t.model.layers},
        {"fc_hidden", t.model.fc_hidden},
        {"dropout", t.model.dropout}}},
      {"corpus", {{"seed", cfg.corpus.seed}, {"rate_hz", cfg.corpus.rate_hz}, {"mirror_left_handed", cfg.corpus.mirror_left_handed}}},
      {"service",
       {{"bind", s.bind},
        {"port", s.port},
        {"estimator", s.estimator},
        {"checkpoint", s.checkpoint},
        {"score", s.score},
        {"height_scale", s.height_scale},
        {"record_dir", s.record_dir},
        {"clamp", s.session.clamp},
        {"clamp_min", s.session.clamp_min},
        {"clamp_max", s.session.clamp_max}}},
  };
  if (cfg.stability_after_bar) j["metrics"] = {{"stability_after_bar", *cfg.stability_after_bar}};
  return j;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace ictus
