#include <gtest/gtest.h>

#include "ictus/config.hpp"
#include "ictus/error.hpp"

using namespace ictus;

namespace {

Errc code_of(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::invariant;
}

}  // namespace

TEST(Config, EmptyDocumentKeepsDefaults) {
  const AppConfig cfg = config_from_json(nlohmann::json::object());
  EXPECT_EQ(cfg.controller.upbeat_threshold, 0.5);
  EXPECT_EQ(cfg.controller.phase_high, 3.8);
  EXPECT_EQ(cfg.controller.phase_low, 2.5);
  EXPECT_EQ(cfg.controller.sleep_steps, 10);
  EXPECT_EQ(cfg.controller.strategy, SpeedStrategy::median);
  EXPECT_EQ(cfg.train.model.hidden, 64);
  EXPECT_EQ(cfg.train.model.layers, 3);
  EXPECT_EQ(cfg.train.beta, 0.3);
  EXPECT_EQ(cfg.train.window, 500);
  EXPECT_EQ(cfg.corpus.rate_hz, 20);
  EXPECT_EQ(cfg.service.port, 7878);
  EXPECT_FALSE(cfg.stability_after_bar);
}

TEST(Config, RoundTrip) {
  AppConfig cfg;
  cfg.controller.strategy = SpeedStrategy::average;
  cfg.controller.sleep_steps = 7;
  cfg.train.model.hidden = 16;
  cfg.train.beta = 1.0;
  cfg.service.estimator = "kalman";
  cfg.service.port = 9001;
  cfg.stability_after_bar = 30;
  const nlohmann::json j = to_json(cfg);
  const AppConfig back = config_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.controller.strategy, SpeedStrategy::average);
  EXPECT_EQ(back.stability_after_bar, 30);
}

TEST(Config, PartialOverride) {
  const AppConfig cfg = config_from_json({{"train", {{"hidden", 32}}}});
  EXPECT_EQ(cfg.train.model.hidden, 32);
  EXPECT_EQ(cfg.train.model.layers, 3);
}

TEST(Config, BadValuesRejected) {
  EXPECT_EQ(code_of({{"controller", {{"strategy", "mode"}}}}), Errc::config);
  EXPECT_EQ(code_of({{"controller", {{"weights", {0.5, 0.5}}}}}), Errc::config);
  EXPECT_EQ(code_of({{"controller", {{"weights", {0.5, 0.5, 0.5}}}}}), Errc::config);
  EXPECT_EQ(code_of({{"controller", {{"phase_high", 1.0}}}}), Errc::config);
  EXPECT_EQ(code_of({{"controller", {{"sleep_steps", "ten"}}}}), Errc::config);
  EXPECT_EQ(code_of({{"train", {{"hidden", 0}}}}), Errc::config);
  EXPECT_EQ(code_of({{"service", {{"estimator", "oracle"}}}}), Errc::config);
}

TEST(Config, ShippedDefaultsMatchBuiltIn) {
  const AppConfig file = load_config(ICTUS_TEST_DATA "/../../configs/default.json");
  EXPECT_EQ(to_json(file), to_json(AppConfig{}));
}

TEST(Config, MissingFile) {
  try {
    load_config("/nonexistent/ictus.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io);
  }
}
