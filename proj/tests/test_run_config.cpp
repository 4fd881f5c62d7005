// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pf2mp/app/run_config.hpp"
#include "pf2mp/errors.hpp"

namespace pf2mp::app {
namespace {

TEST(RunConfig, DefaultsAreValidAndMirrorInferenceSetting) {
  const RunConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.steps, 5u);
  EXPECT_EQ(cfg.lambda, 0.8);
  EXPECT_EQ(cfg.horizon, 80u);
  EXPECT_EQ(cfg.subsample, 3000u);
  EXPECT_EQ(cfg.inference_config().steps, 5u);
  EXPECT_EQ(cfg.inference_config().guidance_weight, 0.8);
  EXPECT_EQ(cfg.net_config().action_dim, 160u);
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig cfg;
  cfg.seed = 17;
  cfg.hidden = {32, 16};
  cfg.bandwidth = std::nullopt;
  cfg.cap_mode = CapMode::value;
  cfg.cap_value = -2.5;
  cfg.lambdas = {0.0, 0.5};
  const RunConfig back = RunConfig::from_json(cfg.to_json());
  EXPECT_EQ(back.to_json(), cfg.to_json());
  EXPECT_EQ(back.seed, 17u);
  EXPECT_FALSE(back.bandwidth.has_value());
  EXPECT_EQ(back.cap_value, -2.5);
}

TEST(RunConfig, UnknownKeysAndBadValuesRejected) {
  // Parsing rejects malformed keys and types; value ranges are checked by validate().
  EXPECT_THROW(RunConfig::from_json(R"({"lamda": 0.8})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"steps": 0})").validate(), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"alpha": 0.5})").validate(), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"quantile": 1.0})").validate(), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"policy": "dp"})").validate(), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"bandwidth": "silverman"})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"epochs": "many"})"), ConfigError);
  EXPECT_THROW(RunConfig::from_json(R"({"lambdas": [0.8, 0.4]})").validate(), ConfigError);
  EXPECT_THROW(RunConfig::from_json("{not json"), ConfigError);
  try {
    RunConfig::from_json(R"({"lamda": 0.8})");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("lamda"), std::string::npos);
  }
}

TEST(RunConfig, FileValuesOverrideDefaults) {
  const auto path = std::filesystem::temp_directory_path() / "pf2mp_run_config_test.json";
  {
    std::ofstream out(path);
    out << R"({"seed": 5, "bandwidth": "scott", "cap": "none", "maze": "large-like"})";
  }
  const RunConfig cfg = RunConfig::load(path);
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_FALSE(cfg.bandwidth.has_value());
  EXPECT_EQ(cfg.cap_mode, CapMode::none);
  EXPECT_EQ(cfg.load_maze().name(), "large-like");
  EXPECT_EQ(cfg.lambda, 0.8);
  std::filesystem::remove(path);
  EXPECT_THROW(RunConfig::load(path), FormatError);
}

TEST(RunConfig, StageSeedsDifferAndFollowBaseSeed) {
  RunConfig a, b;
  b.seed = 1;
  EXPECT_NE(a.demo_seed(), a.train_seed());
  EXPECT_NE(a.field_seed(), a.suite_seed());
  EXPECT_NE(a.demo_seed(), b.demo_seed());
}

TEST(RunConfig, FmpPolicyDisablesGuidance) {
  RunConfig cfg;
  cfg.policy = "fmp";
  EXPECT_EQ(cfg.inference_config().guidance_weight, 0.0);
}

TEST(LambdaList, Parsing) {
  EXPECT_EQ(parse_lambda_list("0,0.4,0.8"), (std::vector<double>{0.0, 0.4, 0.8}));
  EXPECT_EQ(parse_lambda_list("5"), (std::vector<double>{5.0}));
  EXPECT_THROW(parse_lambda_list(""), ConfigError);
  EXPECT_THROW(parse_lambda_list("0,x"), ConfigError);
  EXPECT_THROW(parse_lambda_list("0.4abc"), ConfigError);
}

}  // namespace
}  // namespace pf2mp::app
