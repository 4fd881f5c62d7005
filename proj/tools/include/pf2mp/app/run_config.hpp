// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pf2mp/density.hpp"
#include "pf2mp/evalbench.hpp"
#include "pf2mp/flowmatch.hpp"
#include "pf2mp/mazeworld.hpp"
#include "pf2mp/nnet.hpp"
#include "pf2mp/potential.hpp"

namespace pf2mp::app {

// Fully resolved run configuration. Every command echoes the JSON form of
// this struct into its output artifact.
//
// JSON keys (all optional; unknown keys are rejected):
//   maze               "medium-like" | "large-like" | path to a maze text file
//   out_dir            output directory for artifacts
//   seed               base seed; per-stage seeds are derived from it
//   horizon, demo_count
//   pose_min_separation, pose_clearance, expert_clearance
//   hidden (array), activation ("relu" | "tanh"), time_features, action_skip
//   epochs, batch_size, learning_rate, lr_schedule ("constant" | "cosine"), final_lr_fraction
//   subsample, bandwidth ("scott" | number), quantile, alpha, cap ("threshold" | "none" | number)
//   policy ("fmp" | "pf2mp"), lambda, steps, lambdas (array)
//   episodes, repeats, threads, success_radius, rollout_episode
struct RunConfig {
  std::string maze = "medium-like";
  std::filesystem::path out_dir = "pf2mp_out";
  std::uint64_t seed = 0;

  std::size_t horizon = 80;
  std::size_t demo_count = 1000;
  double pose_min_separation = 2.0;
  double pose_clearance = 0.25;
  double expert_clearance = 0.25;

  std::vector<std::size_t> hidden = {256, 256, 256};
  nnet::Activation activation = nnet::Activation::relu;
  std::size_t time_features = 4;
  bool action_skip = true;

  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  LrSchedule lr_schedule = LrSchedule::constant;
  double final_lr_fraction = 0.0;

  std::size_t subsample = 3000;
  std::optional<double> bandwidth = 0.3;  // nullopt: Scott's rule
  double quantile = 0.05;
  double alpha = -0.01;
  CapMode cap_mode = CapMode::threshold;
  double cap_value = 0.0;

  std::string policy = "pf2mp";
  double lambda = 0.8;
  std::size_t steps = 5;
  std::vector<double> lambdas = {0.01, 0.4, 0.8, 5.0};

  std::size_t episodes = 200;
  std::size_t repeats = 3;
  std::size_t threads = 1;
  double success_radius = 0.5;
  std::size_t rollout_episode = 0;

  // Throws ConfigError naming the offending key.
  void validate() const;

  std::string to_json() const;
  // Starts from `base` and applies the keys present in `text`.
  static RunConfig from_json(const std::string& text, const RunConfig& base);
  static RunConfig from_json(const std::string& text) { return from_json(text, RunConfig{}); }
  static RunConfig load(const std::filesystem::path& path);

  // Derived views for the core modules.
  MazeWorld load_maze() const;
  PoseConfig pose_config() const;
  ExpertConfig expert_config() const;
  nnet::NetConfig net_config() const;
  TrainConfig train_config() const;
  BandwidthRule bandwidth_rule() const;
  PotentialConfig potential_config() const;
  InferenceConfig inference_config() const;
  BenchOptions bench_options() const;

  std::uint64_t demo_seed() const;
  std::uint64_t init_seed() const;
  std::uint64_t train_seed() const;
  std::uint64_t field_seed() const;
  std::uint64_t suite_seed() const;
};

// "0,0.4,0.8" -> {0, 0.4, 0.8}. Throws ConfigError on malformed input.
std::vector<double> parse_lambda_list(const std::string& text);

}  // namespace pf2mp::app
