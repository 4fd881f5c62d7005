// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pf2mp/flowmatch.hpp"
#include "pf2mp/mazeworld.hpp"
#include "pf2mp/nnet.hpp"
#include "pf2mp/potential.hpp"

namespace pf2mp {

struct BenchSuite {
  std::vector<Pose> episodes;
  std::uint64_t base_seed = 0;
};

// Deterministic start/goal suite shared by every policy under comparison.
BenchSuite make_suite(const MazeWorld& maze, std::size_t n_episodes, const PoseConfig& poses,
                      std::uint64_t seed);

struct EpisodeSummary {
  std::size_t repeat = 0;
  std::size_t episode = 0;
  bool success = false;
  bool collided = false;
  bool failed = false;  // policy query threw or returned non-finite actions
  std::optional<std::size_t> first_collision_index;
  double final_distance = 0.0;

  bool operator==(const EpisodeSummary&) const = default;
};

// Mean and sample standard deviation over repeats, in percent.
struct RateStat {
  double mean = 0.0;
  double std = 0.0;
  bool operator==(const RateStat&) const = default;
};

struct BenchReport {
  std::string policy_tag;
  std::size_t episodes = 0;
  std::size_t repeats = 0;
  RateStat success_rate;
  RateStat collision_rate;  // over non-failed episodes
  std::size_t failed_queries = 0;
  std::vector<EpisodeSummary> per_episode;  // repeat-major
  std::string config_json = "{}";           // resolved configuration echo
};

struct BenchOptions {
  std::size_t repeats = 3;
  RolloutConfig rollout;
  std::size_t threads = 1;
};

// Seed for repeat r, episode e.
std::uint64_t episode_seed(std::uint64_t base_seed, std::size_t repeat, std::size_t episode);

BenchReport run_bench(const MazeWorld& maze, const Normalization& norm, const Policy& policy,
                      const BenchSuite& suite, const BenchOptions& options,
                      const std::string& policy_tag = "policy");

// Recomputes both rates from per-episode records.
void recompute_rates(const BenchReport& report, RateStat& success, RateStat& collision);

Policy make_fmp_policy(const nnet::VectorFieldNet& net, const InferenceConfig& config);
Policy make_pf2mp_policy(const nnet::VectorFieldNet& net, const PotentialField& field,
                         const InferenceConfig& config);

struct AblationReport {
  std::vector<double> lambdas;
  std::vector<BenchReport> reports;
  std::string config_json = "{}";
};

// One guided bench per lambda; lambda = 0 is prepended when absent.
// Lambdas must be finite, >= 0 and strictly increasing.
AblationReport run_lambda_ablation(const MazeWorld& maze, const Normalization& norm,
                                   const nnet::VectorFieldNet& net, const PotentialField& field,
                                   const BenchSuite& suite, std::vector<double> lambdas,
                                   const InferenceConfig& inference, const BenchOptions& options);

// Stable-key JSON (keys sorted, fixed number formatting).
std::string to_json(const BenchReport& report, int indent = 2);
std::string to_json(const AblationReport& report, int indent = 2);

// Plain-text table: policy | success (%) | collision (%), mean +- std.
std::string format_table(const std::vector<BenchReport>& reports);
std::string format_table(const AblationReport& report);

}  // namespace pf2mp
