// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/evalbench.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "pf2mp/errors.hpp"

namespace pf2mp {
namespace {

using nlohmann::json;

RateStat mean_std(const std::vector<double>& values) {
  RateStat s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

json rate_json(const RateStat& r) { return json{{"mean", r.mean}, {"std", r.std}}; }

json report_json(const BenchReport& report) {
  json episodes = json::array();
  for (const EpisodeSummary& e : report.per_episode) {
    episodes.push_back({{"repeat", e.repeat},
                        {"episode", e.episode},
                        {"success", e.success},
                        {"collided", e.collided},
                        {"failed", e.failed},
                        {"first_collision_index",
                         e.first_collision_index ? json(*e.first_collision_index) : json(nullptr)},
                        {"final_distance", e.final_distance}});
  }
  return json{{"policy_tag", report.policy_tag},
              {"episodes", report.episodes},
              {"repeats", report.repeats},
              {"success_rate", rate_json(report.success_rate)},
              {"collision_rate", rate_json(report.collision_rate)},
              {"dispersion", "sample_std_over_repeats"},
              {"failed_queries", report.failed_queries},
              {"per_episode", std::move(episodes)},
              {"config", json::parse(report.config_json)}};
}

std::string fmt_rate(const RateStat& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%6.2f +- %5.2f", r.mean, r.std);
  return buf;
}

}  // namespace

BenchSuite make_suite(const MazeWorld& maze, std::size_t n_episodes, const PoseConfig& poses,
                      std::uint64_t seed) {
  if (n_episodes == 0) throw ConfigError("make_suite: need at least one episode");
  BenchSuite suite;
  suite.base_seed = seed;
  suite.episodes.reserve(n_episodes);
  for (std::size_t e = 0; e < n_episodes; ++e) {
    Rng rng(derive_seed(seed ^ 0x5eed5eed5eed5eedULL, e));
    suite.episodes.push_back(sample_free_pose(maze, rng, poses));
  }
  return suite;
}

std::uint64_t episode_seed(std::uint64_t base_seed, std::size_t repeat, std::size_t episode) {
  return derive_seed(base_seed, repeat, episode);
}

BenchReport run_bench(const MazeWorld& maze, const Normalization& norm, const Policy& policy,
                      const BenchSuite& suite, const BenchOptions& options,
                      const std::string& policy_tag) {
  if (suite.episodes.empty()) throw ConfigError("run_bench: empty suite");
  if (options.repeats == 0) throw ConfigError("run_bench: repeats must be >= 1");
  const std::size_t n_ep = suite.episodes.size();
  const std::size_t total = n_ep * options.repeats;

  BenchReport report;
  report.policy_tag = policy_tag;
  report.episodes = n_ep;
  report.repeats = options.repeats;
  report.per_episode.resize(total);

  auto run_one = [&](std::size_t idx) {
    const std::size_t r = idx / n_ep;
    const std::size_t e = idx % n_ep;
    EpisodeSummary s;
    s.repeat = r;
    s.episode = e;
    const Pose& pose = suite.episodes[e];
    Rng rng(episode_seed(suite.base_seed, r, e));
    try {
      const EpisodeResult res = rollout(maze, norm, policy, pose.start, pose.goal, options.rollout, rng);
      s.success = res.success;
      s.collided = res.collided;
      s.first_collision_index = res.first_collision_index;
      s.final_distance = distance(res.trajectory.back(), pose.goal);
    } catch (const Error&) {
      s.failed = true;
      s.final_distance = std::numeric_limits<double>::infinity();
    }
    report.per_episode[idx] = s;
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, total));
  if (threads == 1) {
    for (std::size_t i = 0; i < total; ++i) run_one(i);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < total; i += threads) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  std::vector<double> success(options.repeats, 0.0);
  std::vector<double> collision(options.repeats, 0.0);
  for (std::size_t r = 0; r < options.repeats; ++r) {
    std::size_t ok = 0, hit = 0, failed = 0;
    for (std::size_t e = 0; e < n_ep; ++e) {
      const EpisodeSummary& s = report.per_episode[r * n_ep + e];
      ok += s.success ? 1 : 0;
      hit += s.collided ? 1 : 0;
      failed += s.failed ? 1 : 0;
    }
    report.failed_queries += failed;
    success[r] = 100.0 * static_cast<double>(ok) / static_cast<double>(n_ep);
    const std::size_t valid = n_ep - failed;
    collision[r] = valid == 0 ? 0.0 : 100.0 * static_cast<double>(hit) / static_cast<double>(valid);
  }
  report.success_rate = mean_std(success);
  report.collision_rate = mean_std(collision);

  RateStat check_s, check_c;
  recompute_rates(report, check_s, check_c);
  if (!(check_s == report.success_rate) || !(check_c == report.collision_rate))
    throw std::logic_error("run_bench: rates disagree with per-episode records");
  return report;
}

void recompute_rates(const BenchReport& report, RateStat& success, RateStat& collision) {
  std::vector<double> s(report.repeats, 0.0), c(report.repeats, 0.0);
  std::vector<std::size_t> valid(report.repeats, 0);
  for (const EpisodeSummary& e : report.per_episode) {
    if (e.success) s[e.repeat] += 1.0;
    if (!e.failed) {
      valid[e.repeat] += 1;
      if (e.collided) c[e.repeat] += 1.0;
    }
  }
  for (std::size_t r = 0; r < report.repeats; ++r) {
    s[r] = 100.0 * s[r] / static_cast<double>(report.episodes);
    c[r] = valid[r] == 0 ? 0.0 : 100.0 * c[r] / static_cast<double>(valid[r]);
  }
  success = mean_std(s);
  collision = mean_std(c);
}

Policy make_fmp_policy(const nnet::VectorFieldNet& net, const InferenceConfig& config) {
  config.validate();
  return [&net, config](const Observation& obs, Rng& rng) {
    return sample_plain(net, obs, config, rng);
  };
}

Policy make_pf2mp_policy(const nnet::VectorFieldNet& net, const PotentialField& field,
                         const InferenceConfig& config) {
  config.validate();
  return [&net, &field, config](const Observation& obs, Rng& rng) {
    const PotentialGuidance guidance(field);
    return sample_guided(net, obs, config, guidance, rng);
  };
}

AblationReport run_lambda_ablation(const MazeWorld& maze, const Normalization& norm,
                                   const nnet::VectorFieldNet& net, const PotentialField& field,
                                   const BenchSuite& suite, std::vector<double> lambdas,
                                   const InferenceConfig& inference, const BenchOptions& options) {
  if (lambdas.empty()) throw ConfigError("run_lambda_ablation: no lambda values");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas[i]) || lambdas[i] < 0.0)
      throw ConfigError("run_lambda_ablation: lambda values must be finite and >= 0");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw ConfigError("run_lambda_ablation: lambda values must be strictly increasing");
  }
  if (lambdas.front() != 0.0) lambdas.insert(lambdas.begin(), 0.0);

  AblationReport out;
  out.lambdas = lambdas;
  for (double lambda : lambdas) {
    InferenceConfig cfg = inference;
    cfg.guidance_weight = lambda;
    char tag[64];
    if (lambda == 0.0)
      std::snprintf(tag, sizeof(tag), "fmp");
    else
      std::snprintf(tag, sizeof(tag), "pf2mp(lambda=%g)", lambda);
    out.reports.push_back(run_bench(maze, norm, make_pf2mp_policy(net, field, cfg), suite, options, tag));
  }
  return out;
}

std::string to_json(const BenchReport& report, int indent) { return report_json(report).dump(indent); }

std::string to_json(const AblationReport& report, int indent) {
  json reports = json::array();
  for (const BenchReport& r : report.reports) reports.push_back(report_json(r));
  json j{{"lambdas", report.lambdas},
         {"reports", std::move(reports)},
         {"config", json::parse(report.config_json)}};
  return j.dump(indent);
}

std::string format_table(const std::vector<BenchReport>& reports) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-22s | %-18s | %-18s | %s\n", "Policy", "Success Rate (%)",
                "Collision Rate (%)", "Failed");
  out << line << std::string(78, '-') << "\n";
  for (const BenchReport& r : reports) {
    std::snprintf(line, sizeof(line), "%-22s | %-18s | %-18s | %zu\n", r.policy_tag.c_str(),
                  fmt_rate(r.success_rate).c_str(), fmt_rate(r.collision_rate).c_str(),
                  r.failed_queries);
    out << line;
  }
  out << "(mean +- sample std over repeats)\n";
  return out.str();
}

std::string format_table(const AblationReport& report) { return format_table(report.reports); }

}  // namespace pf2mp
