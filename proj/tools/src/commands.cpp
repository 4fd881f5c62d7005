// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/app/commands.hpp"

#include <cstdio>
#include <fstream>
#include <string>

#include "pf2mp/errors.hpp"
#include "pf2mp/persistence.hpp"

namespace pf2mp::app {
namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

Checkpoint load_policy_checkpoint(const fs::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.net.obs_dim() != 4 || ckpt.net.output_dim() % 2 != 0)
    throw FormatError(path.string() + ": checkpoint is not a 2D maze policy");
  return ckpt;
}

Policy make_policy(const RunConfig& cfg, const nnet::VectorFieldNet& net,
                   const PotentialField* field) {
  const InferenceConfig inference = cfg.inference_config();
  if (cfg.policy == "fmp") return make_fmp_policy(net, inference);
  if (field == nullptr) throw ConfigError("policy 'pf2mp' needs --field");
  return make_pf2mp_policy(net, *field, inference);
}

std::string policy_tag(const RunConfig& cfg) {
  if (cfg.policy == "fmp") return "fmp";
  char tag[64];
  std::snprintf(tag, sizeof(tag), "pf2mp(lambda=%g)", cfg.lambda);
  return tag;
}

}  // namespace

fs::path default_demos_path(const RunConfig& cfg) { return cfg.out_dir / "demos.pfdm"; }
fs::path default_checkpoint_path(const RunConfig& cfg) { return cfg.out_dir / "checkpoint.pfck"; }
fs::path default_field_path(const RunConfig& cfg) { return cfg.out_dir / "field.pfpf"; }

void cmd_gen_demos(const RunConfig& cfg, const fs::path& demos_out, std::ostream& log) {
  const MazeWorld maze = cfg.load_maze();
  const DemoSet demos =
      gen_demoset(maze, cfg.demo_count, cfg.demo_seed(), cfg.expert_config(), cfg.pose_config());
  ensure_parent(demos_out);
  save_demoset(demos_out, demos, cfg.to_json());
  log << "gen-demos: " << demos.demos.size() << " demonstrations, horizon " << demos.horizon
      << ", maze " << maze.name() << " -> " << demos_out.string() << "\n";
}

void cmd_train(const RunConfig& cfg, const fs::path& demos_path, const fs::path& checkpoint_out,
               std::ostream& log) {
  const MazeWorld maze = cfg.load_maze();
  const LoadedDemoSet loaded = load_demoset(demos_path, maze);
  if (loaded.demos.horizon != cfg.horizon)
    throw ConfigError("horizon " + std::to_string(cfg.horizon) + " does not match the demo file (" +
                      std::to_string(loaded.demos.horizon) + ")");
  const std::vector<TrainPair> pairs = loaded.demos.training_pairs();

  Checkpoint ckpt{nnet::VectorFieldNet(cfg.net_config(), cfg.init_seed()), cfg.to_json(), cfg.seed};
  const TrainConfig train_cfg = cfg.train_config();
  const TrainResult result =
      train(ckpt.net, pairs, train_cfg, cfg.train_seed(), [&](std::size_t epoch, double loss) {
        if ((epoch + 1) % 50 == 0 || epoch == 0 || epoch + 1 == train_cfg.epochs)
          log << "train: epoch " << epoch + 1 << "/" << train_cfg.epochs << " loss " << loss << "\n";
      });

  ensure_parent(checkpoint_out);
  save_checkpoint(checkpoint_out, ckpt);
  std::string csv = "epoch,loss\n";
  char row[64];
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::snprintf(row, sizeof(row), "%zu,%.17g\n", e, result.epoch_loss[e]);
    csv += row;
  }
  const fs::path csv_path = checkpoint_out.parent_path() / "loss.csv";
  write_text(csv_path, csv);
  log << "train: " << ckpt.net.parameter_count() << " parameters -> " << checkpoint_out.string()
      << ", loss curve -> " << csv_path.string() << "\n";
}

void cmd_build_field(const RunConfig& cfg, const fs::path& demos_path, const fs::path& field_out,
                     std::ostream& log) {
  const MazeWorld maze = cfg.load_maze();
  const LoadedDemoSet loaded = load_demoset(demos_path, maze);
  const std::vector<double> points = loaded.demos.normalized_waypoints();
  KdeModel kde = build_kde(points, 2, cfg.subsample, cfg.bandwidth_rule(), cfg.field_seed());
  FieldFile file{build_potential_field(std::move(kde), cfg.potential_config()), cfg.to_json()};
  ensure_parent(field_out);
  save_field(field_out, file);
  log << "build-field: M=" << file.field.kde.size() << " h=" << file.field.kde.bandwidth()
      << " anchors=" << file.field.safe.size() << " threshold=" << file.field.safe.threshold
      << " -> " << field_out.string() << "\n";
}

BenchReport cmd_eval(const RunConfig& cfg, const fs::path& checkpoint,
                     const std::optional<fs::path>& field_path, std::ostream& log) {
  const MazeWorld maze = cfg.load_maze();
  const Checkpoint ckpt = load_policy_checkpoint(checkpoint);
  std::optional<FieldFile> field;
  if (cfg.policy == "pf2mp") {
    if (!field_path) throw ConfigError("policy 'pf2mp' needs --field");
    field = load_field(*field_path);
  }
  const BenchSuite suite = make_suite(maze, cfg.episodes, cfg.pose_config(), cfg.suite_seed());
  const Normalization norm = Normalization::from_bounds(maze.bounds());
  const Policy policy = make_policy(cfg, ckpt.net, field ? &field->field : nullptr);
  BenchReport report = run_bench(maze, norm, policy, suite, cfg.bench_options(), policy_tag(cfg));
  report.config_json = cfg.to_json();

  const fs::path json_path = cfg.out_dir / ("eval_" + cfg.policy + ".json");
  const std::string table = format_table({report});
  write_text(json_path, to_json(report) + "\n");
  write_text(cfg.out_dir / ("eval_" + cfg.policy + ".txt"), table);
  log << table << "eval: report -> " << json_path.string() << "\n";
  return report;
}

AblationReport cmd_ablate(const RunConfig& cfg, const fs::path& checkpoint,
                          const fs::path& field_path, std::ostream& log) {
  const MazeWorld maze = cfg.load_maze();
  const Checkpoint ckpt = load_policy_checkpoint(checkpoint);
  const FieldFile field = load_field(field_path);
  const BenchSuite suite = make_suite(maze, cfg.episodes, cfg.pose_config(), cfg.suite_seed());
  const Normalization norm = Normalization::from_bounds(maze.bounds());
  InferenceConfig inference = cfg.inference_config();
  AblationReport report = run_lambda_ablation(maze, norm, ckpt.net, field.field, suite, cfg.lambdas,
                                              inference, cfg.bench_options());
  report.config_json = cfg.to_json();
  for (BenchReport& r : report.reports) r.config_json = report.config_json;

  const fs::path json_path = cfg.out_dir / "ablation.json";
  const std::string table = format_table(report);
  write_text(json_path, to_json(report) + "\n");
  write_text(cfg.out_dir / "ablation.txt", table);
  log << table << "ablate: report -> " << json_path.string() << "\n";
  return report;
}

void cmd_rollout(const RunConfig& cfg, const fs::path& checkpoint,
                 const std::optional<fs::path>& field_path, std::ostream& log) {
  const MazeWorld maze = cfg.load_maze();
  const Checkpoint ckpt = load_policy_checkpoint(checkpoint);
  std::optional<FieldFile> field;
  if (cfg.policy == "pf2mp") {
    if (!field_path) throw ConfigError("policy 'pf2mp' needs --field");
    field = load_field(*field_path);
  }
  const BenchSuite suite = make_suite(maze, cfg.episodes, cfg.pose_config(), cfg.suite_seed());
  const Normalization norm = Normalization::from_bounds(maze.bounds());
  const Policy policy = make_policy(cfg, ckpt.net, field ? &field->field : nullptr);
  const Pose& pose = suite.episodes[cfg.rollout_episode];
  Rng rng(episode_seed(suite.base_seed, 0, cfg.rollout_episode));
  RolloutConfig rollout_cfg;
  rollout_cfg.success_radius = cfg.success_radius;
  const EpisodeResult ep = rollout(maze, norm, policy, pose.start, pose.goal, rollout_cfg, rng);

  std::string csv = "step,x,y,segment_collides\n";
  char row[128];
  Point2 prev = pose.start;
  std::snprintf(row, sizeof(row), "0,%.17g,%.17g,0\n", prev.x, prev.y);
  csv += row;
  for (std::size_t i = 0; i < ep.trajectory.size(); ++i) {
    const Point2 p = ep.trajectory[i];
    const int hit = segment_collides(maze, prev, p) ? 1 : 0;
    std::snprintf(row, sizeof(row), "%zu,%.17g,%.17g,%d\n", i + 1, p.x, p.y, hit);
    csv += row;
    prev = p;
  }
  const fs::path csv_path = cfg.out_dir / "rollout.csv";
  write_text(csv_path, csv);
  log << "rollout: episode " << cfg.rollout_episode << " success=" << ep.success
      << " collided=" << ep.collided << " -> " << csv_path.string() << "\n";
}

}  // namespace pf2mp::app
