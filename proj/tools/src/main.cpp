// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pf2mp/app/commands.hpp"
#include "pf2mp/app/run_config.hpp"
#include "pf2mp/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kArtifact = 3, kNumeric = 4 };

struct Flags {
  std::optional<std::string> config;
  std::optional<std::string> maze;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> demos;
  std::optional<std::string> checkpoint;
  std::optional<std::string> field;
  std::optional<std::string> policy;
  std::optional<double> lambda;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> repeats;
  std::optional<std::string> lambdas;
};

pf2mp::app::RunConfig resolve(const Flags& f) {
  pf2mp::app::RunConfig cfg;
  if (f.config) cfg = pf2mp::app::RunConfig::load(*f.config);
  if (f.maze) cfg.maze = *f.maze;
  if (f.out) cfg.out_dir = *f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.policy) cfg.policy = *f.policy;
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.steps) cfg.steps = *f.steps;
  if (f.episodes) cfg.episodes = *f.episodes;
  if (f.repeats) cfg.repeats = *f.repeats;
  if (f.lambdas) cfg.lambdas = pf2mp::app::parse_lambda_list(*f.lambdas);
  cfg.validate();
  return cfg;
}

int run(const std::string& command, const Flags& flags) {
  namespace app = pf2mp::app;
  const app::RunConfig cfg = resolve(flags);
  const auto path_or = [](const std::optional<std::string>& p, std::filesystem::path fallback) {
    return p ? std::filesystem::path(*p) : fallback;
  };
  const auto demos = path_or(flags.demos, app::default_demos_path(cfg));
  const auto checkpoint = path_or(flags.checkpoint, app::default_checkpoint_path(cfg));
  std::optional<std::filesystem::path> field;
  if (flags.field) field = *flags.field;

  if (command == "gen-demos") {
    app::cmd_gen_demos(cfg, demos, std::cout);
  } else if (command == "train") {
    app::cmd_train(cfg, demos, checkpoint, std::cout);
  } else if (command == "build-field") {
    app::cmd_build_field(cfg, demos, field.value_or(app::default_field_path(cfg)), std::cout);
  } else if (command == "eval") {
    if (cfg.policy == "pf2mp" && !field) field = app::default_field_path(cfg);
    app::cmd_eval(cfg, checkpoint, field, std::cout);
  } else if (command == "ablate") {
    app::cmd_ablate(cfg, checkpoint, field.value_or(app::default_field_path(cfg)), std::cout);
  } else if (command == "rollout") {
    if (cfg.policy == "pf2mp" && !field) field = app::default_field_path(cfg);
    app::cmd_rollout(cfg, checkpoint, field, std::cout);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"pf2mp: potential-field-guided flow matching policies on 2D mazes"};
  cli.require_subcommand(1);
  Flags f;
  cli.add_option("--config", f.config, "JSON run configuration");
  cli.add_option("--maze", f.maze, "medium-like, large-like, or a maze text file");
  cli.add_option("--out", f.out, "output directory");
  cli.add_option("--seed", f.seed, "base seed");
  cli.add_option("--demos", f.demos, "demonstration file (PFDM)");
  cli.add_option("--checkpoint", f.checkpoint, "policy checkpoint (PFCK)");
  cli.add_option("--field", f.field, "potential field file (PFPF)");
  cli.add_option("--policy", f.policy, "fmp or pf2mp")->check(CLI::IsMember({"fmp", "pf2mp"}));
  cli.add_option("--lambda", f.lambda, "guidance weight");
  cli.add_option("--steps", f.steps, "Euler integration steps");
  cli.add_option("--episodes", f.episodes, "evaluation episodes per repeat");
  cli.add_option("--repeats", f.repeats, "evaluation repeats");
  cli.add_option("--lambdas", f.lambdas, "comma-separated guidance weights for ablate");

  const char* commands[][2] = {
      {"gen-demos", "generate expert demonstrations"},
      {"train", "train the flow-matching policy"},
      {"build-field", "build the potential field from demonstrations"},
      {"eval", "evaluate a policy on the maze benchmark"},
      {"ablate", "sweep the guidance weight"},
      {"rollout", "dump one executed episode as CSV"}};
  for (const auto& c : commands) cli.add_subcommand(c[0], c[1])->fallthrough();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    return run(command, f);
  } catch (const pf2mp::ConfigError& e) {
    std::cerr << command << ": config error: " << e.what() << "\n";
    return kConfig;
  } catch (const pf2mp::FormatError& e) {
    std::cerr << command << ": artifact error: " << e.what() << "\n";
    return kArtifact;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << command << ": I/O error: " << e.what() << "\n";
    return kArtifact;
  } catch (const pf2mp::NumericError& e) {
    std::cerr << command << ": numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << command << ": error: " << e.what() << "\n";
    return kOther;
  }
}
