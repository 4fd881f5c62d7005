// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "pf2mp/app/run_config.hpp"
#include "pf2mp/evalbench.hpp"

namespace pf2mp::app {

namespace fs = std::filesystem;

// Default artifact locations inside cfg.out_dir.
fs::path default_demos_path(const RunConfig& cfg);
fs::path default_checkpoint_path(const RunConfig& cfg);
fs::path default_field_path(const RunConfig& cfg);

// Writes a PFDM file with cfg.demo_count demonstrations.
void cmd_gen_demos(const RunConfig& cfg, const fs::path& demos_out, std::ostream& log);

// Trains from a PFDM file; writes a PFCK checkpoint and `loss.csv` next to it.
void cmd_train(const RunConfig& cfg, const fs::path& demos, const fs::path& checkpoint_out,
               std::ostream& log);

// Subsample -> KDE -> safe set -> potential field; writes a PFPF file.
void cmd_build_field(const RunConfig& cfg, const fs::path& demos, const fs::path& field_out,
                     std::ostream& log);

// Evaluates cfg.policy over a fresh suite; writes eval_<policy>.json and
// eval_<policy>.txt into cfg.out_dir. `field` is required for pf2mp.
BenchReport cmd_eval(const RunConfig& cfg, const fs::path& checkpoint,
                     const std::optional<fs::path>& field, std::ostream& log);

// Lambda sweep over cfg.lambdas; writes ablation.json and ablation.txt.
AblationReport cmd_ablate(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& field,
                          std::ostream& log);

// Single episode (cfg.rollout_episode of the suite, repeat 0) dumped as
// rollout.csv: step, x, y, segment_collides.
void cmd_rollout(const RunConfig& cfg, const fs::path& checkpoint,
                 const std::optional<fs::path>& field, std::ostream& log);

}  // namespace pf2mp::app
