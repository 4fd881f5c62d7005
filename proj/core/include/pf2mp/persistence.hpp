// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

// Binary artifact formats. All numbers are little-endian; floats are IEEE-754
// binary64. Each format starts with a 4-byte magic and a u32 version, and
// loading is all-or-nothing: any malformed, truncated or invariant-violating
// input throws FormatError.
//
//   PFDM  u32 version, u32 count, u32 horizon, u32 dim,
//         per demo: start[dim], goal[dim], waypoints[horizon * dim],
//         then scale0, offset0, scale1, offset1 once,
//         then a u32-length-prefixed JSON config echo.
//   PFCK  u32 version, u32 n_dims, u32 layer_dims[n_dims], u32 obs_dim,
//         u32 activation (0 relu, 1 tanh), u32 time_features, u32 action_skip (0/1),
//         u64 n_params, params[n_params] (W0, b0, W1, b1, ..., skip gate),
//         JSON config echo, u64 seed.
//   PFPF  u32 version, u32 dim, u32 M, points[M * dim], h, u32 kernel (0 gaussian),
//         u32 K, anchors[K * dim], threshold, quantile, alpha, cap, JSON config echo.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pf2mp/mazeworld.hpp"
#include "pf2mp/nnet.hpp"
#include "pf2mp/potential.hpp"

namespace pf2mp {

inline constexpr std::uint32_t kFormatVersion = 1;

struct LoadedDemoSet {
  DemoSet demos;
  std::string config_json;
};

std::vector<std::uint8_t> encode_demoset(const DemoSet& demos, const std::string& config_json);
// The maze is not stored in the file; invariants are checked against `maze`.
LoadedDemoSet decode_demoset(std::span<const std::uint8_t> bytes, const MazeWorld& maze);
void save_demoset(const std::filesystem::path& path, const DemoSet& demos,
                  const std::string& config_json);
LoadedDemoSet load_demoset(const std::filesystem::path& path, const MazeWorld& maze);

struct Checkpoint {
  nnet::VectorFieldNet net;
  std::string config_json;
  std::uint64_t seed = 0;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct FieldFile {
  PotentialField field;
  std::string config_json;
};

std::vector<std::uint8_t> encode_field(const FieldFile& file);
FieldFile decode_field(std::span<const std::uint8_t> bytes);
void save_field(const std::filesystem::path& path, const FieldFile& file);
FieldFile load_field(const std::filesystem::path& path);

}  // namespace pf2mp
