// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/persistence.hpp"

#include <cmath>

#include "pf2mp/binary_io.hpp"
#include "pf2mp/errors.hpp"

namespace pf2mp {
namespace {

void check_version(io::ByteReader& in, const char* what) {
  const std::uint32_t version = in.u32();
  if (version != kFormatVersion)
    throw FormatError(std::string(what) + ": unsupported version " + std::to_string(version));
}

std::vector<double> flatten_points(std::span<const Point2> pts) {
  std::vector<double> out;
  out.reserve(pts.size() * 2);
  for (Point2 p : pts) {
    out.push_back(p.x);
    out.push_back(p.y);
  }
  return out;
}

// Re-throws any library error raised while validating a decoded artifact as
// a FormatError so callers see a single failure kind.
template <typename F>
auto validated(const char* what, F&& f) {
  try {
    return f();
  } catch (const FormatError&) {
    throw;
  } catch (const Error& e) {
    throw FormatError(std::string(what) + ": invariant violated: " + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> encode_demoset(const DemoSet& demos, const std::string& config_json) {
  io::ByteWriter out;
  out.magic("PFDM");
  out.u32(kFormatVersion);
  out.u32(static_cast<std::uint32_t>(demos.demos.size()));
  out.u32(static_cast<std::uint32_t>(demos.horizon));
  out.u32(2);
  for (const Demonstration& d : demos.demos) {
    out.f64(d.start.x);
    out.f64(d.start.y);
    out.f64(d.goal.x);
    out.f64(d.goal.y);
    out.f64s(flatten_points(d.waypoints));
  }
  const Normalization& n = demos.normalization;
  out.f64(n.scale[0]);
  out.f64(n.offset[0]);
  out.f64(n.scale[1]);
  out.f64(n.offset[1]);
  out.string(config_json);
  return out.bytes();
}

LoadedDemoSet decode_demoset(std::span<const std::uint8_t> bytes, const MazeWorld& maze) {
  io::ByteReader in(bytes, "PFDM");
  in.expect_magic("PFDM");
  check_version(in, "PFDM");
  const std::uint32_t count = in.u32();
  const std::uint32_t horizon = in.u32();
  const std::uint32_t dim = in.u32();
  if (dim != 2) throw FormatError("PFDM: only 2D demonstrations are supported");
  if (horizon < 2) throw FormatError("PFDM: horizon must be >= 2");

  LoadedDemoSet loaded{DemoSet{{}, maze, {}, horizon}, {}};
  for (std::uint32_t i = 0; i < count; ++i) {
    Demonstration d;
    d.start = {in.f64(), in.f64()};
    d.goal = {in.f64(), in.f64()};
    const std::vector<double> flat = in.f64s(static_cast<std::size_t>(horizon) * 2);
    d.waypoints.resize(horizon);
    for (std::size_t k = 0; k < horizon; ++k) d.waypoints[k] = {flat[2 * k], flat[2 * k + 1]};
    loaded.demos.demos.push_back(std::move(d));
  }
  Normalization& n = loaded.demos.normalization;
  n.scale[0] = in.f64();
  n.offset[0] = in.f64();
  n.scale[1] = in.f64();
  n.offset[1] = in.f64();
  loaded.config_json = in.string();
  in.expect_end();

  for (double s : n.scale)
    if (!(std::isfinite(s) && s != 0.0)) throw FormatError("PFDM: normalization is not invertible");
  validated("PFDM", [&] {
    loaded.demos.validate();
    return 0;
  });
  return loaded;
}

void save_demoset(const std::filesystem::path& path, const DemoSet& demos,
                  const std::string& config_json) {
  io::write_file(path, encode_demoset(demos, config_json));
}

LoadedDemoSet load_demoset(const std::filesystem::path& path, const MazeWorld& maze) {
  return decode_demoset(io::read_file(path), maze);
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const nnet::VectorFieldNet& net = ckpt.net;
  io::ByteWriter out;
  out.magic("PFCK");
  out.u32(kFormatVersion);
  out.u32(static_cast<std::uint32_t>(net.layer_dims().size()));
  for (std::size_t d : net.layer_dims()) out.u32(static_cast<std::uint32_t>(d));
  out.u32(static_cast<std::uint32_t>(net.obs_dim()));
  out.u32(static_cast<std::uint32_t>(net.activation()));
  out.u32(static_cast<std::uint32_t>(net.time_features()));
  out.u32(net.has_action_skip() ? 1 : 0);
  const std::vector<double> flat = net.params().flatten();
  out.u64(flat.size());
  out.f64s(flat);
  out.string(ckpt.config_json);
  out.u64(ckpt.seed);
  return out.bytes();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::ByteReader in(bytes, "PFCK");
  in.expect_magic("PFCK");
  check_version(in, "PFCK");
  const std::uint32_t n_dims = in.u32();
  if (n_dims < 2 || n_dims > 64) throw FormatError("PFCK: implausible layer count");
  std::vector<std::size_t> dims(n_dims);
  for (auto& d : dims) {
    d = in.u32();
    if (d == 0) throw FormatError("PFCK: zero-width layer");
  }
  const std::uint32_t obs_dim = in.u32();
  const std::uint32_t act = in.u32();
  if (act > 1) throw FormatError("PFCK: unknown activation tag " + std::to_string(act));
  const std::uint32_t time_features = in.u32();
  const std::uint32_t skip = in.u32();
  if (skip > 1) throw FormatError("PFCK: bad skip flag " + std::to_string(skip));
  const std::uint64_t n_params = in.u64();

  nnet::ParameterSet params;
  std::uint64_t expected = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    params.weights.emplace_back(dims[l + 1], dims[l]);
    params.biases.emplace_back(dims[l + 1], 0.0);
    expected += static_cast<std::uint64_t>(dims[l + 1]) * (dims[l] + 1);
  }
  if (skip == 1) {
    params.skip.assign(nnet::VectorFieldNet::skip_size(time_features), 0.0);
    expected += params.skip.size();
  }
  if (n_params != expected)
    throw FormatError("PFCK: parameter count " + std::to_string(n_params) +
                      " does not match layer_dims (" + std::to_string(expected) + ")");
  params.assign_flat(in.f64s(n_params));
  std::string config = in.string();
  const std::uint64_t seed = in.u64();
  in.expect_end();
  if (!params.all_finite()) throw FormatError("PFCK: non-finite parameters");

  return validated("PFCK", [&] {
    return Checkpoint{nnet::VectorFieldNet(std::move(dims), obs_dim, static_cast<nnet::Activation>(act),
                                           time_features, std::move(params)),
                      std::move(config), seed};
  });
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  io::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

std::vector<std::uint8_t> encode_field(const FieldFile& file) {
  const PotentialField& f = file.field;
  io::ByteWriter out;
  out.magic("PFPF");
  out.u32(kFormatVersion);
  out.u32(static_cast<std::uint32_t>(f.kde.dim()));
  out.u32(static_cast<std::uint32_t>(f.kde.size()));
  out.f64s(f.kde.points());
  out.f64(f.kde.bandwidth());
  out.u32(static_cast<std::uint32_t>(f.kde.kernel()));
  out.u32(static_cast<std::uint32_t>(f.safe.size()));
  out.f64s(f.safe.anchors);
  out.f64(f.safe.threshold);
  out.f64(f.safe.quantile);
  out.f64(f.alpha);
  out.f64(f.log_density_cap);
  out.string(file.config_json);
  return out.bytes();
}

FieldFile decode_field(std::span<const std::uint8_t> bytes) {
  io::ByteReader in(bytes, "PFPF");
  in.expect_magic("PFPF");
  check_version(in, "PFPF");
  const std::uint32_t dim = in.u32();
  const std::uint32_t m = in.u32();
  if (dim == 0 || m == 0) throw FormatError("PFPF: empty KDE");
  std::vector<double> points = in.f64s(static_cast<std::size_t>(m) * dim);
  const double h = in.f64();
  const std::uint32_t kernel = in.u32();
  if (kernel != static_cast<std::uint32_t>(KernelKind::gaussian))
    throw FormatError("PFPF: unknown kernel tag " + std::to_string(kernel));
  const std::uint32_t k = in.u32();
  if (k == 0) throw FormatError("PFPF: empty safe set");
  SafeSet safe;
  safe.dim = dim;
  safe.anchors = in.f64s(static_cast<std::size_t>(k) * dim);
  safe.threshold = in.f64();
  safe.quantile = in.f64();
  const double alpha = in.f64();
  const double cap = in.f64();
  std::string config = in.string();
  in.expect_end();

  return validated("PFPF", [&] {
    KdeModel kde(std::move(points), dim, h);
    for (std::size_t i = 0; i < safe.size(); ++i) {
      if (kde.log_density(safe.anchor(i)) < safe.threshold)
        throw FormatError("PFPF: anchor " + std::to_string(i) + " is below the density threshold");
    }
    if (!(safe.quantile > 0.0 && safe.quantile < 1.0)) throw FormatError("PFPF: quantile outside (0, 1)");
    PotentialField field{std::move(kde), std::move(safe), alpha, cap};
    field.validate();
    return FieldFile{std::move(field), std::move(config)};
  });
}

void save_field(const std::filesystem::path& path, const FieldFile& file) {
  io::write_file(path, encode_field(file));
}

FieldFile load_field(const std::filesystem::path& path) { return decode_field(io::read_file(path)); }

}  // namespace pf2mp
