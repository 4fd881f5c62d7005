// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/app/run_config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pf2mp/errors.hpp"
#include "pf2mp/rng.hpp"

namespace pf2mp::app {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "maze",          "out_dir",          "seed",          "horizon",
      "demo_count",    "pose_min_separation", "pose_clearance", "expert_clearance",
      "hidden",        "activation",       "time_features", "action_skip",
      "epochs",        "batch_size",       "learning_rate", "lr_schedule",
      "final_lr_fraction", "subsample",    "bandwidth",     "quantile",
      "alpha",         "cap",              "policy",        "lambda",
      "steps",         "lambdas",          "episodes",      "repeats",
      "threads",       "success_radius",   "rollout_episode"};
  return keys;
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

template <typename T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    bad(key, "wrong type");
  }
}

std::size_t get_count(const json& j, const std::string& key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    bad(key, "expected a non-negative integer");
  return j.get<std::size_t>();
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  return j.get<double>();
}

void require(bool ok, const char* key, const char* why) {
  if (!ok) bad(key, why);
}

}  // namespace

void RunConfig::validate() const {
  require(!maze.empty(), "maze", "must not be empty");
  require(horizon >= 2, "horizon", "must be >= 2");
  require(demo_count >= 1, "demo_count", "must be >= 1");
  require(std::isfinite(pose_min_separation) && pose_min_separation >= 0.0, "pose_min_separation",
          "must be finite and >= 0");
  require(pose_clearance >= 0.0 && pose_clearance < 0.5, "pose_clearance", "must lie in [0, 0.5)");
  require(expert_clearance >= 0.0 && expert_clearance < 0.5, "expert_clearance",
          "must lie in [0, 0.5)");
  require(!hidden.empty(), "hidden", "needs at least one hidden layer");
  for (std::size_t h : hidden) require(h > 0, "hidden", "widths must be > 0");
  require(epochs >= 1, "epochs", "must be >= 1");
  require(batch_size >= 1, "batch_size", "must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate", "must be > 0");
  require(final_lr_fraction >= 0.0 && final_lr_fraction <= 1.0, "final_lr_fraction",
          "must lie in [0, 1]");
  require(subsample >= 1, "subsample", "must be >= 1");
  require(!bandwidth || (std::isfinite(*bandwidth) && *bandwidth > 0.0), "bandwidth",
          "must be 'scott' or a positive number");
  require(quantile > 0.0 && quantile < 1.0, "quantile", "must lie in (0, 1)");
  require(std::isfinite(alpha) && alpha < 0.0, "alpha", "must be negative");
  require(cap_mode != CapMode::value || std::isfinite(cap_value), "cap", "must be finite");
  require(policy == "fmp" || policy == "pf2mp", "policy", "must be 'fmp' or 'pf2mp'");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda", "must be finite and >= 0");
  require(steps >= 1, "steps", "must be >= 1");
  require(!lambdas.empty(), "lambdas", "must not be empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require(std::isfinite(lambdas[i]) && lambdas[i] >= 0.0, "lambdas", "values must be >= 0");
    require(i == 0 || lambdas[i] > lambdas[i - 1], "lambdas", "values must be strictly increasing");
  }
  require(episodes >= 1, "episodes", "must be >= 1");
  require(repeats >= 1, "repeats", "must be >= 1");
  require(threads >= 1, "threads", "must be >= 1");
  require(std::isfinite(success_radius) && success_radius > 0.0, "success_radius", "must be > 0");
  require(rollout_episode < episodes, "rollout_episode", "must be < episodes");
}

std::string RunConfig::to_json() const {
  json j;
  j["maze"] = maze;
  j["out_dir"] = out_dir.generic_string();
  j["seed"] = seed;
  j["horizon"] = horizon;
  j["demo_count"] = demo_count;
  j["pose_min_separation"] = pose_min_separation;
  j["pose_clearance"] = pose_clearance;
  j["expert_clearance"] = expert_clearance;
  j["hidden"] = hidden;
  j["activation"] = std::string(nnet::to_string(activation));
  j["time_features"] = time_features;
  j["action_skip"] = action_skip;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["lr_schedule"] = lr_schedule == LrSchedule::cosine ? "cosine" : "constant";
  j["final_lr_fraction"] = final_lr_fraction;
  j["subsample"] = subsample;
  j["bandwidth"] = bandwidth ? json(*bandwidth) : json("scott");
  j["quantile"] = quantile;
  j["alpha"] = alpha;
  switch (cap_mode) {
    case CapMode::threshold: j["cap"] = "threshold"; break;
    case CapMode::none: j["cap"] = "none"; break;
    case CapMode::value: j["cap"] = cap_value; break;
  }
  j["policy"] = policy;
  j["lambda"] = lambda;
  j["steps"] = steps;
  j["lambdas"] = lambdas;
  j["episodes"] = episodes;
  j["repeats"] = repeats;
  j["threads"] = threads;
  j["success_radius"] = success_radius;
  j["rollout_episode"] = rollout_episode;
  return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text, const RunConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  RunConfig c = base;
  auto has = [&](const char* k) { return j.contains(k); };
  if (has("maze")) c.maze = get_as<std::string>(j["maze"], "maze");
  if (has("out_dir")) c.out_dir = get_as<std::string>(j["out_dir"], "out_dir");
  if (has("seed")) c.seed = get_count(j["seed"], "seed");
  if (has("horizon")) c.horizon = get_count(j["horizon"], "horizon");
  if (has("demo_count")) c.demo_count = get_count(j["demo_count"], "demo_count");
  if (has("pose_min_separation"))
    c.pose_min_separation = get_number(j["pose_min_separation"], "pose_min_separation");
  if (has("pose_clearance")) c.pose_clearance = get_number(j["pose_clearance"], "pose_clearance");
  if (has("expert_clearance"))
    c.expert_clearance = get_number(j["expert_clearance"], "expert_clearance");
  if (has("hidden")) {
    if (!j["hidden"].is_array()) bad("hidden", "expected an array of widths");
    c.hidden.clear();
    for (const json& h : j["hidden"]) c.hidden.push_back(get_count(h, "hidden"));
  }
  if (has("activation")) c.activation = nnet::activation_from_string(get_as<std::string>(j["activation"], "activation"));
  if (has("time_features")) c.time_features = get_count(j["time_features"], "time_features");
  if (has("action_skip")) c.action_skip = get_as<bool>(j["action_skip"], "action_skip");
  if (has("epochs")) c.epochs = get_count(j["epochs"], "epochs");
  if (has("batch_size")) c.batch_size = get_count(j["batch_size"], "batch_size");
  if (has("learning_rate")) c.learning_rate = get_number(j["learning_rate"], "learning_rate");
  if (has("lr_schedule")) {
    const auto s = get_as<std::string>(j["lr_schedule"], "lr_schedule");
    if (s == "constant") c.lr_schedule = LrSchedule::constant;
    else if (s == "cosine") c.lr_schedule = LrSchedule::cosine;
    else bad("lr_schedule", "must be 'constant' or 'cosine'");
  }
  if (has("final_lr_fraction"))
    c.final_lr_fraction = get_number(j["final_lr_fraction"], "final_lr_fraction");
  if (has("subsample")) c.subsample = get_count(j["subsample"], "subsample");
  if (has("bandwidth")) {
    const json& b = j["bandwidth"];
    if (b.is_string() && b.get<std::string>() == "scott") c.bandwidth.reset();
    else if (b.is_number()) c.bandwidth = b.get<double>();
    else bad("bandwidth", "must be 'scott' or a positive number");
  }
  if (has("quantile")) c.quantile = get_number(j["quantile"], "quantile");
  if (has("alpha")) c.alpha = get_number(j["alpha"], "alpha");
  if (has("cap")) {
    const json& cap = j["cap"];
    if (cap.is_string() && cap.get<std::string>() == "threshold") {
      c.cap_mode = CapMode::threshold;
    } else if (cap.is_string() && cap.get<std::string>() == "none") {
      c.cap_mode = CapMode::none;
    } else if (cap.is_number()) {
      c.cap_mode = CapMode::value;
      c.cap_value = cap.get<double>();
    } else {
      bad("cap", "must be 'threshold', 'none' or a number");
    }
  }
  if (has("policy")) c.policy = get_as<std::string>(j["policy"], "policy");
  if (has("lambda")) c.lambda = get_number(j["lambda"], "lambda");
  if (has("steps")) c.steps = get_count(j["steps"], "steps");
  if (has("lambdas")) {
    if (!j["lambdas"].is_array()) bad("lambdas", "expected an array of numbers");
    c.lambdas.clear();
    for (const json& l : j["lambdas"]) c.lambdas.push_back(get_number(l, "lambdas"));
  }
  if (has("episodes")) c.episodes = get_count(j["episodes"], "episodes");
  if (has("repeats")) c.repeats = get_count(j["repeats"], "repeats");
  if (has("threads")) c.threads = get_count(j["threads"], "threads");
  if (has("success_radius")) c.success_radius = get_number(j["success_radius"], "success_radius");
  if (has("rollout_episode")) c.rollout_episode = get_count(j["rollout_episode"], "rollout_episode");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

MazeWorld RunConfig::load_maze() const {
  if (maze == "medium-like") return MazeWorld::medium_like();
  if (maze == "large-like") return MazeWorld::large_like();
  return MazeWorld::load(maze);
}

PoseConfig RunConfig::pose_config() const {
  PoseConfig p;
  p.min_goal_separation = pose_min_separation;
  p.clearance_fraction = pose_clearance;
  return p;
}

ExpertConfig RunConfig::expert_config() const {
  ExpertConfig e;
  e.horizon = horizon;
  e.shortcut_clearance_fraction = expert_clearance;
  return e;
}

nnet::NetConfig RunConfig::net_config() const {
  nnet::NetConfig n;
  n.action_dim = 2 * horizon;
  n.hidden = hidden;
  n.activation = activation;
  n.time_features = time_features;
  n.action_skip = action_skip;
  return n;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = batch_size;
  t.learning_rate = learning_rate;
  t.schedule = lr_schedule;
  t.final_lr_fraction = final_lr_fraction;
  return t;
}

BandwidthRule RunConfig::bandwidth_rule() const {
  return bandwidth ? BandwidthRule::fixed(*bandwidth) : BandwidthRule::scott();
}

PotentialConfig RunConfig::potential_config() const {
  PotentialConfig p;
  p.quantile = quantile;
  p.alpha = alpha;
  p.cap_mode = cap_mode;
  p.cap_value = cap_value;
  return p;
}

InferenceConfig RunConfig::inference_config() const {
  InferenceConfig i;
  i.steps = steps;
  i.guidance_weight = policy == "fmp" ? 0.0 : lambda;
  return i;
}

BenchOptions RunConfig::bench_options() const {
  BenchOptions b;
  b.repeats = repeats;
  b.threads = threads;
  b.rollout.success_radius = success_radius;
  return b;
}

std::uint64_t RunConfig::demo_seed() const { return derive_seed(seed, 1); }
std::uint64_t RunConfig::init_seed() const { return derive_seed(seed, 2); }
std::uint64_t RunConfig::train_seed() const { return derive_seed(seed, 3); }
std::uint64_t RunConfig::field_seed() const { return derive_seed(seed, 4); }
std::uint64_t RunConfig::suite_seed() const { return derive_seed(seed, 5); }

std::vector<double> parse_lambda_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("--lambdas: cannot parse '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw ConfigError("--lambdas: cannot parse '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--lambdas: empty list");
  return out;
}

}  // namespace pf2mp::app
