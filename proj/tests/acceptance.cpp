// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pf2mp/app/commands.hpp"
#include "pf2mp/app/run_config.hpp"
#include "pf2mp/persistence.hpp"

namespace pf2mp {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

const fs::path kWork = PF2MP_TEST_WORK_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int g_failures = 0;

void report(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double took = seconds_since(start);
  const bool in_time = limit_s <= 0.0 || took < limit_s;
  const bool pass = out.pass && in_time;
  if (!pass) ++g_failures;
  const std::string limit = limit_s > 0.0 ? fmt(" (limit %.0fs%s)", limit_s, in_time ? "" : ", exceeded") : "";
  std::printf("%s criterion %d (%s): %s; %.1fs%s\n", pass ? "PASS" : "FAIL", id, name, out.detail.c_str(),
              took, limit.c_str());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> slurp_bytes(const fs::path& p) {
  const std::string s = slurp(p);
  return {s.begin(), s.end()};
}

double fd_rel(double fd, double exact, double floor) {
  return std::abs(fd - exact) / std::max({std::abs(fd), std::abs(exact), floor});
}

// Smallest |pre-activation| over the hidden units for one embedded input.
double min_hidden_margin(const nnet::VectorFieldNet& net, const std::vector<double>& input) {
  const auto& p = net.params();
  std::vector<double> x = input;
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l + 1 < p.weights.size(); ++l) {
    const auto& w = p.weights[l];
    std::vector<double> y(w.rows());
    for (std::size_t o = 0; o < w.rows(); ++o) {
      double s = p.biases[l][o];
      for (std::size_t k = 0; k < w.cols(); ++k) s += w(o, k) * x[k];
      margin = std::min(margin, std::abs(s));
      y[o] = std::max(s, 0.0);
    }
    x = std::move(y);
  }
  return margin;
}

Observation random_obs(Rng& rng) {
  return {{rng.uniform(-1, 1), rng.uniform(-1, 1)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
}

PotentialField random_field(std::uint64_t seed, double alpha) {
  Rng rng(seed);
  const std::size_t m = 20 + rng.below(60);
  std::vector<double> pts(2 * m);
  for (double& v : pts) v = rng.uniform(-0.9, 0.9);
  PotentialConfig cfg;
  cfg.quantile = rng.uniform(0.05, 0.5);
  cfg.alpha = alpha;
  return build_potential_field(KdeModel(pts, 2, rng.uniform(0.15, 0.5)), cfg);
}

// Loss gradients of the flow-matching objective and KDE/potential gradients
// against central finite differences.
Outcome gradient_checks() {
  double worst_loss = 0.0;
  std::size_t nets = 0, params = 0;
  for (std::uint64_t s = 0; s < 24; ++s) {
    const auto act = s % 2 == 0 ? nnet::Activation::tanh : nnet::Activation::relu;
    const std::size_t width = 6 + 2 * (s % 5);
    const nnet::VectorFieldNet net = oracle::random_net(2 * (2 + s % 4), {width, width + 2}, act, 100 + s);
    Rng rng(200 + s);
    std::vector<TrainSample> batch;
    // ReLU nets need every hidden unit clear of its kink for FD to apply.
    while (batch.size() < 4) {
      TrainSample ts;
      ts.obs = random_obs(rng);
      ts.source = sample_prior(net.action_dim() / 2, 2, rng);
      ts.target = sample_prior(net.action_dim() / 2, 2, rng);
      ts.t = rng.uniform();
      const ActionSeries at = interpolate_state(ts.source, ts.target, ts.t);
      const auto row = oracle::naive_embed(at.flat(), ts.t, ts.obs.flatten(), net.time_features());
      if (act == nnet::Activation::relu && min_hidden_margin(net, row) < 1e-3) continue;
      batch.push_back(ts);
    }
    const std::vector<double> exact = fm_loss_and_grads(net, batch).grads.flatten();
    std::vector<double> flat = net.params().flatten();
    nnet::VectorFieldNet probe = net;
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double keep = flat[i];
      flat[i] = keep + 1e-5;
      probe.mutable_params().assign_flat(flat);
      const double up = fm_loss_and_grads(probe, batch).loss;
      flat[i] = keep - 1e-5;
      probe.mutable_params().assign_flat(flat);
      const double down = fm_loss_and_grads(probe, batch).loss;
      flat[i] = keep;
      worst_loss = std::max(worst_loss, fd_rel((up - down) / 2e-5, exact[i], 1e-4));
    }
    ++nets;
    params += flat.size();
  }

  double worst_kde = 0.0, worst_pot = 0.0;
  std::size_t kde_checks = 0, pot_checks = 0;
  for (std::uint64_t s = 0; s < 24; ++s) {
    const PotentialField field = random_field(300 + s, -std::ldexp(1.0, -static_cast<int>(s % 6)));
    Rng rng(400 + s);
    for (int q = 0; q < 50; ++q) {
      const std::vector<double> a{rng.uniform(-1.1, 1.1), rng.uniform(-1.1, 1.1)};
      const auto gk = field.kde.grad_log_density(a);
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> p = a, m = a;
        p[k] += 1e-6;
        m[k] -= 1e-6;
        const double fd = (field.kde.log_density(p) - field.kde.log_density(m)) / 2e-6;
        worst_kde = std::max(worst_kde, fd_rel(fd, gk[k], 1e-3));
        ++kde_checks;
      }
      // Stay off the non-smooth set: anchors, ties between anchors, the cap.
      const auto near = oracle::brute_nearest(field.safe.anchors, 2, a);
      double second = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < field.safe.size(); ++i) {
        if (i == near.index) continue;
        second = std::min(second, std::hypot(field.safe.anchors[2 * i] - a[0],
                                             field.safe.anchors[2 * i + 1] - a[1]));
      }
      const double logp = field.kde.log_density(a);
      if (near.distance < 1e-2 || second - near.distance < 1e-3) continue;
      if (std::isfinite(field.log_density_cap) && std::abs(logp - field.log_density_cap) < 1e-3) continue;
      const auto gp = potential_gradient(field, a);
      for (std::size_t k = 0; k < 2; ++k) {
        std::vector<double> p = a, m = a;
        p[k] += 1e-6;
        m[k] -= 1e-6;
        const double fd = (potential(field, p) - potential(field, m)) / 2e-6;
        worst_pot = std::max(worst_pot, fd_rel(fd, gp[k], 1e-3));
        ++pot_checks;
      }
    }
  }
  const bool pass = nets >= 20 && worst_loss < 1e-5 && worst_kde < 1e-6 && worst_pot < 1e-6;
  return {pass, fmt("loss rel %.2e over %zu nets/%zu params (tol 1e-5); kde rel %.2e over %zu, "
                    "potential rel %.2e over %zu (tol 1e-6)",
                    worst_loss, nets, params, worst_kde, kde_checks, worst_pot, pot_checks)};
}

Outcome zero_guidance_identity() {
  const MazeWorld maze = MazeWorld::large_like();
  const DemoSet demos = gen_demoset(maze, 100, 11);
  KdeModel kde = build_kde(demos.normalized_waypoints(), 2, 3000, BandwidthRule::fixed(0.3), 12);
  PotentialConfig pc;
  pc.alpha = -0.01;
  const PotentialField field = build_potential_field(std::move(kde), pc);
  const PotentialGuidance guidance(field);
  nnet::NetConfig nc;
  nnet::VectorFieldNet net = oracle::random_net(nc.action_dim, nc.hidden, nc.activation, 13);
  InferenceConfig ic;
  ic.guidance_weight = 0.0;
  Rng obs_rng(14);
  std::size_t mismatched = 0;
  const std::size_t pairs = 1000;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Observation obs = random_obs(obs_rng);
    Rng a(derive_seed(15, i, 0)), b(derive_seed(15, i, 0));
    if (!(sample_guided(net, obs, ic, guidance, a) == sample_plain(net, obs, ic, b))) ++mismatched;
  }
  return {mismatched == 0, fmt("%zu of %zu (seed, obs) pairs differ (required 0)", mismatched, pairs)};
}

Outcome oracle_checks() {
  std::size_t kde_cases = 0, nearest_cases = 0, nearest_bad = 0, seg_cases = 0, seg_bad = 0, seg_band = 0;
  double kde_worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(500 + s);
    const std::size_t m = 1 + rng.below(200);
    std::vector<double> pts(2 * m);
    for (double& v : pts) v = rng.uniform(-1.0, 1.0);
    const double h = rng.uniform(0.05, 0.6);
    const KdeModel kde(pts, 2, h);
    for (int q = 0; q < 60; ++q) {
      const std::vector<double> a{rng.uniform(-1.1, 1.1), rng.uniform(-1.1, 1.1)};
      kde_worst = std::max(kde_worst, oracle::relative_error(kde.log_density(a),
                                                             oracle::naive_log_density(pts, 2, h, a)));
      ++kde_cases;
    }
    SafeSet safe = build_safe_set(kde, rng.uniform(0.0, 0.6));
    for (int q = 0; q < 60; ++q) {
      const std::vector<double> a{rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2)};
      const NearestAnchor got = distance_to_safe(safe, a);
      const auto ref = oracle::brute_nearest(safe.anchors, 2, a);
      const auto want = safe.anchor(ref.index);
      if (got.distance != ref.distance || !std::equal(want.begin(), want.end(), got.nearest.begin(),
                                                     got.nearest.end()))
        ++nearest_bad;
      ++nearest_cases;
    }
  }
  for (const MazeWorld& maze : {MazeWorld::medium_like(), MazeWorld::large_like()}) {
    Rng rng(600);
    const Rect b = maze.bounds();
    for (int i = 0; i < 600; ++i) {
      const Point2 p{rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
      const Point2 q{rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
      const auto ref = oracle::dense_segment_oracle(maze, p, q);
      ++seg_cases;
      if (ref.in_band) {
        ++seg_band;
        continue;
      }
      if (ref.hits != segment_collides(maze, p, q)) ++seg_bad;
    }
  }
  const bool pass = kde_cases >= 1000 && nearest_cases >= 1000 && seg_cases >= 1000 &&
                    kde_worst < 1e-10 && nearest_bad == 0 && seg_bad == 0;
  return {pass, fmt("kde rel %.2e over %zu (tol 1e-10); nearest %zu/%zu wrong; segments %zu/%zu "
                    "disagree (%zu inside the 1e-6 band)",
                    kde_worst, kde_cases, nearest_bad, nearest_cases, seg_bad, seg_cases, seg_band)};
}

Outcome training_checks() {
  const app::RunConfig cfg = app::RunConfig::from_json(R"({"maze":"medium-like","demo_count":200})");
  const DemoSet demos = gen_demoset(cfg.load_maze(), cfg.demo_count, cfg.demo_seed(), cfg.expert_config(),
                                    cfg.pose_config());
  const std::vector<TrainPair> pairs = demos.training_pairs();
  nnet::VectorFieldNet net(cfg.net_config(), cfg.init_seed());
  TrainConfig tc = cfg.train_config();
  tc.epochs = 300;
  const TrainResult res = train(net, pairs, tc, cfg.train_seed());
  const std::size_t decile = res.epoch_loss.size() / 10;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < decile; ++i) {
    first += res.epoch_loss[i];
    last += res.epoch_loss[res.epoch_loss.size() - decile + i];
  }
  const double ratio = last / first;

  // Single demonstration, replicated to fill one batch per epoch.
  const std::vector<TrainPair> one(64, pairs.front());
  nnet::VectorFieldNet solo(cfg.net_config(), cfg.init_seed());
  TrainConfig oc = cfg.train_config();
  oc.epochs = 2000;
  train(solo, one, oc, cfg.train_seed());
  InferenceConfig ic = cfg.inference_config();
  Rng rng(16);
  double se = 0.0;
  std::size_t n = 0;
  for (int k = 0; k < 10; ++k) {
    const ActionSeries a = sample_plain(solo, one.front().obs, ic, rng);
    for (std::size_t i = 0; i < a.size(); ++i) se += std::pow(a.flat()[i] - one.front().actions.flat()[i], 2);
    n += a.size();
  }
  const double rmse = std::sqrt(se / static_cast<double>(n));
  return {ratio < 0.25 && rmse < 0.05,
          fmt("final/first decile loss %.4f (limit 0.25); single-demo RMSE %.4f (limit 0.05)", ratio, rmse)};
}

app::RunConfig benchmark_config() {
  app::RunConfig cfg;
  cfg.maze = "large-like";
  cfg.out_dir = kWork / "bench";
  cfg.demo_count = 3000;
  cfg.epochs = 800;
  cfg.episodes = 200;
  cfg.repeats = 3;
  cfg.steps = 5;
  cfg.lambdas = {0.01, 0.4, 0.8, 5.0};
  cfg.validate();
  return cfg;
}

Outcome benchmark_comparison() {
  const app::RunConfig cfg = benchmark_config();
  std::ostringstream log;
  fs::remove_all(cfg.out_dir);
  app::cmd_gen_demos(cfg, app::default_demos_path(cfg), log);
  app::cmd_train(cfg, app::default_demos_path(cfg), app::default_checkpoint_path(cfg), log);
  app::cmd_build_field(cfg, app::default_demos_path(cfg), app::default_field_path(cfg), log);
  app::RunConfig fmp = cfg;
  fmp.policy = "fmp";
  const BenchReport base = app::cmd_eval(fmp, app::default_checkpoint_path(cfg), std::nullopt, log);
  app::RunConfig guided = cfg;
  guided.lambda = 0.8;
  const BenchReport ours =
      app::cmd_eval(guided, app::default_checkpoint_path(cfg), app::default_field_path(cfg), log);
  const double coll_ratio = ours.collision_rate.mean / base.collision_rate.mean;
  const double dsucc = ours.success_rate.mean - base.success_rate.mean;
  return {coll_ratio <= 0.6 && std::abs(dsucc) <= 3.0,
          fmt("collision %.2f%% vs %.2f%% (ratio %.3f, limit 0.6); success %.2f%% vs %.2f%% "
              "(delta %+.2f, limit |3|)",
              ours.collision_rate.mean, base.collision_rate.mean, coll_ratio, ours.success_rate.mean,
              base.success_rate.mean, dsucc)};
}

Outcome lambda_ablation() {
  const app::RunConfig cfg = benchmark_config();
  std::ostringstream log;
  const AblationReport rep =
      app::cmd_ablate(cfg, app::default_checkpoint_path(cfg), app::default_field_path(cfg), log);
  auto find = [&](double lambda) -> const BenchReport& {
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
      if (rep.lambdas[i] == lambda) return rep.reports[i];
    throw std::runtime_error(fmt("lambda %g missing from the ablation", lambda));
  };
  const BenchReport& low = find(0.01);
  const BenchReport& mid = find(0.8);
  const BenchReport& high = find(5.0);
  const bool pass = mid.collision_rate.mean < low.collision_rate.mean &&
                    high.success_rate.mean < mid.success_rate.mean - 5.0;
  std::string rows;
  for (std::size_t i = 0; i < rep.lambdas.size(); ++i)
    rows += fmt(" %g:%.1f/%.1f", rep.lambdas[i], rep.reports[i].success_rate.mean,
                rep.reports[i].collision_rate.mean);
  return {pass, "success/collision % by lambda:" + rows};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PF2MP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_reproducibility() {
  fs::create_directories(kWork);
  const fs::path cfg = kWork / "chain.json";
  std::ofstream(cfg) << R"({"maze": "large-like", "demo_count": 40, "hidden": [32, 32], "epochs": 6,
    "batch_size": 16, "subsample": 800, "episodes": 10, "repeats": 2, "seed": 21})";
  const fs::path out = kWork / "chain";
  const std::vector<std::string> files{"demos.pfdm",      "checkpoint.pfck", "field.pfpf",  "loss.csv",
                                       "eval_pf2mp.json", "ablation.json",   "rollout.csv"};
  const std::string base = " --config " + cfg.string() + " --out " + out.string();
  std::vector<std::string> first;
  fs::remove_all(out);
  for (int run = 0; run < 2; ++run) {
    for (const char* cmd : {"gen-demos", "train", "build-field", "eval", "ablate", "rollout"}) {
      const int code = run_cli(cmd + base);
      if (code != 0) return {false, fmt("run %d: '%s' exited with %d", run + 1, cmd, code)};
    }
    if (run == 0)
      for (const std::string& f : files) first.push_back(slurp(out / f));
  }
  std::size_t differing = 0;
  for (std::size_t i = 0; i < files.size(); ++i)
    if (first[i].empty() || slurp(out / files[i]) != first[i]) ++differing;

  const MazeWorld maze = MazeWorld::large_like();
  const auto demo_bytes = slurp_bytes(out / "demos.pfdm");
  const LoadedDemoSet demos = decode_demoset(demo_bytes, maze);
  const auto ck_bytes = slurp_bytes(out / "checkpoint.pfck");
  const Checkpoint ck = decode_checkpoint(ck_bytes);
  const auto field_bytes = slurp_bytes(out / "field.pfpf");
  const FieldFile field = decode_field(field_bytes);
  std::size_t roundtrip_bad = 0;
  if (encode_demoset(demos.demos, demos.config_json) != demo_bytes) ++roundtrip_bad;
  if (encode_checkpoint(ck) != ck_bytes) ++roundtrip_bad;
  if (encode_field(field) != field_bytes) ++roundtrip_bad;
  const Checkpoint ck2 = decode_checkpoint(encode_checkpoint(ck));
  const FieldFile field2 = decode_field(encode_field(field));
  Rng rng(22);
  for (int i = 0; i < 100; ++i) {
    const auto a = oracle::random_vector(rng, ck.net.action_dim());
    const auto o = oracle::random_vector(rng, 4);
    const double t = rng.uniform();
    if (nnet::net_forward(ck.net, a, t, o) != nnet::net_forward(ck2.net, a, t, o)) ++roundtrip_bad;
    const std::vector<double> p{rng.uniform(-1.1, 1.1), rng.uniform(-1.1, 1.1)};
    if (potential_gradient(field.field, p) != potential_gradient(field2.field, p)) ++roundtrip_bad;
  }
  return {differing == 0 && roundtrip_bad == 0,
          fmt("%zu of %zu artifacts differ between runs; %zu roundtrip mismatches", differing, files.size(),
              roundtrip_bad)};
}

Outcome demo_corpus() {
  const app::RunConfig cfg = benchmark_config();
  const MazeWorld maze = cfg.load_maze();
  const DemoSet demos = gen_demoset(maze, 1000, cfg.demo_seed(), cfg.expert_config(), cfg.pose_config());
  std::size_t bad_horizon = 0, bad_endpoint = 0, hits = 0, oracle_hits = 0, band = 0, segments = 0;
  for (const Demonstration& d : demos.demos) {
    if (d.waypoints.size() != cfg.horizon) ++bad_horizon;
    if (d.waypoints.empty() || !(d.waypoints.front() == d.start) || !(d.waypoints.back() == d.goal))
      ++bad_endpoint;
    for (std::size_t i = 1; i < d.waypoints.size(); ++i) {
      const Point2 p = d.waypoints[i - 1], q = d.waypoints[i];
      ++segments;
      if (segment_collides(maze, p, q)) ++hits;
      const auto ref = oracle::dense_segment_oracle(maze, p, q, 200);
      if (ref.in_band) ++band;
      if (ref.hits || ref.in_band) ++oracle_hits;
    }
  }
  const bool pass = demos.demos.size() == 1000 && bad_horizon == 0 && bad_endpoint == 0 && hits == 0 &&
                    oracle_hits == 0;
  return {pass, fmt("%zu demos, %zu segments: %zu colliding (%zu by dense sampling, %zu within 1e-6), "
                    "%zu wrong horizon, %zu inexact endpoints",
                    demos.demos.size(), segments, hits, oracle_hits, band, bad_horizon, bad_endpoint)};
}

}  // namespace
}  // namespace pf2mp

// Optional arguments select criteria by number; the default runs all of them.
int main(int argc, char** argv) {
  using namespace pf2mp;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto run = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) report(id, name, limit_s, body);
  };
  run(1, "analytic gradients", 30, gradient_checks);
  run(2, "zero guidance identity", 10, zero_guidance_identity);
  run(3, "reference oracles", 0, oracle_checks);
  run(4, "training convergence", 300, training_checks);
  run(5, "collision reduction vs FMP", 600, benchmark_comparison);
  run(6, "guidance weight ablation", 300, lambda_ablation);
  run(7, "CLI reproducibility", 0, cli_reproducibility);
  run(8, "demonstration corpus", 0, demo_corpus);
  std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
