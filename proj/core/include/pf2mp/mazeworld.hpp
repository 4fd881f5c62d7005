// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pf2mp/flowmatch.hpp"
#include "pf2mp/rng.hpp"

namespace pf2mp {

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  bool contains(Point2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

struct CellIndex {
  int row = 0;
  int col = 0;
  bool operator==(const CellIndex&) const = default;
};

// Closed arena of square cells. Cell (r, c) covers
// [c * s, (c + 1) * s] x [r * s, (r + 1) * s] in world units.
class MazeWorld {
 public:
  MazeWorld(std::vector<std::string> rows, double cell_size, std::string name = "custom",
            double wall_inflation = 0.0);

  // Text asset: "cell_size=<float>" header, then one row per line of '#'/'.'.
  static MazeWorld parse(std::string_view text, std::string name = "custom");
  static MazeWorld load(const std::filesystem::path& path);
  std::string to_text() const;

  static MazeWorld medium_like();
  static MazeWorld large_like();
  static MazeWorld open_arena(int cells);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double cell_size() const { return cell_size_; }
  double wall_inflation() const { return wall_inflation_; }
  const std::string& name() const { return name_; }
  const std::vector<Rect>& walls() const { return walls_; }
  Rect bounds() const { return {0.0, 0.0, cols_ * cell_size_, rows_ * cell_size_}; }

  bool is_wall(int row, int col) const;
  bool is_wall(CellIndex c) const { return is_wall(c.row, c.col); }
  std::optional<CellIndex> cell_of(Point2 p) const;
  Point2 cell_center(CellIndex c) const;
  std::vector<CellIndex> free_cells() const;

  // Euclidean distance from p to the nearest (uninflated) wall; 0 inside a wall.
  double clearance(Point2 p) const;
  bool point_in_wall(Point2 p, double inflation) const;

  // Closed segment pq against every wall grown by `inflation`.
  bool segment_hits(Point2 p, Point2 q, double inflation) const;

  MazeWorld with_inflation(double inflation) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  double cell_size_ = 1.0;
  double wall_inflation_ = 0.0;
  std::string name_;
  std::vector<std::uint8_t> occupancy_;
  std::vector<Rect> walls_;
};

// True iff the closed segment pq intersects a wall (grown by the maze's
// configured wall inflation).
bool segment_collides(const MazeWorld& maze, Point2 p, Point2 q);

// Per-dimension affine map world <-> [-1, 1]: n = scale * x + offset.
struct Normalization {
  double scale[2] = {1.0, 1.0};
  double offset[2] = {0.0, 0.0};

  static Normalization from_bounds(const Rect& bounds);
  Point2 normalize(Point2 p) const;
  Point2 denormalize(Point2 p) const;
  bool operator==(const Normalization&) const = default;
};

struct PoseConfig {
  double min_goal_separation = 2.0;   // world units
  double clearance_fraction = 0.25;   // required wall clearance / cell_size
  std::size_t max_attempts = 100000;
};

struct Pose {
  Point2 start;
  Point2 goal;
  bool operator==(const Pose&) const = default;
};

Pose sample_free_pose(const MazeWorld& maze, Rng& rng, const PoseConfig& config);

struct ExpertConfig {
  std::size_t horizon = 80;
  double shortcut_clearance_fraction = 0.25;  // margin (per cell_size) required of shortcuts
};

// World-space demonstration; waypoints[0] == start, waypoints.back() == goal.
struct Demonstration {
  Point2 start;
  Point2 goal;
  std::vector<Point2> waypoints;
  bool operator==(const Demonstration&) const = default;
};

struct ExpertPlan {
  Demonstration demo;
  double grid_path_cost = 0.0;      // start -> A* cell centers -> goal
  double smoothed_path_cost = 0.0;  // after shortcutting, before resampling
};

// A* over free cells (8-connected, no corner cutting, Euclidean costs),
// greedy shortcut smoothing, arc-length resampling to `horizon` points.
// Throws PlanningError when no path exists.
ExpertPlan plan_expert_detailed(const MazeWorld& maze, Point2 start, Point2 goal,
                                const ExpertConfig& config);
Demonstration plan_expert(const MazeWorld& maze, Point2 start, Point2 goal,
                          const ExpertConfig& config = {});

struct DemoSet {
  std::vector<Demonstration> demos;
  MazeWorld maze;
  Normalization normalization;
  std::size_t horizon = 0;

  // Normalized (observation, action series) pairs for training.
  std::vector<TrainPair> training_pairs() const;
  // Every waypoint of every demo, normalized, flattened (x, y, x, y, ...).
  std::vector<double> normalized_waypoints() const;
  // Horizon, endpoint and collision invariants; throws PlanningError.
  void validate() const;
};

DemoSet gen_demoset(const MazeWorld& maze, std::size_t count, std::uint64_t seed,
                    const ExpertConfig& expert = {}, const PoseConfig& poses = {});

struct EpisodeResult {
  std::vector<Point2> trajectory;  // executed world-space waypoints
  bool success = false;
  bool collided = false;
  std::optional<std::size_t> first_collision_index;  // segment index; 0 is start -> waypoint 0
};

using Policy = std::function<ActionSeries(const Observation&, Rng&)>;

struct RolloutConfig {
  double success_radius = 0.5;  // world units
  std::size_t replan_every = 0;  // 0: one open-loop query per episode
};

// Queries the policy with (start, goal), denormalizes, and moves kinematically
// through the waypoints. Throws NumericError if the policy returns non-finite
// actions.
EpisodeResult rollout(const MazeWorld& maze, const Normalization& norm, const Policy& policy,
                      Point2 start, Point2 goal, const RolloutConfig& config, Rng& rng);

}  // namespace pf2mp
