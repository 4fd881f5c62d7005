// Copyright 2026 The PF2MP Authors
// SPDX-License-Identifier: Apache-2.0

#include "pf2mp/mazeworld.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <tuple>

#include "pf2mp/errors.hpp"

namespace pf2mp {
namespace {

constexpr std::string_view kMediumLayout =
    "########\n"
    "#..##..#\n"
    "#..#...#\n"
    "##...###\n"
    "#..#...#\n"
    "#.#..#.#\n"
    "#...#..#\n"
    "########\n";

constexpr std::string_view kLargeLayout =
    "############\n"
    "#....#.....#\n"
    "#.##.#.#.#.#\n"
    "#......#...#\n"
    "#.####.###.#\n"
    "#..#.#.....#\n"
    "##.#.#.#.###\n"
    "#..#...#...#\n"
    "############\n";

std::vector<std::string> split_rows(std::string_view text) {
  std::vector<std::string> rows;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  return rows;
}

Rect inflate(const Rect& r, double by) { return {r.x0 - by, r.y0 - by, r.x1 + by, r.y1 + by}; }

double rect_distance(const Rect& r, Point2 p) {
  const double dx = std::max({r.x0 - p.x, 0.0, p.x - r.x1});
  const double dy = std::max({r.y0 - p.y, 0.0, p.y - r.y1});
  return std::hypot(dx, dy);
}

// Closed segment p + s (q - p), s in [0, 1], against a closed rectangle.
bool segment_hits_rect(Point2 p, Point2 q, const Rect& r) {
  double t0 = 0.0;
  double t1 = 1.0;
  const double origin[2] = {p.x, p.y};
  const double delta[2] = {q.x - p.x, q.y - p.y};
  const double lo[2] = {r.x0, r.y0};
  const double hi[2] = {r.x1, r.y1};
  for (int axis = 0; axis < 2; ++axis) {
    if (delta[axis] == 0.0) {
      if (origin[axis] < lo[axis] || origin[axis] > hi[axis]) return false;
      continue;
    }
    double ta = (lo[axis] - origin[axis]) / delta[axis];
    double tb = (hi[axis] - origin[axis]) / delta[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

double polyline_length(const std::vector<Point2>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

std::vector<Point2> resample_by_arc_length(const std::vector<Point2>& path, std::size_t count) {
  std::vector<Point2> out(count, path.front());
  const double total = polyline_length(path);
  if (count == 1 || total == 0.0) return out;
  out.back() = path.back();
  std::size_t seg = 0;
  double seg_start = 0.0;
  double seg_len = distance(path[0], path[1]);
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(count - 1);
    while (seg + 2 < path.size() && seg_start + seg_len < target) {
      seg_start += seg_len;
      ++seg;
      seg_len = distance(path[seg], path[seg + 1]);
    }
    const double frac = seg_len > 0.0 ? std::clamp((target - seg_start) / seg_len, 0.0, 1.0) : 0.0;
    out[k] = path[seg] + frac * (path[seg + 1] - path[seg]);
  }
  return out;
}

}  // namespace

MazeWorld::MazeWorld(std::vector<std::string> rows, double cell_size, std::string name,
                     double wall_inflation)
    : cell_size_(cell_size), wall_inflation_(wall_inflation), name_(std::move(name)) {
  if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_))
    throw FormatError("maze: cell_size must be finite and > 0");
  if (!(wall_inflation_ >= 0.0)) throw FormatError("maze: wall inflation must be >= 0");
  if (rows.size() < 3) throw FormatError("maze: need at least 3 rows");
  rows_ = static_cast<int>(rows.size());
  cols_ = static_cast<int>(rows.front().size());
  if (cols_ < 3) throw FormatError("maze: need at least 3 columns");
  occupancy_.reserve(rows.size() * rows.front().size());
  for (int r = 0; r < rows_; ++r) {
    const std::string& row = rows[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != cols_)
      throw FormatError("maze: row " + std::to_string(r) + " has a different width");
    for (char ch : row) {
      if (ch != '#' && ch != '.')
        throw FormatError(std::string("maze: unexpected character '") + ch + "'");
      occupancy_.push_back(ch == '#' ? 1 : 0);
    }
  }
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const bool boundary = r == 0 || c == 0 || r == rows_ - 1 || c == cols_ - 1;
      if (boundary && !is_wall(r, c)) throw FormatError("maze: boundary cells must be walls");
      if (is_wall(r, c))
        walls_.push_back({c * cell_size_, r * cell_size_, (c + 1) * cell_size_, (r + 1) * cell_size_});
    }
  }
  if (free_cells().empty()) throw FormatError("maze: no free cells");
}

MazeWorld MazeWorld::parse(std::string_view text, std::string name) {
  std::vector<std::string> lines = split_rows(text);
  if (lines.empty()) throw FormatError("maze: empty asset");
  const std::string& header = lines.front();
  constexpr std::string_view key = "cell_size=";
  if (header.rfind(key, 0) != 0) throw FormatError("maze: first line must be 'cell_size=<float>'");
  double cell_size = 0.0;
  try {
    std::size_t used = 0;
    cell_size = std::stod(header.substr(key.size()), &used);
    if (used != header.size() - key.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw FormatError("maze: cannot parse cell_size in '" + header + "'");
  }
  lines.erase(lines.begin());
  return MazeWorld(std::move(lines), cell_size, std::move(name));
}

MazeWorld MazeWorld::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("maze: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str(), path.stem().string());
}

std::string MazeWorld::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "cell_size=" << cell_size_ << "\n";
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) out << (is_wall(r, c) ? '#' : '.');
    out << "\n";
  }
  return out.str();
}

MazeWorld MazeWorld::medium_like() { return MazeWorld(split_rows(kMediumLayout), 1.0, "medium-like"); }
MazeWorld MazeWorld::large_like() { return MazeWorld(split_rows(kLargeLayout), 1.0, "large-like"); }

MazeWorld MazeWorld::open_arena(int cells) {
  std::vector<std::string> rows;
  const int n = cells + 2;
  for (int r = 0; r < n; ++r) {
    std::string row(static_cast<std::size_t>(n), '.');
    if (r == 0 || r == n - 1) {
      row.assign(static_cast<std::size_t>(n), '#');
    } else {
      row.front() = '#';
      row.back() = '#';
    }
    rows.push_back(row);
  }
  return MazeWorld(std::move(rows), 1.0, "custom");
}

bool MazeWorld::is_wall(int row, int col) const {
  if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return true;
  return occupancy_[static_cast<std::size_t>(row * cols_ + col)] != 0;
}

std::optional<CellIndex> MazeWorld::cell_of(Point2 p) const {
  const int c = static_cast<int>(std::floor(p.x / cell_size_));
  const int r = static_cast<int>(std::floor(p.y / cell_size_));
  if (r < 0 || c < 0 || r >= rows_ || c >= cols_) return std::nullopt;
  return CellIndex{r, c};
}

Point2 MazeWorld::cell_center(CellIndex c) const {
  return {(c.col + 0.5) * cell_size_, (c.row + 0.5) * cell_size_};
}

std::vector<CellIndex> MazeWorld::free_cells() const {
  std::vector<CellIndex> cells;
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      if (!is_wall(r, c)) cells.push_back({r, c});
  return cells;
}

double MazeWorld::clearance(Point2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Rect& w : walls_) best = std::min(best, rect_distance(w, p));
  return best;
}

bool MazeWorld::point_in_wall(Point2 p, double inflation) const {
  return std::any_of(walls_.begin(), walls_.end(),
                     [&](const Rect& w) { return inflate(w, inflation).contains(p); });
}

bool MazeWorld::segment_hits(Point2 p, Point2 q, double inflation) const {
  const double bx0 = std::min(p.x, q.x);
  const double bx1 = std::max(p.x, q.x);
  const double by0 = std::min(p.y, q.y);
  const double by1 = std::max(p.y, q.y);
  for (const Rect& wall : walls_) {
    const Rect r = inflate(wall, inflation);
    if (r.x1 < bx0 || r.x0 > bx1 || r.y1 < by0 || r.y0 > by1) continue;
    if (segment_hits_rect(p, q, r)) return true;
  }
  return false;
}

MazeWorld MazeWorld::with_inflation(double inflation) const {
  MazeWorld copy = *this;
  if (!(inflation >= 0.0)) throw FormatError("maze: wall inflation must be >= 0");
  copy.wall_inflation_ = inflation;
  return copy;
}

bool segment_collides(const MazeWorld& maze, Point2 p, Point2 q) {
  return maze.segment_hits(p, q, maze.wall_inflation());
}

Normalization Normalization::from_bounds(const Rect& bounds) {
  Normalization n;
  const double lo[2] = {bounds.x0, bounds.y0};
  const double hi[2] = {bounds.x1, bounds.y1};
  for (int k = 0; k < 2; ++k) {
    if (!(hi[k] > lo[k])) throw FormatError("normalization: degenerate bounds");
    n.scale[k] = 2.0 / (hi[k] - lo[k]);
    n.offset[k] = -1.0 - lo[k] * n.scale[k];
  }
  return n;
}

Point2 Normalization::normalize(Point2 p) const {
  return {scale[0] * p.x + offset[0], scale[1] * p.y + offset[1]};
}

Point2 Normalization::denormalize(Point2 p) const {
  return {(p.x - offset[0]) / scale[0], (p.y - offset[1]) / scale[1]};
}

Pose sample_free_pose(const MazeWorld& maze, Rng& rng, const PoseConfig& config) {
  const Rect b = maze.bounds();
  const double min_clear = config.clearance_fraction * maze.cell_size();
  auto draw_point = [&](std::size_t& attempts) -> std::optional<Point2> {
    while (attempts < config.max_attempts) {
      ++attempts;
      const Point2 p{rng.uniform(b.x0, b.x1), rng.uniform(b.y0, b.y1)};
      const auto cell = maze.cell_of(p);
      if (!cell || maze.is_wall(*cell)) continue;
      if (maze.clearance(p) < min_clear) continue;
      return p;
    }
    return std::nullopt;
  };
  std::size_t attempts = 0;
  while (attempts < config.max_attempts) {
    const auto start = draw_point(attempts);
    const auto goal = draw_point(attempts);
    if (!start || !goal) break;
    if (distance(*start, *goal) >= config.min_goal_separation) return {*start, *goal};
  }
  throw PlanningError("sample_free_pose: sampling budget exhausted after " +
                      std::to_string(config.max_attempts) + " attempts");
}

ExpertPlan plan_expert_detailed(const MazeWorld& maze, Point2 start, Point2 goal,
                                const ExpertConfig& config) {
  if (config.horizon < 2) throw ConfigError("plan_expert: horizon must be >= 2");
  const auto start_cell = maze.cell_of(start);
  const auto goal_cell = maze.cell_of(goal);
  if (!start_cell || maze.is_wall(*start_cell) || maze.point_in_wall(start, maze.wall_inflation()))
    throw PlanningError("plan_expert: start is not in free space");
  if (!goal_cell || maze.is_wall(*goal_cell) || maze.point_in_wall(goal, maze.wall_inflation()))
    throw PlanningError("plan_expert: goal is not in free space");

  // A* over cells.
  const int rows = maze.rows();
  const int cols = maze.cols();
  auto id = [cols](CellIndex c) { return static_cast<std::size_t>(c.row * cols + c.col); };
  const std::size_t n = static_cast<std::size_t>(rows * cols);
  std::vector<double> g_cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(n, n);
  std::vector<char> closed(n, 0);
  auto heuristic = [&](CellIndex c) {
    return std::hypot(c.row - goal_cell->row, c.col - goal_cell->col);
  };
  using Entry = std::tuple<double, std::size_t, std::size_t>;  // f, insertion order, cell id
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::size_t order = 0;
  g_cost[id(*start_cell)] = 0.0;
  open.emplace(heuristic(*start_cell), order++, id(*start_cell));
  bool found = false;
  while (!open.empty()) {
    const auto [f, ord, cur_id] = open.top();
    open.pop();
    if (closed[cur_id]) continue;
    closed[cur_id] = 1;
    if (cur_id == id(*goal_cell)) {
      found = true;
      break;
    }
    const CellIndex cur{static_cast<int>(cur_id) / cols, static_cast<int>(cur_id) % cols};
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const CellIndex next{cur.row + dr, cur.col + dc};
        if (maze.is_wall(next)) continue;
        if (dr != 0 && dc != 0 &&
            (maze.is_wall(cur.row + dr, cur.col) || maze.is_wall(cur.row, cur.col + dc)))
          continue;
        const double step = (dr != 0 && dc != 0) ? std::sqrt(2.0) : 1.0;
        const std::size_t nid = id(next);
        const double cand = g_cost[cur_id] + step;
        if (cand < g_cost[nid]) {
          g_cost[nid] = cand;
          parent[nid] = cur_id;
          open.emplace(cand + heuristic(next), order++, nid);
        }
      }
    }
  }
  if (!found) throw PlanningError("plan_expert: no path between start and goal");

  std::vector<Point2> raw{goal};
  for (std::size_t c = id(*goal_cell); c != n; c = parent[c])
    raw.push_back(maze.cell_center({static_cast<int>(c) / cols, static_cast<int>(c) % cols}));
  raw.push_back(start);
  std::reverse(raw.begin(), raw.end());

  ExpertPlan plan;
  plan.grid_path_cost = polyline_length(raw);

  // Greedy shortcutting: from each kept vertex jump to the farthest vertex
  // reachable by a straight segment that keeps the configured margin.
  // Consecutive raw vertices are always admissible.
  const double margin = maze.wall_inflation() + config.shortcut_clearance_fraction * maze.cell_size();
  std::vector<Point2> smooth{raw.front()};
  std::size_t i = 0;
  while (i + 1 < raw.size()) {
    std::size_t next = i + 1;
    for (std::size_t j = raw.size() - 1; j > i + 1; --j) {
      if (!maze.segment_hits(raw[i], raw[j], margin)) {
        next = j;
        break;
      }
    }
    smooth.push_back(raw[next]);
    i = next;
  }
  plan.smoothed_path_cost = polyline_length(smooth);

  std::vector<Point2> waypoints = resample_by_arc_length(smooth, config.horizon);
  waypoints.front() = start;
  waypoints.back() = goal;
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    if (segment_collides(maze, waypoints[k], waypoints[k + 1]))
      throw PlanningError("plan_expert: resampled path clips a wall at segment " + std::to_string(k));
  }
  plan.demo = Demonstration{start, goal, std::move(waypoints)};
  return plan;
}

Demonstration plan_expert(const MazeWorld& maze, Point2 start, Point2 goal,
                          const ExpertConfig& config) {
  return plan_expert_detailed(maze, start, goal, config).demo;
}

std::vector<TrainPair> DemoSet::training_pairs() const {
  std::vector<TrainPair> pairs;
  pairs.reserve(demos.size());
  for (const Demonstration& d : demos) {
    std::vector<Point2> pts(d.waypoints.size());
    std::transform(d.waypoints.begin(), d.waypoints.end(), pts.begin(),
                   [&](Point2 p) { return normalization.normalize(p); });
    pairs.push_back({Observation{normalization.normalize(d.start), normalization.normalize(d.goal)},
                     ActionSeries::from_points(pts)});
  }
  return pairs;
}

std::vector<double> DemoSet::normalized_waypoints() const {
  std::vector<double> flat;
  for (const Demonstration& d : demos) {
    for (Point2 p : d.waypoints) {
      const Point2 q = normalization.normalize(p);
      flat.push_back(q.x);
      flat.push_back(q.y);
    }
  }
  return flat;
}

void DemoSet::validate() const {
  for (std::size_t i = 0; i < demos.size(); ++i) {
    const Demonstration& d = demos[i];
    const std::string where = "demo " + std::to_string(i) + ": ";
    if (d.waypoints.size() != horizon) throw PlanningError(where + "wrong horizon");
    if (distance(d.waypoints.front(), d.start) > 1e-9 || distance(d.waypoints.back(), d.goal) > 1e-9)
      throw PlanningError(where + "endpoints do not match start/goal");
    for (std::size_t k = 0; k + 1 < d.waypoints.size(); ++k)
      if (segment_collides(maze, d.waypoints[k], d.waypoints[k + 1]))
        throw PlanningError(where + "segment " + std::to_string(k) + " collides");
  }
}

DemoSet gen_demoset(const MazeWorld& maze, std::size_t count, std::uint64_t seed,
                    const ExpertConfig& expert, const PoseConfig& poses) {
  if (count == 0) throw ConfigError("gen_demoset: count must be >= 1");
  DemoSet set{{}, maze, Normalization::from_bounds(maze.bounds()), expert.horizon};
  set.demos.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    try {
      const Pose pose = sample_free_pose(maze, rng, poses);
      set.demos.push_back(plan_expert(maze, pose.start, pose.goal, expert));
    } catch (const PlanningError& e) {
      throw PlanningError("gen_demoset: demo " + std::to_string(i) + " failed: " + e.what());
    }
  }
  return set;
}

EpisodeResult rollout(const MazeWorld& maze, const Normalization& norm, const Policy& policy,
                      Point2 start, Point2 goal, const RolloutConfig& config, Rng& rng) {
  EpisodeResult result;
  Point2 current = start;
  std::size_t horizon = 0;
  do {
    const Observation obs{norm.normalize(current), norm.normalize(goal)};
    const ActionSeries actions = policy(obs, rng);
    if (!actions.all_finite()) throw NumericError("rollout: policy returned non-finite actions");
    if (actions.dim() != 2 || actions.horizon() == 0)
      throw DimensionError("rollout: policy must return a non-empty 2D action series");
    if (horizon == 0) horizon = actions.horizon();
    const std::size_t remaining = horizon - result.trajectory.size();
    const std::size_t take = config.replan_every == 0
                                 ? remaining
                                 : std::min({config.replan_every, remaining, actions.horizon()});
    for (std::size_t k = 0; k < std::min(take, actions.horizon()); ++k)
      result.trajectory.push_back(norm.denormalize(actions.point(k)));
    current = result.trajectory.back();
    if (config.replan_every == 0) break;
  } while (result.trajectory.size() < horizon);

  Point2 prev = start;
  for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
    if (segment_collides(maze, prev, result.trajectory[k])) {
      result.collided = true;
      result.first_collision_index = k;
      break;
    }
    prev = result.trajectory[k];
  }
  result.success = distance(result.trajectory.back(), goal) <= config.success_radius;
  return result;
}

}  // namespace pf2mp
