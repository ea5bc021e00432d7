/*
 * Copyright 2026 The escan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "escan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "escan/errors.hpp"

#include <nlohmann/json.hpp>

namespace escan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int wrap_bin(int it, int bins) {
  it %= bins;
  return it < 0 ? it + bins : it;
}

struct Move {
  int dx, dy, dtheta;
  double step_len;
};

// Canonical neighbor order: pure rotations, then xy moves with ascending
// theta deltas. Deterministic expansion order matters for tie-breaking.
std::vector<Move> make_moves(const ViewLattice& lattice, const PlannerConfig& cfg) {
  std::vector<Move> moves;
  const double rot_len = lattice.xy_resolution / 2.0;
  const int max_rot = cfg.max_dtheta_rot(lattice);
  for (int d = -max_rot; d <= max_rot; ++d) {
    if (d != 0) moves.push_back({0, 0, d, rot_len});
  }
  const int max_xy = cfg.max_dtheta_xy(lattice);
  const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (const auto& dir : dirs) {
    for (int d = -max_xy; d <= max_xy; ++d) {
      moves.push_back({dir[0], dir[1], d, lattice.xy_resolution});
    }
  }
  return moves;
}

double edge_cost(const ViewScoreField& field, const PlannerConfig& cfg, int dest_cell,
                 int dest_ix, int dest_iy, double step_len) {
  const double f = field.f(dest_cell);
  const double info = std::max(cfg.eps_cost, field.params().eta - f);
  return info * step_len + field.params().eta * field.f_o(dest_ix, dest_iy) * step_len;
}

void finalize_plan(const ViewScoreField& field, const PlannerConfig& cfg, PathPlan& plan) {
  const ViewLattice& lattice = field.lattice();
  plan.edge_costs.clear();
  plan.total_cost = 0.0;
  plan.total_length = 0.0;
  plan.total_rotation = 0.0;
  for (std::size_t i = 1; i < plan.cells.size(); ++i) {
    const LatticeCell& a = plan.cells[i - 1];
    const LatticeCell& b = plan.cells[i];
    const bool moved = a.ix != b.ix || a.iy != b.iy;
    const double step_len = moved ? lattice.xy_resolution : lattice.xy_resolution / 2.0;
    const double cost =
        edge_cost(field, cfg, lattice.index(b.ix, b.iy, b.it), b.ix, b.iy, step_len);
    plan.edge_costs.push_back(cost);
    plan.total_cost += cost;
    if (moved) plan.total_length += lattice.xy_resolution;
    plan.total_rotation +=
        std::abs(angle_diff(lattice.theta_of(b.it), lattice.theta_of(a.it)));
  }
  project(lattice, plan);
}

LatticeCell snap(const ViewLattice& lattice, const Pose& pose) {
  return {std::clamp(lattice.ix_of(pose.x), 0, lattice.nx - 1),
          std::clamp(lattice.iy_of(pose.y), 0, lattice.ny - 1),
          lattice.theta_bin_of(pose.theta)};
}

}  // namespace

void project(const ViewLattice& lattice, PathPlan& plan) {
  plan.robot_waypoints.clear();
  plan.camera_schedule.clear();
  if (plan.cells.empty()) return;

  double theta = lattice.theta_of(plan.cells.front().it);
  plan.camera_schedule.push_back(theta);
  plan.robot_waypoints.push_back(
      {(plan.cells.front().ix + 0.5) * lattice.xy_resolution,
       (plan.cells.front().iy + 0.5) * lattice.xy_resolution});

  for (std::size_t i = 1; i < plan.cells.size(); ++i) {
    const LatticeCell& prev = plan.cells[i - 1];
    const LatticeCell& cur = plan.cells[i];
    theta += angle_diff(lattice.theta_of(cur.it), lattice.theta_of(prev.it));
    plan.camera_schedule.push_back(theta);
    if (cur.ix != prev.ix || cur.iy != prev.iy) {
      plan.robot_waypoints.push_back({(cur.ix + 0.5) * lattice.xy_resolution,
                                      (cur.iy + 0.5) * lattice.xy_resolution});
    }
  }
}

int select_nbv_cell(const ViewScoreField& field, double min_f,
                    const std::vector<int>* excluded) {
  const ViewLattice& lattice = field.lattice();
  int best_cell = -1;
  double best_f = -kInf;
  double best_dist = kInf;
  for (int cell = 0; cell < lattice.cell_count(); ++cell) {
    if (excluded != nullptr &&
        std::find(excluded->begin(), excluded->end(), cell) != excluded->end()) {
      continue;
    }
    const double f = field.f(cell);
    if (!std::isfinite(f)) continue;
    int ix, iy, it;
    lattice.decompose(cell, ix, iy, it);
    const Pose p = lattice.pose_of(ix, iy, it);
    const double dist = std::hypot(p.x - field.robot().x, p.y - field.robot().y);
    if (f > best_f || (f == best_f && dist < best_dist)) {
      best_f = f;
      best_dist = dist;
      best_cell = cell;
    }
  }
  if (best_cell < 0 || best_f < min_f) {
    throw ExplorationComplete("select_nbv: no view above the score threshold");
  }
  return best_cell;
}

Pose select_nbv(const ViewScoreField& field, double min_f, const std::vector<int>* excluded) {
  int ix, iy, it;
  field.lattice().decompose(select_nbv_cell(field, min_f, excluded), ix, iy, it);
  return field.lattice().pose_of(ix, iy, it);
}

PathPlan plan_path(const ViewScoreField& field, const Pose& start, const Pose& goal,
                   const PlannerConfig& cfg) {
  const ViewLattice& lattice = field.lattice();
  const LatticeCell s = snap(lattice, start);
  const LatticeCell g = snap(lattice, goal);
  if (!field.safe(s.ix, s.iy)) throw NoPathError("plan_path: start cell unsafe");
  if (!field.safe(g.ix, g.iy)) throw NoPathError("plan_path: goal cell unsafe");

  const int n = lattice.cell_count();
  const int start_idx = lattice.index(s.ix, s.iy, s.it);
  const int goal_idx = lattice.index(g.ix, g.iy, g.it);

  std::vector<double> g_cost(n, kInf);
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  const std::vector<Move> moves = make_moves(lattice, cfg);

  const auto heuristic = [&](int ix, int iy) {
    return cfg.eps_cost * lattice.xy_resolution *
           (std::abs(ix - g.ix) + std::abs(iy - g.iy));
  };

  using QueueEntry = std::pair<double, int>;  // (f, cell); index breaks ties
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  g_cost[start_idx] = 0.0;
  open.push({heuristic(s.ix, s.iy), start_idx});

  while (!open.empty()) {
    const auto [f_est, cell] = open.top();
    open.pop();
    if (closed[cell]) continue;
    closed[cell] = 1;
    if (cell == goal_idx) break;

    int ix, iy, it;
    lattice.decompose(cell, ix, iy, it);
    for (const Move& m : moves) {
      const int nx = ix + m.dx;
      const int ny = iy + m.dy;
      if (!lattice.contains_2d(nx, ny) || !field.safe(nx, ny)) continue;
      const int nt = wrap_bin(it + m.dtheta, lattice.theta_bins);
      const int ncell = lattice.index(nx, ny, nt);
      if (closed[ncell]) continue;
      const double cost = edge_cost(field, cfg, ncell, nx, ny, m.step_len);
      const double cand = g_cost[cell] + cost;
      if (cand < g_cost[ncell]) {
        g_cost[ncell] = cand;
        parent[ncell] = cell;
        open.push({cand + heuristic(nx, ny), ncell});
      }
    }
  }

  if (!closed[goal_idx]) {
    throw NoPathError("plan_path: goal unreachable from start");
  }

  PathPlan plan;
  for (int cur = goal_idx; cur != -1; cur = parent[cur]) {
    int ix, iy, it;
    lattice.decompose(cur, ix, iy, it);
    plan.cells.push_back({ix, iy, it});
  }
  std::reverse(plan.cells.begin(), plan.cells.end());
  finalize_plan(field, cfg, plan);
  return plan;
}

PathPlan dijkstra_baseline(const ViewScoreField& field, const Pose& start, const Pose& goal,
                           const PlannerConfig& cfg) {
  const ViewLattice& lattice = field.lattice();
  const LatticeCell s = snap(lattice, start);
  const LatticeCell g = snap(lattice, goal);
  if (!field.safe(s.ix, s.iy)) throw NoPathError("dijkstra: start cell unsafe");
  if (!field.safe(g.ix, g.iy)) throw NoPathError("dijkstra: goal cell unsafe");

  // Uniform-cost shortest xy path on the safe 2D grid.
  const int n2 = lattice.cell_count_2d();
  std::vector<double> dist(n2, kInf);
  std::vector<int> parent(n2, -1);
  std::vector<std::uint8_t> closed(n2, 0);
  using QueueEntry = std::pair<double, int>;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  const int start2 = lattice.index_2d(s.ix, s.iy);
  const int goal2 = lattice.index_2d(g.ix, g.iy);
  dist[start2] = 0.0;
  open.push({0.0, start2});
  const int dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  while (!open.empty()) {
    const auto [d, cell] = open.top();
    open.pop();
    if (closed[cell]) continue;
    closed[cell] = 1;
    if (cell == goal2) break;
    const int ix = cell % lattice.nx;
    const int iy = cell / lattice.nx;
    for (const auto& dir : dirs) {
      const int nx = ix + dir[0];
      const int ny = iy + dir[1];
      if (!lattice.contains_2d(nx, ny) || !field.safe(nx, ny)) continue;
      const int ncell = lattice.index_2d(nx, ny);
      if (closed[ncell]) continue;
      const double cand = d + lattice.xy_resolution;
      if (cand < dist[ncell]) {
        dist[ncell] = cand;
        parent[ncell] = cell;
        open.push({cand, ncell});
      }
    }
  }
  if (!closed[goal2]) throw NoPathError("dijkstra: goal unreachable from start");

  std::vector<int> xy_path;
  for (int cur = goal2; cur != -1; cur = parent[cur]) xy_path.push_back(cur);
  std::reverse(xy_path.begin(), xy_path.end());

  // Camera trails the direction of motion within the rotation budget.
  const int max_xy = cfg.max_dtheta_xy(lattice);
  const int max_rot = cfg.max_dtheta_rot(lattice);
  PathPlan plan;
  int it = s.it;
  plan.cells.push_back({s.ix, s.iy, it});
  for (std::size_t i = 1; i < xy_path.size(); ++i) {
    const int ix = xy_path[i] % lattice.nx;
    const int iy = xy_path[i] / lattice.nx;
    const int px = xy_path[i - 1] % lattice.nx;
    const int py = xy_path[i - 1] / lattice.nx;
    const double heading = std::atan2(static_cast<double>(iy - py), static_cast<double>(ix - px));
    const int want = lattice.theta_bin_of(heading);
    int delta = wrap_bin(want - it, lattice.theta_bins);
    if (delta > lattice.theta_bins / 2) delta -= lattice.theta_bins;
    delta = std::clamp(delta, -max_xy, max_xy);
    it = wrap_bin(it + delta, lattice.theta_bins);
    plan.cells.push_back({ix, iy, it});
  }
  // Rotate in place to the goal heading.
  while (it != g.it) {
    int delta = wrap_bin(g.it - it, lattice.theta_bins);
    if (delta > lattice.theta_bins / 2) delta -= lattice.theta_bins;
    delta = std::clamp(delta, -max_rot, max_rot);
    it = wrap_bin(it + delta, lattice.theta_bins);
    plan.cells.push_back({plan.cells.back().ix, plan.cells.back().iy, it});
  }
  finalize_plan(field, cfg, plan);
  return plan;
}

double path_cost(const ViewScoreField& field, const std::vector<LatticeCell>& cells,
                 const PlannerConfig& cfg) {
  const ViewLattice& lattice = field.lattice();
  double total = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const bool moved = cells[i].ix != cells[i - 1].ix || cells[i].iy != cells[i - 1].iy;
    const double step_len = moved ? lattice.xy_resolution : lattice.xy_resolution / 2.0;
    total += edge_cost(field, cfg, lattice.index(cells[i].ix, cells[i].iy, cells[i].it),
                       cells[i].ix, cells[i].iy, step_len);
  }
  return total;
}

std::string PathPlan::to_json() const {
  nlohmann::json j;
  nlohmann::json cells_json = nlohmann::json::array();
  for (const LatticeCell& c : cells) cells_json.push_back({c.ix, c.iy, c.it});
  j["cells"] = std::move(cells_json);
  nlohmann::json wp = nlohmann::json::array();
  for (const auto& w : robot_waypoints) wp.push_back({w[0], w[1]});
  j["waypoints_m"] = std::move(wp);
  j["camera_schedule_rad"] = camera_schedule;
  j["edge_costs"] = edge_costs;
  j["total_cost"] = total_cost;
  j["total_length_m"] = total_length;
  j["total_rotation_rad"] = total_rotation;
  return j.dump();
}

}  // namespace escan
