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

#ifndef ESCAN_PLANNER_HPP_
#define ESCAN_PLANNER_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "escan/vsf.hpp"

namespace escan {

struct PlannerConfig {
  double linear_speed = 0.3;                    // m/s
  double angular_speed = 40.0 * M_PI / 180.0;   // rad/s
  double eps_cost = 1e-3;  // keeps edge costs positive when F > eta

  // Camera rotation budget of one xy lattice move: angular_speed * move time.
  double rotation_limit(double xy_resolution) const {
    return angular_speed * xy_resolution / linear_speed;
  }
  // Theta bins reachable within one xy move / one pure-rotation move.
  int max_dtheta_xy(const ViewLattice& lattice) const {
    return static_cast<int>(std::floor(rotation_limit(lattice.xy_resolution) /
                                       lattice.bin_width() + 1e-12));
  }
  int max_dtheta_rot(const ViewLattice& lattice) const {
    const double budget = angular_speed * (lattice.xy_resolution / 2.0) / linear_speed;
    return std::max(1, static_cast<int>(std::floor(budget / lattice.bin_width() + 1e-12)));
  }
};

struct LatticeCell {
  int ix = 0;
  int iy = 0;
  int it = 0;
  bool operator==(const LatticeCell&) const = default;
};

// A lattice path with its projections. camera_schedule holds one unwrapped
// theta per lattice cell; robot_waypoints collapse consecutive duplicate xy.
struct PathPlan {
  std::vector<LatticeCell> cells;
  std::vector<std::array<double, 2>> robot_waypoints;
  std::vector<double> camera_schedule;
  std::vector<double> edge_costs;
  double total_cost = 0.0;
  double total_length = 0.0;    // meters of xy motion
  double total_rotation = 0.0;  // radians swept

  std::string to_json() const;
};

// Fill robot_waypoints and camera_schedule from cells. Pure rotations hold
// position; theta is unwrapped so 350->10 deg reads as +20 deg.
void project(const ViewLattice& lattice, PathPlan& plan);

// Cell index of arg max F; ties break toward the robot, then by lattice
// index. Throws ExplorationComplete when no finite F reaches min_f.
// `excluded` (sorted or not) cells are skipped.
int select_nbv_cell(const ViewScoreField& field, double min_f = 0.0,
                    const std::vector<int>* excluded = nullptr);
Pose select_nbv(const ViewScoreField& field, double min_f = 0.0,
                const std::vector<int>* excluded = nullptr);

// A* over the (x, y, theta) lattice under the integrated cost
//   max(eps, eta - F(dest)) * len + eta * f_o(dest) * len,
// with 4-connected xy moves (optionally combined with a bounded theta step)
// and single-bin pure rotations. Throws NoPathError when unreachable.
PathPlan plan_path(const ViewScoreField& field, const Pose& start, const Pose& goal,
                   const PlannerConfig& cfg);

// Shortest collision-free xy path ignoring F (uniform move cost); the camera
// trails the direction of motion under the rotation bound, then turns to the
// goal heading in place. Costs are evaluated under the same integrated cost
// so the two planners are comparable.
PathPlan dijkstra_baseline(const ViewScoreField& field, const Pose& start, const Pose& goal,
                           const PlannerConfig& cfg);

// Integrated cost of an arbitrary lattice path (for evaluation).
double path_cost(const ViewScoreField& field, const std::vector<LatticeCell>& cells,
                 const PlannerConfig& cfg);

}  // namespace escan

#endif  // ESCAN_PLANNER_HPP_
