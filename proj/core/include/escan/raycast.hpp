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

#ifndef ESCAN_RAYCAST_HPP_
#define ESCAN_RAYCAST_HPP_

#include <cmath>
#include <limits>

#include "escan/geometry.hpp"

namespace escan {

// Amanatides & Woo, "A Fast Voxel Traversal Algorithm for Ray Tracing", 1987.
// Visits every voxel the ray passes through, in geometric order, with the
// ray parameter interval [t_enter, t_exit] in meters (dir must be unit).
// The visitor returns false to stop the walk. Walk ends when the ray leaves
// the grid or t_enter reaches t_limit.
template <typename Visitor>
void walk_grid(const GridDims& dims, double resolution, const Vec3& origin, const Vec3& dir,
               double t_limit, Visitor&& visit) {
  int vx = static_cast<int>(std::floor(origin.x / resolution));
  int vy = static_cast<int>(std::floor(origin.y / resolution));
  int vz = static_cast<int>(std::floor(origin.z / resolution));
  if (!dims.contains(vx, vy, vz)) return;

  const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
  const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);
  const int step_z = dir.z > 0.0 ? 1 : (dir.z < 0.0 ? -1 : 0);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto axis_init = [resolution](double o, double d, int v, int step) {
    if (step == 0) return kInf;
    const double boundary = (step > 0 ? (v + 1) : v) * resolution;
    return (boundary - o) / d;
  };
  double t_max_x = axis_init(origin.x, dir.x, vx, step_x);
  double t_max_y = axis_init(origin.y, dir.y, vy, step_y);
  double t_max_z = axis_init(origin.z, dir.z, vz, step_z);
  const double t_delta_x = step_x != 0 ? resolution / std::abs(dir.x) : kInf;
  const double t_delta_y = step_y != 0 ? resolution / std::abs(dir.y) : kInf;
  const double t_delta_z = step_z != 0 ? resolution / std::abs(dir.z) : kInf;

  double t_enter = 0.0;
  while (t_enter < t_limit) {
    const double t_exit = std::min({t_max_x, t_max_y, t_max_z});
    if (!visit(VoxelCoord{vx, vy, vz}, t_enter, std::min(t_exit, t_limit))) return;
    t_enter = t_exit;
    if (t_max_x <= t_max_y && t_max_x <= t_max_z) {
      vx += step_x;
      t_max_x += t_delta_x;
    } else if (t_max_y <= t_max_z) {
      vy += step_y;
      t_max_y += t_delta_y;
    } else {
      vz += step_z;
      t_max_z += t_delta_z;
    }
    if (!dims.contains(vx, vy, vz)) return;
  }
}

}  // namespace escan

#endif  // ESCAN_RAYCAST_HPP_
