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

#ifndef ESCAN_SCENE_HPP_
#define ESCAN_SCENE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "escan/geometry.hpp"

namespace escan {

// Axis-aligned box in meters. `label` is a 1-based index into
// SceneSpec::labels; `structure` marks walls/floors/ceilings, which are
// excluded from object-level metrics.
struct SceneBox {
  Vec3 min;
  Vec3 max;
  int label = 0;
  bool structure = false;
};

// Authored scene description. Immutable after construction/validation;
// safe to share across threads.
struct SceneSpec {
  double resolution = 0.05;  // meters per voxel
  GridDims extents;
  std::vector<std::string> labels;  // label id i (1-based) has name labels[i-1]
  std::vector<SceneBox> boxes;
  Pose start;

  double width_m() const { return extents.nx * resolution; }
  double height_m() const { return extents.ny * resolution; }
  double depth_m() const { return extents.nz * resolution; }

  // A label id is "structure" iff every box carrying it is structure.
  // Mixed use of one label is a validation error.
  std::vector<bool> label_structure_flags() const;

  // Throws SceneError naming the offending field. When `require_object` is
  // set, at least one non-structure labeled box must exist (object-level
  // metrics are undefined otherwise).
  void validate(bool require_object = true) const;
};

// Rasterized scene: the simulation oracle the sensor samples against.
struct GroundTruth {
  double resolution = 0.05;
  GridDims dims;
  Grid3<std::uint8_t> occupancy;
  Grid3<std::uint16_t> label;  // 0 = unlabeled/free
  int label_count = 0;
  std::vector<bool> label_structure;  // indexed by label id, [0] unused

  bool occupied(int x, int y, int z) const { return occupancy.at(x, y, z) != 0; }
  bool occupied(std::int32_t idx) const { return occupancy[idx] != 0; }

  VoxelCoord voxel_of(const Vec3& p) const {
    return {static_cast<int>(std::floor(p.x / resolution)),
            static_cast<int>(std::floor(p.y / resolution)),
            static_cast<int>(std::floor(p.z / resolution))};
  }
  Vec3 center_of(const VoxelCoord& c) const {
    return {(c.x + 0.5) * resolution, (c.y + 0.5) * resolution, (c.z + 0.5) * resolution};
  }
};

// Connected component (6-connectivity) of one non-structure label.
struct ObjectComponent {
  int label = 0;
  std::vector<std::int32_t> voxels;
};

// Defaults shared by scene generation and planning. The paper-style setup is
// a planar ground robot, a camera on a mast, and single-floor rooms.
struct BodyParams {
  double camera_height = 1.0;  // meters above the floor plane
  double body_z_min = 0.1;     // obstacle projection band, lower bound
  double body_z_max = 1.3;     // obstacle projection band, upper bound
  double ceiling = 2.6;        // scene height for generated scenes
};

SceneSpec load_scene(const std::string& path);
SceneSpec parse_scene_json(const std::string& text);
std::string scene_to_json(const SceneSpec& spec);
void save_scene(const SceneSpec& spec, const std::string& path);

// Voxel v is occupied iff its center lies inside at least one box
// (half-open [min, max) containment). Label: last-listed covering
// non-structure box wins, else last-listed covering structure box.
GroundTruth rasterize(const SceneSpec& spec);

// 2D obstacle projection at robot body height: cell (x, y) is blocked iff
// some occupied voxel with center z in [body_z_min, body_z_max) projects
// onto it. This is the free-space graph used for connectivity checks.
Grid2<std::uint8_t> project_obstacles(const GroundTruth& gt, const BodyParams& body = {});

// 6-connected components of same-label non-structure voxels.
std::vector<ObjectComponent> object_components(const GroundTruth& gt);

struct GenParams {
  int rooms = 1;
  double furniture_density = 0.1;  // items per m^2 of interior, roughly
  double width_m = 6.0;
  double height_m = 6.0;
  std::uint64_t seed = 0;
  double resolution = 0.05;
  double ceiling_m = 2.6;
};

// Deterministic procedural generator: perimeter walls + floor, recursive
// room splits with door gaps >= 0.8 m, furniture that never disconnects the
// 2D free space. Same params + seed => byte-identical SceneSpec.
SceneSpec gen_scene(const GenParams& params);

}  // namespace escan

#endif  // ESCAN_SCENE_HPP_
