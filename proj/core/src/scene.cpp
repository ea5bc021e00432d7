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

#include "escan/scene.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "escan/errors.hpp"
#include "escan/rng.hpp"

#include <nlohmann/json.hpp>

namespace escan {

namespace {

using nlohmann::json;

bool center_inside(const Vec3& c, const SceneBox& b) {
  return c.x >= b.min.x && c.x < b.max.x && c.y >= b.min.y && c.y < b.max.y &&
         c.z >= b.min.z && c.z < b.max.z;
}

}  // namespace

std::vector<bool> SceneSpec::label_structure_flags() const {
  std::vector<bool> structure(labels.size() + 1, false);
  std::vector<bool> seen(labels.size() + 1, false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const SceneBox& b = boxes[i];
    if (b.label < 1 || b.label > static_cast<int>(labels.size())) continue;
    if (seen[b.label] && structure[b.label] != b.structure) {
      throw SceneError("boxes[" + std::to_string(i) + "]: label '" + labels[b.label - 1] +
                       "' used with mixed structure flags");
    }
    seen[b.label] = true;
    structure[b.label] = b.structure;
  }
  return structure;
}

void SceneSpec::validate(bool require_object) const {
  if (resolution <= 0.0) throw SceneError("resolution: must be > 0");
  if (extents.nx <= 0 || extents.ny <= 0 || extents.nz <= 0) {
    throw SceneError("extents: all dimensions must be positive");
  }
  const double wx = width_m();
  const double wy = height_m();
  const double wz = depth_m();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const SceneBox& b = boxes[i];
    const std::string name = "boxes[" + std::to_string(i) + "]";
    if (b.min.x > b.max.x || b.min.y > b.max.y || b.min.z > b.max.z) {
      throw SceneError(name + ": min corner exceeds max corner");
    }
    const double eps = 1e-9;
    if (b.min.x < -eps || b.min.y < -eps || b.min.z < -eps || b.max.x > wx + eps ||
        b.max.y > wy + eps || b.max.z > wz + eps) {
      throw SceneError(name + ": box exceeds scene extents");
    }
    if (b.label < 1 || b.label > static_cast<int>(labels.size())) {
      throw SceneError(name + ": label id " + std::to_string(b.label) + " out of range [1, " +
                       std::to_string(labels.size()) + "]");
    }
  }
  label_structure_flags();  // throws on mixed use

  if (require_object) {
    const bool has_object =
        std::any_of(boxes.begin(), boxes.end(), [](const SceneBox& b) { return !b.structure; });
    if (!has_object) throw SceneError("boxes: at least one non-structure labeled box required");
  }

  if (start.x < 0.0 || start.x >= wx || start.y < 0.0 || start.y >= wy) {
    throw SceneError("start_pose: outside scene extents");
  }
  // Footprint check against the rasterized grid: the camera-height voxel
  // column of the start cell must be free.
  const GroundTruth gt = rasterize(*this);
  const Grid2<std::uint8_t> blocked = project_obstacles(gt);
  const int cx = static_cast<int>(std::floor(start.x / resolution));
  const int cy = static_cast<int>(std::floor(start.y / resolution));
  if (!blocked.contains(cx, cy) || blocked.at(cx, cy)) {
    throw SceneError("start_pose: footprint not in free space");
  }
}

GroundTruth rasterize(const SceneSpec& spec) {
  GroundTruth gt;
  gt.resolution = spec.resolution;
  gt.dims = spec.extents;
  gt.occupancy = Grid3<std::uint8_t>(gt.dims, 0);
  gt.label = Grid3<std::uint16_t>(gt.dims, 0);
  gt.label_count = static_cast<int>(spec.labels.size());
  gt.label_structure = spec.label_structure_flags();

  // Per-voxel scan of covering boxes; box lists are short (tens), so the
  // simple loop beats anything cleverer at these scales.
  for (int z = 0; z < gt.dims.nz; ++z) {
    for (int y = 0; y < gt.dims.ny; ++y) {
      for (int x = 0; x < gt.dims.nx; ++x) {
        const Vec3 c = gt.center_of({x, y, z});
        int structure_label = 0;
        int object_label = 0;
        bool occupied = false;
        for (const SceneBox& b : spec.boxes) {
          if (!center_inside(c, b)) continue;
          occupied = true;
          if (b.structure) {
            structure_label = b.label;
          } else {
            object_label = b.label;
          }
        }
        if (occupied) {
          const std::int32_t idx = gt.dims.index(x, y, z);
          gt.occupancy[idx] = 1;
          gt.label[idx] =
              static_cast<std::uint16_t>(object_label != 0 ? object_label : structure_label);
        }
      }
    }
  }
  return gt;
}

Grid2<std::uint8_t> project_obstacles(const GroundTruth& gt, const BodyParams& body) {
  Grid2<std::uint8_t> blocked(gt.dims.nx, gt.dims.ny, 0);
  int z_lo = static_cast<int>(std::floor(body.body_z_min / gt.resolution));
  int z_hi = static_cast<int>(std::ceil(body.body_z_max / gt.resolution));
  z_lo = std::max(z_lo, 0);
  z_hi = std::min(z_hi, gt.dims.nz);
  for (int z = z_lo; z < z_hi; ++z) {
    const double cz = (z + 0.5) * gt.resolution;
    if (cz < body.body_z_min || cz >= body.body_z_max) continue;
    for (int y = 0; y < gt.dims.ny; ++y) {
      for (int x = 0; x < gt.dims.nx; ++x) {
        if (gt.occupied(x, y, z)) blocked.at(x, y) = 1;
      }
    }
  }
  return blocked;
}

std::vector<ObjectComponent> object_components(const GroundTruth& gt) {
  std::vector<ObjectComponent> components;
  Grid3<std::uint8_t> visited(gt.dims, 0);
  const int dx[6] = {1, -1, 0, 0, 0, 0};
  const int dy[6] = {0, 0, 1, -1, 0, 0};
  const int dz[6] = {0, 0, 0, 0, 1, -1};

  for (std::int32_t idx = 0; idx < gt.dims.size(); ++idx) {
    const int lab = gt.label[idx];
    if (lab == 0 || gt.label_structure[lab] || visited[idx]) continue;
    ObjectComponent comp;
    comp.label = lab;
    std::deque<std::int32_t> queue{idx};
    visited[idx] = 1;
    while (!queue.empty()) {
      const std::int32_t cur = queue.front();
      queue.pop_front();
      comp.voxels.push_back(cur);
      const VoxelCoord c = gt.dims.coord(cur);
      for (int k = 0; k < 6; ++k) {
        const VoxelCoord n{c.x + dx[k], c.y + dy[k], c.z + dz[k]};
        if (!gt.dims.contains(n)) continue;
        const std::int32_t ni = gt.dims.index(n);
        if (visited[ni] || gt.label[ni] != lab) continue;
        visited[ni] = 1;
        queue.push_back(ni);
      }
    }
    std::sort(comp.voxels.begin(), comp.voxels.end());
    components.push_back(std::move(comp));
  }
  return components;
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

SceneSpec parse_scene_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene JSON parse error: ") + e.what());
  }
  SceneSpec spec;
  try {
    spec.resolution = j.at("resolution").get<double>();
    const auto& e = j.at("extents");
    spec.extents = {e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()};
    spec.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& jb : j.at("boxes")) {
      SceneBox b;
      b.min = {jb.at("min").at(0).get<double>(), jb.at("min").at(1).get<double>(),
               jb.at("min").at(2).get<double>()};
      b.max = {jb.at("max").at(0).get<double>(), jb.at("max").at(1).get<double>(),
               jb.at("max").at(2).get<double>()};
      b.label = jb.at("label").get<int>();
      b.structure = jb.value("structure", false);
      spec.boxes.push_back(b);
    }
    const auto& s = j.at("start");
    spec.start.x = s.at("x").get<double>();
    spec.start.y = s.at("y").get<double>();
    spec.start.theta = normalize_angle(s.at("theta").get<double>());
  } catch (const json::exception& e) {
    throw SceneError(std::string("scene JSON schema error: ") + e.what());
  }
  spec.validate();
  return spec;
}

SceneSpec load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_json(ss.str());
}

std::string scene_to_json(const SceneSpec& spec) {
  json j;
  j["resolution"] = spec.resolution;
  j["extents"] = {spec.extents.nx, spec.extents.ny, spec.extents.nz};
  j["labels"] = spec.labels;
  json boxes = json::array();
  for (const SceneBox& b : spec.boxes) {
    boxes.push_back({{"min", {b.min.x, b.min.y, b.min.z}},
                     {"max", {b.max.x, b.max.y, b.max.z}},
                     {"label", b.label},
                     {"structure", b.structure}});
  }
  j["boxes"] = boxes;
  j["start"] = {{"x", spec.start.x}, {"y", spec.start.y}, {"theta", spec.start.theta}};
  return j.dump(2);
}

void save_scene(const SceneSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SceneError("cannot write scene file: " + path);
  out << scene_to_json(spec) << "\n";
}

// ---------------------------------------------------------------------------
// Procedural generation
// ---------------------------------------------------------------------------

namespace {

constexpr double kWallThickness = 0.1;
constexpr double kDoorWidth = 0.9;
constexpr double kFloorThickness = 0.05;

struct RoomRect {
  double x0, y0, x1, y1;  // interior extent, meters
  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct DoorSpot {
  double x, y;
};

// Split `room` with a wall + door; appends wall boxes and recurses until
// `want` rooms exist. Returns false if a room is too small to split.
bool split_rooms(std::vector<RoomRect>& rooms, std::vector<SceneBox>& walls,
                 std::vector<DoorSpot>& doors, int want, double ceiling, int wall_label,
                 RngStream& rng) {
  constexpr double kMinSide = 2.0;  // need room for a door plus clearance
  while (static_cast<int>(rooms.size()) < want) {
    // Split the largest room.
    std::size_t pick = 0;
    for (std::size_t i = 1; i < rooms.size(); ++i) {
      if (rooms[i].area() > rooms[pick].area()) pick = i;
    }
    RoomRect r = rooms[pick];
    const double w = r.x1 - r.x0;
    const double h = r.y1 - r.y0;
    if (std::max(w, h) < 2.0 * kMinSide + kWallThickness) return false;

    const bool split_x = w >= h;  // wall perpendicular to the longer side
    const double len = split_x ? w : h;
    const double frac = rng.uniform(0.35, 0.65);
    const double cut = (split_x ? r.x0 : r.y0) + std::clamp(frac * len, kMinSide, len - kMinSide);

    const double lo = split_x ? r.y0 : r.x0;
    const double hi = split_x ? r.y1 : r.x1;
    const double door_lo = lo + 0.3;
    const double door_hi = hi - 0.3 - kDoorWidth;
    if (door_hi <= door_lo) return false;
    const double door = rng.uniform(door_lo, door_hi);

    SceneBox a, b;
    a.label = b.label = wall_label;
    a.structure = b.structure = true;
    if (split_x) {
      a.min = {cut - kWallThickness / 2, lo, 0.0};
      a.max = {cut + kWallThickness / 2, door, ceiling};
      b.min = {cut - kWallThickness / 2, door + kDoorWidth, 0.0};
      b.max = {cut + kWallThickness / 2, hi, ceiling};
      rooms[pick] = {r.x0, r.y0, cut - kWallThickness / 2, r.y1};
      rooms.push_back({cut + kWallThickness / 2, r.y0, r.x1, r.y1});
      doors.push_back({cut, door + kDoorWidth / 2});
    } else {
      a.min = {lo, cut - kWallThickness / 2, 0.0};
      a.max = {door, cut + kWallThickness / 2, ceiling};
      b.min = {door + kDoorWidth, cut - kWallThickness / 2, 0.0};
      b.max = {hi, cut + kWallThickness / 2, ceiling};
      rooms[pick] = {r.x0, r.y0, r.x1, cut - kWallThickness / 2};
      rooms.push_back({r.x0, cut + kWallThickness / 2, r.x1, r.y1});
      doors.push_back({door + kDoorWidth / 2, cut});
    }
    if (a.max.y - a.min.y > 1e-9 && a.max.x - a.min.x > 1e-9) walls.push_back(a);
    if (b.max.y - b.min.y > 1e-9 && b.max.x - b.min.x > 1e-9) walls.push_back(b);
  }
  return true;
}

// Flood fill of the projected free space; true iff every free cell is
// reachable from (sx, sy).
bool connected_2d(const Grid2<std::uint8_t>& blocked, int sx, int sy) {
  if (!blocked.contains(sx, sy) || blocked.at(sx, sy)) return false;
  Grid2<std::uint8_t> seen(blocked.nx(), blocked.ny(), 0);
  std::deque<std::pair<int, int>> queue{{sx, sy}};
  seen.at(sx, sy) = 1;
  std::int64_t reached = 1;
  while (!queue.empty()) {
    auto [x, y] = queue.front();
    queue.pop_front();
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx[k];
      const int ny = y + dy[k];
      if (!blocked.contains(nx, ny) || blocked.at(nx, ny) || seen.at(nx, ny)) continue;
      seen.at(nx, ny) = 1;
      ++reached;
      queue.push_back({nx, ny});
    }
  }
  std::int64_t free_cells = 0;
  for (std::int32_t i = 0; i < blocked.size(); ++i) {
    if (!blocked[i]) ++free_cells;
  }
  return reached == free_cells;
}

}  // namespace

SceneSpec gen_scene(const GenParams& params) {
  if (params.rooms < 1 || params.furniture_density < 0.0) {
    throw SceneError("gen_scene: rooms must be >= 1 and density >= 0");
  }
  if (params.width_m < 4.0 || params.height_m < 4.0) {
    throw SceneError("gen_scene: extents must be at least 4 m per side");
  }

  RngStream rng(hash_combine(params.seed, 0x5ce9e5ULL));

  SceneSpec spec;
  spec.resolution = params.resolution;
  spec.extents = {static_cast<int>(std::lround(params.width_m / params.resolution)),
                  static_cast<int>(std::lround(params.height_m / params.resolution)),
                  static_cast<int>(std::lround(params.ceiling_m / params.resolution))};
  const double W = spec.extents.nx * spec.resolution;
  const double H = spec.extents.ny * spec.resolution;
  const double Z = spec.extents.nz * spec.resolution;

  spec.labels = {"wall", "floor"};
  const int wall_label = 1;
  const int floor_label = 2;

  // Floor first so that the perimeter walls (listed later) win the overlap.
  spec.boxes.push_back({{0, 0, 0}, {W, H, kFloorThickness}, floor_label, true});
  spec.boxes.push_back({{0, 0, 0}, {kWallThickness, H, Z}, wall_label, true});
  spec.boxes.push_back({{W - kWallThickness, 0, 0}, {W, H, Z}, wall_label, true});
  spec.boxes.push_back({{0, 0, 0}, {W, kWallThickness, Z}, wall_label, true});
  spec.boxes.push_back({{0, H - kWallThickness, 0}, {W, H, Z}, wall_label, true});

  std::vector<RoomRect> rooms{{kWallThickness, kWallThickness, W - kWallThickness,
                               H - kWallThickness}};
  std::vector<SceneBox> interior_walls;
  std::vector<DoorSpot> doors;
  constexpr int kStructureRetries = 16;
  bool ok = false;
  for (int attempt = 0; attempt < kStructureRetries && !ok; ++attempt) {
    std::vector<RoomRect> trial_rooms = rooms;
    std::vector<SceneBox> trial_walls;
    std::vector<DoorSpot> trial_doors;
    if (split_rooms(trial_rooms, trial_walls, trial_doors, params.rooms, Z, wall_label, rng)) {
      interior_walls = std::move(trial_walls);
      doors = std::move(trial_doors);
      rooms = std::move(trial_rooms);
      ok = true;
    }
  }
  if (!ok) {
    throw SceneError("gen_scene: cannot place " + std::to_string(params.rooms) +
                     " rooms in " + std::to_string(params.width_m) + "x" +
                     std::to_string(params.height_m) + " m (seed " +
                     std::to_string(params.seed) + ")");
  }
  for (const SceneBox& b : interior_walls) spec.boxes.push_back(b);

  // Start pose: center of the largest room.
  std::size_t start_room = 0;
  for (std::size_t i = 1; i < rooms.size(); ++i) {
    if (rooms[i].area() > rooms[start_room].area()) start_room = i;
  }
  spec.start.x = (rooms[start_room].x0 + rooms[start_room].x1) / 2.0;
  spec.start.y = (rooms[start_room].y0 + rooms[start_room].y1) / 2.0;
  spec.start.theta = 0.0;

  // Furniture: rejection placement, each candidate must keep the projected
  // free space connected and leave every door and the start pose clear.
  const char* palette[] = {"sofa", "table", "cabinet", "bed", "shelf", "chair"};
  const int palette_n = 6;
  double interior_area = 0.0;
  for (const RoomRect& r : rooms) interior_area += r.area();
  const int want_items = static_cast<int>(std::lround(params.furniture_density * interior_area));

  // 2D footprint bookkeeping mirrors project_obstacles(rasterize(spec)):
  // a cell blocks iff its center-xy lies inside a box whose z-range covers
  // some voxel center inside the body band.
  const BodyParams body;
  const auto blocks_band = [&](const SceneBox& b) {
    const int z_lo = std::max(0, static_cast<int>(std::floor(body.body_z_min / spec.resolution)));
    const int z_hi = std::min(spec.extents.nz,
                              static_cast<int>(std::ceil(body.body_z_max / spec.resolution)));
    for (int z = z_lo; z < z_hi; ++z) {
      const double cz = (z + 0.5) * spec.resolution;
      if (cz < body.body_z_min || cz >= body.body_z_max) continue;
      if (cz >= b.min.z && cz < b.max.z) return true;
    }
    return false;
  };
  const auto stamp = [&](Grid2<std::uint8_t>& grid, const SceneBox& b) {
    if (!blocks_band(b)) return;
    for (int y = 0; y < spec.extents.ny; ++y) {
      const double cy = (y + 0.5) * spec.resolution;
      if (cy < b.min.y || cy >= b.max.y) continue;
      for (int x = 0; x < spec.extents.nx; ++x) {
        const double cx = (x + 0.5) * spec.resolution;
        if (cx >= b.min.x && cx < b.max.x) grid.at(x, y) = 1;
      }
    }
  };

  Grid2<std::uint8_t> blocked(spec.extents.nx, spec.extents.ny, 0);
  for (const SceneBox& b : spec.boxes) stamp(blocked, b);
  const int start_cx = static_cast<int>(std::floor(spec.start.x / spec.resolution));
  const int start_cy = static_cast<int>(std::floor(spec.start.y / spec.resolution));

  int next_palette = 0;
  for (int item = 0; item < want_items; ++item) {
    constexpr int kPlacementRetries = 40;
    for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
      const std::size_t room_idx = rng.uniform_int(rooms.size());
      const RoomRect& room = rooms[room_idx];
      const double fw = rng.uniform(0.4, 1.2);
      const double fh = rng.uniform(0.4, 1.2);
      const double fz = rng.uniform(0.4, 1.2);
      const double margin = 0.15;
      if (room.x1 - room.x0 < fw + 2 * margin || room.y1 - room.y0 < fh + 2 * margin) continue;
      const double bx = rng.uniform(room.x0 + margin, room.x1 - margin - fw);
      const double by = rng.uniform(room.y0 + margin, room.y1 - margin - fh);

      SceneBox box;
      box.min = {bx, by, kFloorThickness};
      box.max = {bx + fw, by + fh, kFloorThickness + fz};
      box.structure = false;

      // Door and start clearance.
      bool clear = true;
      const double cx = bx + fw / 2, cy = by + fh / 2;
      const double reach = std::hypot(fw, fh) / 2;
      for (const DoorSpot& d : doors) {
        if (std::hypot(cx - d.x, cy - d.y) < reach + 0.8) clear = false;
      }
      if (std::hypot(cx - spec.start.x, cy - spec.start.y) < reach + 0.6) clear = false;
      if (!clear) continue;

      Grid2<std::uint8_t> trial = blocked;
      stamp(trial, box);
      if (!connected_2d(trial, start_cx, start_cy)) continue;

      const std::string name = palette[next_palette % palette_n];
      int label_id = 0;
      for (std::size_t i = 0; i < spec.labels.size(); ++i) {
        if (spec.labels[i] == name) label_id = static_cast<int>(i) + 1;
      }
      if (label_id == 0) {
        spec.labels.push_back(name);
        label_id = static_cast<int>(spec.labels.size());
      }
      box.label = label_id;
      spec.boxes.push_back(box);
      blocked = std::move(trial);
      ++next_palette;
      break;
    }
  }

  spec.validate(/*require_object=*/false);
  return spec;
}

}  // namespace escan
