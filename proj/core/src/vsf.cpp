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

#include "escan/vsf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "escan/distance_transform.hpp"

namespace escan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

ViewLattice ViewLattice::cover(const GridDims& map_dims, double map_resolution, double xy_res,
                               int bins) {
  ViewLattice lattice;
  lattice.xy_resolution = xy_res;
  lattice.theta_bins = bins;
  lattice.nx = static_cast<int>(std::ceil(map_dims.nx * map_resolution / xy_res));
  lattice.ny = static_cast<int>(std::ceil(map_dims.ny * map_resolution / xy_res));
  return lattice;
}

double movement_cost(double view_x, double view_y, double robot_x, double robot_y,
                     double sigma) {
  const double d2 = (view_x - robot_x) * (view_x - robot_x) +
                    (view_y - robot_y) * (view_y - robot_y);
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

ProjectedObstacles project_believed(const WorldMap& map, const BodyParams& body,
                                    double unknown_z_min) {
  const GridDims& dims = map.dims();
  ProjectedObstacles out;
  out.blocking = Grid2<std::uint8_t>(dims.nx, dims.ny, 0);
  out.occupied = Grid2<std::uint8_t>(dims.nx, dims.ny, 0);

  int z_lo = std::max(0, static_cast<int>(std::floor(body.body_z_min / map.resolution())));
  int z_hi = std::min(dims.nz, static_cast<int>(std::ceil(body.body_z_max / map.resolution())));
  for (int z = z_lo; z < z_hi; ++z) {
    const double cz = (z + 0.5) * map.resolution();
    if (cz < body.body_z_min || cz >= body.body_z_max) continue;
    for (int y = 0; y < dims.ny; ++y) {
      for (int x = 0; x < dims.nx; ++x) {
        const VoxelState s = map.state(dims.index(x, y, z));
        if (s == VoxelState::kOccupied) {
          out.occupied.at(x, y) = 1;
          out.blocking.at(x, y) = 1;
        } else if (s == VoxelState::kUnknown && cz >= unknown_z_min) {
          out.blocking.at(x, y) = 1;
        }
      }
    }
  }

  const Grid2<double> blocking_d2 = squared_distance_transform(out.blocking);
  const Grid2<double> occupied_d2 = squared_distance_transform(out.occupied);
  out.blocking_dist_m = Grid2<double>(dims.nx, dims.ny, 0.0);
  out.occupied_dist_m = Grid2<double>(dims.nx, dims.ny, 0.0);
  for (std::int32_t i = 0; i < blocking_d2.size(); ++i) {
    out.blocking_dist_m[i] = std::sqrt(blocking_d2[i]) * map.resolution();
    out.occupied_dist_m[i] = std::sqrt(occupied_d2[i]) * map.resolution();
  }
  return out;
}

namespace {

// Distance field value at a lattice cell center, sampled from the map-grid
// distance transform.
double sample_dist_m(const Grid2<double>& dist_m, const WorldMap& map,
                     const ViewLattice& lattice, int ix, int iy) {
  const double cx = (ix + 0.5) * lattice.xy_resolution;
  const double cy = (iy + 0.5) * lattice.xy_resolution;
  int mx = static_cast<int>(std::floor(cx / map.resolution()));
  int my = static_cast<int>(std::floor(cy / map.resolution()));
  mx = std::clamp(mx, 0, dist_m.nx() - 1);
  my = std::clamp(my, 0, dist_m.ny() - 1);
  return dist_m.at(mx, my);
}

}  // namespace

Grid2<std::uint8_t> safety_mask(const WorldMap& map, const ViewLattice& lattice,
                                double clearance, const BodyParams& body) {
  const ProjectedObstacles proj = project_believed(map, body);
  Grid2<std::uint8_t> safe(lattice.nx, lattice.ny, 0);
  for (int iy = 0; iy < lattice.ny; ++iy) {
    for (int ix = 0; ix < lattice.nx; ++ix) {
      safe.at(ix, iy) = sample_dist_m(proj.blocking_dist_m, map, lattice, ix, iy) >= clearance;
    }
  }
  return safe;
}

Grid2<double> obstacle_costmap(const WorldMap& map, const ViewLattice& lattice, double sigma,
                               const BodyParams& body) {
  const ProjectedObstacles proj = project_believed(map, body);
  Grid2<double> fo(lattice.nx, lattice.ny, 0.0);
  for (int iy = 0; iy < lattice.ny; ++iy) {
    for (int ix = 0; ix < lattice.nx; ++ix) {
      const double d = sample_dist_m(proj.occupied_dist_m, map, lattice, ix, iy);
      fo.at(ix, iy) = d > 6.0 * sigma ? 0.0 : std::exp(-d * d / (2.0 * sigma * sigma));
    }
  }
  return fo;
}

namespace {

double auto_gain_scale(const VsfParams& params, double map_resolution, double xy_resolution) {
  if (params.gain_scale > 0.0) return params.gain_scale;
  const double r = map_resolution / xy_resolution;
  return r * r * r;
}

}  // namespace

int frontier_visibility(const WorldMap& map, const Pose& view, const CameraModel& camera,
                        const ExpectedGainParams& params) {
  const GainWeights zero{0.0, 0.0};
  return frustum_stats(map, view, camera, zero, params).frontier_visible;
}

double score_view(const WorldMap& map, const Pose& view, const Pose& robot,
                  const VsfParams& params, const GainWeights& weights,
                  const CameraModel& camera, const ExpectedGainParams& gain_params,
                  SemanticCase2 case2, double xy_resolution) {
  const FrustumStats stats = frustum_stats(map, view, camera, weights, gain_params, case2);
  const double numerator = auto_gain_scale(params, map.resolution(), xy_resolution) *
                           (params.alpha_frontier * stats.frontier_visible + stats.gain_bits);
  const double L = movement_cost(view.x, view.y, robot.x, robot.y, params.movement_sigma);
  return params.movement_cost_mode == MovementCostMode::kMultiply ? numerator * L
                                                                  : numerator / L;
}

// ---------------------------------------------------------------------------
// ViewScoreField
// ---------------------------------------------------------------------------

ViewScoreField::ViewScoreField(const WorldMap& map, const Pose& robot,
                               const ViewLattice& lattice, const VsfParams& params,
                               const GainWeights& weights, const CameraModel& camera,
                               const ExpectedGainParams& gain_params, SemanticCase2 case2,
                               int threads)
    : lattice_(lattice),
      params_(params),
      weights_(weights),
      score_camera_(camera.with_rays(params.score_h_rays, params.score_v_rays)),
      gain_params_(gain_params),
      case2_(case2),
      robot_(robot),
      threads_(std::max(1, threads)),
      gain_scale_(auto_gain_scale(params, map.resolution(), lattice.xy_resolution)),
      numerator_(lattice.cell_count(), 0.0),
      safe2d_(lattice.cell_count_2d(), 0),
      scored2d_(lattice.cell_count_2d(), 0),
      fo_(lattice.cell_count_2d(), 0.0),
      safety_dist_m_(lattice.cell_count_2d(), 0.0),
      dirty_bins_(lattice.cell_count_2d(), 0) {
  gain_cache_.reset(map.dims().size());
  build(map);
}

bool ViewScoreField::safe(int ix, int iy) const {
  if (!lattice_.contains_2d(ix, iy)) return false;
  if (safe2d_[lattice_.index_2d(ix, iy)]) return true;
  // The robot stands on its own cell; it is safe by construction.
  return ix == lattice_.ix_of(robot_.x) && iy == lattice_.iy_of(robot_.y);
}

double ViewScoreField::movement_factor(int ix, int iy) const {
  const Pose p = lattice_.pose_of(ix, iy, 0);
  return movement_cost(p.x, p.y, robot_.x, robot_.y, params_.movement_sigma);
}

double ViewScoreField::f(int cell) const {
  int ix, iy, it;
  lattice_.decompose(cell, ix, iy, it);
  if (!safe(ix, iy) || !scored2d_[lattice_.index_2d(ix, iy)]) return kNegInf;
  const double L = movement_factor(ix, iy);
  const double numerator = numerator_[cell];
  return params_.movement_cost_mode == MovementCostMode::kMultiply ? numerator * L
                                                                   : numerator / L;
}

void ViewScoreField::refresh_2d_layers(const WorldMap& map) {
  const ProjectedObstacles proj = project_believed(map, params_.body, params_.unknown_z_min);
  for (int iy = 0; iy < lattice_.ny; ++iy) {
    for (int ix = 0; ix < lattice_.nx; ++ix) {
      const int i2 = lattice_.index_2d(ix, iy);
      const double block_d = sample_dist_m(proj.blocking_dist_m, map, lattice_, ix, iy);
      const double occ_d = sample_dist_m(proj.occupied_dist_m, map, lattice_, ix, iy);
      safety_dist_m_[i2] = block_d;
      const bool now_safe = block_d >= params_.safety_clearance;
      if (now_safe && !safe2d_[i2]) dirty_bins_[i2] = all_bins_mask();  // newly safe
      if (!now_safe) scored2d_[i2] = 0;  // stale scores must not leak
      safe2d_[i2] = now_safe ? 1 : 0;
      fo_[i2] = occ_d > 6.0 * params_.obstacle_sigma
                    ? 0.0
                    : std::exp(-occ_d * occ_d / (2.0 * params_.obstacle_sigma *
                                                 params_.obstacle_sigma));
    }
  }
  need_2d_refresh_ = false;
}

void ViewScoreField::rescore_cells(const WorldMap& map,
                                   const std::vector<std::pair<int, std::uint64_t>>& work) {
  const auto score_one = [&](int i2, std::uint64_t mask) {
    const int ix = i2 % lattice_.nx;
    const int iy = i2 / lattice_.nx;
    for (int it = 0; it < lattice_.theta_bins; ++it) {
      if ((mask & (1ULL << it)) == 0) continue;
      const Pose view = lattice_.pose_of(ix, iy, it);
      const FrustumStats stats = frustum_stats(map, view, score_camera_, weights_,
                                               gain_params_, case2_, &gain_cache_);
      numerator_[lattice_.index(ix, iy, it)] =
          gain_scale_ * (params_.alpha_frontier * stats.frontier_visible + stats.gain_bits);
    }
    scored2d_[i2] = 1;
  };

  if (threads_ <= 1 || work.size() < 8) {
    for (const auto& [i2, mask] : work) score_one(i2, mask);
  } else {
    const int n_threads = std::min<int>(threads_, static_cast<int>(work.size()));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    std::size_t chunk = (work.size() + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const std::size_t lo = t * chunk;
      const std::size_t hi = std::min(work.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi]() {
        for (std::size_t i = lo; i < hi; ++i) score_one(work[i].first, work[i].second);
      });
    }
    for (std::thread& t : pool) t.join();
  }
  last_rescored_ = static_cast<int>(work.size());
}

void ViewScoreField::build(const WorldMap& map) {
  refresh_2d_layers(map);
  gain_cache_.reset(map.dims().size());
  std::fill(dirty_bins_.begin(), dirty_bins_.end(), 0);
  std::vector<std::pair<int, std::uint64_t>> all;
  all.reserve(lattice_.cell_count_2d());
  const int rx = lattice_.ix_of(robot_.x);
  const int ry = lattice_.iy_of(robot_.y);
  for (int i2 = 0; i2 < lattice_.cell_count_2d(); ++i2) {
    const bool robot_cell = (i2 == lattice_.index_2d(rx, ry)) && lattice_.contains_2d(rx, ry);
    if (safe2d_[i2] || robot_cell) all.push_back({i2, all_bins_mask()});
  }
  rescore_cells(map, all);
}

void ViewScoreField::apply(const WorldMap& map, const ChangeSet& cs, const Pose& robot) {
  const int prev_rx = lattice_.ix_of(robot_.x);
  const int prev_ry = lattice_.iy_of(robot_.y);
  robot_ = robot;  // L is factored out of the stored numerators
  const int rx = lattice_.ix_of(robot_.x);
  const int ry = lattice_.iy_of(robot_.y);
  if ((rx != prev_rx || ry != prev_ry) && lattice_.contains_2d(rx, ry)) {
    const int i2 = lattice_.index_2d(rx, ry);
    if (!scored2d_[i2]) dirty_bins_[i2] = all_bins_mask();
  }

  if (cs.empty()) return;

  // Any state flip inside the body band can move the projected obstacles.
  for (const VoxelChange& ch : cs.changed) {
    if (ch.state_old == ch.state_new) continue;
    const double cz = (map.dims().coord(ch.voxel).z + 0.5) * map.resolution();
    if (cz >= params_.body.body_z_min && cz < params_.body.body_z_max) {
      need_2d_refresh_ = true;
      break;
    }
  }

  // Changed voxels invalidate their memoized gains and dirty every view
  // whose frustum wedge could contain them, binned at lattice granularity.
  static thread_local std::vector<std::uint8_t> touched;
  touched.assign(lattice_.cell_count_2d(), 0);
  const auto mark_voxel = [&](std::int32_t voxel) {
    const VoxelCoord c = map.dims().coord(voxel);
    const int ix = lattice_.ix_of((c.x + 0.5) * map.resolution());
    const int iy = lattice_.iy_of((c.y + 0.5) * map.resolution());
    if (lattice_.contains_2d(ix, iy)) touched[lattice_.index_2d(ix, iy)] = 1;
  };
  for (const VoxelChange& ch : cs.changed) {
    gain_cache_.invalidate(ch.voxel);
    mark_voxel(ch.voxel);
  }
  for (std::int32_t v : cs.frontier_added) mark_voxel(v);
  for (std::int32_t v : cs.frontier_removed) mark_voxel(v);

  const double reach = score_camera_.range_max + lattice_.xy_resolution * M_SQRT2;
  const int radius = static_cast<int>(std::ceil(reach / lattice_.xy_resolution));
  const double bin_halfdiag = lattice_.xy_resolution * M_SQRT1_2 + 0.05;
  const double wedge_half = score_camera_.h_fov / 2.0 + 0.02;
  for (int ty = 0; ty < lattice_.ny; ++ty) {
    for (int tx = 0; tx < lattice_.nx; ++tx) {
      if (!touched[lattice_.index_2d(tx, ty)]) continue;
      const int x0 = std::max(0, tx - radius);
      const int x1 = std::min(lattice_.nx - 1, tx + radius);
      const int y0 = std::max(0, ty - radius);
      const int y1 = std::min(lattice_.ny - 1, ty + radius);
      for (int iy = y0; iy <= y1; ++iy) {
        for (int ix = x0; ix <= x1; ++ix) {
          const double dx = (tx - ix) * lattice_.xy_resolution;
          const double dy = (ty - iy) * lattice_.xy_resolution;
          const double d2 = dx * dx + dy * dy;
          if (d2 > reach * reach) continue;
          const std::int32_t i2 = lattice_.index_2d(ix, iy);
          const double dist = std::sqrt(d2);
          if (dist <= 1.2) {
            dirty_bins_[i2] = all_bins_mask();
            continue;
          }
          // Only theta bins whose wedge can contain the changed column.
          const double bearing = std::atan2(dy, dx);
          const double pad = wedge_half + std::atan2(bin_halfdiag, dist);
          for (int it = 0; it < lattice_.theta_bins; ++it) {
            if (std::abs(angle_diff(lattice_.theta_of(it), bearing)) <= pad) {
              dirty_bins_[i2] |= 1ULL << it;
            }
          }
        }
      }
    }
  }
}

void ViewScoreField::ensure_fresh(const WorldMap& map) {
  if (need_2d_refresh_) refresh_2d_layers(map);
  std::vector<std::pair<int, std::uint64_t>> work;
  const int rx = lattice_.ix_of(robot_.x);
  const int ry = lattice_.iy_of(robot_.y);
  const int robot_cell = lattice_.contains_2d(rx, ry) ? lattice_.index_2d(rx, ry) : -1;
  bool robot_included = false;
  for (int i2 = 0; i2 < lattice_.cell_count_2d(); ++i2) {
    if (dirty_bins_[i2] == 0) continue;
    if (safe2d_[i2] || i2 == robot_cell) {
      // A cell scored for the first time needs every bin, not just the new ones.
      work.push_back({i2, scored2d_[i2] ? dirty_bins_[i2] : all_bins_mask()});
      if (i2 == robot_cell) robot_included = true;
    }
    dirty_bins_[i2] = 0;
  }
  if (robot_cell >= 0 && !scored2d_[robot_cell] && !robot_included) {
    work.push_back({robot_cell, all_bins_mask()});
  }
  rescore_cells(map, work);
}

void ViewScoreField::refresh_cell(const WorldMap& map, int ix, int iy) {
  if (!lattice_.contains_2d(ix, iy)) return;
  rescore_cells(map, {{lattice_.index_2d(ix, iy), all_bins_mask()}});
}

double ViewScoreField::max_finite_f() const {
  double best = kNegInf;
  for (int cell = 0; cell < lattice_.cell_count(); ++cell) {
    best = std::max(best, f(cell));
  }
  return best;
}

void ViewScoreField::write_theta_slice_csv(int it, std::ostream& out) const {
  for (int iy = 0; iy < lattice_.ny; ++iy) {
    for (int ix = 0; ix < lattice_.nx; ++ix) {
      if (ix > 0) out << ',';
      const double value = f(lattice_.index(ix, iy, it));
      if (std::isinf(value)) {
        out << "-inf";
      } else {
        out << value;
      }
    }
    out << '\n';
  }
}

}  // namespace escan
