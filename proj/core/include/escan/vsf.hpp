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

#ifndef ESCAN_VSF_HPP_
#define ESCAN_VSF_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "escan/entropy.hpp"
#include "escan/fusion.hpp"
#include "escan/geometry.hpp"

namespace escan {

// Discretized (x, y, theta) view space covering the scene.
struct ViewLattice {
  double xy_resolution = 0.4;
  int theta_bins = 16;
  int nx = 0;
  int ny = 0;

  static ViewLattice cover(const GridDims& map_dims, double map_resolution,
                           double xy_res = 0.4, int bins = 16);

  int cell_count() const { return nx * ny * theta_bins; }
  int cell_count_2d() const { return nx * ny; }
  int index(int ix, int iy, int it) const { return (iy * nx + ix) * theta_bins + it; }
  int index_2d(int ix, int iy) const { return iy * nx + ix; }
  void decompose(int cell, int& ix, int& iy, int& it) const {
    it = cell % theta_bins;
    const int flat = cell / theta_bins;
    ix = flat % nx;
    iy = flat / nx;
  }
  double bin_width() const { return 2.0 * M_PI / theta_bins; }
  double theta_of(int it) const { return it * bin_width(); }
  int theta_bin_of(double theta) const {
    const int b = static_cast<int>(std::lround(normalize_angle(theta) / bin_width()));
    return b % theta_bins;
  }
  Pose pose_of(int ix, int iy, int it) const {
    return {(ix + 0.5) * xy_resolution, (iy + 0.5) * xy_resolution, theta_of(it)};
  }
  int ix_of(double x) const { return static_cast<int>(std::floor(x / xy_resolution)); }
  int iy_of(double y) const { return static_cast<int>(std::floor(y / xy_resolution)); }
  bool contains_2d(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < nx && iy < ny; }
};

enum class MovementCostMode { kMultiply, kDivideAsPrinted };

struct VsfParams {
  double alpha_frontier = 1.0;   // weight on the frontier-visibility count
  double movement_sigma = 3.0;   // meters; scale of the movement discount
  double safety_clearance = 0.35;
  double obstacle_sigma = 0.35;  // meters; scale of the 2D obstacle costmap
  double eta = 500.0;            // planner cost offset, must dominate F
  MovementCostMode movement_cost_mode = MovementCostMode::kMultiply;
  int score_h_rays = 12;  // frustum sampling used for view scoring
  int score_v_rays = 9;
  // Normalizes per-map-voxel sums to view-lattice granularity so eta stays
  // dominant; 0 = auto, (map_resolution / xy_resolution)^3.
  double gain_scale = 0.0;
  // Unknown voxels below this height do not block safety: the pitch-0 camera
  // cannot resolve the cone under itself, and treating that blind disc as an
  // obstacle pins the robot to its start cell.
  double unknown_z_min = 0.85;
  BodyParams body;
};

// L(v) = exp(-dist^2 / (2 sigma^2)); 1 at the robot, decaying with distance.
double movement_cost(double view_x, double view_y, double robot_x, double robot_y,
                     double sigma);

// 2D projections of the believed map over the robot body band. Occupied
// voxels block anywhere in [body_z_min, body_z_max); Unknown voxels block
// only at z >= unknown_z_min (the sensor-resolvable part of the band).
struct ProjectedObstacles {
  Grid2<std::uint8_t> blocking;   // Occupied or (high) Unknown: safety obstacles
  Grid2<std::uint8_t> occupied;   // Occupied only: costmap sources
  Grid2<double> blocking_dist_m;  // exact distance to nearest blocking cell
  Grid2<double> occupied_dist_m;
};
ProjectedObstacles project_believed(const WorldMap& map, const BodyParams& body,
                                    double unknown_z_min = 0.85);

// Per-lattice-2D-cell safety: center distance to the nearest projected
// blocking cell must reach the clearance. Conservative: Unknown blocks.
Grid2<std::uint8_t> safety_mask(const WorldMap& map, const ViewLattice& lattice,
                                double clearance, const BodyParams& body = {});

// f_o = exp(-d^2 / (2 sigma^2)) against projected Occupied cells; 1 on
// occupied cells, 0 beyond 6 sigma (and where no obstacle exists).
Grid2<double> obstacle_costmap(const WorldMap& map, const ViewLattice& lattice, double sigma,
                               const BodyParams& body = {});

// Frontier voxels visible (unoccluded) in the view frustum, counted once.
int frontier_visibility(const WorldMap& map, const Pose& view, const CameraModel& camera,
                        const ExpectedGainParams& params = {});

// F for one view: numerator = gain_scale * (alpha_frontier * V + expected
// gain over the frustum), combined with L per the movement-cost mode.
// Assumes the view has already passed the safety mask; ViewScoreField
// enforces that. xy_resolution feeds the auto gain scale.
double score_view(const WorldMap& map, const Pose& view, const Pose& robot,
                  const VsfParams& params, const GainWeights& weights,
                  const CameraModel& camera, const ExpectedGainParams& gain_params = {},
                  SemanticCase2 case2 = SemanticCase2::kLiteral, double xy_resolution = 0.4);

// The field F(v, r) over the lattice, rebuilt lazily: apply() marks the
// cells whose frusta can reach changed voxels, ensure_fresh() rescores them.
// Unsafe cells hold F = -infinity; the robot's own cell is always safe.
class ViewScoreField {
 public:
  ViewScoreField() = default;
  ViewScoreField(const WorldMap& map, const Pose& robot, const ViewLattice& lattice,
                 const VsfParams& params, const GainWeights& weights, const CameraModel& camera,
                 const ExpectedGainParams& gain_params = {},
                 SemanticCase2 case2 = SemanticCase2::kLiteral, int threads = 1);

  // Full rebuild: refresh 2D layers and rescore every safe cell.
  void build(const WorldMap& map);

  // Incremental: record dirty region from a ChangeSet and the robot move.
  void apply(const WorldMap& map, const ChangeSet& cs, const Pose& robot);

  // Rescore everything recorded dirty. After this, f() == a full build.
  void ensure_fresh(const WorldMap& map);

  // Rescore a single 2D cell right now (cheap goal-freshness probe).
  void refresh_cell(const WorldMap& map, int ix, int iy);

  // Refresh only the 2D layers (safety, costmap); scores stay lazy.
  void refresh_safety(const WorldMap& map) {
    if (need_2d_refresh_) refresh_2d_layers(map);
  }

  double f(int cell) const;
  double numerator(int cell) const { return numerator_[cell]; }
  double gain_scale() const { return gain_scale_; }
  bool safe(int ix, int iy) const;
  double f_o(int ix, int iy) const { return fo_[lattice_.index_2d(ix, iy)]; }
  double obstacle_distance_m(int ix, int iy) const {
    return safety_dist_m_[lattice_.index_2d(ix, iy)];
  }

  const ViewLattice& lattice() const { return lattice_; }
  const Pose& robot() const { return robot_; }
  const VsfParams& params() const { return params_; }
  double movement_factor(int ix, int iy) const;

  double max_finite_f() const;

  // Instrumentation: 2D cells rescored by the last ensure_fresh().
  int last_rescored_cells() const { return last_rescored_; }

  // Fig. 6-style export: one theta slice of F as CSV (unsafe -> "-inf").
  void write_theta_slice_csv(int it, std::ostream& out) const;

 private:
  void refresh_2d_layers(const WorldMap& map);
  void rescore_cells(const WorldMap& map, const std::vector<std::pair<int, std::uint64_t>>& work);
  std::uint64_t all_bins_mask() const {
    return lattice_.theta_bins >= 64 ? ~0ULL : (1ULL << lattice_.theta_bins) - 1;
  }

  ViewLattice lattice_;
  VsfParams params_;
  GainWeights weights_;
  CameraModel score_camera_;
  ExpectedGainParams gain_params_;
  SemanticCase2 case2_ = SemanticCase2::kLiteral;
  Pose robot_;
  int threads_ = 1;
  double gain_scale_ = 1.0;

  std::vector<double> numerator_;       // per (x, y, theta) cell
  std::vector<std::uint8_t> safe2d_;    // computed safety per 2D cell
  std::vector<std::uint8_t> scored2d_;  // numerators valid for this 2D cell
  std::vector<double> fo_;              // obstacle costmap per 2D cell
  std::vector<double> safety_dist_m_;
  std::vector<std::uint64_t> dirty_bins_;  // per 2D cell, bit per theta bin
  VoxelGainCache gain_cache_;
  bool need_2d_refresh_ = true;
  int last_rescored_ = 0;
};

}  // namespace escan

#endif  // ESCAN_VSF_HPP_
