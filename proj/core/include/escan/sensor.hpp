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

#ifndef ESCAN_SENSOR_HPP_
#define ESCAN_SENSOR_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "escan/geometry.hpp"
#include "escan/rng.hpp"
#include "escan/scene.hpp"

namespace escan {

// Kinect-v1-like defaults: 57x43 deg FOV, [0.5, 4.5] m range, 0.03 m noise.
// Ray counts trade fidelity for speed and are configurable.
struct CameraModel {
  double range_min = 0.5;
  double range_max = 4.5;
  double depth_noise_sigma = 0.03;
  double h_fov = 57.0 * M_PI / 180.0;
  double v_fov = 43.0 * M_PI / 180.0;
  int h_rays = 80;
  int v_rays = 60;
  double mount_height = 1.0;  // camera height above the floor plane

  CameraModel with_rays(int h, int v) const {
    CameraModel c = *this;
    c.h_rays = h;
    c.v_rays = v;
    return c;
  }
};

// One depth+semantics observation. Hit/miss voxel sets are disjoint; each
// voxel carries at most one support per frame.
struct SensorFrame {
  struct Hit {
    std::int32_t voxel;
    double depth;  // measured (noisy) depth, meters
  };
  struct SemanticObs {
    std::int32_t voxel;
    std::vector<double> dist;  // categorical over K labels, sums to 1
  };

  Pose pose;
  std::uint64_t frame_index = 0;
  std::vector<Hit> hits;                  // sorted by voxel index
  std::vector<std::int32_t> misses;       // sorted by voxel index
  std::vector<SemanticObs> semantic_obs;  // sorted by voxel index
};

struct RayResult {
  std::vector<std::int32_t> misses;  // free voxels traversed inside the range window
  std::optional<std::int32_t> hit_voxel;
  double depth = 0.0;  // valid when hit_voxel is set
};

// Single-ray traversal against the ground truth. Stops at the first occupied
// voxel or at range_max; an occupied voxel closer than range_min blocks the
// ray but reports nothing; measured depth is true depth plus Gaussian noise,
// clamped to the range window. dir must be unit length, origin inside grid.
RayResult cast_ray(const GroundTruth& gt, const Vec3& origin, const Vec3& dir,
                   const CameraModel& camera, RngStream& rng);

// Deterministic stream for a frame, derived from (master seed, pose, frame
// index) so hypothetical captures can be evaluated in any order.
std::uint64_t frame_seed(std::uint64_t master_seed, const Pose& pose, std::uint64_t frame_index);

// Full frustum capture: h_rays x v_rays pinhole rays, per-voxel evidence
// aggregated per frame (a voxel hit by any ray is a hit; hit beats miss),
// plus a semantic observation for every hit voxel with a ground-truth label.
SensorFrame capture(const GroundTruth& gt, const Pose& pose, const CameraModel& camera,
                    std::uint64_t master_seed, std::uint64_t frame_index);

struct SemanticOracleParams {
  double q_min = 0.35;
  double q_max = 0.95;
  double epsilon = 0.25;  // label-swap probability scale at zero quality
};

// Simulated per-voxel label distribution: peak q = q_min + (q_max-q_min)*q_obs
// on the true label, uniform tail; with probability epsilon*(1-q_obs) the
// peak is swapped to a uniformly random wrong label.
std::vector<double> semantic_oracle(int gt_label, double obs_quality, int label_count,
                                    RngStream& rng, const SemanticOracleParams& params = {});

// Near views are confident: 1 at range_min, 0 at range_max.
inline double observation_quality(double depth, const CameraModel& camera) {
  const double q = 1.0 - (depth - camera.range_min) / (camera.range_max - camera.range_min);
  return std::clamp(q, 0.0, 1.0);
}

// Camera-frame ray direction for pixel (i, j), pinhole model, pitch 0.
Vec3 ray_direction(const Pose& pose, const CameraModel& camera, int i, int j);

}  // namespace escan

#endif  // ESCAN_SENSOR_HPP_
