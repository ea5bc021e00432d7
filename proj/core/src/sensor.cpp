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

#include "escan/sensor.hpp"

#include <algorithm>
#include <cmath>

#include "escan/errors.hpp"
#include "escan/raycast.hpp"
#include "escan/visit_stamps.hpp"

namespace escan {

RayResult cast_ray(const GroundTruth& gt, const Vec3& origin, const Vec3& dir,
                   const CameraModel& camera, RngStream& rng) {
  RayResult result;
  walk_grid(gt.dims, gt.resolution, origin, dir, camera.range_max,
            [&](const VoxelCoord& v, double t_enter, double t_exit) {
              const std::int32_t idx = gt.dims.index(v);
              if (gt.occupied(idx)) {
                if (t_enter >= camera.range_min) {
                  result.hit_voxel = idx;
                  const double noisy = t_enter + rng.gaussian(0.0, camera.depth_noise_sigma);
                  result.depth = std::clamp(noisy, camera.range_min, camera.range_max);
                }
                return false;  // occupied blocks regardless of the range window
              }
              if (t_exit > camera.range_min) result.misses.push_back(idx);
              return true;
            });
  return result;
}

std::uint64_t frame_seed(std::uint64_t master_seed, const Pose& pose,
                         std::uint64_t frame_index) {
  std::uint64_t s = splitmix64(master_seed);
  s = hash_combine(s, static_cast<std::uint64_t>(std::llround(pose.x * 1e6)));
  s = hash_combine(s, static_cast<std::uint64_t>(std::llround(pose.y * 1e6)));
  s = hash_combine(s, static_cast<std::uint64_t>(std::llround(pose.theta * 1e6)));
  s = hash_combine(s, frame_index);
  return s;
}

Vec3 ray_direction(const Pose& pose, const CameraModel& camera, int i, int j) {
  const Vec3 forward{std::cos(pose.theta), std::sin(pose.theta), 0.0};
  const Vec3 right{std::sin(pose.theta), -std::cos(pose.theta), 0.0};
  const Vec3 up{0.0, 0.0, 1.0};
  const double u = (2.0 * (i + 0.5) / camera.h_rays - 1.0) * std::tan(camera.h_fov / 2.0);
  const double w = (2.0 * (j + 0.5) / camera.v_rays - 1.0) * std::tan(camera.v_fov / 2.0);
  return (forward + right * u + up * w).normalized();
}

SensorFrame capture(const GroundTruth& gt, const Pose& pose, const CameraModel& camera,
                    std::uint64_t master_seed, std::uint64_t frame_index) {
  const Vec3 origin{pose.x, pose.y, camera.mount_height};
  const VoxelCoord origin_voxel = gt.voxel_of(origin);
  if (!gt.dims.contains(origin_voxel)) {
    throw PoseError("capture: camera origin outside the scene grid");
  }
  if (gt.occupied(gt.dims.index(origin_voxel))) {
    throw PoseError("capture: pose inside an obstacle");
  }

  static thread_local VisitStamps hit_marks;
  static thread_local VisitStamps miss_marks;
  static thread_local std::vector<double> hit_depth;
  hit_marks.reset(gt.dims.size());
  miss_marks.reset(gt.dims.size());
  hit_depth.resize(gt.dims.size());

  const std::uint64_t seed = frame_seed(master_seed, pose, frame_index);
  RngStream noise(hash_combine(seed, 0x6e6f697365ULL));

  std::vector<std::int32_t> hit_list;
  std::vector<std::int32_t> miss_list;
  for (int j = 0; j < camera.v_rays; ++j) {
    for (int i = 0; i < camera.h_rays; ++i) {
      const Vec3 dir = ray_direction(pose, camera, i, j);
      RayResult ray = cast_ray(gt, origin, dir, camera, noise);
      for (std::int32_t m : ray.misses) {
        if (!miss_marks.marked(m)) {
          miss_marks.mark(m);
          miss_list.push_back(m);
        }
      }
      if (ray.hit_voxel) {
        const std::int32_t h = *ray.hit_voxel;
        if (!hit_marks.marked(h)) {
          hit_marks.mark(h);
          hit_depth[h] = ray.depth;
          hit_list.push_back(h);
        } else {
          hit_depth[h] = std::min(hit_depth[h], ray.depth);
        }
      }
    }
  }

  SensorFrame frame;
  frame.pose = pose;
  frame.frame_index = frame_index;

  std::sort(hit_list.begin(), hit_list.end());
  frame.hits.reserve(hit_list.size());
  for (std::int32_t h : hit_list) frame.hits.push_back({h, hit_depth[h]});

  std::sort(miss_list.begin(), miss_list.end());
  frame.misses.reserve(miss_list.size());
  for (std::int32_t m : miss_list) {
    if (!hit_marks.marked(m)) frame.misses.push_back(m);  // hit beats miss
  }

  for (const SensorFrame::Hit& h : frame.hits) {
    const int lab = gt.label[h.voxel];
    if (lab == 0) continue;
    RngStream voxel_rng(hash_combine(seed, static_cast<std::uint64_t>(h.voxel)));
    const double quality = observation_quality(h.depth, camera);
    frame.semantic_obs.push_back(
        {h.voxel, semantic_oracle(lab, quality, gt.label_count, voxel_rng)});
  }
  return frame;
}

std::vector<double> semantic_oracle(int gt_label, double obs_quality, int label_count,
                                    RngStream& rng, const SemanticOracleParams& params) {
  obs_quality = std::clamp(obs_quality, 0.0, 1.0);
  const int K = label_count;
  std::vector<double> dist(K, 0.0);
  if (K == 1) {
    dist[0] = 1.0;
    return dist;
  }
  const double q = params.q_min + (params.q_max - params.q_min) * obs_quality;
  const double tail = (1.0 - q) / (K - 1);
  for (int i = 0; i < K; ++i) dist[i] = tail;
  int peak = gt_label - 1;
  if (rng.uniform() < params.epsilon * (1.0 - obs_quality)) {
    int wrong = static_cast<int>(rng.uniform_int(K - 1));
    if (wrong >= peak) ++wrong;
    peak = wrong;
  }
  dist[peak] = q;
  return dist;
}

}  // namespace escan
