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

#include "escan/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "escan/errors.hpp"
#include "escan/raycast.hpp"
#include "escan/visit_stamps.hpp"

namespace escan {

namespace {

// Sum_i p_i log2 p_i with the 0 log 0 = 0 convention (this is -H).
double sum_p_log_p(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s += v * std::log2(v);
  }
  return s;
}

double entropy_bits(const std::vector<double>& p) { return -sum_p_log_p(p); }

int argmax_label(const std::vector<double>& p) {
  int label = 1;
  double best = p.empty() ? 0.0 : p[0];
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > best) {
      best = p[i];
      label = static_cast<int>(i) + 1;
    }
  }
  return label;
}

}  // namespace

double p_g(double sigma) {
  const double s2 = sigma * sigma;
  const double p = 1.0 / (1.0 + std::exp(-s2));
  // Keep strictly below 1 so the entropy chain never sees log(0) surprises.
  return std::min(p, std::nextafter(1.0, 0.0));
}

double binary_entropy_bits(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double h_geometry(double sigma) { return binary_entropy_bits(p_g(sigma)); }

double i_geometry(double old_sigma, double new_sigma) {
  return h_geometry(old_sigma) - h_geometry(new_sigma);
}

double i_semantic(const std::vector<double>* old_dist, const std::vector<double>* new_dist,
                  int label_count, SemanticCase2 case2) {
  if (new_dist == nullptr || new_dist->empty()) return 0.0;
  if ((old_dist == nullptr || old_dist->empty()) && label_count <= 0) return 0.0;

  int old_label;
  double old_conf;
  double old_plogp;
  if (old_dist == nullptr || old_dist->empty()) {
    // Maximum-ignorance prior: uniform over K, argmax ties break low.
    old_label = 1;
    old_conf = 1.0 / label_count;
    old_plogp = -std::log2(static_cast<double>(label_count));
  } else {
    old_label = argmax_label(*old_dist);
    old_conf = (*old_dist)[old_label - 1];
    old_plogp = sum_p_log_p(*old_dist);
  }

  const int new_label = argmax_label(*new_dist);
  const double new_conf = (*new_dist)[new_label - 1];
  const double new_plogp = sum_p_log_p(*new_dist);

  if (old_label == new_label) {
    return new_plogp - old_plogp;  // = H(old) - H(new)
  }
  if (old_conf < new_conf) {
    return case2 == SemanticCase2::kLiteral ? -new_plogp : 0.0;
  }
  return 0.0;
}

double i_combined(double i_sem, double i_geo, const GainWeights& w) {
  return w.alpha * i_sem + w.beta * i_geo;
}

double hypothetical_voxel_gain(const WorldMap& map, std::int32_t idx, const GainWeights& w,
                               const ExpectedGainParams& params, SemanticCase2 case2) {
  const VoxelState state = map.state(idx);
  if (state == VoxelState::kUnknown) {
    const double log2k =
        map.label_count() >= 1 ? std::log2(static_cast<double>(map.label_count())) : 0.0;
    return params.gamma * (w.beta * h_geometry(0.0) * params.w_unknown_geo +
                           w.alpha * log2k * params.w_unknown_sem);
  }

  // One more support in the direction of the current belief.
  const double sigma = map.sigma(idx);
  const double sigma_next = sigma + (sigma >= 0.0 ? kSupportHit : kSupportMiss);
  double gain = w.beta * i_geometry(sigma, sigma_next);

  if (state == VoxelState::kOccupied) {
    if (const SemanticBelief* belief = map.semantic(idx)) {
      const int K = map.label_count();
      std::vector<double> obs(K, K > 1 ? (1.0 - params.hypo_confidence) / (K - 1) : 1.0);
      if (K > 1) obs[belief->label - 1] = params.hypo_confidence;
      const std::vector<double> fused = fuse_semantic(&belief->p, obs);
      gain += w.alpha * i_semantic(&belief->p, &fused, K, case2);
    }
  }
  return gain;
}

FrustumStats frustum_stats(const WorldMap& map, const Pose& view, const CameraModel& camera,
                           const GainWeights& w, const ExpectedGainParams& params,
                           SemanticCase2 case2, VoxelGainCache* cache) {
  const Vec3 origin{view.x, view.y, camera.mount_height};
  const VoxelCoord origin_voxel{static_cast<int>(std::floor(origin.x / map.resolution())),
                                static_cast<int>(std::floor(origin.y / map.resolution())),
                                static_cast<int>(std::floor(origin.z / map.resolution()))};
  if (map.dims().contains(origin_voxel) &&
      map.state(map.dims().index(origin_voxel)) == VoxelState::kOccupied) {
    throw PoseError("frustum_stats: view origin believed occupied");
  }

  static thread_local VisitStamps counted;
  counted.reset(map.dims().size());

  const auto gain_of = [&](std::int32_t idx) {
    double g;
    if (cache != nullptr && cache->get(idx, g)) return g;
    g = hypothetical_voxel_gain(map, idx, w, params, case2);
    if (cache != nullptr) cache->put(idx, g);
    return g;
  };

  FrustumStats stats;
  for (int j = 0; j < camera.v_rays; ++j) {
    for (int i = 0; i < camera.h_rays; ++i) {
      const Vec3 dir = ray_direction(view, camera, i, j);
      double free_dist = 0.0;
      walk_grid(map.dims(), map.resolution(), origin, dir, camera.range_max,
                [&](const VoxelCoord& v, double t_enter, double t_exit) {
                  const std::int32_t idx = map.dims().index(v);
                  const VoxelState state = map.state(idx);
                  const bool in_window = t_enter >= camera.range_min;
                  if (state == VoxelState::kOccupied) {
                    if (in_window && !counted.test_and_mark(idx)) {
                      stats.gain_bits += gain_of(idx);
                    }
                    return false;
                  }
                  if (state == VoxelState::kUnknown) {
                    if (in_window && !counted.test_and_mark(idx)) {
                      stats.gain_bits += gain_of(idx);
                    }
                    return free_dist < params.unknown_block_dist;
                  }
                  free_dist += t_exit - t_enter;
                  if (in_window && !counted.test_and_mark(idx)) {
                    stats.gain_bits += gain_of(idx);
                    if (map.frontier(idx)) ++stats.frontier_visible;
                  }
                  return true;
                });
    }
  }
  return stats;
}

double expected_gain(const WorldMap& map, const Pose& view, const CameraModel& camera,
                     const GainWeights& w, const ExpectedGainParams& params,
                     SemanticCase2 case2) {
  return frustum_stats(map, view, camera, w, params, case2).gain_bits;
}

// ---------------------------------------------------------------------------
// EntropyField
// ---------------------------------------------------------------------------

double voxel_h_geo(const WorldMap& map, std::int32_t idx) { return h_geometry(map.sigma(idx)); }

double voxel_h_sem(const WorldMap& map, std::int32_t idx) {
  const VoxelState state = map.state(idx);
  if (state == VoxelState::kFree) {
    return 0.0;  // a believed-free voxel carries no label uncertainty
  }
  if (const SemanticBelief* belief = map.semantic(idx)) {
    return entropy_bits(belief->p);
  }
  return map.label_count() >= 1 ? std::log2(static_cast<double>(map.label_count())) : 0.0;
}

double voxel_h(const WorldMap& map, std::int32_t idx, const GainWeights& w) {
  return w.alpha * voxel_h_sem(map, idx) + w.beta * voxel_h_geo(map, idx);
}

EntropyField::EntropyField(const WorldMap& map, const GainWeights& w) : weights_(w) {
  rebuild(map);
}

void EntropyField::compute_voxel(const WorldMap& map, std::int32_t idx, double& hg,
                                 double& hs) const {
  hg = voxel_h_geo(map, idx);
  hs = voxel_h_sem(map, idx);
}

void EntropyField::rebuild(const WorldMap& map) {
  dims_ = map.dims();
  const std::int64_t n = dims_.size();
  h_geo_.resize(n);
  h_sem_.resize(n);
  h_.resize(n);
  observed_.resize(n);
  sum_h_ = sum_geo_ = sum_sem_ = observed_sum_h_ = 0.0;
  for (std::int32_t i = 0; i < n; ++i) {
    double hg, hs;
    compute_voxel(map, i, hg, hs);
    h_geo_[i] = hg;
    h_sem_[i] = hs;
    h_[i] = weights_.alpha * hs + weights_.beta * hg;
    observed_[i] = map.observed(i) ? 1 : 0;
    sum_geo_ += hg;
    sum_sem_ += hs;
    sum_h_ += h_[i];
    if (observed_[i]) observed_sum_h_ += h_[i];
  }
}

void EntropyField::apply(const WorldMap& map, const ChangeSet& cs) {
  for (const VoxelChange& ch : cs.changed) {
    const std::int32_t idx = ch.voxel;
    double hg, hs;
    compute_voxel(map, idx, hg, hs);
    const double h_new = weights_.alpha * hs + weights_.beta * hg;
    sum_geo_ += hg - h_geo_[idx];
    sum_sem_ += hs - h_sem_[idx];
    sum_h_ += h_new - h_[idx];

    const bool was_observed = observed_[idx] != 0;
    const bool now_observed = map.observed(idx);
    if (was_observed) observed_sum_h_ -= h_[idx];
    if (now_observed) observed_sum_h_ += h_new;
    observed_[idx] = now_observed ? 1 : 0;

    h_geo_[idx] = hg;
    h_sem_[idx] = hs;
    h_[idx] = h_new;
  }
}

double EntropyField::actionable_sum_h(const WorldMap& map) const {
  double sum = observed_sum_h_;
  // Unobserved Unknown voxels adjacent to a frontier, counted once each.
  static thread_local VisitStamps seen;
  seen.reset(dims_.size());
  const int dx[6] = {1, -1, 0, 0, 0, 0};
  const int dy[6] = {0, 0, 1, -1, 0, 0};
  const int dz[6] = {0, 0, 0, 0, 1, -1};
  for (std::int32_t f : map.frontiers()) {
    const VoxelCoord c = dims_.coord(f);
    for (int k = 0; k < 6; ++k) {
      const VoxelCoord n{c.x + dx[k], c.y + dy[k], c.z + dz[k]};
      if (!dims_.contains(n)) continue;
      const std::int32_t ni = dims_.index(n);
      if (map.state(ni) != VoxelState::kUnknown || map.observed(ni)) continue;
      if (!seen.test_and_mark(ni)) sum += h_[ni];
    }
  }
  return sum;
}

double EntropyField::audit_max_error(const WorldMap& map) const {
  double worst = 0.0;
  for (std::int32_t i = 0; i < dims_.size(); ++i) {
    double hg, hs;
    compute_voxel(map, i, hg, hs);
    worst = std::max(worst, std::abs(hg - h_geo_[i]));
    worst = std::max(worst, std::abs(hs - h_sem_[i]));
    worst = std::max(worst, std::abs(weights_.alpha * hs + weights_.beta * hg - h_[i]));
  }
  return worst;
}

void EntropyField::write_layer_csv(const WorldMap& map, int z, std::ostream& out) const {
  for (int y = 0; y < dims_.ny; ++y) {
    for (int x = 0; x < dims_.nx; ++x) {
      if (x > 0) out << ',';
      out << h_[map.dims().index(x, y, z)];
    }
    out << '\n';
  }
}

}  // namespace escan
