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

#ifndef ESCAN_ENTROPY_HPP_
#define ESCAN_ENTROPY_HPP_

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "escan/fusion.hpp"
#include "escan/geometry.hpp"
#include "escan/sensor.hpp"

namespace escan {

// Weights of the combined gain: I = alpha * I_semantic + beta * I_geometry.
struct GainWeights {
  double alpha = 1.0;
  double beta = 0.3;
};

// The printed case-2 value rewards label flips with moderate confidence;
// `kZero` disables it for experiments.
enum class SemanticCase2 { kLiteral, kZero };

// Occupancy probability p_g = e^{sigma^2} / (1 + e^{sigma^2}), computed in
// the numerically stable form; always in [0.5, 1).
double p_g(double sigma);

// Binary entropy in bits, with 0*log0 = 0.
double binary_entropy_bits(double p);

// Geometry entropy H_g of a voxel with the given support sum, in bits.
double h_geometry(double sigma);

// Geometry information gain of an evidence update.
double i_geometry(double old_sigma, double new_sigma);

// Piecewise semantic gain (base-2 logs). Absent distributions are treated
// as uniform over K labels; both absent (or no new observation) yields 0.
double i_semantic(const std::vector<double>* old_dist, const std::vector<double>* new_dist,
                  int label_count, SemanticCase2 case2 = SemanticCase2::kLiteral);

double i_combined(double i_sem, double i_geo, const GainWeights& w);

struct ExpectedGainParams {
  double gamma = 0.5;              // single-observation discount on Unknown voxels
  double w_unknown_geo = 1.0;      // weight on the Unknown geometry term
  double w_unknown_sem = 1.0;      // weight on the Unknown semantic term
  double unknown_block_dist = 0.5; // first Unknown blocks after this much Free
  double hypo_confidence = 0.95;   // peak of the hypothetical consistent observation
};

// Gain of one hypothetical consistent observation of voxel `idx`:
// Unknown voxels get the discounted full-ignorance gain; classified voxels
// get one more support in the direction of the current belief plus a
// max-confidence re-observation of the current argmax label.
double hypothetical_voxel_gain(const WorldMap& map, std::int32_t idx, const GainWeights& w,
                               const ExpectedGainParams& params,
                               SemanticCase2 case2 = SemanticCase2::kLiteral);

// Reference per-voxel uncertainty, recomputed from the map: geometry entropy
// of the support sum, and semantic entropy of the stored distribution (zero
// once a voxel is classified Free, log2 K while fully ignorant).
double voxel_h_geo(const WorldMap& map, std::int32_t idx);
double voxel_h_sem(const WorldMap& map, std::int32_t idx);
double voxel_h(const WorldMap& map, std::int32_t idx, const GainWeights& w);

struct FrustumStats {
  double gain_bits = 0.0;
  int frontier_visible = 0;
};

// Memoized hypothetical_voxel_gain values. A voxel's gain is a pure function
// of its belief, so the value can be shared across every frustum that sees
// it until the belief changes. Concurrent fills are safe: racing writers
// store the identical value.
class VoxelGainCache {
 public:
  void reset(std::int64_t n) {
    if (n != size_) {
      size_ = n;
      value_ = std::make_unique<std::atomic<double>[]>(n);
      valid_ = std::make_unique<std::atomic<std::uint8_t>[]>(n);
      for (std::int64_t i = 0; i < n; ++i) valid_[i].store(0, std::memory_order_relaxed);
    } else {
      for (std::int64_t i = 0; i < n; ++i) valid_[i].store(0, std::memory_order_relaxed);
    }
  }
  void invalidate(std::int32_t i) { valid_[i].store(0, std::memory_order_relaxed); }
  bool get(std::int32_t i, double& out) const {
    if (valid_[i].load(std::memory_order_acquire) == 0) return false;
    out = value_[i].load(std::memory_order_relaxed);
    return true;
  }
  void put(std::int32_t i, double v) {
    value_[i].store(v, std::memory_order_relaxed);
    valid_[i].store(1, std::memory_order_release);
  }

 private:
  std::int64_t size_ = 0;
  std::unique_ptr<std::atomic<double>[]> value_;
  std::unique_ptr<std::atomic<std::uint8_t>[]> valid_;
};

// One deterministic frustum sweep over the believed map: Occupied voxels
// block, the first Unknown after `unknown_block_dist` of Free blocks, every
// visible voxel contributes its hypothetical gain once, and visible frontier
// voxels are counted once each.
FrustumStats frustum_stats(const WorldMap& map, const Pose& view, const CameraModel& camera,
                           const GainWeights& w, const ExpectedGainParams& params,
                           SemanticCase2 case2 = SemanticCase2::kLiteral,
                           VoxelGainCache* cache = nullptr);

// Expected information gain of a hypothetical view against the believed map.
// Deterministic; throws PoseError if the view origin is believed occupied.
double expected_gain(const WorldMap& map, const Pose& view, const CameraModel& camera,
                     const GainWeights& w, const ExpectedGainParams& params = {},
                     SemanticCase2 case2 = SemanticCase2::kLiteral);

// Per-voxel uncertainty map: raw geometry and semantic components plus the
// weighted combination h = alpha*h_sem + beta*h_geo, maintained incrementally
// from ChangeSets. A voxel classified Free carries no semantic uncertainty.
class EntropyField {
 public:
  EntropyField() = default;
  EntropyField(const WorldMap& map, const GainWeights& w);

  // Incremental update after integrate_frame; must be called with the map
  // already holding the new beliefs.
  void apply(const WorldMap& map, const ChangeSet& cs);

  // Full recomputation (the batch oracle the incremental path must match).
  void rebuild(const WorldMap& map);

  double h_geo(std::int32_t idx) const { return h_geo_[idx]; }
  double h_sem(std::int32_t idx) const { return h_sem_[idx]; }
  double h(std::int32_t idx) const { return h_[idx]; }

  double sum_h() const { return sum_h_; }
  double sum_h_geo() const { return sum_geo_; }
  double sum_h_sem() const { return sum_sem_; }
  double observed_sum_h() const { return observed_sum_h_; }

  // Sum of h over observed voxels plus the unobserved Unknown voxels
  // adjacent to a frontier: the uncertainty the robot can actually act on.
  double actionable_sum_h(const WorldMap& map) const;

  const GainWeights& weights() const { return weights_; }

  // Maximum |stored - recomputed| over all voxels, for audits.
  double audit_max_error(const WorldMap& map) const;

  // CSV grid of combined h for one z layer (rows = y, cols = x).
  void write_layer_csv(const WorldMap& map, int z, std::ostream& out) const;

 private:
  void compute_voxel(const WorldMap& map, std::int32_t idx, double& hg, double& hs) const;

  GainWeights weights_;
  GridDims dims_;
  std::vector<double> h_geo_;
  std::vector<double> h_sem_;
  std::vector<double> h_;
  std::vector<std::uint8_t> observed_;
  double sum_h_ = 0.0;
  double sum_geo_ = 0.0;
  double sum_sem_ = 0.0;
  double observed_sum_h_ = 0.0;
};

}  // namespace escan

#endif  // ESCAN_ENTROPY_HPP_
