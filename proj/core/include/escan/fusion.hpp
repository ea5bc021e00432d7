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

#ifndef ESCAN_FUSION_HPP_
#define ESCAN_FUSION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "escan/geometry.hpp"
#include "escan/sensor.hpp"

namespace escan {

// Support constants: +0.85 per positive support (depth hit), -0.4 per
// negative support (ray pass-through). Stored in integer hundredths so that
// sigma accounting is exact and order-independent.
constexpr double kSupportHit = 0.85;
constexpr double kSupportMiss = -0.4;
constexpr int kSupportHitCenti = 85;
constexpr int kSupportMissCenti = -40;

// Classification thresholds: one unanswered hit marks Occupied, one
// unanswered miss marks Free.
constexpr double kTauOcc = 0.85;
constexpr double kTauFree = -0.4;

constexpr std::uint32_t kMaxObservations = 1000000;  // count saturation

enum class VoxelState : std::uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

struct SemanticBelief {
  std::vector<double> p;  // categorical over K labels, sums to 1
  int label = 0;          // argmax, 1-based; lowest index wins ties
  double confidence = 0.0;
};

struct VoxelChange {
  std::int32_t voxel = 0;
  double sigma_old = 0.0;
  double sigma_new = 0.0;
  VoxelState state_old = VoxelState::kUnknown;
  VoxelState state_new = VoxelState::kUnknown;
  bool sem_changed = false;
};

// Exact delta of one integration step. Voxel lists are sorted and the
// frontier added/removed sets are disjoint.
struct ChangeSet {
  std::vector<VoxelChange> changed;
  std::vector<std::int32_t> frontier_added;
  std::vector<std::int32_t> frontier_removed;

  bool empty() const {
    return changed.empty() && frontier_added.empty() && frontier_removed.empty();
  }
};

// Product (naive-Bayes) fusion, renormalized; absent prior returns the
// observation; an all-underflow product falls back to averaging.
std::vector<double> fuse_semantic(const std::vector<double>* prior,
                                  const std::vector<double>& obs);

// The robot's belief: occupancy support, derived state, frontier flags, and
// per-voxel label distributions. Single writer; concurrent readers must not
// overlap with integrate_frame.
class WorldMap {
 public:
  WorldMap() = default;
  WorldMap(GridDims dims, double resolution, int label_count);

  ChangeSet integrate_frame(const SensorFrame& frame);

  static VoxelState classify(double sigma, bool observed);

  const GridDims& dims() const { return dims_; }
  double resolution() const { return resolution_; }
  int label_count() const { return label_count_; }

  double sigma(std::int32_t idx) const { return support_centi_[idx] / 100.0; }
  std::uint32_t pos_count(std::int32_t idx) const { return pos_count_[idx]; }
  std::uint32_t neg_count(std::int32_t idx) const { return neg_count_[idx]; }
  bool observed(std::int32_t idx) const { return pos_count_[idx] + neg_count_[idx] > 0; }
  VoxelState state(std::int32_t idx) const { return state_[idx]; }
  bool frontier(std::int32_t idx) const { return frontier_[idx] != 0; }
  const SemanticBelief* semantic(std::int32_t idx) const;

  std::int64_t observed_count() const { return observed_count_; }
  std::int64_t frontier_count() const { return frontier_count_; }

  // Sorted list of frontier voxels (exactly the set with frontier flag on).
  std::vector<std::int32_t> frontiers() const;

  // Full recomputation of one voxel's frontier predicate, for audits.
  bool frontier_by_definition(std::int32_t idx) const;

  // Number of stored invariant violations (state or frontier flag out of
  // sync with its definition); 0 on a healthy map.
  std::int64_t audit(double sample_fraction = 1.0, std::uint64_t seed = 0) const;

  bool operator==(const WorldMap& other) const;

  // Sparse snapshot of non-pristine voxels (sigma/state/label/confidence).
  std::string to_json() const;

 private:
  void recompute_state(std::int32_t idx);

  GridDims dims_;
  double resolution_ = 0.05;
  int label_count_ = 0;
  std::vector<std::int32_t> support_centi_;
  std::vector<std::uint32_t> pos_count_;
  std::vector<std::uint32_t> neg_count_;
  std::vector<VoxelState> state_;
  std::vector<std::uint8_t> frontier_;
  std::unordered_map<std::int32_t, SemanticBelief> semantics_;
  std::int64_t observed_count_ = 0;
  std::int64_t frontier_count_ = 0;
};

}  // namespace escan

#endif  // ESCAN_FUSION_HPP_
