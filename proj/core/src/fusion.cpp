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

#include "escan/fusion.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "escan/rng.hpp"

#include <nlohmann/json.hpp>

namespace escan {

namespace {

const int kNeighborDx[6] = {1, -1, 0, 0, 0, 0};
const int kNeighborDy[6] = {0, 0, 1, -1, 0, 0};
const int kNeighborDz[6] = {0, 0, 0, 0, 1, -1};

void set_argmax(SemanticBelief& b) {
  b.label = 1;
  b.confidence = b.p.empty() ? 0.0 : b.p[0];
  for (std::size_t i = 1; i < b.p.size(); ++i) {
    if (b.p[i] > b.confidence) {
      b.confidence = b.p[i];
      b.label = static_cast<int>(i) + 1;
    }
  }
}

}  // namespace

std::vector<double> fuse_semantic(const std::vector<double>* prior,
                                  const std::vector<double>& obs) {
  if (prior == nullptr || prior->empty()) return obs;
  std::vector<double> out(obs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out[i] = (*prior)[i] * obs[i];
    sum += out[i];
  }
  if (sum < 1e-300) {
    static bool warned = false;
    if (!warned) {
      std::fprintf(stderr, "escan: semantic fusion underflow, averaging instead\n");
      warned = true;
    }
    for (std::size_t i = 0; i < obs.size(); ++i) out[i] = 0.5 * ((*prior)[i] + obs[i]);
    sum = 0.0;
    for (double v : out) sum += v;
  }
  for (double& v : out) v /= sum;
  return out;
}

WorldMap::WorldMap(GridDims dims, double resolution, int label_count)
    : dims_(dims),
      resolution_(resolution),
      label_count_(label_count),
      support_centi_(dims.size(), 0),
      pos_count_(dims.size(), 0),
      neg_count_(dims.size(), 0),
      state_(dims.size(), VoxelState::kUnknown),
      frontier_(dims.size(), 0) {}

VoxelState WorldMap::classify(double sigma, bool observed) {
  if (!observed) return VoxelState::kUnknown;
  if (sigma >= kTauOcc) return VoxelState::kOccupied;
  if (sigma <= kTauFree) return VoxelState::kFree;
  return VoxelState::kUnknown;
}

const SemanticBelief* WorldMap::semantic(std::int32_t idx) const {
  const auto it = semantics_.find(idx);
  return it == semantics_.end() ? nullptr : &it->second;
}

void WorldMap::recompute_state(std::int32_t idx) {
  state_[idx] = classify(sigma(idx), observed(idx));
}

bool WorldMap::frontier_by_definition(std::int32_t idx) const {
  if (state_[idx] != VoxelState::kFree) return false;
  const VoxelCoord c = dims_.coord(idx);
  for (int k = 0; k < 6; ++k) {
    const VoxelCoord n{c.x + kNeighborDx[k], c.y + kNeighborDy[k], c.z + kNeighborDz[k]};
    if (!dims_.contains(n)) continue;  // outside the grid is not Unknown
    if (state_[dims_.index(n)] == VoxelState::kUnknown) return true;
  }
  return false;
}

ChangeSet WorldMap::integrate_frame(const SensorFrame& frame) {
  ChangeSet cs;

  // First touch records the old belief summary.
  std::unordered_map<std::int32_t, VoxelChange> pending;
  pending.reserve(frame.hits.size() + frame.misses.size());
  const auto touch = [&](std::int32_t idx) -> VoxelChange& {
    auto [it, inserted] = pending.try_emplace(idx);
    if (inserted) {
      it->second.voxel = idx;
      it->second.sigma_old = sigma(idx);
      it->second.state_old = state_[idx];
    }
    return it->second;
  };

  for (const SensorFrame::Hit& h : frame.hits) {
    touch(h.voxel);
    if (!observed(h.voxel)) ++observed_count_;
    if (pos_count_[h.voxel] < kMaxObservations) {
      pos_count_[h.voxel] += 1;
      support_centi_[h.voxel] += kSupportHitCenti;
    }
  }
  for (std::int32_t m : frame.misses) {
    touch(m);
    if (!observed(m)) ++observed_count_;
    if (neg_count_[m] < kMaxObservations) {
      neg_count_[m] += 1;
      support_centi_[m] += kSupportMissCenti;
    }
  }
  for (const SensorFrame::SemanticObs& obs : frame.semantic_obs) {
    VoxelChange& ch = touch(obs.voxel);
    ch.sem_changed = true;
    SemanticBelief& belief = semantics_[obs.voxel];
    belief.p = fuse_semantic(belief.p.empty() ? nullptr : &belief.p, obs.dist);
    set_argmax(belief);
  }

  if (pending.empty()) return cs;

  // Recompute states; collect voxels whose state flipped.
  std::vector<std::int32_t> state_flipped;
  cs.changed.reserve(pending.size());
  for (auto& [idx, ch] : pending) {
    recompute_state(idx);
    ch.sigma_new = sigma(idx);
    ch.state_new = state_[idx];
    if (ch.state_new != ch.state_old) state_flipped.push_back(idx);
    cs.changed.push_back(ch);
  }
  std::sort(cs.changed.begin(), cs.changed.end(),
            [](const VoxelChange& a, const VoxelChange& b) { return a.voxel < b.voxel; });

  // Frontier flags can flip on any voxel whose state changed and on its
  // 6-neighborhood; all other flags are untouched by this frame.
  std::vector<std::int32_t> recheck;
  recheck.reserve(state_flipped.size() * 7);
  for (std::int32_t idx : state_flipped) {
    recheck.push_back(idx);
    const VoxelCoord c = dims_.coord(idx);
    for (int k = 0; k < 6; ++k) {
      const VoxelCoord n{c.x + kNeighborDx[k], c.y + kNeighborDy[k], c.z + kNeighborDz[k]};
      if (dims_.contains(n)) recheck.push_back(dims_.index(n));
    }
  }
  std::sort(recheck.begin(), recheck.end());
  recheck.erase(std::unique(recheck.begin(), recheck.end()), recheck.end());

  for (std::int32_t idx : recheck) {
    const bool now = frontier_by_definition(idx);
    const bool was = frontier_[idx] != 0;
    if (now == was) continue;
    frontier_[idx] = now ? 1 : 0;
    frontier_count_ += now ? 1 : -1;
    (now ? cs.frontier_added : cs.frontier_removed).push_back(idx);
  }
  return cs;
}

std::vector<std::int32_t> WorldMap::frontiers() const {
  std::vector<std::int32_t> out;
  out.reserve(static_cast<std::size_t>(frontier_count_));
  for (std::int32_t i = 0; i < dims_.size(); ++i) {
    if (frontier_[i]) out.push_back(i);
  }
  return out;
}

std::int64_t WorldMap::audit(double sample_fraction, std::uint64_t seed) const {
  std::int64_t violations = 0;
  RngStream rng(seed);
  for (std::int32_t i = 0; i < dims_.size(); ++i) {
    if (sample_fraction < 1.0 && rng.uniform() >= sample_fraction) continue;
    if (support_centi_[i] != kSupportHitCenti * static_cast<std::int32_t>(pos_count_[i]) +
                                kSupportMissCenti * static_cast<std::int32_t>(neg_count_[i])) {
      ++violations;
    }
    if (state_[i] != classify(sigma(i), observed(i))) ++violations;
    if ((frontier_[i] != 0) != frontier_by_definition(i)) ++violations;
  }
  return violations;
}

bool WorldMap::operator==(const WorldMap& other) const {
  if (dims_ != other.dims_ || resolution_ != other.resolution_ ||
      label_count_ != other.label_count_ || support_centi_ != other.support_centi_ ||
      pos_count_ != other.pos_count_ || neg_count_ != other.neg_count_ ||
      state_ != other.state_ || frontier_ != other.frontier_) {
    return false;
  }
  if (semantics_.size() != other.semantics_.size()) return false;
  for (const auto& [idx, belief] : semantics_) {
    const auto it = other.semantics_.find(idx);
    if (it == other.semantics_.end() || it->second.p != belief.p ||
        it->second.label != belief.label) {
      return false;
    }
  }
  return true;
}

std::string WorldMap::to_json() const {
  nlohmann::json j;
  j["resolution"] = resolution_;
  j["dims"] = {dims_.nx, dims_.ny, dims_.nz};
  j["label_count"] = label_count_;
  nlohmann::json voxels = nlohmann::json::array();
  static const char* kStateNames[] = {"unknown", "free", "occupied"};
  for (std::int32_t i = 0; i < dims_.size(); ++i) {
    if (!observed(i)) continue;
    nlohmann::json v;
    v["i"] = i;
    v["sigma"] = sigma(i);
    v["state"] = kStateNames[static_cast<int>(state_[i])];
    if (const SemanticBelief* b = semantic(i)) {
      v["label"] = b->label;
      v["conf"] = b->confidence;
    }
    voxels.push_back(std::move(v));
  }
  j["voxels"] = std::move(voxels);
  return j.dump();
}

}  // namespace escan
