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

#ifndef ESCAN_HARNESS_HPP_
#define ESCAN_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "escan/entropy.hpp"
#include "escan/planner.hpp"
#include "escan/scene.hpp"
#include "escan/sensor.hpp"
#include "escan/vsf.hpp"

namespace escan {

enum class PlannerMode { kField, kDijkstra };
enum class EntropyMode { kCombined, kGeometryOnly, kSemanticOnly };

const char* to_string(PlannerMode mode);
const char* to_string(EntropyMode mode);
PlannerMode planner_mode_from_string(const std::string& s);
EntropyMode entropy_mode_from_string(const std::string& s);

struct EpisodeConfig {
  std::optional<std::string> scene_path;
  std::optional<GenParams> gen;
  std::uint64_t seed = 0;
  PlannerMode planner = PlannerMode::kField;
  EntropyMode entropy = EntropyMode::kCombined;

  GainWeights weights;
  VsfParams vsf;
  CameraModel camera;
  PlannerConfig planner_cfg;
  ExpectedGainParams gain;
  SemanticCase2 semantic_case2 = SemanticCase2::kLiteral;
  double lattice_xy_resolution = 0.4;
  int lattice_theta_bins = 16;

  double termination_fraction = 0.05;  // stop below this fraction of initial h
  double min_view_score = 1e-6;        // NBV completion threshold on F
  int step_budget = 1200;              // executed lattice moves
  int scan_cadence = 1;                // frames per lattice move
  int threads = 0;                     // 0 = auto
  int audit_level = 0;                 // 1 = cheap per-step audits (throws on failure)

  // Footprint clearing: the body band the robot sweeps is free by presence.
  // The larger start bubble covers the sensor's minimum-range shell, which
  // no amount of in-place scanning can observe.
  double footprint_clear_radius = 0.6;
  double start_clear_radius = 0.85;

  // Ablation weights: the off term is zeroed, the other kept as configured.
  GainWeights effective_weights() const;

  void validate() const;  // throws ConfigError
  std::string to_json() const;
  static EpisodeConfig from_json(const std::string& text);
};

enum class EndReason { kThreshold, kComplete, kBudget };
const char* to_string(EndReason reason);

struct MetricsRow {
  int step = 0;
  double sim_time = 0.0;
  double distance_traveled = 0.0;
  double rotation = 0.0;
  std::int64_t correctly_labeled_voxels = 0;  // non-structure, argmax correct
  std::int64_t observed_voxels = 0;
  double labeled_accuracy = 0.0;  // over believed-labeled voxels
  int identified_objects = 0;
  double sum_h = 0.0;         // global weighted entropy
  double actionable_h = 0.0;  // observed + frontier-adjacent entropy
};

struct MetricsTimeline {
  std::vector<MetricsRow> rows;
  EndReason end_reason = EndReason::kBudget;

  void write_csv(std::ostream& out) const;
  std::string to_csv() const;
};

struct EpisodeResult {
  SceneSpec spec;
  GroundTruth gt;
  WorldMap map;
  MetricsTimeline metrics;
  std::vector<PathPlan> plans;  // one per NBV cycle
  std::int64_t gt_object_voxels = 0;
};

// Optional instrumentation: called after every executed step with fresh
// beliefs (the field is lazily stale unless the callback syncs it).
// Returning false aborts the episode after the current step.
using StepObserver = std::function<bool(int step, const WorldMap& map,
                                        const EntropyField& entropy, ViewScoreField& field)>;

// Runs one full episode: init scans, then repeat
//   (ensure field fresh -> select NBV -> plan -> execute/scan/fuse/update)
// until the actionable entropy drops below the threshold, NBV selection
// signals completion, or the step budget is hit. Deterministic per seed.
EpisodeResult run_episode(const EpisodeConfig& cfg, const StepObserver& observer = {});

// Ground-truth object (connected component of one non-structure label) is
// identified iff at least half its voxels are believed occupied with the
// correct argmax label.
int identified_objects(const WorldMap& map, const GroundTruth& gt);

// Comparison sweeps (Table-1-shaped output plus per-step curves).
struct CompareVariant {
  std::string name;
  PlannerMode planner = PlannerMode::kField;
  EntropyMode entropy = EntropyMode::kCombined;
};

struct CompareSpec {
  EpisodeConfig base;
  std::vector<GenParams> scenes;          // generated scenes...
  std::vector<std::string> scene_paths;   // ...and/or scene files
  std::vector<std::uint64_t> seeds;
  std::vector<CompareVariant> variants;
};

struct CompareRun {
  std::string scene;
  std::string variant;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  MetricsTimeline metrics;
  std::int64_t gt_object_voxels = 0;
};

struct CompareResult {
  std::vector<CompareRun> runs;

  // scene,variant,seed,time,distance,accuracy,identified,steps,end
  void write_table_csv(std::ostream& out) const;
  // per-step curves for every run
  void write_curves_csv(std::ostream& out) const;
};

CompareResult run_compare(const CompareSpec& spec);

CompareSpec compare_spec_from_json(const std::string& text, const EpisodeConfig& base);

}  // namespace escan

#endif  // ESCAN_HARNESS_HPP_
