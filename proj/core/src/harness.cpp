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

#include "escan/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "escan/errors.hpp"
#include "escan/visit_stamps.hpp"

#include <nlohmann/json.hpp>

namespace escan {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

constexpr int kMaxNbvRetries = 16;

}  // namespace

const char* to_string(PlannerMode mode) {
  return mode == PlannerMode::kField ? "field" : "dijkstra";
}
const char* to_string(EntropyMode mode) {
  switch (mode) {
    case EntropyMode::kCombined: return "combined";
    case EntropyMode::kGeometryOnly: return "geometry";
    default: return "semantic";
  }
}
const char* to_string(EndReason reason) {
  switch (reason) {
    case EndReason::kThreshold: return "threshold";
    case EndReason::kComplete: return "complete";
    default: return "budget";
  }
}

PlannerMode planner_mode_from_string(const std::string& s) {
  if (s == "field") return PlannerMode::kField;
  if (s == "dijkstra") return PlannerMode::kDijkstra;
  throw ConfigError("unknown planner mode: " + s);
}

EntropyMode entropy_mode_from_string(const std::string& s) {
  if (s == "combined") return EntropyMode::kCombined;
  if (s == "geometry") return EntropyMode::kGeometryOnly;
  if (s == "semantic") return EntropyMode::kSemanticOnly;
  throw ConfigError("unknown entropy mode: " + s);
}

GainWeights EpisodeConfig::effective_weights() const {
  GainWeights w = weights;
  if (entropy == EntropyMode::kGeometryOnly) w.alpha = 0.0;
  if (entropy == EntropyMode::kSemanticOnly) w.beta = 0.0;
  return w;
}

void EpisodeConfig::validate() const {
  if (!scene_path.has_value() && !gen.has_value()) {
    throw ConfigError("episode config: need a scene path or generation params");
  }
  if (scene_path.has_value() && gen.has_value()) {
    throw ConfigError("episode config: scene path and generation params are exclusive");
  }
  if (step_budget < 1) throw ConfigError("episode config: step budget must be >= 1");
  if (scan_cadence < 1) throw ConfigError("episode config: scan cadence must be >= 1");
  if (termination_fraction < 0.0 || termination_fraction >= 1.0) {
    throw ConfigError("episode config: termination fraction must be in [0, 1)");
  }
  if (weights.alpha < 0.0 || weights.beta < 0.0) {
    throw ConfigError("episode config: gain weights must be >= 0");
  }
  if (lattice_theta_bins < 4) throw ConfigError("episode config: need >= 4 theta bins");
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

std::string EpisodeConfig::to_json() const {
  json j;
  if (scene_path) j["scene"] = *scene_path;
  if (gen) {
    j["gen"] = {{"rooms", gen->rooms},         {"density", gen->furniture_density},
                {"width", gen->width_m},       {"height", gen->height_m},
                {"seed", gen->seed},           {"resolution", gen->resolution},
                {"ceiling", gen->ceiling_m}};
  }
  j["seed"] = seed;
  j["planner"] = to_string(planner);
  j["entropy"] = to_string(entropy);
  j["weights"] = {{"alpha", weights.alpha}, {"beta", weights.beta}};
  j["vsf"] = {{"alpha_frontier", vsf.alpha_frontier},
              {"movement_sigma", vsf.movement_sigma},
              {"safety_clearance", vsf.safety_clearance},
              {"obstacle_sigma", vsf.obstacle_sigma},
              {"eta", vsf.eta},
              {"movement_cost_mode",
               vsf.movement_cost_mode == MovementCostMode::kMultiply ? "multiply"
                                                                     : "divide-as-printed"},
              {"score_h_rays", vsf.score_h_rays},
              {"score_v_rays", vsf.score_v_rays},
              {"gain_scale", vsf.gain_scale},
              {"unknown_z_min", vsf.unknown_z_min},
              {"body_z_min", vsf.body.body_z_min},
              {"body_z_max", vsf.body.body_z_max}};
  j["camera"] = {{"range_min", camera.range_min},
                 {"range_max", camera.range_max},
                 {"depth_noise_sigma", camera.depth_noise_sigma},
                 {"h_fov", camera.h_fov},
                 {"v_fov", camera.v_fov},
                 {"h_rays", camera.h_rays},
                 {"v_rays", camera.v_rays},
                 {"mount_height", camera.mount_height}};
  j["planner_cfg"] = {{"linear_speed", planner_cfg.linear_speed},
                      {"angular_speed", planner_cfg.angular_speed},
                      {"eps_cost", planner_cfg.eps_cost}};
  j["gain"] = {{"gamma", gain.gamma},
               {"w_unknown_geo", gain.w_unknown_geo},
               {"w_unknown_sem", gain.w_unknown_sem},
               {"unknown_block_dist", gain.unknown_block_dist},
               {"hypo_confidence", gain.hypo_confidence}};
  j["semantic_case2"] = semantic_case2 == SemanticCase2::kLiteral ? "literal" : "zero";
  j["lattice"] = {{"xy_resolution", lattice_xy_resolution}, {"theta_bins", lattice_theta_bins}};
  j["termination_fraction"] = termination_fraction;
  j["min_view_score"] = min_view_score;
  j["step_budget"] = step_budget;
  j["scan_cadence"] = scan_cadence;
  j["threads"] = threads;
  j["audit_level"] = audit_level;
  j["footprint_clear_radius"] = footprint_clear_radius;
  j["start_clear_radius"] = start_clear_radius;
  return j.dump(2);
}

EpisodeConfig EpisodeConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  EpisodeConfig cfg;
  try {
    if (j.contains("scene")) cfg.scene_path = j["scene"].get<std::string>();
    if (j.contains("gen")) {
      GenParams g;
      const json& jg = j["gen"];
      g.rooms = jg.value("rooms", g.rooms);
      g.furniture_density = jg.value("density", g.furniture_density);
      g.width_m = jg.value("width", g.width_m);
      g.height_m = jg.value("height", g.height_m);
      g.seed = jg.value("seed", g.seed);
      g.resolution = jg.value("resolution", g.resolution);
      g.ceiling_m = jg.value("ceiling", g.ceiling_m);
      cfg.gen = g;
    }
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("planner")) cfg.planner = planner_mode_from_string(j["planner"]);
    if (j.contains("entropy")) cfg.entropy = entropy_mode_from_string(j["entropy"]);
    if (j.contains("weights")) {
      cfg.weights.alpha = j["weights"].value("alpha", cfg.weights.alpha);
      cfg.weights.beta = j["weights"].value("beta", cfg.weights.beta);
    }
    if (j.contains("vsf")) {
      const json& v = j["vsf"];
      cfg.vsf.alpha_frontier = v.value("alpha_frontier", cfg.vsf.alpha_frontier);
      cfg.vsf.movement_sigma = v.value("movement_sigma", cfg.vsf.movement_sigma);
      cfg.vsf.safety_clearance = v.value("safety_clearance", cfg.vsf.safety_clearance);
      cfg.vsf.obstacle_sigma = v.value("obstacle_sigma", cfg.vsf.obstacle_sigma);
      cfg.vsf.eta = v.value("eta", cfg.vsf.eta);
      if (v.contains("movement_cost_mode")) {
        const std::string m = v["movement_cost_mode"];
        if (m == "multiply") {
          cfg.vsf.movement_cost_mode = MovementCostMode::kMultiply;
        } else if (m == "divide-as-printed") {
          cfg.vsf.movement_cost_mode = MovementCostMode::kDivideAsPrinted;
        } else {
          throw ConfigError("unknown movement_cost_mode: " + m);
        }
      }
      cfg.vsf.score_h_rays = v.value("score_h_rays", cfg.vsf.score_h_rays);
      cfg.vsf.score_v_rays = v.value("score_v_rays", cfg.vsf.score_v_rays);
      cfg.vsf.gain_scale = v.value("gain_scale", cfg.vsf.gain_scale);
      cfg.vsf.unknown_z_min = v.value("unknown_z_min", cfg.vsf.unknown_z_min);
      cfg.vsf.body.body_z_min = v.value("body_z_min", cfg.vsf.body.body_z_min);
      cfg.vsf.body.body_z_max = v.value("body_z_max", cfg.vsf.body.body_z_max);
    }
    if (j.contains("camera")) {
      const json& c = j["camera"];
      cfg.camera.range_min = c.value("range_min", cfg.camera.range_min);
      cfg.camera.range_max = c.value("range_max", cfg.camera.range_max);
      cfg.camera.depth_noise_sigma = c.value("depth_noise_sigma", cfg.camera.depth_noise_sigma);
      cfg.camera.h_fov = c.value("h_fov", cfg.camera.h_fov);
      cfg.camera.v_fov = c.value("v_fov", cfg.camera.v_fov);
      cfg.camera.h_rays = c.value("h_rays", cfg.camera.h_rays);
      cfg.camera.v_rays = c.value("v_rays", cfg.camera.v_rays);
      cfg.camera.mount_height = c.value("mount_height", cfg.camera.mount_height);
    }
    if (j.contains("planner_cfg")) {
      const json& p = j["planner_cfg"];
      cfg.planner_cfg.linear_speed = p.value("linear_speed", cfg.planner_cfg.linear_speed);
      cfg.planner_cfg.angular_speed = p.value("angular_speed", cfg.planner_cfg.angular_speed);
      cfg.planner_cfg.eps_cost = p.value("eps_cost", cfg.planner_cfg.eps_cost);
    }
    if (j.contains("gain")) {
      const json& g = j["gain"];
      cfg.gain.gamma = g.value("gamma", cfg.gain.gamma);
      cfg.gain.w_unknown_geo = g.value("w_unknown_geo", cfg.gain.w_unknown_geo);
      cfg.gain.w_unknown_sem = g.value("w_unknown_sem", cfg.gain.w_unknown_sem);
      cfg.gain.unknown_block_dist = g.value("unknown_block_dist", cfg.gain.unknown_block_dist);
      cfg.gain.hypo_confidence = g.value("hypo_confidence", cfg.gain.hypo_confidence);
    }
    if (j.contains("semantic_case2")) {
      const std::string c = j["semantic_case2"];
      if (c == "literal") {
        cfg.semantic_case2 = SemanticCase2::kLiteral;
      } else if (c == "zero") {
        cfg.semantic_case2 = SemanticCase2::kZero;
      } else {
        throw ConfigError("unknown semantic_case2: " + c);
      }
    }
    if (j.contains("lattice")) {
      cfg.lattice_xy_resolution = j["lattice"].value("xy_resolution", cfg.lattice_xy_resolution);
      cfg.lattice_theta_bins = j["lattice"].value("theta_bins", cfg.lattice_theta_bins);
    }
    cfg.termination_fraction = j.value("termination_fraction", cfg.termination_fraction);
    cfg.min_view_score = j.value("min_view_score", cfg.min_view_score);
    cfg.step_budget = j.value("step_budget", cfg.step_budget);
    cfg.scan_cadence = j.value("scan_cadence", cfg.scan_cadence);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.audit_level = j.value("audit_level", cfg.audit_level);
    cfg.footprint_clear_radius = j.value("footprint_clear_radius", cfg.footprint_clear_radius);
    cfg.start_clear_radius = j.value("start_clear_radius", cfg.start_clear_radius);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

void MetricsTimeline::write_csv(std::ostream& out) const {
  out << "step,sim_time,distance_traveled,rotation,correctly_labeled_voxels,observed_voxels,"
         "labeled_accuracy,identified_objects,sum_h,actionable_h\n";
  for (const MetricsRow& r : rows) {
    out << r.step << ',' << fmt_double(r.sim_time) << ',' << fmt_double(r.distance_traveled)
        << ',' << fmt_double(r.rotation) << ',' << r.correctly_labeled_voxels << ','
        << r.observed_voxels << ',' << fmt_double(r.labeled_accuracy) << ','
        << r.identified_objects << ',' << fmt_double(r.sum_h) << ','
        << fmt_double(r.actionable_h) << '\n';
  }
  out << "# end_reason," << to_string(end_reason) << '\n';
}

std::string MetricsTimeline::to_csv() const {
  std::ostringstream ss;
  write_csv(ss);
  return ss.str();
}

namespace {

// Incremental labeling metrics: per-voxel cached predicates diffed on every
// ChangeSet so counters stay O(changed) per frame.
class LabelTracker {
 public:
  LabelTracker(const GroundTruth& gt) : gt_(&gt), flags_(gt.dims.size(), 0) {
    const std::vector<ObjectComponent> comps = object_components(gt);
    comp_id_.assign(gt.dims.size(), -1);
    comp_size_.reserve(comps.size());
    comp_correct_.assign(comps.size(), 0);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      comp_size_.push_back(static_cast<std::int64_t>(comps[c].voxels.size()));
      for (std::int32_t v : comps[c].voxels) comp_id_[v] = static_cast<int>(c);
    }
    for (std::int32_t i = 0; i < gt.dims.size(); ++i) {
      const int lab = gt.label[i];
      if (lab != 0 && !gt.label_structure[lab]) ++gt_object_voxels_;
    }
  }

  void update(const WorldMap& map, const ChangeSet& cs) {
    for (const VoxelChange& ch : cs.changed) {
      if (!ch.sem_changed && ch.state_old == ch.state_new) continue;
      apply_voxel(map, ch.voxel);
    }
  }

  std::int64_t correct_object_voxels() const { return correct_object_; }
  std::int64_t labeled_voxels() const { return labeled_; }
  double accuracy() const {
    return labeled_ == 0 ? 0.0 : static_cast<double>(correct_any_) / labeled_;
  }
  int identified() const { return identified_; }
  std::int64_t gt_object_voxels() const { return gt_object_voxels_; }

 private:
  enum : std::uint8_t { kLabeled = 1, kCorrectAny = 2, kCorrectObject = 4 };

  void apply_voxel(const WorldMap& map, std::int32_t idx) {
    std::uint8_t now = 0;
    if (map.state(idx) == VoxelState::kOccupied) {
      if (const SemanticBelief* b = map.semantic(idx)) {
        now |= kLabeled;
        const int gt_label = gt_->label[idx];
        if (gt_label != 0 && b->label == gt_label) {
          now |= kCorrectAny;
          if (!gt_->label_structure[gt_label]) now |= kCorrectObject;
        }
      }
    }
    const std::uint8_t was = flags_[idx];
    if (was == now) return;
    labeled_ += ((now & kLabeled) ? 1 : 0) - ((was & kLabeled) ? 1 : 0);
    correct_any_ += ((now & kCorrectAny) ? 1 : 0) - ((was & kCorrectAny) ? 1 : 0);
    const int d_obj = ((now & kCorrectObject) ? 1 : 0) - ((was & kCorrectObject) ? 1 : 0);
    if (d_obj != 0) {
      correct_object_ += d_obj;
      const int cid = comp_id_[idx];
      if (cid >= 0) {
        const bool before = 2 * comp_correct_[cid] >= comp_size_[cid];
        comp_correct_[cid] += d_obj;
        const bool after = 2 * comp_correct_[cid] >= comp_size_[cid];
        if (before != after) identified_ += after ? 1 : -1;
      }
    }
    flags_[idx] = now;
  }

  const GroundTruth* gt_;
  std::vector<std::uint8_t> flags_;
  std::vector<int> comp_id_;
  std::vector<std::int64_t> comp_size_;
  std::vector<std::int64_t> comp_correct_;
  std::int64_t labeled_ = 0;
  std::int64_t correct_any_ = 0;
  std::int64_t correct_object_ = 0;
  std::int64_t gt_object_voxels_ = 0;
  int identified_ = 0;
};

// ---------------------------------------------------------------------------
// Episode runner
// ---------------------------------------------------------------------------

class EpisodeRunner {
 public:
  EpisodeRunner(const EpisodeConfig& cfg, const StepObserver& observer)
      : cfg_(cfg), weights_(cfg.effective_weights()), observer_(observer) {
    cfg_.validate();
    if (cfg_.scene_path) {
      spec_ = load_scene(*cfg_.scene_path);
    } else {
      spec_ = gen_scene(*cfg_.gen);
    }
    gt_ = rasterize(spec_);
    map_ = WorldMap(gt_.dims, gt_.resolution, gt_.label_count);
    lattice_ = ViewLattice::cover(gt_.dims, gt_.resolution, cfg_.lattice_xy_resolution,
                                  cfg_.lattice_theta_bins);
    tracker_.emplace(gt_);

    threads_ = cfg_.threads > 0
                   ? cfg_.threads
                   : std::min(4u, std::max(1u, std::thread::hardware_concurrency()));

    // Robot starts at the lattice cell holding the scene start pose.
    const int ix = std::clamp(lattice_.ix_of(spec_.start.x), 0, lattice_.nx - 1);
    const int iy = std::clamp(lattice_.iy_of(spec_.start.y), 0, lattice_.ny - 1);
    robot_ = lattice_.pose_of(ix, iy, lattice_.theta_bin_of(spec_.start.theta));
  }

  EpisodeResult run() {
    entropy_.emplace(map_, weights_);
    // The robot vouches for the space it occupies: without this the
    // minimum-range shell around the start pose stays Unknown forever and
    // the conservative safety mask pins the robot to its own cell.
    fuse_frame(footprint_frame(cfg_.start_clear_radius));
    // A deterministic three-view fan stands in for the initial random scans.
    for (int k = 0; k < 3; ++k) {
      const Pose view{robot_.x, robot_.y, normalize_angle(k * 2.0 * M_PI / 3.0)};
      capture_and_fuse(view);
    }
    field_.emplace(map_, robot_, lattice_, cfg_.vsf, weights_, cfg_.camera, cfg_.gain,
                   cfg_.semantic_case2, threads_);
    rebuild_frontier_set();
    threshold_abs_ = cfg_.termination_fraction * actionable_sum();
    record_row();

    EndReason end = EndReason::kBudget;
    std::vector<int> excluded;
    int last_zero_cell = -1;
    bool done = false;
    while (!done) {
      field_->ensure_fresh(map_);
      warn_eta_once();

      int cell = -1;
      try {
        cell = select_nbv_cell(*field_, cfg_.min_view_score, &excluded);
      } catch (const ExplorationComplete&) {
        end = EndReason::kComplete;
        break;
      }

      PathPlan plan;
      try {
        const Pose goal = nbv_pose(cell);
        plan = cfg_.planner == PlannerMode::kField
                   ? plan_path(*field_, robot_, goal, cfg_.planner_cfg)
                   : dijkstra_baseline(*field_, robot_, goal, cfg_.planner_cfg);
      } catch (const NoPathError&) {
        excluded.push_back(cell);
        if (static_cast<int>(excluded.size()) > kMaxNbvRetries) {
          end = EndReason::kComplete;
          break;
        }
        continue;  // next-best candidate
      }
      plans_.push_back(plan);

      if (plan.cells.size() <= 1) {
        // Already at the NBV: rescan in place, but never twice in a row.
        if (!step_scan()) {
          end = end_from_flags();
          break;
        }
        if (cell == last_zero_cell) excluded.push_back(cell);
        last_zero_cell = cell;
      } else {
        last_zero_cell = -1;
        const double goal_f_at_plan = field_->f(cell);
        int gx, gy, gt_bin;
        lattice_.decompose(cell, gx, gy, gt_bin);
        bool replan = false;
        for (std::size_t i = 1; i < plan.cells.size() && !replan; ++i) {
          const LatticeCell& next = plan.cells[i];
          field_->refresh_safety(map_);
          if (!field_->safe(next.ix, next.iy)) break;  // safety flip: replan
          move_to(next);
          if (!step_scan()) {
            end = end_from_flags();
            done = true;
            break;
          }
          // Replan when the target view lost most of its value en route.
          field_->refresh_safety(map_);
          field_->refresh_cell(map_, gx, gy);
          if (field_->f(cell) < 0.5 * goal_f_at_plan) replan = true;
        }
        excluded.clear();
      }
      if (done) break;

      if (actionable_sum() < threshold_abs_) {
        end = EndReason::kThreshold;
        break;
      }
    }

    metrics_.end_reason = aborted_ ? EndReason::kBudget : end;
    EpisodeResult result;
    result.spec = std::move(spec_);
    result.gt = std::move(gt_);
    result.map = std::move(map_);
    result.metrics = std::move(metrics_);
    result.plans = std::move(plans_);
    result.gt_object_voxels = tracker_->gt_object_voxels();
    return result;
  }

 private:
  Pose nbv_pose(int cell) const {
    int ix, iy, it;
    lattice_.decompose(cell, ix, iy, it);
    return lattice_.pose_of(ix, iy, it);
  }

  EndReason end_from_flags() const { return EndReason::kBudget; }

  void move_to(const LatticeCell& next) {
    const Pose next_pose = lattice_.pose_of(next.ix, next.iy, next.it);
    const bool moved_xy = std::abs(next_pose.x - robot_.x) > 1e-12 ||
                          std::abs(next_pose.y - robot_.y) > 1e-12;
    if (moved_xy) distance_ += lattice_.xy_resolution;
    rotation_ += std::abs(angle_diff(next_pose.theta, robot_.theta));
    robot_ = next_pose;
    if (moved_xy) fuse_frame(footprint_frame(cfg_.footprint_clear_radius));
  }

  // Free-space evidence for the voxels the robot body sweeps; no sensing
  // involved, so believed-occupied voxels are left alone.
  SensorFrame footprint_frame(double radius) const {
    SensorFrame frame;
    frame.pose = robot_;
    frame.frame_index = frame_counter_;
    const double res = map_.resolution();
    const GridDims& dims = map_.dims();
    const int x0 = std::max(0, static_cast<int>(std::floor((robot_.x - radius) / res)));
    const int x1 = std::min(dims.nx - 1, static_cast<int>(std::floor((robot_.x + radius) / res)));
    const int y0 = std::max(0, static_cast<int>(std::floor((robot_.y - radius) / res)));
    const int y1 = std::min(dims.ny - 1, static_cast<int>(std::floor((robot_.y + radius) / res)));
    for (int z = 0; z < dims.nz; ++z) {
      const double cz = (z + 0.5) * res;
      if (cz < 0.05 || cz >= cfg_.vsf.body.body_z_max) continue;
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double dx = (x + 0.5) * res - robot_.x;
          const double dy = (y + 0.5) * res - robot_.y;
          if (dx * dx + dy * dy > radius * radius) continue;
          const std::int32_t idx = dims.index(x, y, z);
          if (map_.state(idx) != VoxelState::kOccupied) frame.misses.push_back(idx);
        }
      }
    }
    return frame;
  }

  void capture_and_fuse(const Pose& view) {
    fuse_frame(capture(gt_, view, cfg_.camera, cfg_.seed, frame_counter_++));
  }

  void fuse_frame(const SensorFrame& frame) {
    const ChangeSet cs = map_.integrate_frame(frame);
    entropy_->apply(map_, cs);
    if (field_.has_value()) field_->apply(map_, cs, robot_);
    tracker_->update(map_, cs);
    for (std::int32_t v : cs.frontier_added) frontier_set_.insert(v);
    for (std::int32_t v : cs.frontier_removed) frontier_set_.erase(v);
    if (cfg_.audit_level >= 1) run_audits(cs);
  }

  // Returns false when the episode must stop (budget or observer abort).
  bool step_scan() {
    for (int k = 0; k < cfg_.scan_cadence; ++k) capture_and_fuse(robot_);
    ++steps_;
    record_row();
    if (observer_ && !observer_(steps_, map_, *entropy_, *field_)) {
      aborted_ = true;
      return false;
    }
    return steps_ < cfg_.step_budget;
  }

  void rebuild_frontier_set() {
    frontier_set_.clear();
    for (std::int32_t v : map_.frontiers()) frontier_set_.insert(v);
  }

  // observed_sum_h plus the unobserved Unknown voxels adjacent to a
  // frontier. Every unobserved voxel carries the same constant h, so the
  // extra term is a deduplicated count times that constant.
  double actionable_sum() const {
    const double log2k = map_.label_count() >= 1
                             ? std::log2(static_cast<double>(map_.label_count()))
                             : 0.0;
    const double h_unobserved = weights_.alpha * log2k + weights_.beta * 1.0;
    static thread_local VisitStamps seen;
    seen.reset(map_.dims().size());
    std::int64_t extra = 0;
    const int dx[6] = {1, -1, 0, 0, 0, 0};
    const int dy[6] = {0, 0, 1, -1, 0, 0};
    const int dz[6] = {0, 0, 0, 0, 1, -1};
    for (std::int32_t f : frontier_set_) {
      const VoxelCoord c = map_.dims().coord(f);
      for (int k = 0; k < 6; ++k) {
        const VoxelCoord n{c.x + dx[k], c.y + dy[k], c.z + dz[k]};
        if (!map_.dims().contains(n)) continue;
        const std::int32_t ni = map_.dims().index(n);
        if (map_.state(ni) == VoxelState::kUnknown && !map_.observed(ni) &&
            !seen.test_and_mark(ni)) {
          ++extra;
        }
      }
    }
    return entropy_->observed_sum_h() + extra * h_unobserved;
  }

  void record_row() {
    MetricsRow row;
    row.step = steps_;
    row.distance_traveled = distance_;
    row.rotation = rotation_;
    row.sim_time = distance_ / cfg_.planner_cfg.linear_speed +
                   rotation_ / cfg_.planner_cfg.angular_speed;
    row.correctly_labeled_voxels = tracker_->correct_object_voxels();
    row.observed_voxels = map_.observed_count();
    row.labeled_accuracy = tracker_->accuracy();
    row.identified_objects = tracker_->identified();
    row.sum_h = entropy_->sum_h();
    row.actionable_h = actionable_sum();
    metrics_.rows.push_back(row);
  }

  void warn_eta_once() {
    if (eta_warned_) return;
    const double max_f = field_->max_finite_f();
    if (max_f >= cfg_.vsf.eta) {
      std::fprintf(stderr, "escan: max view score %.3f exceeds eta %.3f; plans may clamp\n",
                   max_f, cfg_.vsf.eta);
      eta_warned_ = true;
    }
  }

  void run_audits(const ChangeSet& cs) {
    if (map_.audit(0.01, cfg_.seed + steps_) != 0) {
      throw std::logic_error("world map audit failed");
    }
    // Spot-check the entropy field on the voxels that just changed.
    for (std::size_t i = 0; i < cs.changed.size(); i += 97) {
      const std::int32_t idx = cs.changed[i].voxel;
      if (std::abs(voxel_h(map_, idx, weights_) - entropy_->h(idx)) > 1e-9) {
        throw std::logic_error("entropy field audit failed");
      }
    }
  }

  EpisodeConfig cfg_;
  GainWeights weights_;
  StepObserver observer_;
  SceneSpec spec_;
  GroundTruth gt_;
  WorldMap map_;
  ViewLattice lattice_;
  std::optional<EntropyField> entropy_;
  std::optional<ViewScoreField> field_;
  std::optional<LabelTracker> tracker_;
  std::set<std::int32_t> frontier_set_;
  std::vector<PathPlan> plans_;
  MetricsTimeline metrics_;
  Pose robot_;
  int threads_ = 1;
  int steps_ = 0;
  std::uint64_t frame_counter_ = 0;
  double distance_ = 0.0;
  double rotation_ = 0.0;
  double threshold_abs_ = 0.0;
  bool eta_warned_ = false;
  bool aborted_ = false;
};

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& cfg, const StepObserver& observer) {
  EpisodeRunner runner(cfg, observer);
  return runner.run();
}

int identified_objects(const WorldMap& map, const GroundTruth& gt) {
  int count = 0;
  for (const ObjectComponent& comp : object_components(gt)) {
    std::int64_t correct = 0;
    for (std::int32_t v : comp.voxels) {
      if (map.state(v) != VoxelState::kOccupied) continue;
      const SemanticBelief* b = map.semantic(v);
      if (b != nullptr && b->label == comp.label) ++correct;
    }
    if (2 * correct >= static_cast<std::int64_t>(comp.voxels.size())) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Comparison sweep
// ---------------------------------------------------------------------------

CompareResult run_compare(const CompareSpec& spec) {
  CompareResult result;
  std::vector<std::pair<std::string, EpisodeConfig>> scene_cfgs;
  for (std::size_t i = 0; i < spec.scenes.size(); ++i) {
    EpisodeConfig cfg = spec.base;
    cfg.scene_path.reset();
    cfg.gen = spec.scenes[i];
    scene_cfgs.push_back({"gen" + std::to_string(i), cfg});
  }
  for (const std::string& path : spec.scene_paths) {
    EpisodeConfig cfg = spec.base;
    cfg.gen.reset();
    cfg.scene_path = path;
    scene_cfgs.push_back({path, cfg});
  }

  for (const auto& [scene_name, scene_cfg] : scene_cfgs) {
    for (const CompareVariant& variant : spec.variants) {
      for (std::uint64_t seed : spec.seeds) {
        CompareRun run;
        run.scene = scene_name;
        run.variant = variant.name;
        run.seed = seed;
        EpisodeConfig cfg = scene_cfg;
        cfg.planner = variant.planner;
        cfg.entropy = variant.entropy;
        cfg.seed = seed;
        try {
          EpisodeResult r = run_episode(cfg);
          run.metrics = std::move(r.metrics);
          run.gt_object_voxels = r.gt_object_voxels;
        } catch (const std::exception& e) {
          run.failed = true;
          run.error = e.what();
        }
        result.runs.push_back(std::move(run));
      }
    }
  }
  return result;
}

void CompareResult::write_table_csv(std::ostream& out) const {
  // Table shape: one row per scene, per-variant mean time/distance/accuracy.
  std::vector<std::string> scenes;
  std::vector<std::string> variants;
  for (const CompareRun& r : runs) {
    if (std::find(scenes.begin(), scenes.end(), r.scene) == scenes.end()) {
      scenes.push_back(r.scene);
    }
    if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) {
      variants.push_back(r.variant);
    }
  }

  out << "scene";
  for (const std::string& v : variants) {
    out << ',' << v << "_time_s," << v << "_distance_m," << v << "_accuracy";
  }
  out << '\n';

  std::map<std::string, std::array<double, 3>> grand;  // variant -> sums
  std::map<std::string, int> grand_n;
  for (const std::string& scene : scenes) {
    out << scene;
    for (const std::string& variant : variants) {
      double time = 0.0, dist = 0.0, acc = 0.0;
      int n = 0;
      for (const CompareRun& r : runs) {
        if (r.scene != scene || r.variant != variant || r.failed || r.metrics.rows.empty()) {
          continue;
        }
        const MetricsRow& last = r.metrics.rows.back();
        time += last.sim_time;
        dist += last.distance_traveled;
        acc += last.labeled_accuracy;
        ++n;
      }
      if (n > 0) {
        out << ',' << fmt_double(time / n) << ',' << fmt_double(dist / n) << ','
            << fmt_double(acc / n);
        grand[variant][0] += time / n;
        grand[variant][1] += dist / n;
        grand[variant][2] += acc / n;
        grand_n[variant] += 1;
      } else {
        out << ",nan,nan,nan";
      }
    }
    out << '\n';
  }
  out << "average";
  for (const std::string& variant : variants) {
    const int n = grand_n[variant];
    if (n > 0) {
      out << ',' << fmt_double(grand[variant][0] / n) << ',' << fmt_double(grand[variant][1] / n)
          << ',' << fmt_double(grand[variant][2] / n);
    } else {
      out << ",nan,nan,nan";
    }
  }
  out << '\n';
}

void CompareResult::write_curves_csv(std::ostream& out) const {
  out << "scene,variant,seed,step,sim_time,distance_traveled,rotation,"
         "correctly_labeled_voxels,observed_voxels,labeled_accuracy,identified_objects,sum_h\n";
  for (const CompareRun& r : runs) {
    if (r.failed) continue;
    for (const MetricsRow& row : r.metrics.rows) {
      out << r.scene << ',' << r.variant << ',' << r.seed << ',' << row.step << ','
          << fmt_double(row.sim_time) << ',' << fmt_double(row.distance_traveled) << ','
          << fmt_double(row.rotation) << ',' << row.correctly_labeled_voxels << ','
          << row.observed_voxels << ',' << fmt_double(row.labeled_accuracy) << ','
          << row.identified_objects << ',' << fmt_double(row.sum_h) << '\n';
    }
  }
}

CompareSpec compare_spec_from_json(const std::string& text, const EpisodeConfig& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("compare matrix parse error: ") + e.what());
  }
  CompareSpec spec;
  spec.base = base;
  try {
    for (const json& js : j.at("scenes")) {
      if (js.is_string()) {
        spec.scene_paths.push_back(js.get<std::string>());
      } else {
        GenParams g;
        g.rooms = js.value("rooms", g.rooms);
        g.furniture_density = js.value("density", g.furniture_density);
        g.width_m = js.value("width", g.width_m);
        g.height_m = js.value("height", g.height_m);
        g.seed = js.value("seed", g.seed);
        g.resolution = js.value("resolution", g.resolution);
        g.ceiling_m = js.value("ceiling", g.ceiling_m);
        spec.scenes.push_back(g);
      }
    }
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const json& jv : j.at("variants")) {
      CompareVariant v;
      v.name = jv.at("name").get<std::string>();
      if (jv.contains("planner")) v.planner = planner_mode_from_string(jv["planner"]);
      if (jv.contains("entropy")) v.entropy = entropy_mode_from_string(jv["entropy"]);
      spec.variants.push_back(v);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("compare matrix schema error: ") + e.what());
  }
  return spec;
}

}  // namespace escan
