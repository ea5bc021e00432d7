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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "escan/errors.hpp"
#include "escan/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw escan::ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw escan::ConfigError("cannot write file: " + path.string());
  out << content;
}

struct CommonOptions {
  std::string config_path;
  std::string scene_path;
  bool use_gen = false;
  int rooms = 2;
  double density = 0.15;
  double width = 8.0;
  double height = 6.0;
  std::uint64_t gen_seed = 0;
  std::uint64_t seed = 0;
  std::string planner = "field";
  std::string entropy = "combined";
  std::string out_dir = "out";
  int budget = -1;
  int threads = -1;
  int audit = -1;
  double termination = -1.0;
  int cadence = -1;
};

void add_common_options(CLI::App* cmd, CommonOptions& opt, bool with_scene) {
  cmd->add_option("--config", opt.config_path, "base episode config JSON (flags override)");
  if (with_scene) {
    cmd->add_option("--scene", opt.scene_path, "scene JSON file");
    cmd->add_flag("--gen", opt.use_gen, "generate the scene procedurally");
    cmd->add_option("--rooms", opt.rooms, "generated rooms")->capture_default_str();
    cmd->add_option("--density", opt.density, "furniture per m^2")->capture_default_str();
    cmd->add_option("--width", opt.width, "scene width, m")->capture_default_str();
    cmd->add_option("--height", opt.height, "scene height, m")->capture_default_str();
    cmd->add_option("--gen-seed", opt.gen_seed, "scene generation seed")->capture_default_str();
  }
  cmd->add_option("--seed", opt.seed, "episode seed")->capture_default_str();
  cmd->add_option("--planner", opt.planner, "field|dijkstra")->capture_default_str();
  cmd->add_option("--entropy", opt.entropy, "combined|geometry|semantic")
      ->capture_default_str();
  cmd->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--budget", opt.budget, "step budget override");
  cmd->add_option("--threads", opt.threads, "worker threads (0 = auto)");
  cmd->add_option("--audit", opt.audit, "audit level (0 off, 1 cheap per-step checks)");
  cmd->add_option("--termination", opt.termination, "termination fraction override");
  cmd->add_option("--cadence", opt.cadence, "frames per lattice move");
}

escan::EpisodeConfig build_config(const CommonOptions& opt, bool need_scene) {
  escan::EpisodeConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = escan::EpisodeConfig::from_json(read_file(opt.config_path));
  }
  if (!opt.scene_path.empty()) {
    cfg.scene_path = opt.scene_path;
    cfg.gen.reset();
  } else if (opt.use_gen) {
    escan::GenParams g;
    g.rooms = opt.rooms;
    g.furniture_density = opt.density;
    g.width_m = opt.width;
    g.height_m = opt.height;
    g.seed = opt.gen_seed;
    cfg.gen = g;
    cfg.scene_path.reset();
  }
  cfg.seed = opt.seed;
  cfg.planner = escan::planner_mode_from_string(opt.planner);
  cfg.entropy = escan::entropy_mode_from_string(opt.entropy);
  if (opt.budget > 0) cfg.step_budget = opt.budget;
  if (opt.threads >= 0) cfg.threads = opt.threads;
  if (opt.audit >= 0) cfg.audit_level = opt.audit;
  if (opt.termination >= 0.0) cfg.termination_fraction = opt.termination;
  if (opt.cadence > 0) cfg.scan_cadence = opt.cadence;
  if (need_scene) cfg.validate();
  return cfg;
}

int cmd_run(const CommonOptions& opt) {
  const escan::EpisodeConfig cfg = build_config(opt, /*need_scene=*/true);
  fs::create_directories(opt.out_dir);
  write_file(fs::path(opt.out_dir) / "config.json", cfg.to_json() + "\n");

  escan::EpisodeResult result = escan::run_episode(cfg);

  write_file(fs::path(opt.out_dir) / "metrics.csv", result.metrics.to_csv());
  write_file(fs::path(opt.out_dir) / "map_final.json", result.map.to_json() + "\n");
  write_file(fs::path(opt.out_dir) / "scene.json", escan::scene_to_json(result.spec) + "\n");
  for (std::size_t i = 0; i < result.plans.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "plan_%04zu.json", i + 1);
    write_file(fs::path(opt.out_dir) / name, result.plans[i].to_json() + "\n");
  }

  const escan::MetricsRow& last = result.metrics.rows.back();
  std::printf("steps: %d\nsim_time_s: %.2f\ndistance_m: %.2f\naccuracy: %.4f\n"
              "identified_objects: %d\nend: %s\nwrote: %s\n",
              last.step, last.sim_time, last.distance_traveled, last.labeled_accuracy,
              last.identified_objects, escan::to_string(result.metrics.end_reason),
              opt.out_dir.c_str());
  return 0;
}

int cmd_compare(const CommonOptions& opt, const std::string& matrix_path) {
  const escan::EpisodeConfig base = build_config(opt, /*need_scene=*/false);
  escan::CompareSpec spec = escan::compare_spec_from_json(read_file(matrix_path), base);
  fs::create_directories(opt.out_dir);

  escan::CompareResult result = escan::run_compare(spec);

  std::ostringstream table;
  result.write_table_csv(table);
  write_file(fs::path(opt.out_dir) / "table.csv", table.str());
  std::ostringstream curves;
  result.write_curves_csv(curves);
  write_file(fs::path(opt.out_dir) / "curves.csv", curves.str());

  int failed = 0;
  for (const escan::CompareRun& run : result.runs) {
    if (run.failed) {
      ++failed;
      std::fprintf(stderr, "failed: scene=%s variant=%s seed=%llu: %s\n", run.scene.c_str(),
                   run.variant.c_str(), static_cast<unsigned long long>(run.seed),
                   run.error.c_str());
    }
  }
  std::printf("runs: %zu (%d failed)\nwrote: %s/table.csv, %s/curves.csv\n",
              result.runs.size(), failed, opt.out_dir.c_str(), opt.out_dir.c_str());
  return 0;
}

int cmd_gen_scene(int rooms, double density, double width, double height, std::uint64_t seed,
                  const std::string& out_path) {
  escan::GenParams params;
  params.rooms = rooms;
  params.furniture_density = density;
  params.width_m = width;
  params.height_m = height;
  params.seed = seed;
  const escan::SceneSpec spec = escan::gen_scene(params);
  escan::save_scene(spec, out_path);
  std::printf("wrote: %s (%zu boxes, %zu labels)\n", out_path.c_str(), spec.boxes.size(),
              spec.labels.size());
  return 0;
}

int cmd_export_field(const std::string& episode_dir, int step, const std::string& out_dir_arg) {
  const fs::path episode(episode_dir);
  escan::EpisodeConfig cfg =
      escan::EpisodeConfig::from_json(read_file((episode / "config.json").string()));
  const fs::path out_dir = out_dir_arg.empty() ? episode : fs::path(out_dir_arg);
  fs::create_directories(out_dir);

  bool exported = false;
  const auto observer = [&](int s, const escan::WorldMap& map,
                            const escan::EntropyField& entropy,
                            escan::ViewScoreField& field) {
    if (s < step) return true;
    field.ensure_fresh(map);
    for (int it = 0; it < field.lattice().theta_bins; ++it) {
      char name[64];
      std::snprintf(name, sizeof(name), "field_step%04d_theta%02d.csv", s, it);
      std::ofstream out(out_dir / name);
      field.write_theta_slice_csv(it, out);
    }
    const int z = static_cast<int>(cfg.camera.mount_height / map.resolution());
    char name[64];
    std::snprintf(name, sizeof(name), "entropy_step%04d_z%03d.csv", s, z);
    std::ofstream out(out_dir / name);
    entropy.write_layer_csv(map, z, out);
    exported = true;
    return false;  // stop the replay
  };
  escan::run_episode(cfg, observer);
  if (!exported) {
    std::fprintf(stderr, "episode ended before step %d; nothing exported\n", step);
    return 2;
  }
  std::printf("wrote field/entropy slices for step %d to %s\n", step, out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"escan: entropy-driven active scene scanning simulator"};
  app.require_subcommand(1);

  CommonOptions run_opt;
  CLI::App* run_cmd = app.add_subcommand("run", "run one exploration episode");
  add_common_options(run_cmd, run_opt, /*with_scene=*/true);

  CommonOptions cmp_opt;
  std::string matrix_path;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "run a comparison sweep");
  cmp_cmd->add_option("--matrix", matrix_path, "matrix JSON (scenes/seeds/variants)")
      ->required();
  add_common_options(cmp_cmd, cmp_opt, /*with_scene=*/false);

  int gs_rooms = 1;
  double gs_density = 0.1, gs_width = 6.0, gs_height = 6.0;
  std::uint64_t gs_seed = 0;
  std::string gs_out = "scene.json";
  CLI::App* gs_cmd = app.add_subcommand("gen-scene", "generate a scene JSON");
  gs_cmd->add_option("--rooms", gs_rooms)->capture_default_str();
  gs_cmd->add_option("--density", gs_density)->capture_default_str();
  gs_cmd->add_option("--width", gs_width)->capture_default_str();
  gs_cmd->add_option("--height", gs_height)->capture_default_str();
  gs_cmd->add_option("--seed", gs_seed)->capture_default_str();
  gs_cmd->add_option("--out", gs_out)->capture_default_str();

  std::string ef_episode;
  int ef_step = 1;
  std::string ef_out;
  CLI::App* ef_cmd = app.add_subcommand("export-field", "export view-score field slices");
  ef_cmd->add_option("--episode", ef_episode, "episode output directory")->required();
  ef_cmd->add_option("--step", ef_step, "step to export")->capture_default_str();
  ef_cmd->add_option("--out", ef_out, "output directory (default: episode dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run_opt);
    if (cmp_cmd->parsed()) return cmd_compare(cmp_opt, matrix_path);
    if (gs_cmd->parsed()) {
      return cmd_gen_scene(gs_rooms, gs_density, gs_width, gs_height, gs_seed, gs_out);
    }
    if (ef_cmd->parsed()) return cmd_export_field(ef_episode, ef_step, ef_out);
  } catch (const escan::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const escan::SceneError& e) {
    std::fprintf(stderr, "scene error: %s\n", e.what());
    return 3;
  } catch (const escan::NoPathError& e) {
    std::fprintf(stderr, "no path: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
