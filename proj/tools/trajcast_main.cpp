// Copyright 2026 The Trajcast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "trajcast/config.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/generator.hpp"
#include "trajcast/gradcheck_suite.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/train.hpp"

namespace fs = std::filesystem;
using namespace trajcast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct SceneSet {
  std::vector<Scene> scenes;
  std::map<std::string, LaneGraph> lane_graphs;  // keyed by lane_graph_ref

  const LaneGraph& lanes_of(const Scene& scene) const {
    auto it = lane_graphs.find(scene.lane_graph_ref);
    if (it == lane_graphs.end())
      throw ValidationError("scene '" + scene.scene_id + "' references unknown lane graph '" +
                            scene.lane_graph_ref + "'");
    return it->second;
  }
};

SceneSet load_scene_dir(const std::string& dir) {
  SceneSet set;
  std::vector<fs::path> scene_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 11 && name.substr(name.size() - 11) == ".scene.json")
      scene_files.push_back(entry.path());
  }
  std::sort(scene_files.begin(), scene_files.end());
  for (const auto& path : scene_files) {
    Scene scene = load_scene(path.string());
    if (!set.lane_graphs.count(scene.lane_graph_ref)) {
      const fs::path lg_path = fs::path(dir) / (scene.lane_graph_ref + ".lanegraph.json");
      set.lane_graphs.emplace(scene.lane_graph_ref, load_lane_graph(lg_path.string()));
    }
    set.scenes.push_back(std::move(scene));
  }
  if (set.scenes.empty()) throw ValidationError("no *.scene.json files in '" + dir + "'");
  return set;
}

std::vector<SceneSample> prepare_all(const SceneSet& set, const RunConfig& config,
                                     MapAutoencoder* encoder) {
  std::vector<SceneSample> samples;
  for (const auto& scene : set.scenes)
    samples.push_back(prepare_sample(scene, set.lanes_of(scene), config.pipeline, encoder));
  return samples;
}

std::map<std::string, std::vector<Vec2>> ground_truth_of(const Scene& scene) {
  std::map<std::string, std::vector<Vec2>> gt;
  for (const auto& track : scene.tracks) {
    const auto future = track.future();
    if (static_cast<int>(future.size()) != kFutureSteps) continue;
    std::vector<Vec2> points;
    for (const auto& s : future) points.push_back(s.position);
    gt.emplace(track.agent_id, std::move(points));
  }
  return gt;
}

int cmd_gen_scenes(const RunConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const LaneGraph lanes = lane_graph_template(config.generator.template_name);
  save_lane_graph(lanes, (fs::path(out_dir) /
                          (config.generator.template_name + ".lanegraph.json")).string());
  const auto scenes = generate_synthetic_scenes(config.generator, config.seed);
  for (const auto& scene : scenes)
    save_scene(scene, (fs::path(out_dir) / (scene.scene_id + ".scene.json")).string());
  std::cout << "wrote " << scenes.size() << " scenes to " << out_dir << "\n";
  return kExitOk;
}

int cmd_build_graph(const RunConfig& config, const std::string& scene_path,
                    const std::string& map_path, const std::string& out_prefix) {
  const Scene scene = load_scene(scene_path);
  if (scene.tracks.empty()) throw ValidationError("scene has no agents");
  const LaneGraph lanes = load_lane_graph(map_path);
  const SceneSample sample = prepare_sample(scene, lanes, config.pipeline);
  const GraphStats stats = graph_stats(sample.graph);

  std::ostringstream stats_text;
  stats_text << "nodes:\n";
  for (const auto& [kind, count] : stats.node_counts)
    stats_text << "  " << kind << " " << count << "\n";
  stats_text << "edges:\n";
  for (const auto& [kind, count] : stats.edge_counts)
    stats_text << "  " << kind << " " << count << "\n";
  stats_text << "total_edges " << stats.total_edges << "\n";

  std::ofstream stats_out(out_prefix + ".stats.txt");
  stats_out << stats_text.str();
  std::ofstream dump_out(out_prefix + ".edges.txt");
  dump_out << graph_debug_dump(sample.graph);
  const auto projections = project_scene_agents(scene, lanes, config.pipeline.projection_radius,
                                                config.pipeline.heading_tol);
  std::ofstream ssg_out(out_prefix + ".ssg.txt");
  ssg_out << ssg_debug_dump(build_ssg(projections, lanes, config.pipeline.ssg_horizon));
  std::cout << stats_text.str();
  return kExitOk;
}

int cmd_ssg(const RunConfig& config, const std::string& scene_path,
            const std::string& map_path) {
  const Scene scene = load_scene(scene_path);
  const LaneGraph world_lanes = load_lane_graph(map_path);
  const LaneGraph lanes = translated(world_lanes, Vec2{0.0, 0.0} - scene.origin);
  const auto projections = project_scene_agents(scene, lanes, config.pipeline.projection_radius,
                                                config.pipeline.heading_tol);
  const auto edges = build_ssg(projections, lanes, config.pipeline.ssg_horizon);
  std::cout << ssg_debug_dump(edges);
  if (scene.tracks.size() >= 2) {
    std::cout << "reduction_ratio "
              << ssg_reduction_ratio(scene, world_lanes, config.pipeline.ssg_horizon,
                                     config.pipeline.projection_radius,
                                     config.pipeline.heading_tol)
              << "\n";
  }
  return kExitOk;
}

int cmd_anchors(const RunConfig& config, const std::string& scene_path,
                const std::string& map_path) {
  const Scene scene = load_scene(scene_path);
  const LaneGraph lanes =
      translated(load_lane_graph(map_path), Vec2{0.0, 0.0} - scene.origin);
  for (const auto& track : scene.tracks) {
    if (track.agent_type != AgentType::RoadBound) continue;
    const AgentState& current = track.current();
    const auto projs = project_agent(lanes, current.position, current.yaw,
                                     config.pipeline.projection_radius,
                                     config.pipeline.heading_tol, track.agent_id);
    std::cout << track.agent_id << ":\n";
    if (projs.empty()) {
      std::cout << "  (no projection)\n";
      continue;
    }
    const Projection* best = &projs.front();
    for (const auto& p : projs)
      if (std::abs(p.lateral_offset) < std::abs(best->lateral_offset)) best = &p;
    for (const auto& anchor :
         enumerate_anchor_paths(lanes, *best, kMaxAnchorLength, config.model.num_modes)) {
      std::cout << "  anchor " << anchor.anchor_id << " len " << anchor.length() << " lanes";
      for (const auto& id : anchor.lane_ids) std::cout << " " << id;
      std::cout << "\n";
    }
  }
  return kExitOk;
}

int cmd_rasterize(const std::string& map_path, double cx, double cy, double heading,
                  const std::string& out_prefix) {
  const LaneGraph lanes = load_lane_graph(map_path);
  const RasterPatch patch = rasterize(lanes, {{cx, cy}, heading});
  export_raster(patch, out_prefix);
  std::cout << "wrote " << kRasterChannels << " channels to " << out_prefix << "_*.pgm\n";
  return kExitOk;
}

std::vector<RasterPatch> collect_patches(const SceneSet& set, int max_patches) {
  std::vector<RasterPatch> patches;
  for (const auto& scene : set.scenes) {
    const LaneGraph lanes =
        translated(set.lanes_of(scene), Vec2{0.0, 0.0} - scene.origin);
    for (const auto& track : scene.tracks) {
      for (const auto& state : track.observed()) {
        if (static_cast<int>(patches.size()) >= max_patches) return patches;
        PatchPose pose;
        pose.center = state.position;
        pose.heading = state.yaw;
        patches.push_back(rasterize(lanes, pose));
      }
    }
  }
  return patches;
}

int cmd_pretrain_autoencoder(const RunConfig& config, const std::string& scenes_dir,
                             const std::string& out_path, const std::string& log_path,
                             int max_patches) {
  const SceneSet set = load_scene_dir(scenes_dir);
  const auto patches = collect_patches(set, max_patches);
  if (patches.empty()) throw ValidationError("no patches collected for pretraining");
  std::cout << "pretraining on " << patches.size() << " patches\n";
  MapAutoencoder model({}, config.seed);
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    log << "epoch,mse\n";
  }
  const auto curve = train_autoencoder(model, MapAutoencoder::patches_to_tensor(patches),
                                       config.autoencoder, [&](int epoch, double mse) {
                                         std::cout << "epoch " << epoch << " mse " << mse << "\n";
                                         if (log.is_open()) log << epoch << "," << mse << "\n";
                                       });
  (void)curve;
  model.save(out_path);
  std::cout << "saved autoencoder to " << out_path << " (latent "
            << model.config().latent_dim() << ")\n";
  return kExitOk;
}

int cmd_train(const RunConfig& config, const std::string& scenes_dir,
              const std::string& out_path, const std::string& log_path,
              const std::string& autoencoder_path) {
  const SceneSet set = load_scene_dir(scenes_dir);
  MapAutoencoder encoder;
  MapAutoencoder* encoder_ptr = nullptr;
  if (!autoencoder_path.empty()) {
    encoder.load(autoencoder_path);
    encoder_ptr = &encoder;
  }
  const auto samples = prepare_all(set, config, encoder_ptr);
  TrajectoryModel model(config.model, config.seed);
  TrainConfig train_config = config.train;
  train_config.checkpoint_path = out_path;
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    log << "epoch,lr,total,reg,score,yaw\n";
  }
  train_model(model, samples, train_config, [&](const EpochStats& s) {
    std::cout << "epoch " << s.epoch << " lr " << s.lr << " loss " << s.total << " (reg "
              << s.reg << " score " << s.score << " yaw " << s.yaw << ")\n";
    if (log.is_open())
      log << s.epoch << "," << s.lr << "," << s.total << "," << s.reg << "," << s.score << ","
          << s.yaw << "\n";
  });
  std::cout << "saved model to " << out_path << "\n";
  return kExitOk;
}

int cmd_predict(const RunConfig& config, const std::string& scenes_dir,
                const std::string& model_path, const std::string& out_dir,
                const std::string& autoencoder_path) {
  const SceneSet set = load_scene_dir(scenes_dir);
  MapAutoencoder encoder;
  MapAutoencoder* encoder_ptr = nullptr;
  if (!autoencoder_path.empty()) {
    encoder.load(autoencoder_path);
    encoder_ptr = &encoder;
  }
  TrajectoryModel model(config.model, config.seed);
  model.load(model_path);
  fs::create_directories(out_dir);
  for (const auto& scene : set.scenes) {
    SceneSample sample = prepare_sample(scene, set.lanes_of(scene), config.pipeline, encoder_ptr);
    const auto preds = model.predict(sample);
    save_predictions(preds, (fs::path(out_dir) / (scene.scene_id + ".pred.json")).string());
  }
  std::cout << "wrote predictions for " << set.scenes.size() << " scenes to " << out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& scenes_dir, const std::string& preds_dir,
             std::vector<int> ks, bool miss_if_any, const std::string& csv_path) {
  const SceneSet set = load_scene_dir(scenes_dir);
  if (ks.empty()) ks = {5, 10};
  MetricReport merged;
  merged.ks = ks;
  merged.miss_if_any = miss_if_any;
  std::map<std::string, double> sums;
  std::int64_t agents = 0, trajectories = 0, offroad_trajectories = 0;
  for (const auto& scene : set.scenes) {
    const fs::path pred_path = fs::path(preds_dir) / (scene.scene_id + ".pred.json");
    if (!fs::exists(pred_path)) continue;
    const auto preds = load_predictions(pred_path.string());
    const LaneGraph lanes =
        translated(set.lanes_of(scene), Vec2{0.0, 0.0} - scene.origin);
    const MetricReport report =
        evaluate_predictions(preds, ground_truth_of(scene), &lanes, ks, miss_if_any);
    for (const auto& [agent, row] : report.per_agent) {
      merged.per_agent.emplace_back(scene.scene_id + "/" + agent, row);
      for (const auto& [name, v] : row) sums[name] += v;
      ++agents;
    }
    for (const auto& pred : preds)
      for (const auto& traj : pred.trajectories) {
        ++trajectories;
        if (!trajectory_on_drivable(traj, lanes)) ++offroad_trajectories;
      }
  }
  if (agents == 0) throw ValidationError("no predictions matched the scenes");
  for (const auto& [name, v] : sums) merged.aggregate[name] = v / static_cast<double>(agents);
  if (trajectories > 0)
    merged.aggregate["ORR"] =
        static_cast<double>(offroad_trajectories) / static_cast<double>(trajectories);
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    out << report_csv(merged);
  }
  std::cout << report_table(merged);
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  const auto results = run_gradient_suite(seed);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << r.name << " err " << r.error << " tol "
              << r.tolerance << "\n";
    if (!r.pass) ++failures;
  }
  std::cout << (failures == 0 ? "all gradient checks passed" : "gradient checks FAILED") << "\n";
  return failures == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heterogeneous graph trajectory prediction toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = 1;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", overrides, "override config entries, e.g. --set model.num_modes=6");
  app.add_option("--threads", threads, "worker threads for heavy kernels (1 = deterministic)");

  std::string out_dir = "out", scene_path, map_path, scenes_dir, out_path, log_path;
  std::string model_path, autoencoder_path, preds_dir, csv_path, out_prefix = "graph";
  double cx = 0.0, cy = 0.0, heading = 0.0;
  std::vector<int> ks;
  bool miss_if_any = false;
  int max_patches = 1 << 20;
  std::uint64_t gradcheck_seed = 0;

  auto* gen = app.add_subcommand("gen-scenes", "generate synthetic scenes and lane graphs");
  gen->add_option("--out", out_dir, "output directory");

  auto* build = app.add_subcommand("build-graph", "build the heterogeneous graph for a scene");
  build->add_option("--scene", scene_path)->required();
  build->add_option("--map", map_path)->required();
  build->add_option("--out", out_prefix, "output file prefix");

  auto* ssg_cmd = app.add_subcommand("ssg", "semantic scene graph edges and reduction ratio");
  ssg_cmd->add_option("--scene", scene_path)->required();
  ssg_cmd->add_option("--map", map_path)->required();

  auto* anchors_cmd = app.add_subcommand("anchors", "anchor paths per road-bound agent");
  anchors_cmd->add_option("--scene", scene_path)->required();
  anchors_cmd->add_option("--map", map_path)->required();

  auto* raster = app.add_subcommand("rasterize", "export the 10-channel local raster");
  raster->add_option("--map", map_path)->required();
  raster->add_option("--cx", cx);
  raster->add_option("--cy", cy);
  raster->add_option("--heading", heading);
  raster->add_option("--out", out_prefix, "output file prefix");

  auto* pretrain = app.add_subcommand("pretrain-autoencoder", "train the map autoencoder");
  pretrain->add_option("--scenes", scenes_dir)->required();
  pretrain->add_option("--out", out_path)->required();
  pretrain->add_option("--log", log_path, "CSV curve output");
  pretrain->add_option("--max-patches", max_patches);

  auto* train_cmd = app.add_subcommand("train", "train the prediction model");
  train_cmd->add_option("--scenes", scenes_dir)->required();
  train_cmd->add_option("--out", out_path)->required();
  train_cmd->add_option("--log", log_path, "CSV training log");
  train_cmd->add_option("--autoencoder", autoencoder_path, "frozen autoencoder checkpoint");

  auto* predict = app.add_subcommand("predict", "write prediction files for scenes");
  predict->add_option("--scenes", scenes_dir)->required();
  predict->add_option("--model", model_path)->required();
  predict->add_option("--out", out_dir)->required();
  predict->add_option("--autoencoder", autoencoder_path);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate prediction files");
  eval_cmd->add_option("--scenes", scenes_dir)->required();
  eval_cmd->add_option("--preds", preds_dir)->required();
  eval_cmd->add_option("-k", ks, "mode counts to evaluate (default 5 10)");
  eval_cmd->add_flag("--miss-any", miss_if_any, "count an agent as missed if any top-k mode misses");
  eval_cmd->add_option("--csv", csv_path, "CSV report output");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  gradcheck->add_option("--seed", gradcheck_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    ad::set_num_threads(threads);
    const RunConfig config = load_run_config(config_path, overrides);
    if (gen->parsed()) return cmd_gen_scenes(config, out_dir);
    if (build->parsed()) return cmd_build_graph(config, scene_path, map_path, out_prefix);
    if (ssg_cmd->parsed()) return cmd_ssg(config, scene_path, map_path);
    if (anchors_cmd->parsed()) return cmd_anchors(config, scene_path, map_path);
    if (raster->parsed()) return cmd_rasterize(map_path, cx, cy, heading, out_prefix);
    if (pretrain->parsed())
      return cmd_pretrain_autoencoder(config, scenes_dir, out_path, log_path, max_patches);
    if (train_cmd->parsed())
      return cmd_train(config, scenes_dir, out_path, log_path, autoencoder_path);
    if (predict->parsed())
      return cmd_predict(config, scenes_dir, model_path, out_dir, autoencoder_path);
    if (eval_cmd->parsed()) return cmd_eval(scenes_dir, preds_dir, ks, miss_if_any, csv_path);
    if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_seed);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
