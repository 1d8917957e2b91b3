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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trajcast/autoencoder.hpp"
#include "trajcast/hetero_graph.hpp"
#include "trajcast/layers.hpp"

namespace trajcast {

struct ModelConfig {
  int hidden_dim = 128;
  int num_heads = 4;
  int num_modes = 10;  // K
  double dropout_map = 0.5;
  double w1 = 1.0;  // score loss weight
  double w2 = 1.0;  // yaw loss weight
  double score_margin = 0.2;
  double smooth_l1_beta = 1.0;

  void validate() const;
};

struct Prediction {
  std::string agent_id;
  AgentType agent_type = AgentType::RoadBound;
  std::vector<std::vector<Vec2>> trajectories;  // K modes x 12 points, local frame
  std::vector<double> scores;                   // K
  std::vector<int> anchor_ids;                  // K; -1 where no anchor applies
};

/// Gate and radius settings for the scene -> graph pipeline.
struct PipelineConfig {
  double map_node_step = kDefaultMapNodeStep;
  double projection_radius = kDefaultProjectionRadius;
  double heading_tol = kDefaultHeadingTolerance;
  double ssg_horizon = kDefaultSsgHorizon;
  GraphConfig graph;
};

/// A scene plus everything the model consumes for it.
struct SceneSample {
  Scene scene;
  HeteroGraph graph;
  ad::Tensor rb_z_map;   // (num rb nodes, latent); empty when no encoder is used
  ad::Tensor nrb_z_map;
};

/// Runs projection, anchors, SSG, map discretization and graph construction.
/// When `encoder` is given, per-node map patches are rasterized and encoded
/// into the sample (the encoder stays frozen).
SceneSample prepare_sample(const Scene& scene, const LaneGraph& lanes,
                           const PipelineConfig& config, MapAutoencoder* encoder = nullptr);

struct DecodeOutput {
  std::vector<ad::Var> traj_per_mode;   // K vars of (num agents, 24)
  std::vector<ad::Var> score_per_mode;  // K vars of (num agents, 1)
  std::vector<std::vector<int>> anchor_ids;  // [agent][mode]
};

struct ForwardOutput {
  ad::Var rb_z_agent;   // (num rb agents, hidden)
  ad::Var nrb_z_agent;
  std::vector<ad::Var> rb_z_anchor;  // K vars of (num rb agents, hidden)
  DecodeOutput rb;
  DecodeOutput nrb;
};

struct LossBreakdown {
  ad::Var total;
  ad::Var reg;
  ad::Var score;
  ad::Var yaw;
  std::vector<int> rb_winners;   // k* per rb agent
  std::vector<int> nrb_winners;
};

class TrajectoryModel {
 public:
  explicit TrajectoryModel(ModelConfig config = {}, std::uint64_t seed = 0);

  const ModelConfig& config() const { return config_; }
  ParamStore& store() { return store_; }

  ForwardOutput forward(GraphContext& ctx, const SceneSample& sample) const;
  LossBreakdown compute_loss(GraphContext& ctx, const SceneSample& sample,
                             const ForwardOutput& out) const;

  /// Eval-mode forward returning plain predictions for every agent.
  std::vector<Prediction> predict(const SceneSample& sample);

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  ModelConfig config_;
  ParamStore store_;
};

/// Loss of a ready-made prediction against ground truth, for a single agent.
struct LossValues {
  double total = 0.0;
  double reg = 0.0;
  double score = 0.0;
  double yaw = 0.0;
  int winner = 0;
};
LossValues prediction_loss(const Prediction& pred, const std::vector<Vec2>& gt_future,
                           const std::vector<AnchorPath>& anchors, const Vec2& last_position,
                           double last_yaw, const ModelConfig& config = {});

// Prediction file round-trip (one JSON document per scene).
void save_predictions(const std::vector<Prediction>& preds, const std::string& path);
std::vector<Prediction> load_predictions(const std::string& path);

}  // namespace trajcast
