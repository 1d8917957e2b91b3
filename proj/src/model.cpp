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

#include "trajcast/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "trajcast/checkpoint.hpp"
#include "trajcast/errors.hpp"

namespace trajcast {

using ad::Tensor;
using ad::Var;

void ModelConfig::validate() const {
  if (hidden_dim <= 0 || num_heads <= 0 || num_modes <= 0)
    throw ValidationError("model dimensions must be positive");
  if (hidden_dim % num_heads != 0)
    throw ValidationError("hidden_dim must be divisible by num_heads");
  if (dropout_map < 0.0 || dropout_map >= 1.0)
    throw ValidationError("dropout rate must be in [0, 1)");
}

TrajectoryModel::TrajectoryModel(ModelConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  store_.init_seed = seed;
}

// ---------------------------------------------------------------------------
// sample preparation

SceneSample prepare_sample(const Scene& scene, const LaneGraph& world_lanes,
                           const PipelineConfig& config, MapAutoencoder* encoder) {
  SceneSample sample;
  sample.scene = scene;

  // all geometry in the scene's local frame
  const LaneGraph lanes = translated(world_lanes, Vec2{0.0, 0.0} - scene.origin);

  const auto map_nodes = discretize_map(lanes, {0.0, 0.0}, config.map_node_step);
  const auto projections =
      project_scene_agents(scene, lanes, config.projection_radius, config.heading_tol);
  const auto ssg_edges = build_ssg(projections, lanes, config.ssg_horizon);

  std::vector<std::vector<AnchorPath>> anchors;
  for (const auto& track : scene.tracks) {
    if (track.agent_type != AgentType::RoadBound) continue;
    std::vector<AnchorPath> agent_anchors;
    const AgentState& current = track.current();
    auto projs = project_agent(lanes, current.position, current.yaw, config.projection_radius,
                               config.heading_tol, track.agent_id);
    // Anchors from the closest projection identity.
    if (!projs.empty()) {
      const Projection* best = &projs.front();
      for (const auto& p : projs)
        if (std::abs(p.lateral_offset) < std::abs(best->lateral_offset)) best = &p;
      agent_anchors = enumerate_anchor_paths(lanes, *best, kMaxAnchorLength,
                                             config.graph.max_modes);
    }
    anchors.push_back(std::move(agent_anchors));
  }

  sample.graph = build_graph(scene, lanes, map_nodes, ssg_edges, anchors, config.graph);

  if (encoder) {
    // one frozen-encoder latent per agent node, from the patch at that
    // node's position rotated to its direction of movement
    auto encode_slots = [&](const std::vector<AgentNodeSlot>& slots) {
      if (slots.empty()) return Tensor({0, encoder->config().latent_dim()});
      std::vector<RasterPatch> patches;
      patches.reserve(slots.size());
      for (const auto& slot : slots) {
        PatchPose pose;
        pose.center = slot.position;
        pose.heading = slot.feat[2] == 0.0 && slot.feat[3] == 0.0
                           ? 0.0
                           : std::atan2(slot.feat[3], slot.feat[2]);
        patches.push_back(rasterize(lanes, pose));
      }
      return encoder->encode_values(MapAutoencoder::patches_to_tensor(patches));
    };
    sample.rb_z_map = encode_slots(sample.graph.rb_nodes);
    sample.nrb_z_map = encode_slots(sample.graph.nrb_nodes);
  }
  return sample;
}

// ---------------------------------------------------------------------------
// forward helpers

namespace {

std::string kind_key(NodeKind kind) {
  switch (kind) {
    case NodeKind::RbAgent:
      return "rb";
    case NodeKind::NrbAgent:
      return "nrb";
    case NodeKind::Map:
      return "m";
  }
  return "?";
}

std::string param_key(const EdgeTypeId& id) {
  switch (id.relation) {
    case EdgeRelation::TemporalSuc:
      return kind_key(id.src) + "_suc";
    case EdgeRelation::TemporalPre:
      return kind_key(id.src) + "_pre";
    case EdgeRelation::Ssg:
      return "ssg_" + kind_key(id.src) + "_" + kind_key(id.dst);
    case EdgeRelation::MapSuc:
      return "m_suc" + std::to_string(id.param);
    case EdgeRelation::MapPre:
      return "m_pre" + std::to_string(id.param);
    case EdgeRelation::MapLeft:
      return "m_left";
    case EdgeRelation::MapRight:
      return "m_right";
    case EdgeRelation::DrivesOn:
      return "driveson_" + kind_key(id.src);
    case EdgeRelation::GivesTrafficInfo:
      return "gti_" + kind_key(id.dst);
    case EdgeRelation::Merge:
      return "merge_" + kind_key(id.src);
    case EdgeRelation::Anchor:
      return "anchor" + std::to_string(id.param);
  }
  return "?";
}

int feat_dim_of(const EdgeTypeId& id) {
  return id.relation == EdgeRelation::Ssg ? kSsgEdgeFeatures : kGenericEdgeFeatures;
}

EdgeBatchRef make_batch(const HeteroGraph& g, const EdgeTypeId& id, Var src_states) {
  EdgeBatchRef batch;
  batch.param_prefix = param_key(id);
  batch.src_states = src_states;
  const auto& edges = g.edges_of(id);
  const int fd = feat_dim_of(id);
  Tensor feats({static_cast<int>(edges.size()), fd});
  for (size_t e = 0; e < edges.size(); ++e) {
    batch.src_rows.push_back(edges[e].src);
    batch.dst_rows.push_back(edges[e].dst);
    for (int i = 0; i < fd; ++i) feats[e * fd + i] = edges[e].feat[i];
  }
  batch.feats = std::move(feats);
  return batch;
}

Tensor agent_raw_features(const std::vector<AgentNodeSlot>& slots) {
  Tensor raw({static_cast<int>(slots.size()), 5});
  for (size_t i = 0; i < slots.size(); ++i) {
    for (int f = 0; f < 4; ++f) raw[i * 5 + f] = slots[i].feat[f];
    raw[i * 5 + 4] = slots[i].valid ? 1.0 : 0.0;
  }
  return raw;
}

std::vector<int> agent_relative_steps(const std::vector<AgentNodeSlot>& slots) {
  std::vector<int> steps;
  steps.reserve(slots.size());
  for (const auto& slot : slots) steps.push_back(slot.t + kHistorySteps - 1);
  return steps;
}

}  // namespace

// ---------------------------------------------------------------------------
// forward

ForwardOutput TrajectoryModel::forward(GraphContext& ctx, const SceneSample& sample) const {
  const HeteroGraph& g = sample.graph;
  const int d = config_.hidden_dim;
  const int heads = config_.num_heads;
  const int k_modes = config_.num_modes;

  // Embedding stage: per-kind MLPs; agent nodes also get a time encoding.
  Var rb = mlp2(ctx, ctx.constant(agent_raw_features(g.rb_nodes)), "embed.rb", 5, d, d);
  rb = ad::add(rb, ctx.constant(time_encoding(agent_relative_steps(g.rb_nodes), d)));
  Var nrb = mlp2(ctx, ctx.constant(agent_raw_features(g.nrb_nodes)), "embed.nrb", 5, d, d);
  nrb = ad::add(nrb, ctx.constant(time_encoding(agent_relative_steps(g.nrb_nodes), d)));
  Tensor map_raw({static_cast<int>(g.map_feats.size()), 4});
  for (size_t i = 0; i < g.map_feats.size(); ++i)
    for (int f = 0; f < 4; ++f) map_raw[i * 4 + f] = g.map_feats[i][f];
  Var map_state = mlp2(ctx, ctx.constant(map_raw), "embed.map", 4, d, d);

  auto temporal_batches = [&](NodeKind kind, Var src) {
    return std::vector<EdgeBatchRef>{
        make_batch(g, {EdgeRelation::TemporalSuc, kind, kind, 0}, src),
        make_batch(g, {EdgeRelation::TemporalPre, kind, kind, 0}, src)};
  };
  auto ssg_batches_to = [&](NodeKind dst, Var rb_src, Var nrb_src) {
    return std::vector<EdgeBatchRef>{
        make_batch(g, {EdgeRelation::Ssg, NodeKind::RbAgent, dst, 0}, rb_src),
        make_batch(g, {EdgeRelation::Ssg, NodeKind::NrbAgent, dst, 0}, nrb_src)};
  };
  auto map_batches = [&](Var src) {
    std::vector<EdgeBatchRef> batches;
    for (int hop = 1; hop <= kMapHops; ++hop) {
      batches.push_back(make_batch(g, {EdgeRelation::MapSuc, NodeKind::Map, NodeKind::Map, hop}, src));
      batches.push_back(make_batch(g, {EdgeRelation::MapPre, NodeKind::Map, NodeKind::Map, hop}, src));
    }
    batches.push_back(make_batch(g, {EdgeRelation::MapLeft, NodeKind::Map, NodeKind::Map, 0}, src));
    batches.push_back(make_batch(g, {EdgeRelation::MapRight, NodeKind::Map, NodeKind::Map, 0}, src));
    return batches;
  };

  // Agent stage: temporal context then social relations.
  rb = egcn_round(ctx, rb, temporal_batches(NodeKind::RbAgent, rb), "agent1.temporal.rb", d);
  nrb = egcn_round(ctx, nrb, temporal_batches(NodeKind::NrbAgent, nrb), "agent1.temporal.nrb", d);
  {
    Var rb_in = rb, nrb_in = nrb;
    rb = gatv2_round(ctx, rb_in, ssg_batches_to(NodeKind::RbAgent, rb_in, nrb_in),
                     "agent1.ssg.rb", d, heads, true);
    nrb = gatv2_round(ctx, nrb_in, ssg_batches_to(NodeKind::NrbAgent, rb_in, nrb_in),
                      "agent1.ssg.nrb", d, heads, true);
  }

  // Map stage.
  map_state = egcn_round(ctx, map_state, map_batches(map_state), "map1", d);

  // Fusion stage: agent <-> map exchange, then one more internal round each.
  {
    Var rb_in = rb, nrb_in = nrb, map_in = map_state;
    map_state = gatv2_round(
        ctx, map_in,
        {make_batch(g, {EdgeRelation::DrivesOn, NodeKind::RbAgent, NodeKind::Map, 0}, rb_in),
         make_batch(g, {EdgeRelation::DrivesOn, NodeKind::NrbAgent, NodeKind::Map, 0}, nrb_in)},
        "fusion.driveson", d, heads, true);
    rb = gatv2_round(
        ctx, rb_in,
        {make_batch(g, {EdgeRelation::GivesTrafficInfo, NodeKind::Map, NodeKind::RbAgent, 0},
                    map_in)},
        "fusion.gti.rb", d, heads, true);
    nrb = gatv2_round(
        ctx, nrb_in,
        {make_batch(g, {EdgeRelation::GivesTrafficInfo, NodeKind::Map, NodeKind::NrbAgent, 0},
                    map_in)},
        "fusion.gti.nrb", d, heads, true);
  }
  rb = egcn_round(ctx, rb, temporal_batches(NodeKind::RbAgent, rb), "agent2.temporal.rb", d);
  nrb = egcn_round(ctx, nrb, temporal_batches(NodeKind::NrbAgent, nrb), "agent2.temporal.nrb", d);
  {
    Var rb_in = rb, nrb_in = nrb;
    rb = gatv2_round(ctx, rb_in, ssg_batches_to(NodeKind::RbAgent, rb_in, nrb_in),
                     "agent2.ssg.rb", d, heads, true);
    nrb = gatv2_round(ctx, nrb_in, ssg_batches_to(NodeKind::NrbAgent, rb_in, nrb_in),
                      "agent2.ssg.nrb", d, heads, true);
  }
  map_state = egcn_round(ctx, map_state, map_batches(map_state), "map2", d);

  // Map-latent fusion on agent nodes, before the merge stage.
  auto fuse = [&](Var states, const Tensor& z_map, int rows, const std::string& prefix) {
    Tensor z = z_map;
    if (z.empty()) z = Tensor({rows, d});
    if (z.dim(0) != rows || z.dim(1) != d)
      throw ValidationError("map latent dimension mismatch in " + prefix);
    Var dropped = ad::dropout(ctx.constant(std::move(z)), config_.dropout_map, ctx.train, ctx.rng);
    return mlp2(ctx, ad::concat({states, dropped}, 1), prefix, 2 * d, d, d);
  };
  rb = fuse(rb, sample.rb_z_map, static_cast<int>(g.rb_nodes.size()), "fuse_map.rb");
  nrb = fuse(nrb, sample.nrb_z_map, static_cast<int>(g.nrb_nodes.size()), "fuse_map.nrb");

  // Merge stage: temporal attention onto each agent's latest node.
  rb = gatv2_round(ctx, rb,
                   {make_batch(g, {EdgeRelation::Merge, NodeKind::RbAgent, NodeKind::RbAgent, 0},
                               rb)},
                   "merge.rb", d, heads, true);
  nrb = gatv2_round(
      ctx, nrb,
      {make_batch(g, {EdgeRelation::Merge, NodeKind::NrbAgent, NodeKind::NrbAgent, 0}, nrb)},
      "merge.nrb", d, heads, true);

  ForwardOutput out;
  const int n_rb = g.rb_agent_count();
  const int n_nrb = g.nrb_agent_count();
  {
    std::vector<int> rb_latest, nrb_latest;
    for (int a = 0; a < n_rb; ++a) rb_latest.push_back(g.rb_latest_node(a));
    for (int a = 0; a < n_nrb; ++a) nrb_latest.push_back(g.nrb_latest_node(a));
    out.rb_z_agent = ad::gather_rows(rb, rb_latest);
    out.nrb_z_agent = ad::gather_rows(nrb, nrb_latest);
  }

  // Anchor read-outs: attention over the map nodes of anchor path k, cycling
  // each agent's anchors to fill all K modes. These do not update agent nodes.
  for (int k = 0; k < k_modes; ++k) {
    EdgeBatchRef batch;
    batch.param_prefix = "edges";
    batch.src_states = map_state;
    std::vector<double> feat_rows;
    for (int a = 0; a < n_rb; ++a) {
      const int n_anchors = static_cast<int>(g.rb_anchors[a].size());
      if (n_anchors == 0) continue;
      const int raw = k % n_anchors;
      const int latest = g.rb_latest_node(a);
      const auto& edges =
          g.edges_of({EdgeRelation::Anchor, NodeKind::Map, NodeKind::RbAgent, raw});
      for (const auto& e : edges) {
        if (e.dst != latest) continue;
        batch.src_rows.push_back(e.src);
        batch.dst_rows.push_back(a);
        for (int f = 0; f < kGenericEdgeFeatures; ++f) feat_rows.push_back(e.feat[f]);
      }
    }
    batch.feats = Tensor({static_cast<int>(batch.src_rows.size()), kGenericEdgeFeatures},
                         std::move(feat_rows));
    out.rb_z_anchor.push_back(gatv2_round(ctx, out.rb_z_agent, {batch},
                                          "anchor.k" + std::to_string(k), d, heads, false));
  }

  // Decoder: K heads of two small MLPs each; weights shared across agents of
  // the same type. Road-bound heads are conditioned on the anchor embedding.
  auto last_position_tile = [&](const std::vector<int>& track_indices) {
    Tensor tile({static_cast<int>(track_indices.size()), 2 * kFutureSteps});
    for (size_t a = 0; a < track_indices.size(); ++a) {
      const AgentState& cur = sample.scene.tracks[track_indices[a]].current();
      for (int t = 0; t < kFutureSteps; ++t) {
        tile[a * 2 * kFutureSteps + 2 * t] = cur.position.x;
        tile[a * 2 * kFutureSteps + 2 * t + 1] = cur.position.y;
      }
    }
    return tile;
  };

  Var rb_tile = ctx.constant(last_position_tile(g.rb_track_indices));
  Var nrb_tile = ctx.constant(last_position_tile(g.nrb_track_indices));
  for (int k = 0; k < k_modes; ++k) {
    const std::string rb_prefix = "dec.rb.k" + std::to_string(k);
    Var rb_in = ad::concat({out.rb_z_agent, out.rb_z_anchor[k]}, 1);
    Var rb_traj = linear(ctx, ad::relu(linear(ctx, rb_in, rb_prefix + ".traj.l1", 2 * d, d)),
                         rb_prefix + ".traj.l2", d, 2 * kFutureSteps);
    out.rb.traj_per_mode.push_back(ad::add(rb_traj, rb_tile));
    out.rb.score_per_mode.push_back(
        linear(ctx, ad::relu(linear(ctx, rb_in, rb_prefix + ".score.l1", 2 * d, d / 2)),
               rb_prefix + ".score.l2", d / 2, 1));

    const std::string nrb_prefix = "dec.nrb.k" + std::to_string(k);
    Var nrb_traj =
        linear(ctx, ad::relu(linear(ctx, out.nrb_z_agent, nrb_prefix + ".traj.l1", d, d)),
               nrb_prefix + ".traj.l2", d, 2 * kFutureSteps);
    out.nrb.traj_per_mode.push_back(ad::add(nrb_traj, nrb_tile));
    out.nrb.score_per_mode.push_back(
        linear(ctx, ad::relu(linear(ctx, out.nrb_z_agent, nrb_prefix + ".score.l1", d, d / 2)),
               nrb_prefix + ".score.l2", d / 2, 1));
  }

  out.rb.anchor_ids.resize(n_rb);
  for (int a = 0; a < n_rb; ++a) {
    const int n_anchors = static_cast<int>(g.rb_anchors[a].size());
    for (int k = 0; k < k_modes; ++k)
      out.rb.anchor_ids[a].push_back(n_anchors > 0 ? k % n_anchors : -1);
  }
  out.nrb.anchor_ids.assign(n_nrb, std::vector<int>(k_modes, -1));
  return out;
}

// ---------------------------------------------------------------------------
// loss

namespace {

struct AgentLossInput {
  std::vector<Var> traj_rows;    // K vars of (1, 24), absolute positions
  std::vector<Var> score_vars;   // K vars of (1, 1)
  std::vector<const AnchorPath*> mode_anchors;  // K entries (may be null)
  std::vector<Vec2> gt_future;   // 12 points
  Vec2 last_position;
  double last_yaw = 0.0;
  bool road_bound = false;
};

struct AgentLossTerms {
  Var reg;
  Var score;
  Var yaw;
  int winner = 0;
};

AgentLossTerms agent_loss(GraphContext& ctx, const AgentLossInput& in,
                          const ModelConfig& config) {
  const int k_modes = static_cast<int>(in.traj_rows.size());

  // Winner: least final displacement error.
  int winner = 0;
  double best_fde = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_modes; ++k) {
    const Tensor& row = in.traj_rows[k].value();
    const double dx = row[2 * (kFutureSteps - 1)] - in.gt_future.back().x;
    const double dy = row[2 * (kFutureSteps - 1) + 1] - in.gt_future.back().y;
    const double fde = std::hypot(dx, dy);
    if (fde < best_fde) {
      best_fde = fde;
      winner = k;
    }
  }

  Tensor gt_row({1, 2 * kFutureSteps});
  for (int t = 0; t < kFutureSteps; ++t) {
    gt_row[2 * t] = in.gt_future[t].x;
    gt_row[2 * t + 1] = in.gt_future[t].y;
  }
  AgentLossTerms terms;
  terms.winner = winner;
  terms.reg = ad::mean_all(
      ad::smooth_l1(in.traj_rows[winner], ctx.constant(gt_row), config.smooth_l1_beta));

  // Max-margin score loss against the winning mode.
  Var score_sum = ctx.constant(Tensor::scalar(0.0));
  for (int k = 0; k < k_modes; ++k) {
    if (k == winner) continue;
    Var margin = ad::add_scalar(ad::sub(in.score_vars[k], in.score_vars[winner]),
                                config.score_margin);
    score_sum = ad::add(score_sum, ad::reshape(ad::relu(margin), {1}));
  }
  terms.score = score_sum;

  // Orientation loss for road-bound agents: every mode is compared against
  // the headings of its own anchor path, averaged over modes with an anchor.
  std::vector<Var> mode_yaws;
  for (int k = 0; in.road_bound && k < k_modes; ++k) {
    const AnchorPath* anchor = in.mode_anchors[k];
    if (!anchor) continue;
    Var points = ad::reshape(in.traj_rows[k], {kFutureSteps, 2});
    Tensor p0({1, 2});
    p0[0] = in.last_position.x;
    p0[1] = in.last_position.y;
    Var prev = ad::concat({ctx.constant(p0), ad::slice(points, 0, 0, kFutureSteps - 1)}, 0);
    Var diff = ad::sub(points, prev);

    bool degenerate = false;
    const Tensor& dval = diff.value();
    for (int t = 0; t < kFutureSteps; ++t)
      if (std::hypot(dval[2 * t], dval[2 * t + 1]) < 1e-9) degenerate = true;

    Var theta;
    if (!degenerate) {
      theta = ad::atan2_op(ad::slice(diff, 1, 1, 2), ad::slice(diff, 1, 0, 1));
    } else {
      // zero-displacement step falls back to the previous step's heading
      std::vector<Var> step_thetas;
      for (int t = 0; t < kFutureSteps; ++t) {
        if (std::hypot(dval[2 * t], dval[2 * t + 1]) < 1e-9) {
          Var fallback =
              t == 0 ? ctx.constant(Tensor({1, 1}, {in.last_yaw})) : step_thetas.back();
          step_thetas.push_back(fallback);
        } else {
          Var row = ad::slice(diff, 0, t, t + 1);
          step_thetas.push_back(ad::atan2_op(ad::slice(row, 1, 1, 2), ad::slice(row, 1, 0, 1)));
        }
      }
      theta = ad::concat(step_thetas, 0);
    }

    Tensor theta_anchor({kFutureSteps, 1});
    const Tensor& pts = points.value();
    for (int t = 0; t < kFutureSteps; ++t)
      theta_anchor[t] = heading_along_anchor(*anchor, {pts[2 * t], pts[2 * t + 1]});
    Var delta = ad::sub(ctx.constant(theta_anchor), theta);
    mode_yaws.push_back(
        ad::reshape(ad::mean_all(ad::add_scalar(ad::neg(ad::cos_op(delta)), 1.0)), {1}));
  }
  if (mode_yaws.empty()) {
    terms.yaw = ctx.constant(Tensor::scalar(0.0));
  } else {
    terms.yaw = ad::mean_all(ad::concat(mode_yaws, 0));
  }
  return terms;
}

std::vector<Vec2> full_future(const AgentTrack& track) {
  const auto future = track.future();
  if (static_cast<int>(future.size()) != kFutureSteps) return {};
  std::vector<Vec2> out;
  for (const auto& s : future) out.push_back(s.position);
  return out;
}

}  // namespace

LossBreakdown TrajectoryModel::compute_loss(GraphContext& ctx, const SceneSample& sample,
                                            const ForwardOutput& out) const {
  const HeteroGraph& g = sample.graph;
  std::vector<Var> regs, scores, yaws;
  LossBreakdown breakdown;

  auto add_agents = [&](const DecodeOutput& dec, const std::vector<int>& track_indices,
                        bool road_bound, std::vector<int>& winners) {
    for (size_t a = 0; a < track_indices.size(); ++a) {
      const AgentTrack& track = sample.scene.tracks[track_indices[a]];
      AgentLossInput in;
      in.gt_future = full_future(track);
      if (in.gt_future.empty()) continue;  // agent without ground truth
      in.road_bound = road_bound;
      const AgentState& cur = track.current();
      in.last_position = cur.position;
      in.last_yaw = cur.yaw;
      for (int k = 0; k < config_.num_modes; ++k) {
        in.traj_rows.push_back(
            ad::slice(dec.traj_per_mode[k], 0, static_cast<int>(a), static_cast<int>(a) + 1));
        in.score_vars.push_back(
            ad::slice(dec.score_per_mode[k], 0, static_cast<int>(a), static_cast<int>(a) + 1));
        const int anchor_id = dec.anchor_ids[a][k];
        in.mode_anchors.push_back(
            road_bound && anchor_id >= 0 ? &g.rb_anchors[a][anchor_id] : nullptr);
      }
      AgentLossTerms terms = agent_loss(ctx, in, config_);
      regs.push_back(terms.reg);
      scores.push_back(ad::reshape(terms.score, {1}));
      yaws.push_back(ad::reshape(terms.yaw, {1}));
      winners.push_back(terms.winner);
    }
  };
  add_agents(out.rb, g.rb_track_indices, true, breakdown.rb_winners);
  add_agents(out.nrb, g.nrb_track_indices, false, breakdown.nrb_winners);

  auto mean_of = [&](std::vector<Var>& parts) {
    if (parts.empty()) return ctx.constant(Tensor::scalar(0.0));
    std::vector<Var> reshaped;
    for (Var& v : parts) reshaped.push_back(ad::reshape(v, {1}));
    return ad::mean_all(ad::concat(reshaped, 0));
  };
  breakdown.reg = mean_of(regs);
  breakdown.score = mean_of(scores);
  breakdown.yaw = mean_of(yaws);
  breakdown.total =
      ad::add(breakdown.reg, ad::add(ad::scale(breakdown.score, config_.w1),
                                     ad::scale(breakdown.yaw, config_.w2)));
  return breakdown;
}

// ---------------------------------------------------------------------------
// prediction

std::vector<Prediction> TrajectoryModel::predict(const SceneSample& sample) {
  ad::Tape tape;
  GraphContext ctx(tape, store_);
  ctx.train = false;
  ForwardOutput out = forward(ctx, sample);

  std::vector<Prediction> preds;
  auto collect = [&](const DecodeOutput& dec, const std::vector<int>& track_indices,
                     AgentType type) {
    for (size_t a = 0; a < track_indices.size(); ++a) {
      Prediction p;
      p.agent_id = sample.scene.tracks[track_indices[a]].agent_id;
      p.agent_type = type;
      p.anchor_ids = dec.anchor_ids[a];
      for (int k = 0; k < config_.num_modes; ++k) {
        const Tensor& rows = dec.traj_per_mode[k].value();
        std::vector<Vec2> traj;
        for (int t = 0; t < kFutureSteps; ++t)
          traj.push_back({rows[a * 2 * kFutureSteps + 2 * t],
                          rows[a * 2 * kFutureSteps + 2 * t + 1]});
        p.trajectories.push_back(std::move(traj));
        p.scores.push_back(dec.score_per_mode[k].value()[a]);
      }
      preds.push_back(std::move(p));
    }
  };
  collect(out.rb, sample.graph.rb_track_indices, AgentType::RoadBound);
  collect(out.nrb, sample.graph.nrb_track_indices, AgentType::NonRoadBound);
  return preds;
}

LossValues prediction_loss(const Prediction& pred, const std::vector<Vec2>& gt_future,
                           const std::vector<AnchorPath>& anchors, const Vec2& last_position,
                           double last_yaw, const ModelConfig& config) {
  if (static_cast<int>(gt_future.size()) != kFutureSteps)
    throw ValidationError("ground truth must have 12 steps");
  ad::Tape tape;
  ParamStore store;
  GraphContext ctx(tape, store);
  AgentLossInput in;
  in.gt_future = gt_future;
  in.last_position = last_position;
  in.last_yaw = last_yaw;
  in.road_bound = pred.agent_type == AgentType::RoadBound;
  const int k_modes = static_cast<int>(pred.trajectories.size());
  for (int k = 0; k < k_modes; ++k) {
    Tensor row({1, 2 * kFutureSteps});
    for (int t = 0; t < kFutureSteps; ++t) {
      row[2 * t] = pred.trajectories[k][t].x;
      row[2 * t + 1] = pred.trajectories[k][t].y;
    }
    in.traj_rows.push_back(ctx.constant(std::move(row)));
    in.score_vars.push_back(ctx.constant(Tensor({1, 1}, {pred.scores[k]})));
    const AnchorPath* anchor = nullptr;
    if (in.road_bound && !anchors.empty()) {
      int id = k < static_cast<int>(pred.anchor_ids.size()) ? pred.anchor_ids[k]
                                                            : k % static_cast<int>(anchors.size());
      if (id >= 0 && id < static_cast<int>(anchors.size())) anchor = &anchors[id];
    }
    in.mode_anchors.push_back(anchor);
  }
  AgentLossTerms terms = agent_loss(ctx, in, config);
  LossValues values;
  values.reg = terms.reg.value().item();
  values.score = terms.score.value().item();
  values.yaw = terms.yaw.value().item();
  values.total = values.reg + config.w1 * values.score + config.w2 * values.yaw;
  values.winner = terms.winner;
  return values;
}

// ---------------------------------------------------------------------------
// persistence

void TrajectoryModel::save(const std::string& path) const {
  save_checkpoint(store_.snapshot(), path);
}

void TrajectoryModel::load(const std::string& path) { store_.restore(load_checkpoint(path)); }

void save_predictions(const std::vector<Prediction>& preds, const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& p : preds) {
    nlohmann::json jp;
    jp["agent_id"] = p.agent_id;
    jp["agent_type"] = to_string(p.agent_type);
    jp["modes"] = nlohmann::json::array();
    for (size_t k = 0; k < p.trajectories.size(); ++k) {
      nlohmann::json jm;
      jm["score"] = p.scores[k];
      jm["points"] = nlohmann::json::array();
      for (const auto& pt : p.trajectories[k]) jm["points"].push_back({pt.x, pt.y});
      jp["modes"].push_back(jm);
    }
    doc.push_back(jp);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write prediction file '" + path + "'");
  out << doc.dump(2) << "\n";
}

std::vector<Prediction> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open prediction file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prediction parse failure: ") + e.what());
  }
  std::vector<Prediction> preds;
  try {
    for (const auto& jp : doc) {
      Prediction p;
      p.agent_id = jp.at("agent_id").get<std::string>();
      if (jp.contains("agent_type"))
        p.agent_type = agent_type_from_string(jp.at("agent_type").get<std::string>());
      for (const auto& jm : jp.at("modes")) {
        p.scores.push_back(jm.at("score").get<double>());
        std::vector<Vec2> traj;
        for (const auto& pt : jm.at("points"))
          traj.push_back({pt[0].get<double>(), pt[1].get<double>()});
        p.trajectories.push_back(std::move(traj));
      }
      preds.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("prediction parse failure: ") + e.what());
  }
  return preds;
}

}  // namespace trajcast
