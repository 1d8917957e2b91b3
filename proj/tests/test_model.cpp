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

#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/generator.hpp"
#include "trajcast/layers.hpp"
#include "trajcast/model.hpp"
#include "trajcast/train.hpp"

using namespace trajcast;
using namespace trajcast::testing;
using ad::Tensor;
using ad::Var;

namespace {

SceneSample straight_sample(int num_rb, int num_nrb, std::uint64_t seed,
                            const ModelConfig& config) {
  GeneratorSpec spec;
  spec.template_name = "straight";
  spec.num_road_bound = num_rb;
  spec.num_non_road_bound = num_nrb;
  spec.num_scenes = 1;
  const Scene scene = generate_synthetic_scenes(spec, seed).front();
  PipelineConfig pipeline;
  pipeline.graph.max_modes = config.num_modes;
  return prepare_sample(scene, lane_graph_template("straight"), pipeline);
}

}  // namespace

TEST_CASE("embedding: identical features and timesteps embed identically") {
  ParamStore store;
  store.init_seed = 2;
  ad::Tape tape;
  GraphContext ctx(tape, store);
  Tensor raw({3, 5}, {1.0, 2.0, 0.5, 0.0, 1.0,   //
                      1.0, 2.0, 0.5, 0.0, 1.0,   // same as row 0
                      9.0, 2.0, 0.5, 0.0, 1.0});
  Var emb = mlp2(ctx, ctx.constant(raw), "embed.rb", 5, 16, 16);
  const Tensor rows = emb.value();
  for (int c = 0; c < 16; ++c) {
    CHECK(rows[c] == rows[16 + c]);
    CHECK(rows[c] != rows[32 + c]);
  }

  // identical features at different timesteps diverge through the encoding
  const Tensor enc = time_encoding({0, 3}, 16);
  bool any_diff = false;
  for (int c = 0; c < 16; ++c) any_diff = any_diff || enc[c] != enc[16 + c];
  CHECK(any_diff);
}

TEST_CASE("egcn round is the identity without edges") {
  ParamStore store;
  ad::Tape tape;
  GraphContext ctx(tape, store);
  Tensor states({4, 8});
  for (std::int64_t i = 0; i < states.size(); ++i) states[i] = 0.1 * static_cast<double>(i);
  Var in = ctx.constant(states);
  Var out = egcn_round(ctx, in, {}, "layer", 8);
  for (std::int64_t i = 0; i < states.size(); ++i) CHECK(out.value()[i] == states[i]);
}

TEST_CASE("egcn mean aggregation ignores duplicated identical edges") {
  ParamStore store;
  store.init_seed = 5;
  Tensor states({3, 8});
  for (std::int64_t i = 0; i < states.size(); ++i) states[i] = std::sin(0.3 * i);
  Tensor feat_once({1, 3}, {1.0, 0.5, -0.5});
  Tensor feat_twice({2, 3}, {1.0, 0.5, -0.5, 1.0, 0.5, -0.5});

  auto run = [&](const std::vector<int>& srcs, const std::vector<int>& dsts,
                 const Tensor& feats) {
    ad::Tape tape;
    GraphContext ctx(tape, store);
    Var in = ctx.constant(states);
    EdgeBatchRef batch{"e", in, srcs, dsts, feats};
    return egcn_round(ctx, in, {batch}, "layer", 8).value();
  };
  const Tensor once = run({0}, {2}, feat_once);
  const Tensor twice = run({0, 0}, {2, 2}, feat_twice);
  for (std::int64_t i = 0; i < once.size(); ++i)
    CHECK(once[i] == doctest::Approx(twice[i]).epsilon(1e-12));
}

TEST_CASE("gatv2: one incoming edge weighs 1, duplicates split evenly") {
  ParamStore store;
  store.init_seed = 6;
  Tensor states({3, 8});
  for (std::int64_t i = 0; i < states.size(); ++i) states[i] = std::cos(0.2 * i);
  Tensor feat_once({1, 3}, {0.3, -1.0, 0.4});
  Tensor feat_twice({2, 3}, {0.3, -1.0, 0.4, 0.3, -1.0, 0.4});

  auto run = [&](const std::vector<int>& srcs, const std::vector<int>& dsts,
                 const Tensor& feats) {
    ad::Tape tape;
    GraphContext ctx(tape, store);
    Var in = ctx.constant(states);
    EdgeBatchRef batch{"e", in, srcs, dsts, feats};
    return gatv2_round(ctx, in, {batch}, "layer", 8, 2, true).value();
  };
  const Tensor once = run({1}, {0}, feat_once);
  const Tensor twice = run({1, 1}, {0, 0}, feat_twice);
  for (std::int64_t i = 0; i < once.size(); ++i)
    CHECK(once[i] == doctest::Approx(twice[i]).epsilon(1e-12));
  // isolated rows (1 and 2) are unchanged
  for (std::int64_t i = 8; i < 24; ++i) CHECK(once[i] == states[i]);
}

TEST_CASE("forward output shapes and anchor cycling") {
  ModelConfig config;
  config.hidden_dim = 32;
  config.num_heads = 4;
  config.num_modes = 10;
  TrajectoryModel model(config, 1);
  SceneSample sample = straight_sample(2, 1, 4, config);

  ad::Tape tape;
  GraphContext ctx(tape, model.store());
  const ForwardOutput out = model.forward(ctx, sample);
  CHECK(out.rb_z_agent.value().shape() == std::vector<int>{2, 32});
  CHECK(out.nrb_z_agent.value().shape() == std::vector<int>{1, 32});
  REQUIRE(out.rb_z_anchor.size() == 10);
  REQUIRE(out.rb.traj_per_mode.size() == 10);
  CHECK(out.rb.traj_per_mode[0].value().shape() == std::vector<int>{2, 24});
  CHECK(out.rb.score_per_mode[0].value().shape() == std::vector<int>{2, 1});

  // anchors cycle: with n anchors, mode k uses anchor k mod n
  for (int a = 0; a < 2; ++a) {
    const int n = static_cast<int>(sample.graph.rb_anchors[a].size());
    if (n == 0) continue;
    for (int k = 0; k < 10; ++k) CHECK(out.rb.anchor_ids[a][k] == k % n);
  }
}

TEST_CASE("nrb decoding is independent of anchors") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 3;
  TrajectoryModel model(config, 2);
  SceneSample sample = straight_sample(1, 1, 6, config);

  auto nrb_values = [&](const SceneSample& s) {
    ad::Tape tape;
    GraphContext ctx(tape, model.store());
    const ForwardOutput out = model.forward(ctx, s);
    std::vector<double> values;
    for (const auto& v : out.nrb.traj_per_mode)
      for (std::int64_t i = 0; i < v.value().size(); ++i) values.push_back(v.value()[i]);
    return values;
  };
  const auto base = nrb_values(sample);
  SceneSample altered = sample;
  altered.graph.rb_anchors[0].clear();  // strip the rb agent's anchors entirely
  for (int k = 0; k < 16; ++k)
    altered.graph.edges.erase({EdgeRelation::Anchor, NodeKind::Map, NodeKind::RbAgent, k});
  const auto stripped = nrb_values(altered);
  REQUIRE(base.size() == stripped.size());
  for (size_t i = 0; i < base.size(); ++i) CHECK(base[i] == stripped[i]);
}

TEST_CASE("distinct anchor embeddings produce distinct modes under generic weights") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 2;
  TrajectoryModel model(config, 3);
  // y_fork gives the rb agent two different anchors
  GeneratorSpec spec;
  spec.template_name = "y_fork";
  spec.num_road_bound = 1;
  spec.num_non_road_bound = 0;
  spec.num_scenes = 1;
  PipelineConfig pipeline;
  pipeline.graph.max_modes = config.num_modes;
  Scene scene;
  for (std::uint64_t seed = 1;; ++seed) {
    scene = generate_synthetic_scenes(spec, seed).front();
    SceneSample probe = prepare_sample(scene, lane_graph_template("y_fork"), pipeline);
    if (probe.graph.rb_anchors[0].size() == 2) break;
    REQUIRE(seed < 50);
  }
  SceneSample sample = prepare_sample(scene, lane_graph_template("y_fork"), pipeline);

  ad::Tape tape;
  GraphContext ctx(tape, model.store());
  const ForwardOutput out = model.forward(ctx, sample);
  double diff = 0.0;
  for (int i = 0; i < 24; ++i)
    diff = std::max(diff, std::abs(out.rb.traj_per_mode[0].value()[i] -
                                   out.rb.traj_per_mode[1].value()[i]));
  CHECK(diff > 1e-9);
}

TEST_CASE("agent with a single-step history still gets a latent via the self merge edge") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 2;
  TrajectoryModel model(config, 4);

  Scene scene;
  scene.scene_id = "single";
  AgentTrack track = eastbound_track("A", 20.0, 5.0);
  std::vector<AgentState> only_current;
  for (const auto& s : track.states)
    if (s.t >= 0) only_current.push_back(s);
  track.states = only_current;
  scene.tracks.push_back(track);

  PipelineConfig pipeline;
  pipeline.graph.max_modes = config.num_modes;
  SceneSample sample = prepare_sample(scene, straight_graph(), pipeline);
  ad::Tape tape;
  GraphContext ctx(tape, model.store());
  const ForwardOutput out = model.forward(ctx, sample);
  CHECK(out.rb_z_agent.value().all_finite());
}

TEST_CASE("permuting track order permutes latents consistently") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 2;
  TrajectoryModel model(config, 5);

  GeneratorSpec spec;
  spec.template_name = "lane_change";
  spec.num_road_bound = 3;
  spec.num_non_road_bound = 1;
  spec.num_scenes = 1;
  Scene scene = generate_synthetic_scenes(spec, 12).front();
  PipelineConfig pipeline;
  pipeline.graph.max_modes = config.num_modes;

  Scene permuted = scene;
  std::reverse(permuted.tracks.begin(), permuted.tracks.end());

  auto latent_by_agent = [&](const Scene& s) {
    SceneSample sample = prepare_sample(s, lane_graph_template("lane_change"), pipeline);
    ad::Tape tape;
    GraphContext ctx(tape, model.store());
    const ForwardOutput out = model.forward(ctx, sample);
    std::map<std::string, std::vector<double>> by_agent;
    for (int a = 0; a < sample.graph.rb_agent_count(); ++a) {
      std::vector<double> row;
      for (int c = 0; c < config.hidden_dim; ++c)
        row.push_back(out.rb_z_agent.value()[a * config.hidden_dim + c]);
      by_agent[s.tracks[sample.graph.rb_track_indices[a]].agent_id] = row;
    }
    return by_agent;
  };
  const auto base = latent_by_agent(scene);
  const auto perm = latent_by_agent(permuted);
  REQUIRE(base.size() == perm.size());
  for (const auto& [agent, row] : base) {
    const auto& other = perm.at(agent);
    for (size_t i = 0; i < row.size(); ++i)
      CHECK(row[i] == doctest::Approx(other[i]).epsilon(1e-9));
  }
}

TEST_CASE("map latent fusion") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 2;
  SceneSample sample = straight_sample(1, 0, 8, config);
  sample.rb_z_map = Tensor({static_cast<int>(sample.graph.rb_nodes.size()), 16});
  for (std::int64_t i = 0; i < sample.rb_z_map.size(); ++i)
    sample.rb_z_map[i] = std::sin(0.1 * static_cast<double>(i));

  TrajectoryModel model(config, 6);
  auto run = [&](bool train, std::uint64_t rng_seed) {
    ad::Tape tape;
    GraphContext ctx(tape, model.store());
    ctx.train = train;
    ctx.rng.seed(rng_seed);
    const ForwardOutput out = model.forward(ctx, sample);
    std::vector<double> v;
    for (std::int64_t i = 0; i < out.rb_z_agent.value().size(); ++i)
      v.push_back(out.rb_z_agent.value()[i]);
    return v;
  };
  // eval mode is deterministic regardless of rng
  CHECK(run(false, 1) == run(false, 2));
  // train-mode dropout differs between seeds
  CHECK(run(true, 1) != run(true, 2));

  SUBCASE("latent width must match the hidden dim") {
    SceneSample bad = sample;
    bad.rb_z_map = Tensor({static_cast<int>(sample.graph.rb_nodes.size()), 8});
    ad::Tape tape;
    GraphContext ctx(tape, model.store());
    CHECK_THROWS_AS(model.forward(ctx, bad), ValidationError);
  }
}

TEST_CASE("loss formulas") {
  ModelConfig config;
  config.num_modes = 2;

  // ground truth: straight east at 5 m/s from the origin
  std::vector<Vec2> gt;
  for (int t = 1; t <= kFutureSteps; ++t) gt.push_back({2.5 * t, 0.0});
  AnchorPath east;
  east.polyline = {{0.0, 0.0}, {200.0, 0.0}};
  east.headings = {0.0, 0.0};

  Prediction pred;
  pred.agent_type = AgentType::RoadBound;
  pred.trajectories = {gt, gt};
  // losing mode shifted along the travel direction, so headings stay aligned
  for (auto& p : pred.trajectories[1]) p.x += 50.0;
  pred.scores = {1.0, 0.0};
  pred.anchor_ids = {0, 0};

  SUBCASE("exact fixpoint: prediction = gt, margin satisfied, aligned anchor") {
    const LossValues values = prediction_loss(pred, gt, {east}, {0.0, 0.0}, 0.0, config);
    CHECK(values.winner == 0);
    CHECK(values.reg == 0.0);
    CHECK(values.score == 0.0);
    CHECK(std::abs(values.yaw) < 1e-12);
    CHECK(std::abs(values.total) < 1e-12);
  }
  SUBCASE("losing score margin is hinged") {
    Prediction close = pred;
    close.scores = {1.0, 1.0};  // margin 0.2 violated by exactly 0.2
    const LossValues values = prediction_loss(close, gt, {east}, {0.0, 0.0}, 0.0, config);
    CHECK(values.score == doctest::Approx(0.2));
  }
  SUBCASE("orientation loss hits 2 for opposing headings") {
    Prediction reversed = pred;
    for (int t = 0; t < kFutureSteps; ++t)
      reversed.trajectories[0][t] = {-2.5 * (t + 1), 0.0};  // heading pi vs anchor 0
    reversed.trajectories[1] = reversed.trajectories[0];
    for (auto& p : reversed.trajectories[1]) p.x -= 50.0;  // same heading, losing mode
    std::vector<Vec2> gt_rev = reversed.trajectories[0];
    const LossValues values =
        prediction_loss(reversed, gt_rev, {east}, {0.0, 0.0}, 0.0, config);
    CHECK(values.yaw == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("orientation loss is 1 at a quarter turn") {
    Prediction north = pred;
    for (int t = 0; t < kFutureSteps; ++t) north.trajectories[0][t] = {0.0, 2.5 * (t + 1)};
    north.trajectories[1] = north.trajectories[0];
    for (auto& p : north.trajectories[1]) p.y += 50.0;
    std::vector<Vec2> gt_north = north.trajectories[0];
    const LossValues values =
        prediction_loss(north, gt_north, {east}, {0.0, 0.0}, 0.0, config);
    CHECK(values.yaw == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("every mode is pulled toward its own anchor") {
    // winner aligned with the anchor, second mode perpendicular: mean of 0 and 1
    Prediction mixed = pred;
    for (int t = 0; t < kFutureSteps; ++t)
      mixed.trajectories[1][t] = {0.0, 50.0 + 2.5 * (t + 1)};
    const LossValues values =
        prediction_loss(mixed, gt, {east}, {0.0, 0.0}, 0.0, config);
    CHECK(values.winner == 0);
    CHECK(values.yaw == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("nrb agents have no orientation loss") {
    Prediction walker = pred;
    walker.agent_type = AgentType::NonRoadBound;
    for (int t = 0; t < kFutureSteps; ++t)
      walker.trajectories[0][t] = {0.0, 2.5 * (t + 1)};
    std::vector<Vec2> gt_n = walker.trajectories[0];
    const LossValues values = prediction_loss(walker, gt_n, {}, {0.0, 0.0}, 0.0, config);
    CHECK(values.yaw == 0.0);
  }
  SUBCASE("degenerate zero-displacement step falls back to the previous heading") {
    Prediction frozen = pred;
    // stand still for the first two steps, then move east
    frozen.trajectories[0][0] = {0.0, 0.0};
    frozen.trajectories[0][1] = {0.0, 0.0};
    std::vector<Vec2> gt_f = frozen.trajectories[0];
    const LossValues values = prediction_loss(frozen, gt_f, {east}, {0.0, 0.0}, 0.0, config);
    CHECK(std::isfinite(values.yaw));
    CHECK(values.yaw < 1e-12);  // fallback heading equals the anchor heading
  }
}

TEST_CASE("winner-takes-all regression gradients stay on the winning head") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 4;
  TrajectoryModel model(config, 7);
  SceneSample sample = straight_sample(2, 1, 10, config);

  ad::Tape tape;
  GraphContext ctx(tape, model.store());
  const ForwardOutput out = model.forward(ctx, sample);
  const LossBreakdown loss = model.compute_loss(ctx, sample, out);
  tape.backward(loss.reg);

  std::set<int> rb_winners(loss.rb_winners.begin(), loss.rb_winners.end());
  std::set<int> nrb_winners(loss.nrb_winners.begin(), loss.nrb_winners.end());
  const auto grads = ctx.grads();
  for (const auto& [name, g] : grads) {
    const bool rb_traj = name.rfind("dec.rb.k", 0) == 0 && name.find(".traj.") != std::string::npos;
    const bool nrb_traj =
        name.rfind("dec.nrb.k", 0) == 0 && name.find(".traj.") != std::string::npos;
    if (!rb_traj && !nrb_traj) continue;
    const int k = std::stoi(name.substr(name.find(".k") + 2));
    const bool winning = rb_traj ? rb_winners.count(k) > 0 : nrb_winners.count(k) > 0;
    double max_abs = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) max_abs = std::max(max_abs, std::abs(g[i]));
    if (!winning) {
      CHECK(max_abs == 0.0);
    }
  }
}

TEST_CASE("training drives the loss down and is deterministic per seed") {
  ModelConfig config;
  config.hidden_dim = 32;
  config.num_heads = 4;
  config.num_modes = 4;

  GeneratorSpec spec;
  spec.template_name = "straight";
  spec.num_road_bound = 1;
  spec.num_non_road_bound = 1;
  spec.num_scenes = 2;
  PipelineConfig pipeline;
  pipeline.graph.max_modes = config.num_modes;
  std::vector<SceneSample> dataset;
  for (const auto& scene : generate_synthetic_scenes(spec, 21))
    dataset.push_back(prepare_sample(scene, lane_graph_template("straight"), pipeline));

  TrainConfig tc;
  tc.epochs = 30;
  tc.batch_size = 2;
  tc.lr = 1e-3;
  tc.lr_decay_every = 1000;
  tc.seed = 1;

  TrajectoryModel model(config, 1);
  const auto log = train_model(model, dataset, tc);
  REQUIRE(log.size() == 30);
  CHECK(log.back().total < 0.5 * log.front().total);

  TrajectoryModel rerun(config, 1);
  TrainConfig one = tc;
  one.epochs = 1;
  const auto log2 = train_model(rerun, dataset, one);
  CHECK(log2.front().total == log.front().total);
}

TEST_CASE("paper learning rate schedule") {
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.lr_decay_every = 5;
  tc.lr_decay_factor = 0.5;
  CHECK(learning_rate_at(tc, 1) == doctest::Approx(1e-3));
  CHECK(learning_rate_at(tc, 5) == doctest::Approx(1e-3));
  CHECK(learning_rate_at(tc, 6) == doctest::Approx(0.5e-3));
  CHECK(learning_rate_at(tc, 11) == doctest::Approx(0.25e-3));
}

TEST_CASE("model save/load round-trips parameters") {
  ModelConfig config;
  config.hidden_dim = 16;
  config.num_heads = 2;
  config.num_modes = 2;
  TrajectoryModel model(config, 9);
  SceneSample sample = straight_sample(1, 0, 2, config);
  const auto before = model.predict(sample);

  model.save("/tmp/trajcast_model_test.ckpt");
  TrajectoryModel loaded(config, 1234);
  loaded.load("/tmp/trajcast_model_test.ckpt");
  const auto after = loaded.predict(sample);
  REQUIRE(before.size() == after.size());
  for (size_t a = 0; a < before.size(); ++a)
    for (size_t k = 0; k < before[a].trajectories.size(); ++k)
      for (int t = 0; t < kFutureSteps; ++t)
        CHECK(before[a].trajectories[k][t] == after[a].trajectories[k][t]);
}
