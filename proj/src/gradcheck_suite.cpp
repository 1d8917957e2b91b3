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

#include "trajcast/gradcheck_suite.hpp"

#include <cmath>

#include "trajcast/autoencoder.hpp"
#include "trajcast/layers.hpp"
#include "trajcast/model.hpp"
#include "trajcast/tensor.hpp"

namespace trajcast {

using ad::Tensor;
using ad::Var;

namespace {

constexpr double kOpTolerance = 1e-4;
constexpr double kEndToEndTolerance = 1e-3;

Tensor random_tensor(std::vector<int> shape, std::mt19937_64& rng, double lo = -1.0,
                     double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

// keeps values away from a kink at `center` by at least `margin`
Tensor away_from(Tensor t, double center, double margin) {
  for (std::int64_t i = 0; i < t.size(); ++i) {
    const double d = t[i] - center;
    if (std::abs(d) < margin) t[i] = center + (d >= 0.0 ? margin : -margin);
  }
  return t;
}

// reduces any tensor to a scalar with fixed random weights
Var weighted_sum(ad::Tape& tape, Var v, const Tensor& weights) {
  Var w = tape.input(weights);
  return ad::sum_all(ad::mul(ad::reshape(v, {static_cast<int>(v.value().size())}),
                             ad::reshape(w, {static_cast<int>(weights.size())})));
}

struct Suite {
  std::vector<GradCheckResult> results;
  std::mt19937_64 rng;

  void check(const std::string& name, double error, double tolerance = kOpTolerance) {
    results.push_back({name, error, tolerance, error < tolerance});
  }
};

void op_checks(Suite& suite) {
  auto& rng = suite.rng;

  {
    const Tensor b = random_tensor({4, 5}, rng);
    const Tensor w = random_tensor({3, 5}, rng);
    suite.check("matmul.lhs", ad::grad_check(
                                  [&](ad::Tape& t, Var x) {
                                    return weighted_sum(t, ad::matmul(x, t.input(b)), w);
                                  },
                                  random_tensor({3, 4}, rng)));
    const Tensor a = random_tensor({3, 4}, rng);
    suite.check("matmul.rhs", ad::grad_check(
                                  [&](ad::Tape& t, Var x) {
                                    return weighted_sum(t, ad::matmul(t.input(a), x), w);
                                  },
                                  random_tensor({4, 5}, rng)));
  }
  {
    const Tensor other = random_tensor({3, 4}, rng);
    const Tensor w = random_tensor({3, 4}, rng);
    suite.check("add", ad::grad_check(
                           [&](ad::Tape& t, Var x) {
                             return weighted_sum(t, ad::add(x, t.input(other)), w);
                           },
                           random_tensor({3, 4}, rng)));
    suite.check("add.broadcast",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return weighted_sum(t, ad::add(t.input(other), x), w);
                    },
                    random_tensor({4}, rng)));
    suite.check("mul", ad::grad_check(
                           [&](ad::Tape& t, Var x) {
                             return weighted_sum(t, ad::mul(x, t.input(other)), w);
                           },
                           random_tensor({3, 4}, rng)));
    const Tensor denom = away_from(random_tensor({3, 4}, rng), 0.0, 0.4);
    suite.check("div", ad::grad_check(
                           [&](ad::Tape& t, Var x) {
                             return weighted_sum(t, ad::div(x, t.input(denom)), w);
                           },
                           random_tensor({3, 4}, rng)));
    suite.check("div.denominator",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return weighted_sum(t, ad::div(t.input(other), x), w);
                    },
                    away_from(random_tensor({3, 4}, rng), 0.0, 0.4)));
  }
  {
    const Tensor w = random_tensor({4, 6}, rng);
    suite.check("relu", ad::grad_check(
                            [&](ad::Tape& t, Var x) { return weighted_sum(t, ad::relu(x), w); },
                            away_from(random_tensor({4, 6}, rng), 0.0, 0.05)));
    suite.check("leaky_relu",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return weighted_sum(t, ad::leaky_relu(x, 0.2), w);
                    },
                    away_from(random_tensor({4, 6}, rng), 0.0, 0.05)));
    suite.check("tanh", ad::grad_check(
                            [&](ad::Tape& t, Var x) {
                              return weighted_sum(t, ad::tanh_op(x), w);
                            },
                            random_tensor({4, 6}, rng)));
    suite.check("cos", ad::grad_check(
                           [&](ad::Tape& t, Var x) { return weighted_sum(t, ad::cos_op(x), w); },
                           random_tensor({4, 6}, rng, -3.0, 3.0)));
    suite.check("sqrt", ad::grad_check(
                            [&](ad::Tape& t, Var x) {
                              return weighted_sum(t, ad::sqrt_op(x), w);
                            },
                            random_tensor({4, 6}, rng, 0.5, 2.0)));
    const Tensor xs = away_from(random_tensor({4, 6}, rng), 0.0, 0.4);
    suite.check("atan2", ad::grad_check(
                             [&](ad::Tape& t, Var y) {
                               return weighted_sum(t, ad::atan2_op(y, t.input(xs)), w);
                             },
                             away_from(random_tensor({4, 6}, rng), 0.0, 0.4)));
  }
  {
    const Tensor w = random_tensor({4, 5}, rng);
    suite.check("softmax.axis0",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) { return weighted_sum(t, ad::softmax(x, 0), w); },
                    random_tensor({4, 5}, rng)));
    suite.check("softmax.axis1",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) { return weighted_sum(t, ad::softmax(x, 1), w); },
                    random_tensor({4, 5}, rng)));
    suite.check("mean_all", ad::grad_check(
                                [&](ad::Tape& t, Var x) { return ad::mean_all(x); },
                                random_tensor({4, 5}, rng)));
    const Tensor w0 = random_tensor({5}, rng);
    suite.check("sum_axis0", ad::grad_check(
                                 [&](ad::Tape& t, Var x) {
                                   return weighted_sum(t, ad::sum_axis(x, 0), w0);
                                 },
                                 random_tensor({4, 5}, rng)));
    const Tensor w1 = random_tensor({4}, rng);
    suite.check("mean_axis1", ad::grad_check(
                                  [&](ad::Tape& t, Var x) {
                                    return weighted_sum(t, ad::mean_axis(x, 1), w1);
                                  },
                                  random_tensor({4, 5}, rng)));
  }
  {
    // keep |a-b| away from the smooth-l1 transition at beta
    const double beta = 1.0;
    Tensor a = random_tensor({3, 8}, rng, -2.0, 2.0);
    Tensor b = random_tensor({3, 8}, rng, -2.0, 2.0);
    for (std::int64_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      if (std::abs(std::abs(d) - beta) < 0.05) a[i] += d >= 0.0 ? 0.1 : -0.1;
    }
    const Tensor w = random_tensor({3, 8}, rng);
    suite.check("smooth_l1", ad::grad_check(
                                 [&](ad::Tape& t, Var x) {
                                   return weighted_sum(t, ad::smooth_l1(x, t.input(b), beta), w);
                                 },
                                 a));
  }
  {
    const Tensor other = random_tensor({3, 2}, rng);
    const Tensor w = random_tensor({3, 6}, rng);
    suite.check("concat", ad::grad_check(
                              [&](ad::Tape& t, Var x) {
                                Var o = t.input(other);
                                return weighted_sum(t, ad::concat({x, o, x}, 1), w);
                              },
                              random_tensor({3, 2}, rng)));
    const Tensor ws = random_tensor({3, 2}, rng);
    suite.check("slice", ad::grad_check(
                             [&](ad::Tape& t, Var x) {
                               return weighted_sum(t, ad::slice(x, 1, 1, 3), ws);
                             },
                             random_tensor({3, 5}, rng)));
    const Tensor wr = random_tensor({15}, rng);
    suite.check("reshape", ad::grad_check(
                               [&](ad::Tape& t, Var x) {
                                 return weighted_sum(t, ad::reshape(x, {15}), wr);
                               },
                               random_tensor({3, 5}, rng)));
  }
  {
    const std::vector<int> rows = {2, 0, 1, 2, 2};
    const std::vector<int> segs = {0, 1, 1, 2, 0};
    const Tensor wg = random_tensor({5, 3}, rng);
    suite.check("gather_rows", ad::grad_check(
                                   [&](ad::Tape& t, Var x) {
                                     return weighted_sum(t, ad::gather_rows(x, rows), wg);
                                   },
                                   random_tensor({3, 3}, rng)));
    const Tensor wseg = random_tensor({3, 3}, rng);
    suite.check("scatter_sum", ad::grad_check(
                                   [&](ad::Tape& t, Var x) {
                                     return weighted_sum(t, ad::scatter_sum(x, segs, 3), wseg);
                                   },
                                   random_tensor({5, 3}, rng)));
    suite.check("scatter_mean", ad::grad_check(
                                    [&](ad::Tape& t, Var x) {
                                      return weighted_sum(t, ad::scatter_mean(x, segs, 3), wseg);
                                    },
                                    random_tensor({5, 3}, rng)));
    const Tensor wsm = random_tensor({5, 2}, rng);
    suite.check("scatter_softmax",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return weighted_sum(t, ad::scatter_softmax(x, segs, 3), wsm);
                    },
                    random_tensor({5, 2}, rng)));
    const Tensor m = random_tensor({5, 3}, rng);
    const Tensor wrs = random_tensor({5, 3}, rng);
    suite.check("row_scale.weights",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return weighted_sum(t, ad::row_scale(t.input(m), x), wrs);
                    },
                    random_tensor({5}, rng)));
    const Tensor row_weights = random_tensor({5}, rng);
    suite.check("row_scale.matrix",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return weighted_sum(t, ad::row_scale(x, t.input(row_weights)), wrs);
                    },
                    m));
  }
  {
    const Tensor kernel = random_tensor({4, 3, 3, 3}, rng, -0.5, 0.5);
    const Tensor bias = random_tensor({4}, rng, -0.2, 0.2);
    const Tensor input = random_tensor({2, 3, 6, 6}, rng);
    const Tensor w = random_tensor({2, 4, 3, 3}, rng);
    auto conv_scalar = [&](ad::Tape& t, Var x, Var k, Var b) {
      return weighted_sum(t, ad::conv2d(x, k, b, 2, 1), w);
    };
    suite.check("conv2d.input", ad::grad_check(
                                    [&](ad::Tape& t, Var x) {
                                      return conv_scalar(t, x, t.input(kernel), t.input(bias));
                                    },
                                    input));
    suite.check("conv2d.kernel", ad::grad_check(
                                     [&](ad::Tape& t, Var k) {
                                       return conv_scalar(t, t.input(input), k, t.input(bias));
                                     },
                                     kernel));
    suite.check("conv2d.bias", ad::grad_check(
                                   [&](ad::Tape& t, Var b) {
                                     return conv_scalar(t, t.input(input), t.input(kernel), b);
                                   },
                                   bias));
  }
  {
    const Tensor kernel = random_tensor({3, 4, 3, 3}, rng, -0.5, 0.5);
    const Tensor bias = random_tensor({4}, rng, -0.2, 0.2);
    const Tensor input = random_tensor({2, 3, 3, 3}, rng);
    const Tensor w = random_tensor({2, 4, 5, 5}, rng);
    auto deconv_scalar = [&](ad::Tape& t, Var x, Var k, Var b) {
      return weighted_sum(t, ad::deconv2d(x, k, b, 2, 1), w);
    };
    suite.check("deconv2d.input",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      return deconv_scalar(t, x, t.input(kernel), t.input(bias));
                    },
                    input));
    suite.check("deconv2d.kernel",
                ad::grad_check(
                    [&](ad::Tape& t, Var k) {
                      return deconv_scalar(t, t.input(input), k, t.input(bias));
                    },
                    kernel));
    suite.check("deconv2d.bias",
                ad::grad_check(
                    [&](ad::Tape& t, Var b) {
                      return deconv_scalar(t, t.input(input), t.input(kernel), b);
                    },
                    bias));
  }
  {
    const Tensor gamma = random_tensor({3}, rng, 0.5, 1.5);
    const Tensor beta = random_tensor({3}, rng, -0.5, 0.5);
    const Tensor input = random_tensor({2, 3, 4, 4}, rng);
    const Tensor w = random_tensor({2, 3, 4, 4}, rng);
    for (bool train : {true, false}) {
      const std::string mode = train ? "train" : "eval";
      auto bn_scalar = [&, train](ad::Tape& t, Var x, Var g, Var b) {
        ad::BatchNormState state;
        state.running_mean = Tensor({3});
        state.running_var = Tensor::full({3}, 1.0);
        return weighted_sum(t, ad::batchnorm2d(x, g, b, state, train), w);
      };
      suite.check("batchnorm." + mode + ".input",
                  ad::grad_check(
                      [&](ad::Tape& t, Var x) {
                        return bn_scalar(t, x, t.input(gamma), t.input(beta));
                      },
                      input));
      suite.check("batchnorm." + mode + ".gamma",
                  ad::grad_check(
                      [&](ad::Tape& t, Var g) {
                        return bn_scalar(t, t.input(input), g, t.input(beta));
                      },
                      gamma));
      suite.check("batchnorm." + mode + ".beta",
                  ad::grad_check(
                      [&](ad::Tape& t, Var b) {
                        return bn_scalar(t, t.input(input), t.input(gamma), b);
                      },
                      beta));
    }
  }
  {
    const Tensor w = random_tensor({4, 5}, rng);
    suite.check("dropout.train",
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      std::mt19937_64 mask_rng(42);  // same mask on every evaluation
                      return weighted_sum(t, ad::dropout(x, 0.4, true, mask_rng), w);
                    },
                    random_tensor({4, 5}, rng)));
  }
}

// message-passing layers on a random micro-graph, checked against every
// parameter via the override hook
void layer_checks(Suite& suite) {
  auto& rng = suite.rng;
  const int hidden = 8;
  const Tensor states = random_tensor({5, hidden}, rng);
  const Tensor src_states = random_tensor({4, hidden}, rng);
  const std::vector<int> srcs = {0, 1, 3, 3, 2};
  const std::vector<int> dsts = {1, 0, 2, 4, 4};
  const Tensor feats = random_tensor({5, 3}, rng);
  const Tensor w = random_tensor({5, hidden}, rng);

  for (const std::string layer : {"egcn", "gatv2"}) {
    ParamStore store;
    store.init_seed = 11;
    auto run = [&](GraphContext& ctx, Var dst_states) {
      EdgeBatchRef batch;
      batch.param_prefix = "e0";
      batch.src_states = ctx.constant(src_states);
      batch.src_rows = srcs;
      batch.dst_rows = dsts;
      batch.feats = feats;
      return layer == "egcn"
                 ? egcn_round(ctx, dst_states, {batch}, "layer", hidden)
                 : gatv2_round(ctx, dst_states, {batch}, "layer", hidden, 2, true);
    };
    {
      ad::Tape warm;
      GraphContext ctx(warm, store);
      run(ctx, ctx.constant(states));  // materialize parameters
    }
    suite.check(layer + ".states", ad::grad_check(
                                       [&](ad::Tape& t, Var x) {
                                         GraphContext ctx(t, store);
                                         return weighted_sum(t, run(ctx, x), w);
                                       },
                                       states));
    for (const auto& [name, value] : store.params) {
      suite.check(layer + "." + name,
                  ad::grad_check(
                      [&](ad::Tape& t, Var x) {
                        GraphContext ctx(t, store);
                        ctx.overrides[name] = x;
                        return weighted_sum(t, run(ctx, ctx.constant(states)), w);
                      },
                      value));
    }
  }
}

void autoencoder_checks(Suite& suite) {
  auto& rng = suite.rng;
  AutoencoderConfig config;
  config.in_channels = 2;
  config.input_size = 8;
  config.encoder_channels = {4, 6};
  MapAutoencoder model(config, 5);
  const Tensor input = random_tensor({2, 2, 8, 8}, rng);
  const Tensor target = random_tensor({2, 2, 8, 8}, rng);

  auto loss_of = [&](GraphContext& ctx, Var x) {
    auto [latent, recon] = model.forward(ctx, x, true);
    (void)latent;
    Var diff = ad::sub(recon, ctx.constant(target));
    return ad::mean_all(ad::mul(diff, diff));
  };
  {
    ad::Tape warm;
    GraphContext ctx(warm, model.store());
    loss_of(ctx, ctx.constant(input));
  }
  suite.check("autoencoder.input", ad::grad_check(
                                       [&](ad::Tape& t, Var x) {
                                         GraphContext ctx(t, model.store());
                                         return loss_of(ctx, x);
                                       },
                                       input));
  for (const auto& [name, value] : model.store().params) {
    suite.check("autoencoder." + name,
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      GraphContext ctx(t, model.store());
                      ctx.overrides[name] = x;
                      return loss_of(ctx, ctx.constant(input));
                    },
                    value));
  }
}

LaneGraph micro_lane_graph() {
  // single 25 m lane -> 6 map nodes at the default 5 m step
  LaneGraph g;
  Lane lane;
  lane.lane_id = "l";
  lane.centerline = {{-10.0, 0.0}, {15.0, 0.0}};
  lane.width = 3.5;
  g.lanes.emplace("l", lane);
  return g;
}

// 2 agents on the micro lane; both project, so SSG and anchor edges exist.
Scene micro_scene() {
  Scene scene;
  scene.scene_id = "micro";
  scene.lane_graph_ref = "micro";
  AgentTrack rb;
  rb.agent_id = "a0";
  rb.agent_type = AgentType::RoadBound;
  rb.is_target = true;
  for (int t = -(kHistorySteps - 1); t <= kFutureSteps; ++t) {
    AgentState s;
    s.t = t;
    s.position = {-8.0 + 0.62 * (t + 4), 0.03 * (t % 3)};
    s.velocity = {1.24, 0.0};
    s.yaw = 0.02;
    rb.states.push_back(s);
  }
  scene.tracks.push_back(rb);
  AgentTrack nrb;
  nrb.agent_id = "a1";
  nrb.agent_type = AgentType::NonRoadBound;
  for (int t = -(kHistorySteps - 1); t <= kFutureSteps; ++t) {
    AgentState s;
    s.t = t;
    s.position = {-2.0 + 0.35 * (t + 4), 1.4};
    s.velocity = {0.7, 0.0};
    s.yaw = 0.0;
    nrb.states.push_back(s);
  }
  scene.tracks.push_back(nrb);
  validate_scene(scene);
  return scene;
}

void end_to_end_checks(Suite& suite) {
  ModelConfig config;
  config.hidden_dim = 8;
  config.num_heads = 2;
  config.num_modes = 2;
  TrajectoryModel model(config, 3);

  Scene scene = micro_scene();
  const LaneGraph lanes = micro_lane_graph();
  PipelineConfig pipeline;
  pipeline.graph.max_modes = config.num_modes;
  SceneSample sample = prepare_sample(scene, lanes, pipeline);

  auto loss_of = [&](GraphContext& ctx) {
    ForwardOutput out = model.forward(ctx, sample);
    return model.compute_loss(ctx, sample, out).total;
  };
  {
    ad::Tape warm;
    GraphContext ctx(warm, model.store());
    loss_of(ctx);
  }
  for (const auto& [name, value] : model.store().params) {
    suite.check("pipeline." + name,
                ad::grad_check(
                    [&](ad::Tape& t, Var x) {
                      GraphContext ctx(t, model.store());
                      ctx.overrides[name] = x;
                      return loss_of(ctx);
                    },
                    value),
                kEndToEndTolerance);
  }
}

}  // namespace

std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed) {
  Suite suite;
  suite.rng.seed(seed * 0x9E3779B97F4A7C15ull + 1);
  op_checks(suite);
  layer_checks(suite);
  autoencoder_checks(suite);
  end_to_end_checks(suite);
  return suite.results;
}

bool all_passed(const std::vector<GradCheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace trajcast
