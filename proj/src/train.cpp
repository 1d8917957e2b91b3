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

#include "trajcast/train.hpp"

#include <cmath>

#include "trajcast/errors.hpp"
#include "trajcast/optim.hpp"

namespace trajcast {

double learning_rate_at(const TrainConfig& config, int epoch) {
  const int decays = config.lr_decay_every > 0 ? (epoch - 1) / config.lr_decay_every : 0;
  return config.lr * std::pow(config.lr_decay_factor, static_cast<double>(decays));
}

std::vector<EpochStats> train_model(TrajectoryModel& model,
                                    const std::vector<SceneSample>& dataset,
                                    const TrainConfig& config,
                                    const std::function<void(const EpochStats&)>& on_epoch) {
  if (dataset.empty()) throw ValidationError("training on an empty dataset");

  ad::AdamOptimizer opt({config.lr, 0.9, 0.999, 1e-8, config.weight_decay});
  std::vector<EpochStats> log;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    opt.config().lr = learning_rate_at(config, epoch);
    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = opt.config().lr;

    std::map<std::string, ad::Tensor> accumulated;
    int in_batch = 0;
    auto flush = [&]() {
      if (in_batch == 0) return;
      for (auto& [name, g] : accumulated)
        for (std::int64_t i = 0; i < g.size(); ++i) g[i] /= static_cast<double>(in_batch);
      opt.step(model.store().params, accumulated);
      accumulated.clear();
      in_batch = 0;
    };

    for (size_t idx = 0; idx < dataset.size(); ++idx) {
      ad::Tape tape;
      GraphContext ctx(tape, model.store());
      ctx.train = true;
      ctx.rng.seed(config.seed * 0x2545F4914F6CDD1Dull + static_cast<std::uint64_t>(epoch) * 7919u +
                   idx);
      ForwardOutput out = model.forward(ctx, dataset[idx]);
      LossBreakdown loss = model.compute_loss(ctx, dataset[idx], out);
      const double total = loss.total.value().item();
      if (!std::isfinite(total))
        throw NumericError("loss became non-finite at epoch " + std::to_string(epoch) +
                           ", scene '" + dataset[idx].scene.scene_id + "'");
      stats.total += total;
      stats.reg += loss.reg.value().item();
      stats.score += loss.score.value().item();
      stats.yaw += loss.yaw.value().item();

      tape.backward(loss.total);
      for (const auto& [name, g] : ctx.grads()) {
        auto it = accumulated.find(name);
        if (it == accumulated.end()) {
          accumulated.emplace(name, g);
        } else {
          for (std::int64_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
        }
      }
      if (++in_batch >= config.batch_size) flush();
    }
    flush();

    const double n = static_cast<double>(dataset.size());
    stats.total /= n;
    stats.reg /= n;
    stats.score /= n;
    stats.yaw /= n;
    log.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (!config.checkpoint_path.empty() && config.checkpoint_every > 0 &&
        epoch % config.checkpoint_every == 0)
      model.save(config.checkpoint_path);
  }
  if (!config.checkpoint_path.empty()) model.save(config.checkpoint_path);
  return log;
}

}  // namespace trajcast
