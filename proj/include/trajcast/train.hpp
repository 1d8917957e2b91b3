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

#include <functional>

#include "trajcast/model.hpp"

namespace trajcast {

struct TrainConfig {
  int epochs = 40;
  int batch_size = 64;  // gradient-accumulated effective batch
  double lr = 1e-3;
  double weight_decay = 0.005;
  int lr_decay_every = 5;       // epochs per decay step
  double lr_decay_factor = 0.5;
  std::uint64_t seed = 0;
  std::string checkpoint_path;  // saved at the end (and periodically) when set
  int checkpoint_every = 0;     // 0 = final checkpoint only
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double total = 0.0;
  double reg = 0.0;
  double score = 0.0;
  double yaw = 0.0;
};

/// Learning rate in effect during a 1-based epoch.
double learning_rate_at(const TrainConfig& config, int epoch);

/// Deterministic single-threaded training with gradient accumulation.
/// Throws NumericError with a diagnostic when the loss becomes non-finite.
std::vector<EpochStats> train_model(TrajectoryModel& model,
                                    const std::vector<SceneSample>& dataset,
                                    const TrainConfig& config,
                                    const std::function<void(const EpochStats&)>& on_epoch = {});

}  // namespace trajcast
