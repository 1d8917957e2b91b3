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

#include <map>
#include <string>
#include <vector>

#include "trajcast/lane_graph.hpp"
#include "trajcast/model.hpp"

namespace trajcast {

/// Mode indices ranked by score (descending, ties by mode index), top k.
std::vector<int> top_k_modes(const Prediction& pred, int k);

/// Minimum over the k most likely modes of the mean pointwise L2 distance.
double min_ade(const Prediction& pred, const std::vector<Vec2>& gt, int k);

/// Minimum over the k most likely modes of the final-point L2 distance.
double min_fde(const Prediction& pred, const std::vector<Vec2>& gt, int k);

/// Official reading: the agent is a miss iff every top-k mode deviates more
/// than 2 m somewhere. With `miss_if_any`, a single bad mode already counts.
bool is_miss_2(const Prediction& pred, const std::vector<Vec2>& gt, int k,
               bool miss_if_any = false);

bool trajectory_on_drivable(const std::vector<Vec2>& trajectory, const LaneGraph& lanes);

/// Fraction of predicted trajectories (all modes) not entirely on drivable
/// area.
double offroad_rate(const std::vector<Prediction>& preds, const LaneGraph& lanes);

struct MetricReport {
  std::vector<int> ks;
  bool miss_if_any = false;
  // keyed by metric name, e.g. "minADE_5"
  std::vector<std::pair<std::string, std::map<std::string, double>>> per_agent;
  std::map<std::string, double> aggregate;
};

MetricReport evaluate_predictions(const std::vector<Prediction>& preds,
                                  const std::map<std::string, std::vector<Vec2>>& gt_by_agent,
                                  const LaneGraph* lanes, const std::vector<int>& ks = {5, 10},
                                  bool miss_if_any = false);

std::string report_csv(const MetricReport& report);
std::string report_table(const MetricReport& report);

}  // namespace trajcast
