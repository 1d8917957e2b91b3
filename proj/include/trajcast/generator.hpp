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

#include <string>
#include <vector>

#include "trajcast/lane_graph.hpp"
#include "trajcast/scene.hpp"

namespace trajcast {

inline const std::vector<std::string>& generator_template_names() {
  static const std::vector<std::string> names = {"straight", "curve", "y_fork",
                                                 "cross_intersection", "lane_change"};
  return names;
}

/// The fixed lane network for one generator template.
LaneGraph lane_graph_template(const std::string& name);

struct GeneratorSpec {
  std::string template_name = "straight";
  int num_road_bound = 2;
  int num_non_road_bound = 1;
  int num_scenes = 1;
};

/// Deterministic synthetic scenes: road-bound agents follow centerlines with
/// speed and lateral noise, non-road-bound agents walk free paths. Every track
/// has the full 5-step history and 12-step future.
std::vector<Scene> generate_synthetic_scenes(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace trajcast
