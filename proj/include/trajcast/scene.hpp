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

#include "trajcast/geometry.hpp"

namespace trajcast {

// Agents are sampled on a fixed 2 Hz grid. Timestep 0 is the current state,
// negative indices are history, positive indices are ground-truth future.
inline constexpr int kHistorySteps = 5;   // t = -4..0
inline constexpr int kFutureSteps = 12;   // t = 1..12
inline constexpr double kStepSeconds = 0.5;

enum class AgentType { RoadBound, NonRoadBound };

std::string to_string(AgentType type);
AgentType agent_type_from_string(const std::string& s);

struct AgentState {
  int t = 0;
  Vec2 position;
  Vec2 velocity;
  double yaw = 0.0;  // radians in (-pi, pi]
};

struct AgentTrack {
  std::string agent_id;
  AgentType agent_type = AgentType::RoadBound;
  bool is_target = false;
  std::vector<AgentState> states;  // strictly increasing t

  /// States with t <= 0, oldest first.
  std::vector<AgentState> observed() const;
  /// States with t > 0, oldest first.
  std::vector<AgentState> future() const;
  const AgentState& current() const;  // state at t == 0
  bool has_state(int t) const;
};

struct Scene {
  std::string scene_id;
  std::string lane_graph_ref;
  Vec2 origin;  // world offset of the local frame
  std::vector<AgentTrack> tracks;
};

/// Checks all track/scene invariants; throws ValidationError on violation.
void validate_scene(const Scene& scene);

/// Shifts positions so the geometric center of all observed states is the
/// local-frame origin; the shift is accumulated into scene.origin. Scenes that
/// are already centered are left bit-identical.
void recenter_scene(Scene& scene);

Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

Scene scene_from_json_text(const std::string& text);
std::string scene_to_json_text(const Scene& scene);

}  // namespace trajcast
