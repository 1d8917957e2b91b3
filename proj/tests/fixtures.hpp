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

#include "trajcast/lane_graph.hpp"
#include "trajcast/scene.hpp"

namespace trajcast::testing {

inline Lane simple_lane(const std::string& id, Polyline centerline, double width = 3.5) {
  Lane lane;
  lane.lane_id = id;
  lane.centerline = std::move(centerline);
  lane.width = width;
  return lane;
}

/// One east-west lane of the given length starting at the origin.
inline LaneGraph straight_graph(double length = 150.0, double width = 3.5) {
  LaneGraph g;
  g.lanes.emplace("a", simple_lane("a", {{0.0, 0.0}, {length, 0.0}}, width));
  return g;
}

/// 30 m stem, then two 100+ m branches.
inline LaneGraph fork_graph() {
  LaneGraph g;
  g.lanes.emplace("stem", simple_lane("stem", {{0.0, 0.0}, {30.0, 0.0}}));
  g.lanes.emplace("up", simple_lane("up", {{30.0, 0.0}, {80.0, 15.0}, {140.0, 40.0}}));
  g.lanes.emplace("down", simple_lane("down", {{30.0, 0.0}, {80.0, -15.0}, {140.0, -40.0}}));
  g.lanes.at("stem").successors = {"up", "down"};
  g.lanes.at("up").predecessors = {"stem"};
  g.lanes.at("down").predecessors = {"stem"};
  return g;
}

/// Two parallel same-direction lanes with mutual adjacency, no successors.
inline LaneGraph parallel_graph(double length = 150.0) {
  LaneGraph g;
  g.lanes.emplace("r", simple_lane("r", {{0.0, 0.0}, {length, 0.0}}));
  g.lanes.emplace("l", simple_lane("l", {{0.0, 3.5}, {length, 3.5}}));
  g.lanes.at("r").left_neighbor = "l";
  g.lanes.at("l").right_neighbor = "r";
  return g;
}

/// Two perpendicular lanes crossing at (20, 0) / arc 20 and 30.
inline LaneGraph crossing_graph() {
  LaneGraph g;
  g.lanes.emplace("we", simple_lane("we", {{0.0, 0.0}, {60.0, 0.0}}));
  g.lanes.emplace("sn", simple_lane("sn", {{20.0, -30.0}, {20.0, 30.0}}));
  return g;
}

/// A track moving east along y=0 from `x0` at `speed`, full history + future.
inline AgentTrack eastbound_track(const std::string& id, double x0, double speed,
                                  AgentType type = AgentType::RoadBound) {
  AgentTrack track;
  track.agent_id = id;
  track.agent_type = type;
  for (int t = -(kHistorySteps - 1); t <= kFutureSteps; ++t) {
    AgentState s;
    s.t = t;
    s.position = {x0 + speed * kStepSeconds * (t + kHistorySteps - 1), 0.0};
    s.velocity = {speed, 0.0};
    s.yaw = 0.0;
    track.states.push_back(s);
  }
  return track;
}

}  // namespace trajcast::testing
