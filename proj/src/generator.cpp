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

#include "trajcast/generator.hpp"

#include <algorithm>
#include <random>

#include "trajcast/errors.hpp"

namespace trajcast {

namespace {

Lane make_lane(const std::string& id, Polyline centerline, double width = 3.5) {
  Lane lane;
  lane.lane_id = id;
  lane.centerline = std::move(centerline);
  lane.width = width;
  return lane;
}

void link_successor(LaneGraph& g, const std::string& from, const std::string& to) {
  g.lanes.at(from).successors.push_back(to);
  g.lanes.at(to).predecessors.push_back(from);
}

void link_neighbors(LaneGraph& g, const std::string& left, const std::string& right) {
  g.lanes.at(left).right_neighbor = right;
  g.lanes.at(right).left_neighbor = left;
}

MapShape polygon(std::initializer_list<Vec2> pts) {
  MapShape s;
  s.kind = MapShape::Kind::Polygon;
  s.points.assign(pts);
  return s;
}

MapShape polyline_shape(std::initializer_list<Vec2> pts) {
  MapShape s;
  s.kind = MapShape::Kind::Polyline;
  s.points.assign(pts);
  return s;
}

Polyline arc_points(const Vec2& center, double radius, double start_angle, double end_angle,
                    int n) {
  Polyline out;
  for (int i = 0; i <= n; ++i) {
    const double a = start_angle + (end_angle - start_angle) * i / n;
    out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return out;
}

LaneGraph template_straight() {
  LaneGraph g;
  g.lanes.emplace("s0", make_lane("s0", {{-100.0, 0.0}, {0.0, 0.0}}));
  g.lanes.emplace("s1", make_lane("s1", {{0.0, 0.0}, {100.0, 0.0}}));
  link_successor(g, "s0", "s1");
  g.extras["walkway"].push_back(polyline_shape({{-100.0, 6.0}, {100.0, 6.0}}));
  g.extras["lane_divider"].push_back(polyline_shape({{-100.0, 1.9}, {100.0, 1.9}}));
  return g;
}

LaneGraph template_curve() {
  LaneGraph g;
  // quarter circle radius 40 heading east->north, then a straight tail
  g.lanes.emplace("c0", make_lane("c0", arc_points({0.0, 40.0}, 40.0, -M_PI / 2.0, 0.0, 24)));
  g.lanes.emplace("c1", make_lane("c1", {{40.0, 40.0}, {40.0, 120.0}}));
  link_successor(g, "c0", "c1");
  g.extras["walkway"].push_back(
      polyline_shape({{6.0, -6.0}, {30.0, -2.0}, {46.0, 20.0}, {46.0, 120.0}}));
  return g;
}

LaneGraph template_y_fork() {
  LaneGraph g;
  g.lanes.emplace("f0", make_lane("f0", {{-80.0, 0.0}, {0.0, 0.0}}));
  g.lanes.emplace("f1",
                  make_lane("f1", {{0.0, 0.0}, {25.0, 4.0}, {55.0, 16.0}, {100.0, 36.0}}));
  g.lanes.emplace("f2",
                  make_lane("f2", {{0.0, 0.0}, {25.0, -4.0}, {55.0, -16.0}, {100.0, -36.0}}));
  link_successor(g, "f0", "f1");
  link_successor(g, "f0", "f2");
  g.extras["walkway"].push_back(polyline_shape({{-80.0, 7.0}, {0.0, 7.0}, {60.0, 30.0}}));
  return g;
}

LaneGraph template_cross_intersection() {
  LaneGraph g;
  g.lanes.emplace("x_we", make_lane("x_we", {{-80.0, 0.0}, {80.0, 0.0}}));
  g.lanes.emplace("x_sn", make_lane("x_sn", {{1.75, -80.0}, {1.75, 80.0}}));
  g.extras["intersection_zone"].push_back(
      polygon({{-5.0, -5.0}, {8.0, -5.0}, {8.0, 8.0}, {-5.0, 8.0}}));
  g.extras["ped_crossing"].push_back(
      polygon({{-9.0, -3.0}, {-6.0, -3.0}, {-6.0, 3.0}, {-9.0, 3.0}}));
  g.extras["ped_crossing"].push_back(
      polygon({{9.0, -3.0}, {12.0, -3.0}, {12.0, 3.0}, {9.0, 3.0}}));
  g.extras["stop_area"].push_back(
      polygon({{-14.0, -3.2}, {-9.5, -3.2}, {-9.5, 0.0}, {-14.0, 0.0}}));
  g.extras["walkway"].push_back(polyline_shape({{-80.0, 8.0}, {80.0, 8.0}}));
  g.extras["walkway"].push_back(polyline_shape({{-8.0, -80.0}, {-8.0, 80.0}}));
  g.extras["traffic_sign"].push_back(
      polygon({{-7.0, -7.0}, {-6.0, -7.0}, {-6.0, -6.0}, {-7.0, -6.0}}));
  return g;
}

LaneGraph template_lane_change() {
  LaneGraph g;
  g.lanes.emplace("l0", make_lane("l0", {{-75.0, 0.0}, {75.0, 0.0}}));
  g.lanes.emplace("l1", make_lane("l1", {{-75.0, 3.5}, {75.0, 3.5}}));
  link_neighbors(g, "l1", "l0");  // l1 is left of l0
  g.extras["road_divider"].push_back(polyline_shape({{-75.0, -2.2}, {75.0, -2.2}}));
  g.extras["walkway"].push_back(polyline_shape({{-75.0, 9.0}, {75.0, 9.0}}));
  return g;
}

// Simulation state of one road-bound agent moving along lanes.
struct LaneWalker {
  const LaneGraph* graph = nullptr;
  std::string lane_id;
  double arc = 0.0;

  // Advances by `dist` meters, picking successors at lane ends. Returns false
  // when a dead end was reached.
  bool advance(double dist, std::mt19937_64& rng) {
    while (dist > 0.0) {
      const Lane& lane = graph->lanes.at(lane_id);
      const double remaining = lane.length() - arc;
      if (dist < remaining) {
        arc += dist;
        return true;
      }
      dist -= remaining;
      if (lane.successors.empty()) {
        arc = lane.length();
        return false;
      }
      std::uniform_int_distribution<size_t> pick(0, lane.successors.size() - 1);
      lane_id = lane.successors[pick(rng)];
      arc = 0.0;
    }
    return true;
  }
};

}  // namespace

LaneGraph lane_graph_template(const std::string& name) {
  LaneGraph g;
  if (name == "straight")
    g = template_straight();
  else if (name == "curve")
    g = template_curve();
  else if (name == "y_fork")
    g = template_y_fork();
  else if (name == "cross_intersection")
    g = template_cross_intersection();
  else if (name == "lane_change")
    g = template_lane_change();
  else
    throw ValidationError("unknown lane graph template '" + name + "'");
  validate_lane_graph(g);
  return g;
}

std::vector<Scene> generate_synthetic_scenes(const GeneratorSpec& spec, std::uint64_t seed) {
  const LaneGraph g = lane_graph_template(spec.template_name);
  std::vector<std::string> lane_ids;
  for (const auto& [id, lane] : g.lanes) lane_ids.push_back(id);

  std::vector<Scene> scenes;
  for (int scene_idx = 0; scene_idx < spec.num_scenes; ++scene_idx) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(scene_idx));
    Scene scene;
    scene.scene_id = spec.template_name + "_" + std::to_string(seed) + "_" +
                     std::to_string(scene_idx);
    scene.lane_graph_ref = spec.template_name;

    for (int a = 0; a < spec.num_road_bound; ++a) {
      AgentTrack track;
      track.agent_id = "rb" + std::to_string(a);
      track.agent_type = AgentType::RoadBound;
      track.is_target = a == 0;

      std::uniform_int_distribution<size_t> pick_lane(0, lane_ids.size() - 1);
      LaneWalker walker{&g, lane_ids[pick_lane(rng)], 0.0};
      const Lane& start_lane = g.lanes.at(walker.lane_id);
      std::uniform_real_distribution<double> pick_arc(2.0,
                                                      std::max(4.0, start_lane.length() * 0.85));
      walker.arc = std::min(pick_arc(rng), start_lane.length() - 2.0);

      std::uniform_real_distribution<double> pick_speed(4.5, 8.5);
      double speed = pick_speed(rng);
      std::normal_distribution<double> speed_noise(0.0, 0.15);
      std::normal_distribution<double> lateral_noise(0.0, 0.06);
      double lateral = 0.0;

      for (int t = -(kHistorySteps - 1); t <= kFutureSteps; ++t) {
        const Lane& lane = g.lanes.at(walker.lane_id);
        const double max_lateral = lane.width / 2.0 - 0.4;
        lateral = std::clamp(lateral + lateral_noise(rng), -max_lateral, max_lateral);
        const Vec2 tangent = tangent_at_arc(lane.centerline, walker.arc);
        const Vec2 normal{-tangent.y, tangent.x};

        AgentState s;
        s.t = t;
        s.position = point_at_arc(lane.centerline, walker.arc) + normal * lateral;
        s.velocity = tangent * speed;
        s.yaw = normalize_angle(s.velocity.heading());
        track.states.push_back(s);

        speed = std::clamp(speed + speed_noise(rng), 1.0, 11.0);
        if (!walker.advance(speed * kStepSeconds, rng)) speed = 0.0;
      }
      scene.tracks.push_back(std::move(track));
    }

    for (int a = 0; a < spec.num_non_road_bound; ++a) {
      AgentTrack track;
      track.agent_id = "nrb" + std::to_string(a);
      track.agent_type = AgentType::NonRoadBound;
      track.is_target = spec.num_road_bound == 0 && a == 0;

      Vec2 pos;
      double heading = 0.0;
      auto walkways = g.extras.find("walkway");
      if (walkways != g.extras.end() && !walkways->second.empty()) {
        std::uniform_int_distribution<size_t> pick_shape(0, walkways->second.size() - 1);
        const Polyline& path = walkways->second[pick_shape(rng)].points;
        std::uniform_real_distribution<double> pick_arc(0.0, polyline_length(path) * 0.6);
        const double s0 = pick_arc(rng);
        pos = point_at_arc(path, s0);
        heading = tangent_at_arc(path, s0).heading();
      } else {
        std::uniform_real_distribution<double> pick_xy(-30.0, 30.0);
        pos = {pick_xy(rng), pick_xy(rng)};
        std::uniform_real_distribution<double> pick_heading(-M_PI, M_PI);
        heading = pick_heading(rng);
      }
      std::uniform_real_distribution<double> pick_speed(0.8, 1.8);
      double speed = pick_speed(rng);
      std::normal_distribution<double> drift(0.0, 0.05);

      for (int t = -(kHistorySteps - 1); t <= kFutureSteps; ++t) {
        AgentState s;
        s.t = t;
        s.position = pos;
        s.velocity = Vec2{std::cos(heading), std::sin(heading)} * speed;
        s.yaw = normalize_angle(heading);
        track.states.push_back(s);
        pos += s.velocity * kStepSeconds;
        heading += drift(rng);
      }
      scene.tracks.push_back(std::move(track));
    }

    recenter_scene(scene);
    validate_scene(scene);
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace trajcast
