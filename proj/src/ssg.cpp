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

#include "trajcast/ssg.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "trajcast/errors.hpp"

namespace trajcast {

std::string to_string(RelationType r) {
  switch (r) {
    case RelationType::Longitudinal:
      return "longitudinal";
    case RelationType::Lateral:
      return "lateral";
    case RelationType::Intersecting:
      return "intersecting";
  }
  return "?";
}

namespace {

// Route distance from (src lane, src arc) to (dst lane, dst arc) following
// successor links, capped at `horizon`. Same-lane pairs use the absolute arc
// difference. Returns infinity when unreachable.
double route_distance(const LaneGraph& g, const std::string& src_lane, double src_arc,
                      const std::string& dst_lane, double dst_arc, double horizon) {
  if (src_lane == dst_lane) {
    const double d = std::abs(dst_arc - src_arc);
    return d <= horizon ? d : std::numeric_limits<double>::infinity();
  }
  // Dijkstra over lanes; cost to enter a successor is the remaining length of
  // the current lane (or of intermediate lanes).
  std::map<std::string, double> best;  // distance from src point to lane start
  using Item = std::pair<double, std::string>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  const double initial = g.lane(src_lane).length() - src_arc;
  for (const auto& succ : g.lane(src_lane).successors) {
    if (initial <= horizon) queue.push({initial, succ});
  }
  while (!queue.empty()) {
    auto [dist, lane_id] = queue.top();
    queue.pop();
    auto it = best.find(lane_id);
    if (it != best.end() && it->second <= dist) continue;
    best[lane_id] = dist;
    if (lane_id == dst_lane) continue;  // keep exploring; shorter routes already handled
    const double through = dist + g.lane(lane_id).length();
    if (through > horizon) continue;
    for (const auto& succ : g.lane(lane_id).successors) queue.push({through, succ});
  }
  auto it = best.find(dst_lane);
  if (it == best.end()) return std::numeric_limits<double>::infinity();
  const double total = it->second + dst_arc;
  return total <= horizon ? total : std::numeric_limits<double>::infinity();
}

bool lanes_adjacent(const LaneGraph& g, const std::string& a, const std::string& b) {
  const Lane& lane = g.lane(a);
  return (lane.left_neighbor && *lane.left_neighbor == b) ||
         (lane.right_neighbor && *lane.right_neighbor == b);
}

}  // namespace

std::vector<SsgEdge> build_ssg(const std::vector<Projection>& projections, const LaneGraph& g,
                               double horizon) {
  for (const auto& p : projections)
    if (!g.has_lane(p.lane_id))
      throw ValidationError("projection references unknown lane '" + p.lane_id + "'");

  std::map<std::string, std::vector<const Projection*>> by_agent;
  for (const auto& p : projections) by_agent[p.agent_id].push_back(&p);

  // Minimum along-distance per (src, dst, relation).
  std::map<std::tuple<std::string, std::string, int>, double> collapsed;
  auto keep_min = [&collapsed](const std::string& src, const std::string& dst, RelationType rel,
                               double dist) {
    const auto key = std::make_tuple(src, dst, static_cast<int>(rel));
    auto it = collapsed.find(key);
    if (it == collapsed.end() || dist < it->second) collapsed[key] = dist;
  };

  for (const auto& [src_id, src_projs] : by_agent) {
    for (const auto& [dst_id, dst_projs] : by_agent) {
      if (src_id == dst_id) continue;
      for (const Projection* ps : src_projs) {
        for (const Projection* pd : dst_projs) {
          const double fwd =
              route_distance(g, ps->lane_id, ps->arc_pos, pd->lane_id, pd->arc_pos, horizon);
          if (std::isfinite(fwd)) keep_min(src_id, dst_id, RelationType::Longitudinal, fwd);

          if (lanes_adjacent(g, ps->lane_id, pd->lane_id))
            keep_min(src_id, dst_id, RelationType::Lateral,
                     std::abs(ps->arc_pos - pd->arc_pos));

          if (ps->lane_id != pd->lane_id) {
            const auto crossing = polyline_crossing(g.lane(ps->lane_id).centerline,
                                                    g.lane(pd->lane_id).centerline);
            if (crossing) {
              const double rev = route_distance(g, pd->lane_id, pd->arc_pos, ps->lane_id,
                                                ps->arc_pos, horizon);
              const bool related = std::isfinite(fwd) || std::isfinite(rev) ||
                                   lanes_adjacent(g, ps->lane_id, pd->lane_id);
              if (!related)
                keep_min(src_id, dst_id, RelationType::Intersecting,
                         std::abs(crossing->arc_a - ps->arc_pos));
            }
          }
        }
      }
    }
  }

  std::vector<SsgEdge> edges;
  edges.reserve(collapsed.size());
  for (const auto& [key, dist] : collapsed) {
    SsgEdge e;
    e.src_agent = std::get<0>(key);
    e.dst_agent = std::get<1>(key);
    e.relation = static_cast<RelationType>(std::get<2>(key));
    e.along_dist = dist;
    edges.push_back(e);
  }
  return edges;
}

std::vector<Projection> project_scene_agents(const Scene& scene, const LaneGraph& g,
                                             double radius, double heading_tol) {
  std::vector<Projection> out;
  for (const auto& track : scene.tracks) {
    const AgentState& current = track.current();
    auto projs = project_agent(g, current.position, current.yaw, radius, heading_tol,
                               track.agent_id);
    out.insert(out.end(), projs.begin(), projs.end());
  }
  return out;
}

double ssg_reduction_ratio(const Scene& scene, const LaneGraph& world_lanes, double horizon,
                           double radius, double heading_tol) {
  const int n = static_cast<int>(scene.tracks.size());
  if (n < 2) throw ValidationError("reduction ratio requires at least 2 agents");
  const LaneGraph g = translated(world_lanes, Vec2{0.0, 0.0} - scene.origin);
  const auto projections = project_scene_agents(scene, g, radius, heading_tol);
  const auto edges = build_ssg(projections, g, horizon);
  const double fully_connected = static_cast<double>(n) * (n - 1);
  return 1.0 - static_cast<double>(edges.size()) / fully_connected;
}

std::string ssg_debug_dump(const std::vector<SsgEdge>& edges) {
  std::ostringstream out;
  for (const auto& e : edges)
    out << e.src_agent << " " << e.dst_agent << " " << to_string(e.relation) << " "
        << e.along_dist << "\n";
  return out.str();
}

}  // namespace trajcast
