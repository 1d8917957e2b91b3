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

#include "trajcast/hetero_graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "trajcast/errors.hpp"

namespace trajcast {

namespace {

std::string kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::RbAgent:
      return "rb";
    case NodeKind::NrbAgent:
      return "nrb";
    case NodeKind::Map:
      return "m";
  }
  return "?";
}

}  // namespace

std::string to_string(const EdgeTypeId& id) {
  std::string rel;
  switch (id.relation) {
    case EdgeRelation::TemporalSuc:
      rel = "suc";
      break;
    case EdgeRelation::TemporalPre:
      rel = "pre";
      break;
    case EdgeRelation::Ssg:
      rel = "SSG";
      break;
    case EdgeRelation::MapSuc:
      rel = "suc-" + std::to_string(id.param);
      break;
    case EdgeRelation::MapPre:
      rel = "pre-" + std::to_string(id.param);
      break;
    case EdgeRelation::MapLeft:
      rel = "left";
      break;
    case EdgeRelation::MapRight:
      rel = "right";
      break;
    case EdgeRelation::DrivesOn:
      rel = "drives-on";
      break;
    case EdgeRelation::GivesTrafficInfo:
      rel = "gives-traffic-info";
      break;
    case EdgeRelation::Merge:
      rel = "merge";
      break;
    case EdgeRelation::Anchor:
      rel = "anchor-" + std::to_string(id.param);
      break;
  }
  return "{" + kind_name(id.src) + ", " + rel + ", " + kind_name(id.dst) + "}";
}

std::array<double, 3> edge_feature(const Vec2& src_pos, const Vec2& dst_pos) {
  const Vec2 rel = dst_pos - src_pos;
  return {rel.norm(), rel.x, rel.y};
}

const std::vector<GraphEdge>& HeteroGraph::edges_of(const EdgeTypeId& id) const {
  static const std::vector<GraphEdge> empty;
  auto it = edges.find(id);
  return it == edges.end() ? empty : it->second;
}

namespace {

GraphEdge make_edge(int src, int dst, const Vec2& src_pos, const Vec2& dst_pos) {
  GraphEdge e;
  e.src = src;
  e.dst = dst;
  const auto f = edge_feature(src_pos, dst_pos);
  e.feat = {f[0], f[1], f[2], 0.0};
  return e;
}

// Five history slots per agent, left-padded with the oldest observed state.
std::vector<AgentNodeSlot> make_agent_slots(const Scene& scene,
                                            const std::vector<int>& track_indices) {
  std::vector<AgentNodeSlot> slots;
  for (int track_index : track_indices) {
    const AgentTrack& track = scene.tracks[track_index];
    const auto observed = track.observed();
    for (int t = -(kHistorySteps - 1); t <= 0; ++t) {
      const AgentState* match = nullptr;
      for (const auto& s : observed)
        if (s.t <= t && (!match || s.t > match->t)) match = &s;
      AgentNodeSlot slot;
      slot.track_index = track_index;
      slot.t = t;
      if (match && match->t == t) {
        slot.valid = true;
      } else {
        slot.valid = false;
        if (!match) match = &observed.front();  // pad from the oldest state
      }
      slot.feat = {match->position.x, match->position.y, match->velocity.x,
                   match->velocity.y};
      slot.position = match->position;
      slots.push_back(slot);
    }
  }
  return slots;
}

}  // namespace

HeteroGraph build_graph(const Scene& scene, const LaneGraph& lanes,
                        const std::vector<MapNode>& map_nodes,
                        const std::vector<SsgEdge>& ssg_edges,
                        const std::vector<std::vector<AnchorPath>>& anchors_per_rb,
                        const GraphConfig& config) {
  HeteroGraph g;
  g.map_nodes = map_nodes;
  for (const auto& n : map_nodes)
    g.map_feats.push_back({n.position.x, n.position.y, n.direction.x, n.direction.y});

  for (size_t i = 0; i < scene.tracks.size(); ++i) {
    if (scene.tracks[i].agent_type == AgentType::RoadBound)
      g.rb_track_indices.push_back(static_cast<int>(i));
    else
      g.nrb_track_indices.push_back(static_cast<int>(i));
  }
  g.rb_nodes = make_agent_slots(scene, g.rb_track_indices);
  g.nrb_nodes = make_agent_slots(scene, g.nrb_track_indices);

  if (!anchors_per_rb.empty() &&
      static_cast<int>(anchors_per_rb.size()) != g.rb_agent_count())
    throw ValidationError("anchor lists do not match number of road-bound agents");
  g.rb_anchors.assign(g.rb_agent_count(), {});
  for (size_t i = 0; i < anchors_per_rb.size(); ++i) {
    if (static_cast<int>(anchors_per_rb[i].size()) > config.max_modes)
      throw ValidationError("agent has more anchor paths than modes (K)");
    g.rb_anchors[i] = anchors_per_rb[i];
  }

  // --- temporal and merge edges per agent kind ---
  auto add_agent_chain_edges = [&](const std::vector<AgentNodeSlot>& slots, NodeKind kind,
                                   int agent_count) {
    for (int a = 0; a < agent_count; ++a) {
      const int base = a * kHistorySteps;
      const int latest = base + kHistorySteps - 1;
      for (int s = 0; s + 1 < kHistorySteps; ++s) {
        g.edges[{EdgeRelation::TemporalSuc, kind, kind, 0}].push_back(
            make_edge(base + s, base + s + 1, slots[base + s].position,
                      slots[base + s + 1].position));
        g.edges[{EdgeRelation::TemporalPre, kind, kind, 0}].push_back(
            make_edge(base + s + 1, base + s, slots[base + s + 1].position,
                      slots[base + s].position));
      }
      for (int s = 0; s < kHistorySteps; ++s)
        g.edges[{EdgeRelation::Merge, kind, kind, 0}].push_back(
            make_edge(base + s, latest, slots[base + s].position, slots[latest].position));
    }
  };
  add_agent_chain_edges(g.rb_nodes, NodeKind::RbAgent, g.rb_agent_count());
  add_agent_chain_edges(g.nrb_nodes, NodeKind::NrbAgent, g.nrb_agent_count());

  // --- SSG edges, instantiated at every slot where both agents are valid ---
  auto locate_agent = [&](const std::string& agent_id) -> std::pair<NodeKind, int> {
    for (int i = 0; i < g.rb_agent_count(); ++i)
      if (scene.tracks[g.rb_track_indices[i]].agent_id == agent_id)
        return {NodeKind::RbAgent, i};
    for (int i = 0; i < g.nrb_agent_count(); ++i)
      if (scene.tracks[g.nrb_track_indices[i]].agent_id == agent_id)
        return {NodeKind::NrbAgent, i};
    throw ValidationError("SSG edge references unknown agent '" + agent_id + "'");
  };
  for (const auto& e : ssg_edges) {
    const auto [src_kind, src_agent] = locate_agent(e.src_agent);
    const auto [dst_kind, dst_agent] = locate_agent(e.dst_agent);
    const auto& src_slots = src_kind == NodeKind::RbAgent ? g.rb_nodes : g.nrb_nodes;
    const auto& dst_slots = dst_kind == NodeKind::RbAgent ? g.rb_nodes : g.nrb_nodes;
    for (int s = 0; s < kHistorySteps; ++s) {
      const int src_node = src_agent * kHistorySteps + s;
      const int dst_node = dst_agent * kHistorySteps + s;
      if (!src_slots[src_node].valid || !dst_slots[dst_node].valid) continue;
      GraphEdge edge;
      edge.src = src_node;
      edge.dst = dst_node;
      edge.feat = {0.0, 0.0, 0.0, e.along_dist};
      edge.feat[static_cast<int>(e.relation)] = 1.0;
      g.edges[{EdgeRelation::Ssg, src_kind, dst_kind, 0}].push_back(edge);
    }
  }

  // --- map chain edges ---
  std::map<std::string, std::vector<int>> lane_nodes;  // node ids sorted by arc
  for (const auto& n : map_nodes) lane_nodes[n.lane_id].push_back(n.node_id);
  for (auto& [lane_id, ids] : lane_nodes)
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
      return map_nodes[a].arc_pos < map_nodes[b].arc_pos;
    });

  // 1-hop successor adjacency: consecutive samples within a lane plus
  // lane-end to successor-lane-start links.
  std::vector<std::vector<int>> one_hop(map_nodes.size());
  for (const auto& [lane_id, ids] : lane_nodes) {
    for (size_t i = 0; i + 1 < ids.size(); ++i) one_hop[ids[i]].push_back(ids[i + 1]);
    if (!ids.empty() && lanes.has_lane(lane_id)) {
      for (const auto& succ : lanes.lane(lane_id).successors) {
        auto it = lane_nodes.find(succ);
        if (it != lane_nodes.end() && !it->second.empty())
          one_hop[ids.back()].push_back(it->second.front());
      }
    }
  }
  for (auto& targets : one_hop) {
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  }

  auto pos_of = [&](int node) { return map_nodes[node].position; };
  for (int node = 0; node < static_cast<int>(map_nodes.size()); ++node) {
    std::set<int> frontier = {node};
    for (int hop = 1; hop <= kMapHops; ++hop) {
      std::set<int> next;
      for (int cur : frontier)
        for (int succ : one_hop[cur]) next.insert(succ);
      for (int target : next) {
        g.edges[{EdgeRelation::MapSuc, NodeKind::Map, NodeKind::Map, hop}].push_back(
            make_edge(node, target, pos_of(node), pos_of(target)));
        g.edges[{EdgeRelation::MapPre, NodeKind::Map, NodeKind::Map, hop}].push_back(
            make_edge(target, node, pos_of(target), pos_of(node)));
      }
      frontier = std::move(next);
      if (frontier.empty()) break;
    }
  }

  // --- lateral map adjacency at proportionally matched arc positions ---
  auto add_lateral = [&](EdgeRelation relation, int node,
                         const std::optional<std::string>& neighbor_id) {
    if (!neighbor_id) return;
    auto it = lane_nodes.find(*neighbor_id);
    if (it == lane_nodes.end() || it->second.empty()) return;
    const MapNode& n = map_nodes[node];
    const double len = lanes.lane(n.lane_id).length();
    const double neighbor_len = lanes.lane(*neighbor_id).length();
    const double target_arc = len > 0.0 ? n.arc_pos / len * neighbor_len : 0.0;
    int best = it->second.front();
    for (int cand : it->second)
      if (std::abs(map_nodes[cand].arc_pos - target_arc) <
          std::abs(map_nodes[best].arc_pos - target_arc))
        best = cand;
    g.edges[{relation, NodeKind::Map, NodeKind::Map, 0}].push_back(
        make_edge(node, best, pos_of(node), pos_of(best)));
  };
  for (int node = 0; node < static_cast<int>(map_nodes.size()); ++node) {
    if (!lanes.has_lane(map_nodes[node].lane_id)) continue;
    const Lane& lane = lanes.lane(map_nodes[node].lane_id);
    add_lateral(EdgeRelation::MapLeft, node, lane.left_neighbor);
    add_lateral(EdgeRelation::MapRight, node, lane.right_neighbor);
  }

  // --- agent <-> map edges ---
  auto add_agent_map_edges = [&](const std::vector<AgentNodeSlot>& slots, NodeKind kind) {
    for (int node = 0; node < static_cast<int>(slots.size()); ++node) {
      for (int m = 0; m < static_cast<int>(map_nodes.size()); ++m) {
        const double d = (map_nodes[m].position - slots[node].position).norm();
        if (d > config.drives_on_radius) continue;
        g.edges[{EdgeRelation::DrivesOn, kind, NodeKind::Map, 0}].push_back(
            make_edge(node, m, slots[node].position, pos_of(m)));
        g.edges[{EdgeRelation::GivesTrafficInfo, NodeKind::Map, kind, 0}].push_back(
            make_edge(m, node, pos_of(m), slots[node].position));
      }
    }
  };
  add_agent_map_edges(g.rb_nodes, NodeKind::RbAgent);
  add_agent_map_edges(g.nrb_nodes, NodeKind::NrbAgent);

  // --- anchor edges: map nodes near anchor path k -> rb agent's latest node ---
  for (int a = 0; a < g.rb_agent_count(); ++a) {
    const int latest = g.rb_latest_node(a);
    for (size_t k = 0; k < g.rb_anchors[a].size(); ++k) {
      const AnchorPath& anchor = g.rb_anchors[a][k];
      for (int m = 0; m < static_cast<int>(map_nodes.size()); ++m) {
        if (distance_to_polyline(anchor.polyline, map_nodes[m].position) >
            config.anchor_radius)
          continue;
        g.edges[{EdgeRelation::Anchor, NodeKind::Map, NodeKind::RbAgent,
                 static_cast<int>(k)}]
            .push_back(make_edge(m, latest, pos_of(m), g.rb_nodes[latest].position));
      }
    }
  }

  return g;
}

GraphStats graph_stats(const HeteroGraph& g) {
  GraphStats stats;
  stats.node_counts["rb"] = static_cast<int>(g.rb_nodes.size());
  stats.node_counts["nrb"] = static_cast<int>(g.nrb_nodes.size());
  stats.node_counts["m"] = static_cast<int>(g.map_nodes.size());
  for (const auto& [id, list] : g.edges) {
    stats.edge_counts[to_string(id)] = static_cast<int>(list.size());
    stats.total_edges += static_cast<int>(list.size());
  }
  return stats;
}

std::string graph_debug_dump(const HeteroGraph& g) {
  std::ostringstream out;
  for (const auto& [id, list] : g.edges) {
    out << to_string(id) << " count=" << list.size() << "\n";
    for (const auto& e : list) {
      out << "  " << e.src << " -> " << e.dst << " [";
      for (int i = 0; i < 4; ++i) out << (i ? ", " : "") << e.feat[i];
      out << "]\n";
    }
  }
  return out.str();
}

}  // namespace trajcast
