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

#include <array>
#include <compare>
#include <map>
#include <string>
#include <vector>

#include "trajcast/lane_graph.hpp"
#include "trajcast/scene.hpp"
#include "trajcast/ssg.hpp"

namespace trajcast {

enum class NodeKind { RbAgent, NrbAgent, Map };

struct NodeRef {
  NodeKind kind = NodeKind::Map;
  int index = 0;
};

enum class EdgeRelation {
  TemporalSuc,
  TemporalPre,
  Ssg,
  MapSuc,
  MapPre,
  MapLeft,
  MapRight,
  DrivesOn,
  GivesTrafficInfo,
  Merge,
  Anchor,
};

inline constexpr int kMapHops = 6;  // suc-i / pre-i for i in 1..6

// One row of the edge table: relation plus endpoint kinds, with the hop count
// for map chains and the mode number for anchor edges.
struct EdgeTypeId {
  EdgeRelation relation = EdgeRelation::TemporalSuc;
  NodeKind src = NodeKind::RbAgent;
  NodeKind dst = NodeKind::RbAgent;
  int param = 0;

  auto operator<=>(const EdgeTypeId&) const = default;
};

std::string to_string(const EdgeTypeId& id);

inline constexpr int kGenericEdgeFeatures = 3;  // [euclid_dist, rel_x, rel_y]
inline constexpr int kSsgEdgeFeatures = 4;      // [relation one-hot(3), along_dist]

struct GraphEdge {
  int src = 0;
  int dst = 0;
  std::array<double, 4> feat = {0.0, 0.0, 0.0, 0.0};
};

/// [euclid_dist, rel_x, rel_y] with rel = dst - src.
std::array<double, 3> edge_feature(const Vec2& src_pos, const Vec2& dst_pos);

struct AgentNodeSlot {
  int track_index = 0;  // into Scene::tracks
  int t = 0;
  bool valid = true;    // false for left-padded history slots
  std::array<double, 4> feat = {0.0, 0.0, 0.0, 0.0};  // [x, y, vx, vy]
  Vec2 position;
};

struct GraphConfig {
  int max_modes = 10;             // K
  double drives_on_radius = 20.0; // r_m
  double anchor_radius = 2.0;     // r_a
};

/// Typed-node, typed-edge spatio-temporal graph. Agent nodes are laid out as
/// kHistorySteps consecutive slots per agent (oldest first), so the latest
/// node of agent `a` is `a * kHistorySteps + kHistorySteps - 1`.
struct HeteroGraph {
  std::vector<AgentNodeSlot> rb_nodes;
  std::vector<AgentNodeSlot> nrb_nodes;
  std::vector<std::array<double, 4>> map_feats;  // [x, y, dx, dy]
  std::vector<MapNode> map_nodes;

  std::map<EdgeTypeId, std::vector<GraphEdge>> edges;

  // Road-bound agent bookkeeping, in rb agent order (scene order filtered to
  // road-bound tracks).
  std::vector<int> rb_track_indices;
  std::vector<int> nrb_track_indices;
  std::vector<std::vector<AnchorPath>> rb_anchors;

  int rb_agent_count() const { return static_cast<int>(rb_track_indices.size()); }
  int nrb_agent_count() const { return static_cast<int>(nrb_track_indices.size()); }
  int rb_latest_node(int agent) const { return agent * kHistorySteps + kHistorySteps - 1; }
  int nrb_latest_node(int agent) const { return agent * kHistorySteps + kHistorySteps - 1; }
  const std::vector<GraphEdge>& edges_of(const EdgeTypeId& id) const;
};

HeteroGraph build_graph(const Scene& scene, const LaneGraph& lanes,
                        const std::vector<MapNode>& map_nodes,
                        const std::vector<SsgEdge>& ssg_edges,
                        const std::vector<std::vector<AnchorPath>>& anchors_per_rb,
                        const GraphConfig& config = {});

struct GraphStats {
  std::map<std::string, int> node_counts;
  std::map<std::string, int> edge_counts;
  int total_edges = 0;
};

GraphStats graph_stats(const HeteroGraph& g);

/// Edge lists per kind as text, for fixture diffing.
std::string graph_debug_dump(const HeteroGraph& g);

}  // namespace trajcast
