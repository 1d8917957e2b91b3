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
#include <optional>
#include <string>
#include <vector>

#include "trajcast/geometry.hpp"

namespace trajcast {

// Raster channel tags, in fixed channel order.
inline const std::vector<std::string>& raster_channel_tags() {
  static const std::vector<std::string> tags = {
      "drivable",  "lane_border", "lane_divider", "ped_crossing",      "walkway",
      "stop_area", "carpark",     "road_divider", "traffic_sign",      "intersection_zone"};
  return tags;
}
inline constexpr int kRasterChannels = 10;

struct Lane {
  std::string lane_id;
  Polyline centerline;  // >= 2 distinct consecutive points
  double width = 3.5;
  std::vector<std::string> successors;
  std::vector<std::string> predecessors;
  std::optional<std::string> left_neighbor;
  std::optional<std::string> right_neighbor;
  std::vector<std::string> layer_tags;

  double length() const { return polyline_length(centerline); }
};

struct MapShape {
  enum class Kind { Polygon, Polyline };
  Kind kind = Kind::Polyline;
  Polyline points;
};

struct LaneGraph {
  std::map<std::string, Lane> lanes;
  std::map<std::string, std::vector<MapShape>> extras;  // keyed by channel tag

  const Lane& lane(const std::string& id) const;
  bool has_lane(const std::string& id) const { return lanes.count(id) > 0; }
};

/// Checks referential integrity and neighbor-link consistency.
void validate_lane_graph(const LaneGraph& g);

/// Copy of `g` with all geometry shifted by `offset` (used to express the map
/// in a scene's local frame).
LaneGraph translated(const LaneGraph& g, const Vec2& offset);

LaneGraph load_lane_graph(const std::string& path);
void save_lane_graph(const LaneGraph& g, const std::string& path);
LaneGraph lane_graph_from_json_text(const std::string& text);
std::string lane_graph_to_json_text(const LaneGraph& g);

struct MapNode {
  int node_id = 0;
  std::string lane_id;
  Vec2 position;
  Vec2 direction;  // unit tangent
  double arc_pos = 0.0;
};

// Map nodes are gathered in an axis-aligned square of this side length.
inline constexpr double kMapGatherSide = 190.0;
inline constexpr double kDefaultMapNodeStep = 5.0;

/// Samples map nodes every `step` meters along each centerline (plus the lane
/// end point), keeping only nodes inside the gather square around `center`.
std::vector<MapNode> discretize_map(const LaneGraph& g, const Vec2& center,
                                    double step = kDefaultMapNodeStep);

struct Projection {
  std::string agent_id;
  std::string lane_id;
  double arc_pos = 0.0;
  double lateral_offset = 0.0;  // signed, positive left of travel
  int identity_id = 0;          // unique per (agent, lane) pair
};

inline constexpr double kDefaultProjectionRadius = 3.0;
inline constexpr double kDefaultHeadingTolerance = M_PI / 3.0;

/// One projection identity per lane whose centerline is within `radius` of
/// `position` and whose tangent agrees with `heading` within `heading_tol`.
std::vector<Projection> project_agent(const LaneGraph& g, const Vec2& position, double heading,
                                      double radius = kDefaultProjectionRadius,
                                      double heading_tol = kDefaultHeadingTolerance,
                                      const std::string& agent_id = "");

struct AnchorPath {
  int anchor_id = 0;
  std::vector<std::string> lane_ids;
  Polyline polyline;              // starts at the projected point
  std::vector<double> headings;   // segment heading per polyline point

  double length() const { return polyline_length(polyline); }
};

inline constexpr double kMaxAnchorLength = 100.0;
inline constexpr double kMinLaneChangeOverlap = 5.0;

/// Depth-first enumeration of permitted paths from a projection: successor
/// transitions plus single (non-consecutive) lateral lane changes, truncated
/// at `max_len` arc length and deduplicated by lane-id sequence. Output is
/// ordered lexicographically on the lane-id sequence; on overflow the paths
/// closest to straight-ahead are kept.
std::vector<AnchorPath> enumerate_anchor_paths(const LaneGraph& g, const Projection& proj,
                                               double max_len = kMaxAnchorLength,
                                               int max_k = 64);

/// Heading of the anchor polyline segment nearest to `query`; earlier segment
/// wins ties.
double heading_along_anchor(const AnchorPath& anchor, const Vec2& query);

/// True iff `point` lies in the union of lane corridors (centerline buffered
/// by half width, boundary included).
bool is_on_drivable(const LaneGraph& g, const Vec2& point);

}  // namespace trajcast
