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

#include "trajcast/lane_graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trajcast/errors.hpp"

namespace trajcast {

using nlohmann::json;

const Lane& LaneGraph::lane(const std::string& id) const {
  auto it = lanes.find(id);
  if (it == lanes.end()) throw ValidationError("unknown lane id '" + id + "'");
  return it->second;
}

void validate_lane_graph(const LaneGraph& g) {
  for (const auto& [id, lane] : g.lanes) {
    if (lane.lane_id != id) throw ValidationError("lane key/id mismatch for '" + id + "'");
    if (lane.centerline.size() < 2)
      throw ValidationError("lane '" + id + "' centerline has fewer than 2 points");
    for (size_t i = 1; i < lane.centerline.size(); ++i)
      if ((lane.centerline[i] - lane.centerline[i - 1]).norm() == 0.0)
        throw ValidationError("lane '" + id + "' has repeated consecutive centerline points");
    if (!(lane.width > 0.0)) throw ValidationError("lane '" + id + "' has non-positive width");
    auto check_ref = [&](const std::string& ref, const char* what) {
      if (!g.has_lane(ref))
        throw ValidationError("lane '" + id + "' references unknown " + std::string(what) +
                              " '" + ref + "'");
    };
    for (const auto& s : lane.successors) check_ref(s, "successor");
    for (const auto& p : lane.predecessors) check_ref(p, "predecessor");
    if (lane.left_neighbor) {
      check_ref(*lane.left_neighbor, "left neighbor");
      const Lane& left = g.lane(*lane.left_neighbor);
      if (!left.right_neighbor || *left.right_neighbor != id)
        throw ValidationError("neighbor links between '" + id + "' and '" +
                              *lane.left_neighbor + "' are not mutual");
    }
    if (lane.right_neighbor) {
      check_ref(*lane.right_neighbor, "right neighbor");
      const Lane& right = g.lane(*lane.right_neighbor);
      if (!right.left_neighbor || *right.left_neighbor != id)
        throw ValidationError("neighbor links between '" + id + "' and '" +
                              *lane.right_neighbor + "' are not mutual");
    }
  }
}

LaneGraph translated(const LaneGraph& g, const Vec2& offset) {
  LaneGraph out = g;
  for (auto& [id, lane] : out.lanes)
    for (auto& p : lane.centerline) p += offset;
  for (auto& [tag, shapes] : out.extras)
    for (auto& shape : shapes)
      for (auto& p : shape.points) p += offset;
  return out;
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError("unknown field '" + it.key() + "' in " + where);
}

Polyline parse_points(const json& arr, const std::string& where) {
  Polyline out;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw ParseError("bad point in " + where);
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

}  // namespace

LaneGraph lane_graph_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("lane graph parse failure: ") + e.what());
  }
  try {
    reject_unknown_keys(doc, {"lanes", "extras"}, "lane graph");
    LaneGraph g;
    for (const auto& jl : doc.at("lanes")) {
      reject_unknown_keys(
          jl, {"id", "centerline", "width", "successors", "predecessors", "left", "right", "tags"},
          "lane");
      Lane lane;
      lane.lane_id = jl.at("id").get<std::string>();
      lane.centerline = parse_points(jl.at("centerline"), "lane '" + lane.lane_id + "'");
      lane.width = jl.at("width").get<double>();
      if (jl.contains("successors"))
        lane.successors = jl.at("successors").get<std::vector<std::string>>();
      if (jl.contains("predecessors"))
        lane.predecessors = jl.at("predecessors").get<std::vector<std::string>>();
      if (jl.contains("left") && !jl.at("left").is_null())
        lane.left_neighbor = jl.at("left").get<std::string>();
      if (jl.contains("right") && !jl.at("right").is_null())
        lane.right_neighbor = jl.at("right").get<std::string>();
      if (jl.contains("tags")) lane.layer_tags = jl.at("tags").get<std::vector<std::string>>();
      if (g.lanes.count(lane.lane_id))
        throw ParseError("duplicate lane id '" + lane.lane_id + "'");
      g.lanes.emplace(lane.lane_id, std::move(lane));
    }
    if (doc.contains("extras")) {
      for (auto it = doc.at("extras").begin(); it != doc.at("extras").end(); ++it) {
        std::vector<MapShape> shapes;
        for (const auto& js : it.value()) {
          reject_unknown_keys(js, {"kind", "points"}, "extra shape");
          MapShape shape;
          const auto kind = js.at("kind").get<std::string>();
          if (kind == "polygon")
            shape.kind = MapShape::Kind::Polygon;
          else if (kind == "polyline")
            shape.kind = MapShape::Kind::Polyline;
          else
            throw ParseError("unknown shape kind '" + kind + "'");
          shape.points = parse_points(js.at("points"), "extras/" + it.key());
          shapes.push_back(std::move(shape));
        }
        g.extras.emplace(it.key(), std::move(shapes));
      }
    }
    validate_lane_graph(g);
    return g;
  } catch (const json::exception& e) {
    throw ParseError(std::string("lane graph parse failure: ") + e.what());
  }
}

std::string lane_graph_to_json_text(const LaneGraph& g) {
  json doc;
  doc["lanes"] = json::array();
  for (const auto& [id, lane] : g.lanes) {
    json jl;
    jl["id"] = id;
    jl["centerline"] = json::array();
    for (const auto& p : lane.centerline) jl["centerline"].push_back({p.x, p.y});
    jl["width"] = lane.width;
    jl["successors"] = lane.successors;
    jl["predecessors"] = lane.predecessors;
    jl["left"] = lane.left_neighbor ? json(*lane.left_neighbor) : json(nullptr);
    jl["right"] = lane.right_neighbor ? json(*lane.right_neighbor) : json(nullptr);
    jl["tags"] = lane.layer_tags;
    doc["lanes"].push_back(jl);
  }
  doc["extras"] = json::object();
  for (const auto& [tag, shapes] : g.extras) {
    json arr = json::array();
    for (const auto& shape : shapes) {
      json js;
      js["kind"] = shape.kind == MapShape::Kind::Polygon ? "polygon" : "polyline";
      js["points"] = json::array();
      for (const auto& p : shape.points) js["points"].push_back({p.x, p.y});
      arr.push_back(js);
    }
    doc["extras"][tag] = arr;
  }
  return doc.dump(2) + "\n";
}

LaneGraph load_lane_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lane graph file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return lane_graph_from_json_text(buf.str());
}

void save_lane_graph(const LaneGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write lane graph file '" + path + "'");
  out << lane_graph_to_json_text(g);
  if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

std::vector<MapNode> discretize_map(const LaneGraph& g, const Vec2& center, double step) {
  if (g.lanes.empty()) throw ValidationError("discretize_map on empty lane graph");
  if (!(step > 0.0)) throw ValidationError("map node step must be positive");
  std::vector<MapNode> nodes;
  const double half = kMapGatherSide / 2.0;
  for (const auto& [id, lane] : g.lanes) {
    const double len = lane.length();
    std::vector<double> arcs;
    for (double s = 0.0; s < len; s += step) arcs.push_back(s);
    arcs.push_back(len);
    for (double s : arcs) {
      const Vec2 p = point_at_arc(lane.centerline, s);
      if (std::abs(p.x - center.x) > half || std::abs(p.y - center.y) > half) continue;
      MapNode node;
      node.node_id = static_cast<int>(nodes.size());
      node.lane_id = id;
      node.position = p;
      node.direction = tangent_at_arc(lane.centerline, s);
      node.arc_pos = s;
      nodes.push_back(node);
    }
  }
  return nodes;
}

std::vector<Projection> project_agent(const LaneGraph& g, const Vec2& position, double heading,
                                      double radius, double heading_tol,
                                      const std::string& agent_id) {
  if (!(radius > 0.0)) throw ValidationError("projection radius must be positive");
  std::vector<Projection> out;
  int identity = 0;
  for (const auto& [id, lane] : g.lanes) {
    const auto proj = project_point(lane.centerline, position);
    if (proj.distance > radius) continue;
    const Vec2 tangent = tangent_at_arc(lane.centerline, proj.arc_pos);
    if (angle_diff(tangent.heading(), heading) > heading_tol) continue;
    Projection p;
    p.agent_id = agent_id;
    p.lane_id = id;
    p.arc_pos = proj.arc_pos;
    p.lateral_offset = proj.signed_offset;
    p.identity_id = identity++;
    out.push_back(p);
  }
  return out;
}

double heading_along_anchor(const AnchorPath& anchor, const Vec2& query) {
  if (anchor.polyline.size() < 2)
    throw ValidationError("heading_along_anchor on degenerate anchor");
  const auto proj = project_point(anchor.polyline, query);
  const Vec2& a = anchor.polyline[proj.segment_index];
  const Vec2& b = anchor.polyline[proj.segment_index + 1];
  return (b - a).heading();
}

bool is_on_drivable(const LaneGraph& g, const Vec2& point) {
  for (const auto& [id, lane] : g.lanes) {
    if (distance_to_polyline(lane.centerline, point) <= lane.width / 2.0) return true;
  }
  return false;
}

}  // namespace trajcast
