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

#include <algorithm>
#include <set>

#include "trajcast/errors.hpp"
#include "trajcast/lane_graph.hpp"

namespace trajcast {

namespace {

// Appends the centerline portion between two arc positions, including interior
// vertices. The portion start is skipped when it coincides with the current
// polyline end.
void append_lane_portion(Polyline& out, const Polyline& centerline, double from_arc,
                         double to_arc) {
  auto push = [&out](const Vec2& p) {
    if (out.empty() || (out.back() - p).norm() > 1e-12) out.push_back(p);
  };
  push(point_at_arc(centerline, from_arc));
  double acc = 0.0;
  for (size_t i = 1; i + 1 < centerline.size(); ++i) {
    acc += (centerline[i] - centerline[i - 1]).norm();
    if (acc > from_arc + 1e-12 && acc < to_arc - 1e-12) push(centerline[i]);
  }
  push(point_at_arc(centerline, to_arc));
}

struct Step {
  std::string lane_id;
  double entry_arc = 0.0;
  bool via_lateral = false;
};

struct Enumerator {
  const LaneGraph& g;
  double max_len;
  std::vector<std::vector<Step>> sequences;

  void dfs(std::vector<Step>& prefix, double remaining, bool lateral_allowed) {
    const Step& cur = prefix.back();
    const Lane& lane = g.lane(cur.lane_id);
    const double to_end = lane.length() - cur.entry_arc;

    bool extended = false;
    if (remaining - to_end > 1e-9) {
      std::vector<std::string> succs = lane.successors;
      std::sort(succs.begin(), succs.end());
      for (const auto& succ : succs) {
        prefix.push_back({succ, 0.0, false});
        dfs(prefix, remaining - to_end, true);
        prefix.pop_back();
        extended = true;
      }
    }
    if (lateral_allowed) {
      for (const auto& neighbor : {lane.left_neighbor, lane.right_neighbor}) {
        if (!neighbor) continue;
        const Lane& next = g.lane(*neighbor);
        const double matched_arc =
            lane.length() > 0.0 ? cur.entry_arc / lane.length() * next.length() : 0.0;
        if (next.length() - matched_arc < kMinLaneChangeOverlap) continue;
        const Vec2 from = point_at_arc(lane.centerline, cur.entry_arc);
        const Vec2 to = point_at_arc(next.centerline, matched_arc);
        const double hop = (to - from).norm();
        if (remaining - hop <= 1e-9) continue;
        prefix.push_back({*neighbor, matched_arc, true});
        dfs(prefix, remaining - hop, false);
        prefix.pop_back();
        extended = true;
      }
    }
    if (!extended || remaining - to_end <= 1e-9) sequences.push_back(prefix);
  }
};

Polyline build_polyline(const LaneGraph& g, const std::vector<Step>& seq, double max_len) {
  Polyline out;
  for (size_t i = 0; i < seq.size(); ++i) {
    const Lane& lane = g.lane(seq[i].lane_id);
    // A lateral hop leaves this lane at its entry point; a successor
    // transition traverses to the lane end.
    const bool leaves_laterally = i + 1 < seq.size() && seq[i + 1].via_lateral;
    if (leaves_laterally) {
      const Vec2 p = point_at_arc(lane.centerline, seq[i].entry_arc);
      if (out.empty() || (out.back() - p).norm() > 1e-12) out.push_back(p);
    } else {
      append_lane_portion(out, lane.centerline, seq[i].entry_arc, lane.length());
    }
  }
  return truncate_polyline(out, max_len);
}

double straightness_deviation(const AnchorPath& path) {
  if (path.polyline.size() < 2) return 0.0;
  const double initial = (path.polyline[1] - path.polyline[0]).heading();
  const Vec2 chord = path.polyline.back() - path.polyline.front();
  if (chord.norm() < 1e-9) return 0.0;
  return angle_diff(chord.heading(), initial);
}

}  // namespace

std::vector<AnchorPath> enumerate_anchor_paths(const LaneGraph& g, const Projection& proj,
                                               double max_len, int max_k) {
  if (!g.has_lane(proj.lane_id))
    throw ValidationError("projection references unknown lane '" + proj.lane_id + "'");

  Enumerator en{g, max_len, {}};
  std::vector<Step> prefix = {{proj.lane_id, proj.arc_pos, false}};
  en.dfs(prefix, max_len, true);

  // Deduplicate by lane-id sequence, keep lexicographic order.
  std::set<std::vector<std::string>> seen;
  std::vector<AnchorPath> paths;
  std::vector<std::vector<Step>> ordered = en.sequences;
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    std::vector<std::string> ia, ib;
    for (const auto& s : a) ia.push_back(s.lane_id);
    for (const auto& s : b) ib.push_back(s.lane_id);
    return ia < ib;
  });
  for (const auto& seq : ordered) {
    std::vector<std::string> ids;
    for (const auto& s : seq) ids.push_back(s.lane_id);
    if (!seen.insert(ids).second) continue;
    AnchorPath path;
    path.lane_ids = ids;
    path.polyline = build_polyline(g, seq, max_len);
    if (path.polyline.size() < 2) continue;
    path.headings.resize(path.polyline.size());
    for (size_t i = 0; i + 1 < path.polyline.size(); ++i)
      path.headings[i] = (path.polyline[i + 1] - path.polyline[i]).heading();
    path.headings.back() = path.headings[path.headings.size() - 2];
    paths.push_back(std::move(path));
  }

  if (static_cast<int>(paths.size()) > max_k) {
    std::stable_sort(paths.begin(), paths.end(), [](const AnchorPath& a, const AnchorPath& b) {
      return straightness_deviation(a) < straightness_deviation(b);
    });
    paths.resize(max_k);
    std::sort(paths.begin(), paths.end(),
              [](const AnchorPath& a, const AnchorPath& b) { return a.lane_ids < b.lane_ids; });
  }
  for (size_t i = 0; i < paths.size(); ++i) paths[i].anchor_id = static_cast<int>(i);
  return paths;
}

}  // namespace trajcast
