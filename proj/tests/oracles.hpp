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

// Brute-force reference implementations for oracle-equivalence tests. These
// deliberately re-derive results with the dumbest possible method and stay
// independent of the library's algorithmic paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "trajcast/lane_graph.hpp"
#include "trajcast/metrics.hpp"
#include "trajcast/ssg.hpp"

namespace trajcast::testing {

// ---------------------------------------------------------------------------
// anchor path enumeration by plain recursion over the same transition rules

struct OracleAnchorState {
  std::vector<std::string> lanes;
  double remaining = 0.0;
  double entry_arc = 0.0;
  bool lateral_allowed = true;
};

inline void oracle_anchor_recurse(const LaneGraph& g, const OracleAnchorState& state,
                                  std::set<std::vector<std::string>>& out) {
  const Lane& lane = g.lane(state.lanes.back());
  const double lane_len = polyline_length(lane.centerline);
  const double to_end = lane_len - state.entry_arc;

  bool extended = false;
  if (state.remaining - to_end > 1e-9) {
    for (const auto& succ : lane.successors) {
      OracleAnchorState next = state;
      next.lanes.push_back(succ);
      next.remaining -= to_end;
      next.entry_arc = 0.0;
      next.lateral_allowed = true;
      oracle_anchor_recurse(g, next, out);
      extended = true;
    }
  }
  if (state.lateral_allowed) {
    for (const auto& neighbor : {lane.left_neighbor, lane.right_neighbor}) {
      if (!neighbor) continue;
      const Lane& n = g.lane(*neighbor);
      const double n_len = polyline_length(n.centerline);
      const double matched = lane_len > 0.0 ? state.entry_arc / lane_len * n_len : 0.0;
      if (n_len - matched < 5.0) continue;
      const double hop =
          (point_at_arc(n.centerline, matched) - point_at_arc(lane.centerline, state.entry_arc))
              .norm();
      if (state.remaining - hop <= 1e-9) continue;
      OracleAnchorState next = state;
      next.lanes.push_back(*neighbor);
      next.remaining -= hop;
      next.entry_arc = matched;
      next.lateral_allowed = false;
      oracle_anchor_recurse(g, next, out);
      extended = true;
    }
  }
  if (!extended || state.remaining - to_end <= 1e-9) out.insert(state.lanes);
}

inline std::set<std::vector<std::string>> oracle_anchor_sequences(const LaneGraph& g,
                                                                  const Projection& proj,
                                                                  double max_len = 100.0) {
  std::set<std::vector<std::string>> out;
  OracleAnchorState state;
  state.lanes = {proj.lane_id};
  state.remaining = max_len;
  state.entry_arc = proj.arc_pos;
  oracle_anchor_recurse(g, state, out);
  return out;
}

// ---------------------------------------------------------------------------
// SSG by exhaustive route enumeration and quadratic segment intersection

inline void oracle_routes(const LaneGraph& g, const std::string& lane_id, double traveled,
                          double horizon, std::map<std::string, double>& best) {
  auto it = best.find(lane_id);
  if (it != best.end() && it->second <= traveled) return;
  best[lane_id] = traveled;
  const double through = traveled + polyline_length(g.lane(lane_id).centerline);
  if (through > horizon) return;
  for (const auto& succ : g.lane(lane_id).successors)
    oracle_routes(g, succ, through, horizon, best);
}

inline double oracle_route_distance(const LaneGraph& g, const Projection& a,
                                    const Projection& b, double horizon) {
  if (a.lane_id == b.lane_id) {
    const double d = std::abs(a.arc_pos - b.arc_pos);
    return d <= horizon ? d : std::numeric_limits<double>::infinity();
  }
  std::map<std::string, double> best;  // distance from a's point to lane start
  const double initial = polyline_length(g.lane(a.lane_id).centerline) - a.arc_pos;
  for (const auto& succ : g.lane(a.lane_id).successors)
    if (initial <= horizon) oracle_routes(g, succ, initial, horizon, best);
  auto it = best.find(b.lane_id);
  if (it == best.end()) return std::numeric_limits<double>::infinity();
  const double total = it->second + b.arc_pos;
  return total <= horizon ? total : std::numeric_limits<double>::infinity();
}

// parametric 2x2 solve, written independently of the library helper
inline bool oracle_segments_cross(const Vec2& a1, const Vec2& a2, const Vec2& b1, const Vec2& b2,
                                  double& t_out, Vec2& point) {
  const double rx = a2.x - a1.x, ry = a2.y - a1.y;
  const double sx = b2.x - b1.x, sy = b2.y - b1.y;
  const double det = rx * sy - ry * sx;
  if (std::abs(det) < 1e-12) return false;
  const double qx = b1.x - a1.x, qy = b1.y - a1.y;
  const double t = (qx * sy - qy * sx) / det;
  const double u = (qx * ry - qy * rx) / det;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  t_out = t;
  point = {a1.x + t * rx, a1.y + t * ry};
  return true;
}

inline bool oracle_crossing_arc(const Polyline& a, const Polyline& b, double& arc_at_crossing) {
  double acc = 0.0;
  for (size_t i = 1; i < a.size(); ++i) {
    for (size_t j = 1; j < b.size(); ++j) {
      double t;
      Vec2 p;
      if (oracle_segments_cross(a[i - 1], a[i], b[j - 1], b[j], t, p)) {
        arc_at_crossing = acc + t * (a[i] - a[i - 1]).norm();
        return true;
      }
    }
    acc += (a[i] - a[i - 1]).norm();
  }
  return false;
}

inline bool oracle_adjacent(const LaneGraph& g, const std::string& a, const std::string& b) {
  const Lane& lane = g.lane(a);
  return (lane.left_neighbor && *lane.left_neighbor == b) ||
         (lane.right_neighbor && *lane.right_neighbor == b);
}

inline std::vector<SsgEdge> oracle_ssg(const std::vector<Projection>& projections,
                                       const LaneGraph& g, double horizon = 100.0) {
  std::map<std::string, std::vector<Projection>> by_agent;
  for (const auto& p : projections) by_agent[p.agent_id].push_back(p);
  std::map<std::tuple<std::string, std::string, int>, double> collapsed;
  for (const auto& [src_id, srcs] : by_agent) {
    for (const auto& [dst_id, dsts] : by_agent) {
      if (src_id == dst_id) continue;
      for (const auto& ps : srcs) {
        for (const auto& pd : dsts) {
          const double fwd = oracle_route_distance(g, ps, pd, horizon);
          const double rev = oracle_route_distance(g, pd, ps, horizon);
          auto keep = [&](RelationType rel, double dist) {
            auto key = std::make_tuple(src_id, dst_id, static_cast<int>(rel));
            auto it = collapsed.find(key);
            if (it == collapsed.end() || dist < it->second) collapsed[key] = dist;
          };
          if (std::isfinite(fwd)) keep(RelationType::Longitudinal, fwd);
          if (oracle_adjacent(g, ps.lane_id, pd.lane_id))
            keep(RelationType::Lateral, std::abs(ps.arc_pos - pd.arc_pos));
          if (ps.lane_id != pd.lane_id && !std::isfinite(fwd) && !std::isfinite(rev) &&
              !oracle_adjacent(g, ps.lane_id, pd.lane_id)) {
            double arc;
            if (oracle_crossing_arc(g.lane(ps.lane_id).centerline, g.lane(pd.lane_id).centerline,
                                    arc))
              keep(RelationType::Intersecting, std::abs(arc - ps.arc_pos));
          }
        }
      }
    }
  }
  std::vector<SsgEdge> out;
  for (const auto& [key, dist] : collapsed)
    out.push_back({std::get<0>(key), std::get<1>(key),
                   static_cast<RelationType>(std::get<2>(key)), dist});
  return out;
}

inline bool same_ssg(std::vector<SsgEdge> a, std::vector<SsgEdge> b, double tol = 1e-9) {
  auto key = [](const SsgEdge& e) {
    return std::make_tuple(e.src_agent, e.dst_agent, static_cast<int>(e.relation));
  };
  auto cmp = [&](const SsgEdge& x, const SsgEdge& y) { return key(x) < key(y); };
  std::sort(a.begin(), a.end(), cmp);
  std::sort(b.begin(), b.end(), cmp);
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (key(a[i]) != key(b[i])) return false;
    if (std::abs(a[i].along_dist - b[i].along_dist) > tol) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// metric recomputation, straight from the definitions

inline double oracle_min_ade(const Prediction& pred, const std::vector<Vec2>& gt, int k) {
  std::vector<std::pair<double, int>> ranked;
  for (size_t m = 0; m < pred.scores.size(); ++m)
    ranked.push_back({-pred.scores[m], static_cast<int>(m)});
  std::stable_sort(ranked.begin(), ranked.end());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const auto& traj = pred.trajectories[ranked[i].second];
    double sum = 0.0;
    for (size_t t = 0; t < gt.size(); ++t)
      sum += std::sqrt((traj[t].x - gt[t].x) * (traj[t].x - gt[t].x) +
                       (traj[t].y - gt[t].y) * (traj[t].y - gt[t].y));
    best = std::min(best, sum / gt.size());
  }
  return best;
}

inline double oracle_min_fde(const Prediction& pred, const std::vector<Vec2>& gt, int k) {
  std::vector<std::pair<double, int>> ranked;
  for (size_t m = 0; m < pred.scores.size(); ++m)
    ranked.push_back({-pred.scores[m], static_cast<int>(m)});
  std::stable_sort(ranked.begin(), ranked.end());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const auto& traj = pred.trajectories[ranked[i].second];
    best = std::min(best, std::sqrt((traj.back().x - gt.back().x) * (traj.back().x - gt.back().x) +
                                    (traj.back().y - gt.back().y) * (traj.back().y - gt.back().y)));
  }
  return best;
}

inline bool oracle_is_miss(const Prediction& pred, const std::vector<Vec2>& gt, int k,
                           bool miss_if_any) {
  std::vector<std::pair<double, int>> ranked;
  for (size_t m = 0; m < pred.scores.size(); ++m)
    ranked.push_back({-pred.scores[m], static_cast<int>(m)});
  std::stable_sort(ranked.begin(), ranked.end());
  int misses = 0;
  for (int i = 0; i < k; ++i) {
    const auto& traj = pred.trajectories[ranked[i].second];
    double worst = 0.0;
    for (size_t t = 0; t < gt.size(); ++t)
      worst = std::max(worst, std::sqrt((traj[t].x - gt[t].x) * (traj[t].x - gt[t].x) +
                                        (traj[t].y - gt[t].y) * (traj[t].y - gt[t].y)));
    if (worst > 2.0) ++misses;
  }
  return miss_if_any ? misses > 0 : misses == k;
}

inline double oracle_offroad_rate(const std::vector<Prediction>& preds, const LaneGraph& g) {
  int total = 0, off = 0;
  for (const auto& pred : preds)
    for (const auto& traj : pred.trajectories) {
      ++total;
      bool contained = true;
      for (const auto& p : traj) {
        bool on = false;
        for (const auto& [id, lane] : g.lanes) {
          // naive point-to-polyline distance
          double dmin = std::numeric_limits<double>::infinity();
          for (size_t i = 1; i < lane.centerline.size(); ++i) {
            const Vec2 a = lane.centerline[i - 1], b = lane.centerline[i];
            const double len2 = (b - a).squared_norm();
            double t = len2 > 0.0 ? ((p - a).dot(b - a)) / len2 : 0.0;
            t = std::clamp(t, 0.0, 1.0);
            dmin = std::min(dmin, (p - (a + (b - a) * t)).norm());
          }
          if (dmin <= lane.width / 2.0) {
            on = true;
            break;
          }
        }
        if (!on) {
          contained = false;
          break;
        }
      }
      if (!contained) ++off;
    }
  return total == 0 ? 0.0 : static_cast<double>(off) / total;
}

}  // namespace trajcast::testing
