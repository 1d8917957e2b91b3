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

#include "trajcast/lane_graph.hpp"
#include "trajcast/scene.hpp"

namespace trajcast {

enum class RelationType { Longitudinal, Lateral, Intersecting };

std::string to_string(RelationType r);

// Typed agent-to-agent relation with the distance between the agents measured
// along the lane (or to the lane crossing for the intersecting type).
struct SsgEdge {
  std::string src_agent;
  std::string dst_agent;
  RelationType relation = RelationType::Longitudinal;
  double along_dist = 0.0;
};

inline constexpr double kDefaultSsgHorizon = 100.0;

/// Relations for every ordered pair of distinct agents across all their
/// projection identities:
///  - Longitudinal: dst lane reachable from src lane over successor links
///    within `horizon` (a lane reaches itself); distance along the route.
///  - Lateral: lanes are mutual left/right neighbors; |arc difference|.
///  - Intersecting: centerlines cross while neither direction is reachable
///    and the lanes are not adjacent; distance from src to the crossing.
/// Identity pairs collapse to the minimum distance per (pair, relation).
std::vector<SsgEdge> build_ssg(const std::vector<Projection>& projections, const LaneGraph& g,
                               double horizon = kDefaultSsgHorizon);

/// Current-timestep projections for every agent in the scene. `g` must be
/// expressed in the scene's local frame.
std::vector<Projection> project_scene_agents(const Scene& scene, const LaneGraph& g,
                                             double radius = kDefaultProjectionRadius,
                                             double heading_tol = kDefaultHeadingTolerance);

/// 1 - |SSG edges| / (N(N-1)) for the scene's current timestep. Takes the
/// world-frame lane graph and shifts it by the scene origin internally.
double ssg_reduction_ratio(const Scene& scene, const LaneGraph& world_lanes,
                           double horizon = kDefaultSsgHorizon,
                           double radius = kDefaultProjectionRadius,
                           double heading_tol = kDefaultHeadingTolerance);

/// One "src dst relation dist_m" line per edge, for fixture diffing.
std::string ssg_debug_dump(const std::vector<SsgEdge>& edges);

}  // namespace trajcast
