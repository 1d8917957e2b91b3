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

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/generator.hpp"
#include "trajcast/ssg.hpp"

using namespace trajcast;
using namespace trajcast::testing;

namespace {

const SsgEdge* find_edge(const std::vector<SsgEdge>& edges, const std::string& src,
                         const std::string& dst, RelationType rel) {
  for (const auto& e : edges)
    if (e.src_agent == src && e.dst_agent == dst && e.relation == rel) return &e;
  return nullptr;
}

}  // namespace

TEST_CASE("two vehicles on one lane are longitudinally related both ways") {
  const LaneGraph g = straight_graph();
  std::vector<Projection> projections = {{"A", "a", 30.0, 0.0, 0}, {"B", "a", 42.0, 0.0, 0}};
  const auto edges = build_ssg(projections, g);
  REQUIRE(edges.size() == 2);
  const auto* ab = find_edge(edges, "A", "B", RelationType::Longitudinal);
  const auto* ba = find_edge(edges, "B", "A", RelationType::Longitudinal);
  REQUIRE(ab);
  REQUIRE(ba);
  CHECK(ab->along_dist == doctest::Approx(12.0));
  CHECK(ba->along_dist == doctest::Approx(12.0));
}

TEST_CASE("longitudinal relation follows successor chains") {
  LaneGraph g;
  g.lanes.emplace("a", simple_lane("a", {{0.0, 0.0}, {50.0, 0.0}}));
  g.lanes.emplace("b", simple_lane("b", {{50.0, 0.0}, {100.0, 0.0}}));
  g.lanes.at("a").successors = {"b"};
  g.lanes.at("b").predecessors = {"a"};
  std::vector<Projection> projections = {{"A", "a", 40.0, 0.0, 0}, {"B", "b", 5.0, 0.0, 0}};
  const auto edges = build_ssg(projections, g);
  const auto* ab = find_edge(edges, "A", "B", RelationType::Longitudinal);
  REQUIRE(ab);
  CHECK(ab->along_dist == doctest::Approx(15.0));  // 10 m to lane end + 5 m
  // chain only runs forward, so B cannot reach A
  CHECK(find_edge(edges, "B", "A", RelationType::Longitudinal) == nullptr);
}

TEST_CASE("lateral relation between adjacent lanes") {
  const LaneGraph g = parallel_graph();
  std::vector<Projection> projections = {{"A", "r", 30.0, 0.0, 0}, {"B", "l", 38.0, 0.0, 0}};
  const auto edges = build_ssg(projections, g);
  const auto* ab = find_edge(edges, "A", "B", RelationType::Lateral);
  const auto* ba = find_edge(edges, "B", "A", RelationType::Lateral);
  REQUIRE(ab);
  REQUIRE(ba);
  CHECK(ab->along_dist == doctest::Approx(8.0));
  CHECK(ba->along_dist == doctest::Approx(8.0));
}

TEST_CASE("crossing lanes produce intersecting edges with distance to crossing") {
  const LaneGraph g = crossing_graph();  // crossing at arc 20 on we, arc 30 on sn
  std::vector<Projection> projections = {{"A", "we", 5.0, 0.0, 0}, {"B", "sn", 10.0, 0.0, 0}};
  const auto edges = build_ssg(projections, g);
  const auto* ab = find_edge(edges, "A", "B", RelationType::Intersecting);
  const auto* ba = find_edge(edges, "B", "A", RelationType::Intersecting);
  REQUIRE(ab);
  REQUIRE(ba);
  CHECK(ab->along_dist == doctest::Approx(15.0));
  CHECK(ba->along_dist == doctest::Approx(20.0));
}

TEST_CASE("single agent yields no edges") {
  const LaneGraph g = straight_graph();
  std::vector<Projection> projections = {{"A", "a", 30.0, 0.0, 0}};
  CHECK(build_ssg(projections, g).empty());
}

TEST_CASE("unknown lane in a projection is rejected") {
  const LaneGraph g = straight_graph();
  std::vector<Projection> projections = {{"A", "ghost", 0.0, 0.0, 0}};
  CHECK_THROWS_AS(build_ssg(projections, g), ValidationError);
}

TEST_CASE("reduction ratio of two related agents is zero") {
  const LaneGraph g = straight_graph();
  Scene scene;
  scene.scene_id = "s";
  scene.lane_graph_ref = "g";
  scene.tracks.push_back(eastbound_track("A", 10.0, 5.0));
  scene.tracks.push_back(eastbound_track("B", 25.0, 5.0));
  CHECK(ssg_reduction_ratio(scene, g) == doctest::Approx(0.0));
}

TEST_CASE("reduction ratio with an unmapped agent") {
  const LaneGraph g = crossing_graph();
  Scene scene;
  scene.scene_id = "s";
  scene.lane_graph_ref = "g";
  scene.tracks.push_back(eastbound_track("A", 2.0, 5.0));
  scene.tracks.push_back(eastbound_track("B", 14.0, 5.0));
  AgentTrack far = eastbound_track("C", 0.0, 1.0, AgentType::NonRoadBound);
  for (auto& s : far.states) s.position.y += 500.0;  // no projection
  scene.tracks.push_back(far);
  const double ratio = ssg_reduction_ratio(scene, g);
  CHECK(ratio >= 2.0 / 3.0 - 1e-12);
  // verify against the oracle count
  const auto projections = project_scene_agents(scene, g);
  const auto edges = oracle_ssg(projections, g);
  CHECK(ratio == doctest::Approx(1.0 - edges.size() / 6.0));
}

TEST_CASE("reduction ratio requires two agents") {
  const LaneGraph g = straight_graph();
  Scene scene;
  scene.scene_id = "s";
  scene.tracks.push_back(eastbound_track("A", 10.0, 5.0));
  CHECK_THROWS_AS(ssg_reduction_ratio(scene, g), ValidationError);
}

TEST_CASE("build_ssg matches the brute-force oracle on generated scenes") {
  for (const auto& name : generator_template_names()) {
    GeneratorSpec spec;
    spec.template_name = name;
    spec.num_road_bound = 3;
    spec.num_non_road_bound = 1;
    spec.num_scenes = 3;
    const LaneGraph world = lane_graph_template(name);
    for (const auto& scene : generate_synthetic_scenes(spec, 13)) {
      const LaneGraph local = translated(world, Vec2{0.0, 0.0} - scene.origin);
      const auto projections = project_scene_agents(scene, local);
      const auto mine = build_ssg(projections, local);
      const auto reference = oracle_ssg(projections, local);
      CHECK(same_ssg(mine, reference));
      const size_t n = scene.tracks.size();
      CHECK(mine.size() <= n * (n - 1));
      for (const auto& e : mine) {
        CHECK(e.along_dist >= 0.0);
        if (e.relation == RelationType::Longitudinal) CHECK(e.along_dist <= kDefaultSsgHorizon);
      }
      // lateral/intersecting existence is symmetric
      for (const auto& e : mine) {
        if (e.relation == RelationType::Longitudinal) continue;
        CHECK(find_edge(mine, e.dst_agent, e.src_agent, e.relation) != nullptr);
      }
    }
  }
}

TEST_CASE("debug dump format") {
  std::vector<SsgEdge> edges = {{"A", "B", RelationType::Lateral, 3.5}};
  CHECK(ssg_debug_dump(edges) == "A B lateral 3.5\n");
}
