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

#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/generator.hpp"
#include "trajcast/lane_graph.hpp"

using namespace trajcast;
using namespace trajcast::testing;

TEST_CASE("discretize straight 20 m lane at 5 m step") {
  LaneGraph g;
  g.lanes.emplace("a", simple_lane("a", {{0.0, 0.0}, {20.0, 0.0}}));
  const auto nodes = discretize_map(g, {0.0, 0.0}, 5.0);
  REQUIRE(nodes.size() == 5);
  for (size_t i = 0; i < nodes.size(); ++i) {
    CHECK(nodes[i].arc_pos == doctest::Approx(5.0 * i));
    CHECK(nodes[i].direction.x == doctest::Approx(1.0));
    CHECK(nodes[i].direction.y == doctest::Approx(0.0));
  }
}

TEST_CASE("lanes outside the gather square produce no nodes") {
  LaneGraph g;
  g.lanes.emplace("a", simple_lane("a", {{500.0, 0.0}, {520.0, 0.0}}));
  CHECK(discretize_map(g, {0.0, 0.0}, 5.0).empty());
}

TEST_CASE("quarter-circle node directions match analytic tangents") {
  LaneGraph g;
  Polyline arc;
  const double radius = 10.0;
  for (int i = 0; i <= 1000; ++i) {
    const double a = -M_PI / 2.0 + (M_PI / 2.0) * i / 1000.0;
    arc.push_back({radius * std::cos(a), radius + radius * std::sin(a)});
  }
  g.lanes.emplace("a", simple_lane("a", arc));
  for (const auto& node : discretize_map(g, {0.0, 0.0}, 5.0)) {
    // tangent of the circle centered at (0, r): rotate radial vector by +90deg
    const Vec2 radial = (node.position - Vec2{0.0, radius}).normalized();
    const Vec2 analytic{-radial.y, radial.x};
    CHECK(angle_diff(node.direction.heading(), analytic.heading()) < 1e-3);
  }
}

TEST_CASE("discretize rejects empty graphs and bad steps") {
  LaneGraph g;
  CHECK_THROWS_AS(discretize_map(g, {0.0, 0.0}, 5.0), ValidationError);
  g.lanes.emplace("a", simple_lane("a", {{0.0, 0.0}, {1.0, 0.0}}));
  CHECK_THROWS_AS(discretize_map(g, {0.0, 0.0}, 0.0), ValidationError);
}

TEST_CASE("node count is invariant under joint translation") {
  const LaneGraph g = lane_graph_template("y_fork");
  const Vec2 offset{1234.5, -987.5};
  const auto base = discretize_map(g, {10.0, 5.0}, 5.0);
  const auto moved = discretize_map(translated(g, offset), Vec2{10.0, 5.0} + offset, 5.0);
  CHECK(base.size() == moved.size());
}

TEST_CASE("projection identities") {
  SUBCASE("agent on the centerline of a single lane") {
    const LaneGraph g = straight_graph();
    const auto projs = project_agent(g, {40.0, 0.0}, 0.0);
    REQUIRE(projs.size() == 1);
    CHECK(projs[0].lateral_offset == doctest::Approx(0.0));
    CHECK(projs[0].arc_pos == doctest::Approx(40.0));
  }
  SUBCASE("agent between two parallel lanes gets one identity per lane") {
    const LaneGraph g = parallel_graph();
    const auto projs = project_agent(g, {40.0, 1.75}, 0.0);
    CHECK(projs.size() == 2);
  }
  SUBCASE("opposing heading is gated away") {
    const LaneGraph g = straight_graph();
    CHECK(project_agent(g, {40.0, 0.0}, M_PI).empty());
  }
}

namespace {

std::set<std::vector<std::string>> sequences_of(const std::vector<AnchorPath>& paths) {
  std::set<std::vector<std::string>> out;
  for (const auto& p : paths) out.insert(p.lane_ids);
  return out;
}

void check_anchor_invariants(const LaneGraph& g, const Projection& proj,
                             const std::vector<AnchorPath>& paths) {
  const Vec2 start = point_at_arc(g.lane(proj.lane_id).centerline, proj.arc_pos);
  for (const auto& path : paths) {
    CHECK(path.length() <= kMaxAnchorLength + 1e-6);
    CHECK((path.polyline.front() - start).norm() < 1e-9);
    CHECK(path.headings.size() == path.polyline.size());
    for (size_t i = 1; i < path.lane_ids.size(); ++i) {
      const Lane& prev = g.lane(path.lane_ids[i - 1]);
      const bool successor = std::count(prev.successors.begin(), prev.successors.end(),
                                        path.lane_ids[i]) > 0;
      const bool neighbor =
          (prev.left_neighbor && *prev.left_neighbor == path.lane_ids[i]) ||
          (prev.right_neighbor && *prev.right_neighbor == path.lane_ids[i]);
      CHECK((successor || neighbor));
    }
  }
}

}  // namespace

TEST_CASE("straight lane yields one 100 m anchor") {
  const LaneGraph g = straight_graph(150.0);
  Projection proj{"a0", "a", 10.0, 0.0, 0};
  const auto paths = enumerate_anchor_paths(g, proj);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].length() == doctest::Approx(100.0));
  check_anchor_invariants(g, proj, paths);
}

TEST_CASE("fork yields two anchors sharing the stem prefix") {
  const LaneGraph g = fork_graph();
  Projection proj{"a0", "stem", 0.0, 0.0, 0};
  const auto paths = enumerate_anchor_paths(g, proj);
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].lane_ids == std::vector<std::string>{"stem", "down"});
  CHECK(paths[1].lane_ids == std::vector<std::string>{"stem", "up"});
  for (const auto& p : paths) CHECK(p.length() == doctest::Approx(100.0));
  // shared 30 m prefix
  CHECK((paths[0].polyline.front() - paths[1].polyline.front()).norm() < 1e-9);
  CHECK((point_at_arc(paths[0].polyline, 30.0) - point_at_arc(paths[1].polyline, 30.0)).norm() <
        1e-9);
  CHECK(sequences_of(paths) == oracle_anchor_sequences(g, proj));
  check_anchor_invariants(g, proj, paths);
}

TEST_CASE("parallel lanes: stay or change once") {
  const LaneGraph g = parallel_graph();
  Projection proj{"a0", "r", 20.0, 0.0, 0};
  const auto paths = enumerate_anchor_paths(g, proj);
  const auto expected = oracle_anchor_sequences(g, proj);
  CHECK(sequences_of(paths) == expected);
  CHECK(expected ==
        std::set<std::vector<std::string>>{{"r"}, {"r", "l"}});
  check_anchor_invariants(g, proj, paths);
}

TEST_CASE("anchor enumeration matches the oracle on generator templates") {
  std::mt19937_64 rng(21);
  for (const auto& name : generator_template_names()) {
    const LaneGraph g = lane_graph_template(name);
    for (const auto& [lane_id, lane] : g.lanes) {
      std::uniform_real_distribution<double> pick(0.0, lane.length());
      for (int trial = 0; trial < 5; ++trial) {
        Projection proj{"x", lane_id, pick(rng), 0.0, 0};
        const auto paths = enumerate_anchor_paths(g, proj);
        CHECK(sequences_of(paths) == oracle_anchor_sequences(g, proj));
        check_anchor_invariants(g, proj, paths);
      }
    }
  }
}

TEST_CASE("anchor overflow keeps the straightest paths") {
  const LaneGraph g = fork_graph();
  Projection proj{"a0", "stem", 0.0, 0.0, 0};
  const auto paths = enumerate_anchor_paths(g, proj, kMaxAnchorLength, 1);
  REQUIRE(paths.size() == 1);
}

TEST_CASE("anchor enumeration rejects unknown lanes") {
  const LaneGraph g = straight_graph();
  Projection proj{"a0", "ghost", 0.0, 0.0, 0};
  CHECK_THROWS_AS(enumerate_anchor_paths(g, proj), ValidationError);
}

TEST_CASE("heading_along_anchor") {
  SUBCASE("straight east anchor is 0 everywhere") {
    AnchorPath path;
    path.polyline = {{0.0, 0.0}, {50.0, 0.0}};
    path.headings = {0.0, 0.0};
    CHECK(heading_along_anchor(path, {25.0, 3.0}) == doctest::Approx(0.0));
    CHECK(heading_along_anchor(path, {-10.0, -5.0}) == doctest::Approx(0.0));
  }
  SUBCASE("tie between segments goes to the earlier one") {
    AnchorPath path;
    path.polyline = {{0.0, 0.0}, {10.0, 0.0}, {10.0, 10.0}};
    path.headings = {0.0, M_PI / 2.0, M_PI / 2.0};
    // equidistant to both segments at the corner bisector
    CHECK(heading_along_anchor(path, {9.0, 1.0}) == doctest::Approx(0.0));
  }
  SUBCASE("quarter-circle anchor heading matches the analytic tangent") {
    AnchorPath path;
    const double radius = 10.0;
    for (int i = 0; i <= 1000; ++i) {
      const double a = -M_PI / 2.0 + (M_PI / 2.0) * i / 1000.0;
      path.polyline.push_back({radius * std::cos(a), radius + radius * std::sin(a)});
    }
    path.headings.assign(path.polyline.size(), 0.0);
    const Vec2 query{radius * std::cos(-M_PI / 4.0), radius + radius * std::sin(-M_PI / 4.0)};
    CHECK(std::abs(heading_along_anchor(path, query) - M_PI / 4.0) < 1e-3);
  }
}

TEST_CASE("is_on_drivable") {
  const LaneGraph g = straight_graph(100.0, 3.5);
  CHECK(is_on_drivable(g, {50.0, 0.0}));
  CHECK(is_on_drivable(g, {50.0, 1.75}));  // corridor boundary is inside
  CHECK(!is_on_drivable(g, {50.0, 1.7501}));
  CHECK(!is_on_drivable(g, {1000.0, 1000.0}));
}

TEST_CASE("lane graph validation catches broken links") {
  LaneGraph g;
  g.lanes.emplace("a", simple_lane("a", {{0.0, 0.0}, {10.0, 0.0}}));
  g.lanes.at("a").successors = {"missing"};
  CHECK_THROWS_AS(validate_lane_graph(g), ValidationError);

  LaneGraph h;
  h.lanes.emplace("a", simple_lane("a", {{0.0, 0.0}, {10.0, 0.0}}));
  h.lanes.emplace("b", simple_lane("b", {{0.0, 3.5}, {10.0, 3.5}}));
  h.lanes.at("a").left_neighbor = "b";  // not mutual
  CHECK_THROWS_AS(validate_lane_graph(h), ValidationError);
}
