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

#include "trajcast/scene.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trajcast/errors.hpp"

namespace trajcast {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ParseError("unknown field '" + it.key() + "' in " + where);
    }
  }
}

json require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError("missing field '" + key + "' in " + where);
  return obj.at(key);
}

}  // namespace

std::string to_string(AgentType type) {
  return type == AgentType::RoadBound ? "rb" : "nrb";
}

AgentType agent_type_from_string(const std::string& s) {
  if (s == "rb") return AgentType::RoadBound;
  if (s == "nrb") return AgentType::NonRoadBound;
  throw ParseError("unknown agent_type '" + s + "'");
}

std::vector<AgentState> AgentTrack::observed() const {
  std::vector<AgentState> out;
  for (const auto& s : states)
    if (s.t <= 0) out.push_back(s);
  return out;
}

std::vector<AgentState> AgentTrack::future() const {
  std::vector<AgentState> out;
  for (const auto& s : states)
    if (s.t > 0) out.push_back(s);
  return out;
}

const AgentState& AgentTrack::current() const {
  for (const auto& s : states)
    if (s.t == 0) return s;
  throw ValidationError("track '" + agent_id + "' has no state at t=0");
}

bool AgentTrack::has_state(int t) const {
  for (const auto& s : states)
    if (s.t == t) return true;
  return false;
}

void validate_scene(const Scene& scene) {
  for (const auto& track : scene.tracks) {
    if (track.states.empty())
      throw ValidationError("track '" + track.agent_id + "' has no states");
    int prev_t = track.states.front().t - 1;
    bool has_current = false;
    int observed_count = 0;
    for (const auto& s : track.states) {
      if (s.t <= prev_t)
        throw ValidationError("track '" + track.agent_id + "' has non-monotone timesteps");
      prev_t = s.t;
      if (s.t == 0) has_current = true;
      if (s.t <= 0) ++observed_count;
      if (!(s.yaw > -M_PI && s.yaw <= M_PI) || !std::isfinite(s.yaw))
        throw ValidationError("track '" + track.agent_id + "' has yaw outside (-pi, pi]");
      if (!std::isfinite(s.position.x) || !std::isfinite(s.position.y) ||
          !std::isfinite(s.velocity.x) || !std::isfinite(s.velocity.y))
        throw ValidationError("track '" + track.agent_id + "' has non-finite state");
      if (s.t < -(kHistorySteps - 1))
        throw ValidationError("track '" + track.agent_id + "' history exceeds " +
                              std::to_string(kHistorySteps) + " steps");
      if (s.t > kFutureSteps)
        throw ValidationError("track '" + track.agent_id + "' future exceeds " +
                              std::to_string(kFutureSteps) + " steps");
    }
    if (!has_current)
      throw ValidationError("track '" + track.agent_id + "' missing state at t=0");
    (void)observed_count;
  }
}

Scene scene_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene parse failure: ") + e.what());
  }
  try {
    reject_unknown_keys(doc, {"scene_id", "lane_graph", "origin", "tracks"}, "scene");
    Scene scene;
    scene.scene_id = require(doc, "scene_id", "scene").get<std::string>();
    scene.lane_graph_ref = require(doc, "lane_graph", "scene").get<std::string>();
    const auto origin = require(doc, "origin", "scene");
    if (!origin.is_array() || origin.size() != 2) throw ParseError("origin must be [x, y]");
    scene.origin = {origin[0].get<double>(), origin[1].get<double>()};
    for (const auto& jt : require(doc, "tracks", "scene")) {
      reject_unknown_keys(jt, {"agent_id", "agent_type", "is_target", "states"}, "track");
      AgentTrack track;
      track.agent_id = require(jt, "agent_id", "track").get<std::string>();
      track.agent_type = agent_type_from_string(require(jt, "agent_type", "track").get<std::string>());
      track.is_target = require(jt, "is_target", "track").get<bool>();
      for (const auto& js : require(jt, "states", "track")) {
        reject_unknown_keys(js, {"t", "x", "y", "vx", "vy", "yaw"}, "state");
        AgentState s;
        s.t = require(js, "t", "state").get<int>();
        s.position = {require(js, "x", "state").get<double>(),
                      require(js, "y", "state").get<double>()};
        s.velocity = {require(js, "vx", "state").get<double>(),
                      require(js, "vy", "state").get<double>()};
        s.yaw = require(js, "yaw", "state").get<double>();
        track.states.push_back(s);
      }
      scene.tracks.push_back(std::move(track));
    }
    validate_scene(scene);
    recenter_scene(scene);
    return scene;
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene parse failure: ") + e.what());
  }
}

void recenter_scene(Scene& scene) {
  Vec2 mean;
  int n = 0;
  for (const auto& track : scene.tracks)
    for (const auto& s : track.states)
      if (s.t <= 0) {
        mean += s.position;
        ++n;
      }
  if (n == 0) return;
  mean = mean / static_cast<double>(n);
  // Files written by this library are already centered; leave them untouched
  // so round-trips stay bit-exact.
  if (mean.norm() <= 1e-9) return;
  for (auto& track : scene.tracks)
    for (auto& s : track.states) s.position = s.position - mean;
  scene.origin += mean;
}

std::string scene_to_json_text(const Scene& scene) {
  json doc;
  doc["scene_id"] = scene.scene_id;
  doc["lane_graph"] = scene.lane_graph_ref;
  doc["origin"] = {scene.origin.x, scene.origin.y};
  doc["tracks"] = json::array();
  for (const auto& track : scene.tracks) {
    json jt;
    jt["agent_id"] = track.agent_id;
    jt["agent_type"] = to_string(track.agent_type);
    jt["is_target"] = track.is_target;
    jt["states"] = json::array();
    for (const auto& s : track.states) {
      json js;
      js["t"] = s.t;
      js["x"] = s.position.x;
      js["y"] = s.position.y;
      js["vx"] = s.velocity.x;
      js["vy"] = s.velocity.y;
      js["yaw"] = s.yaw;
      jt["states"].push_back(js);
    }
    doc["tracks"].push_back(jt);
  }
  return doc.dump(2) + "\n";
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return scene_from_json_text(buf.str());
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file '" + path + "'");
  out << scene_to_json_text(scene);
  if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

}  // namespace trajcast
