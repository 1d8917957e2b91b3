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

#include "trajcast/config.hpp"

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
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ParseError("unknown config key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

json set_override(json doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ParseError("override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // bare strings allowed
  }
  json* cursor = &doc;
  std::stringstream keys(path);
  std::string key;
  std::vector<std::string> parts;
  while (std::getline(keys, key, '.')) parts.push_back(key);
  if (parts.empty()) throw ParseError("empty override key");
  for (size_t i = 0; i + 1 < parts.size(); ++i) cursor = &(*cursor)[parts[i]];
  (*cursor)[parts.back()] = parsed;
  return doc;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  if (threads < 1) throw ValidationError("threads must be >= 1");
  if (train.epochs < 0 || autoencoder.epochs < 0)
    throw ValidationError("epoch counts must be non-negative");
  if (pipeline.graph.max_modes != model.num_modes)
    throw ValidationError("pipeline.graph.max_modes must equal model.num_modes");
}

RunConfig run_config_from_json_text(const std::string& text,
                                    const std::vector<std::string>& overrides) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config parse failure: ") + e.what());
  }
  for (const auto& assignment : overrides) doc = set_override(doc, assignment);

  try {
    reject_unknown_keys(
        doc, {"model", "pipeline", "generator", "train", "autoencoder", "seed", "threads"},
        "config");
    RunConfig config;
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      reject_unknown_keys(m,
                          {"hidden_dim", "num_heads", "num_modes", "dropout_map", "w1", "w2",
                           "score_margin", "smooth_l1_beta"},
                          "model");
      read(m, "hidden_dim", config.model.hidden_dim);
      read(m, "num_heads", config.model.num_heads);
      read(m, "num_modes", config.model.num_modes);
      read(m, "dropout_map", config.model.dropout_map);
      read(m, "w1", config.model.w1);
      read(m, "w2", config.model.w2);
      read(m, "score_margin", config.model.score_margin);
      read(m, "smooth_l1_beta", config.model.smooth_l1_beta);
    }
    if (doc.contains("pipeline")) {
      const json& p = doc.at("pipeline");
      reject_unknown_keys(p,
                          {"map_node_step", "projection_radius", "heading_tol", "ssg_horizon",
                           "drives_on_radius", "anchor_radius"},
                          "pipeline");
      read(p, "map_node_step", config.pipeline.map_node_step);
      read(p, "projection_radius", config.pipeline.projection_radius);
      read(p, "heading_tol", config.pipeline.heading_tol);
      read(p, "ssg_horizon", config.pipeline.ssg_horizon);
      read(p, "drives_on_radius", config.pipeline.graph.drives_on_radius);
      read(p, "anchor_radius", config.pipeline.graph.anchor_radius);
    }
    if (doc.contains("generator")) {
      const json& g = doc.at("generator");
      reject_unknown_keys(g, {"template", "num_road_bound", "num_non_road_bound", "num_scenes"},
                          "generator");
      read(g, "template", config.generator.template_name);
      read(g, "num_road_bound", config.generator.num_road_bound);
      read(g, "num_non_road_bound", config.generator.num_non_road_bound);
      read(g, "num_scenes", config.generator.num_scenes);
    }
    if (doc.contains("train")) {
      const json& t = doc.at("train");
      reject_unknown_keys(t,
                          {"epochs", "batch_size", "lr", "weight_decay", "lr_decay_every",
                           "lr_decay_factor", "checkpoint_every"},
                          "train");
      read(t, "epochs", config.train.epochs);
      read(t, "batch_size", config.train.batch_size);
      read(t, "lr", config.train.lr);
      read(t, "weight_decay", config.train.weight_decay);
      read(t, "lr_decay_every", config.train.lr_decay_every);
      read(t, "lr_decay_factor", config.train.lr_decay_factor);
      read(t, "checkpoint_every", config.train.checkpoint_every);
    }
    if (doc.contains("autoencoder")) {
      const json& a = doc.at("autoencoder");
      reject_unknown_keys(a, {"epochs", "lr", "batch_size"}, "autoencoder");
      read(a, "epochs", config.autoencoder.epochs);
      read(a, "lr", config.autoencoder.lr);
      read(a, "batch_size", config.autoencoder.batch_size);
    }
    read(doc, "seed", config.seed);
    read(doc, "threads", config.threads);
    config.train.seed = config.seed;
    config.autoencoder.seed = config.seed;
    config.pipeline.graph.max_modes = config.model.num_modes;
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config parse failure: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return run_config_from_json_text("", overrides);
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return run_config_from_json_text(buf.str(), overrides);
}

std::string run_config_to_json_text(const RunConfig& config) {
  json doc;
  doc["model"] = {{"hidden_dim", config.model.hidden_dim},
                  {"num_heads", config.model.num_heads},
                  {"num_modes", config.model.num_modes},
                  {"dropout_map", config.model.dropout_map},
                  {"w1", config.model.w1},
                  {"w2", config.model.w2},
                  {"score_margin", config.model.score_margin},
                  {"smooth_l1_beta", config.model.smooth_l1_beta}};
  doc["pipeline"] = {{"map_node_step", config.pipeline.map_node_step},
                     {"projection_radius", config.pipeline.projection_radius},
                     {"heading_tol", config.pipeline.heading_tol},
                     {"ssg_horizon", config.pipeline.ssg_horizon},
                     {"drives_on_radius", config.pipeline.graph.drives_on_radius},
                     {"anchor_radius", config.pipeline.graph.anchor_radius}};
  doc["generator"] = {{"template", config.generator.template_name},
                      {"num_road_bound", config.generator.num_road_bound},
                      {"num_non_road_bound", config.generator.num_non_road_bound},
                      {"num_scenes", config.generator.num_scenes}};
  doc["train"] = {{"epochs", config.train.epochs},
                  {"batch_size", config.train.batch_size},
                  {"lr", config.train.lr},
                  {"weight_decay", config.train.weight_decay},
                  {"lr_decay_every", config.train.lr_decay_every},
                  {"lr_decay_factor", config.train.lr_decay_factor},
                  {"checkpoint_every", config.train.checkpoint_every}};
  doc["autoencoder"] = {{"epochs", config.autoencoder.epochs},
                        {"lr", config.autoencoder.lr},
                        {"batch_size", config.autoencoder.batch_size}};
  doc["seed"] = config.seed;
  doc["threads"] = config.threads;
  return doc.dump(2) + "\n";
}

}  // namespace trajcast
