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

#include "trajcast/autoencoder.hpp"
#include "trajcast/generator.hpp"
#include "trajcast/model.hpp"
#include "trajcast/train.hpp"

namespace trajcast {

/// One document configuring every batch command; unknown keys are rejected.
/// `--set section.key=value` overrides individual entries.
struct RunConfig {
  ModelConfig model;
  PipelineConfig pipeline;
  GeneratorSpec generator;
  TrainConfig train;
  AutoencoderTrainConfig autoencoder;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

RunConfig run_config_from_json_text(const std::string& text,
                                    const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides = {});
std::string run_config_to_json_text(const RunConfig& config);

}  // namespace trajcast
