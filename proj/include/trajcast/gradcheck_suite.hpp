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

namespace trajcast {

struct GradCheckResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Central finite-difference checks for every differentiable op, the message
/// passing layers, a small autoencoder, the decoder heads and the end-to-end
/// micro-scene loss.
std::vector<GradCheckResult> run_gradient_suite(std::uint64_t seed = 0);

bool all_passed(const std::vector<GradCheckResult>& results);

}  // namespace trajcast
