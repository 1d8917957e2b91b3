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

#include <map>
#include <string>

#include "trajcast/tensor.hpp"

namespace trajcast::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.005;  // decoupled
};

/// Adam with decoupled weight decay over a named parameter set. Parameters
/// without a matching gradient are left untouched.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(AdamConfig config = {}) : config_(config) {}

  AdamConfig& config() { return config_; }
  std::int64_t step_count() const { return step_; }

  /// Throws NumericError and refuses the whole step on non-finite gradients.
  void step(std::map<std::string, Tensor>& params,
            const std::map<std::string, Tensor>& grads);

 private:
  AdamConfig config_;
  std::map<std::string, Tensor> first_moment_;
  std::map<std::string, Tensor> second_moment_;
  std::int64_t step_ = 0;
};

}  // namespace trajcast::ad
