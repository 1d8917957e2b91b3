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

#include "trajcast/optim.hpp"

#include <cmath>

#include "trajcast/errors.hpp"

namespace trajcast::ad {

void AdamOptimizer::step(std::map<std::string, Tensor>& params,
                         const std::map<std::string, Tensor>& grads) {
  for (const auto& [name, g] : grads) {
    if (!g.all_finite())
      throw NumericError("non-finite gradient for parameter '" + name + "'; step refused");
    if (!params.count(name)) throw ValidationError("gradient for unknown parameter '" + name + "'");
    if (!params.at(name).same_shape(g))
      throw ValidationError("gradient shape mismatch for parameter '" + name + "'");
  }

  ++step_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (const auto& [name, g] : grads) {
    Tensor& p = params.at(name);
    Tensor& m = first_moment_[name];
    Tensor& v = second_moment_[name];
    if (!m.same_shape(p)) m = Tensor(p.shape());
    if (!v.same_shape(p)) v = Tensor(p.shape());
    for (std::int64_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      p[i] -= config_.lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                            config_.weight_decay * p[i]);
    }
  }
}

}  // namespace trajcast::ad
