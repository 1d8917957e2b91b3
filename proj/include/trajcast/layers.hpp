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
#include <vector>

#include "trajcast/tensor.hpp"

namespace trajcast {

/// Named parameters plus non-trainable buffers (batch-norm running stats).
/// Initialization is seeded per parameter name, so values are independent of
/// creation order.
struct ParamStore {
  std::map<std::string, ad::Tensor> params;
  std::map<std::string, ad::Tensor> buffers;
  std::uint64_t init_seed = 0;

  ad::Tensor& fetch(const std::string& name, const std::vector<int>& shape);
  ad::Tensor& buffer(const std::string& name, const std::vector<int>& shape, double fill);

  std::map<std::string, ad::Tensor> snapshot() const;          // params + buffers
  void restore(const std::map<std::string, ad::Tensor>& snap); // by name
};

/// One forward pass: binds store parameters onto a tape so their gradients can
/// be collected by name after backward.
struct GraphContext {
  ad::Tape& tape;
  ParamStore& store;
  bool train = false;
  std::mt19937_64 rng{0};
  std::map<std::string, ad::Var> bound;
  std::map<std::string, ad::Var> overrides;  // test hook: substitute a parameter

  GraphContext(ad::Tape& t, ParamStore& s) : tape(t), store(s) {}

  ad::Var param(const std::string& name, const std::vector<int>& shape);
  ad::Var constant(ad::Tensor t) { return tape.input(std::move(t)); }

  /// Gradients of every bound parameter (zero-filled when untouched).
  std::map<std::string, ad::Tensor> grads() const;
};

ad::Var linear(GraphContext& ctx, ad::Var x, const std::string& prefix, int in, int out);
ad::Var mlp2(GraphContext& ctx, ad::Var x, const std::string& prefix, int in, int hidden,
             int out);

/// Edges of one type feeding a message-passing round. Row indices address the
/// source/destination state matrices; `feats` is (E x feat_dim).
struct EdgeBatchRef {
  std::string param_prefix;
  ad::Var src_states;
  std::vector<int> src_rows;
  std::vector<int> dst_rows;
  ad::Tensor feats;
};

/// Edge-enhanced graph convolution: per-type message MLP on
/// concat(source state, edge features), mean aggregation over all incoming
/// messages, residual update; nodes without incoming edges are unchanged.
ad::Var egcn_round(GraphContext& ctx, ad::Var dst_states,
                   const std::vector<EdgeBatchRef>& batches, const std::string& prefix,
                   int hidden);

/// Multi-head graph attention (GATv2 scoring): per head,
/// score = a^T LeakyReLU(W concat(dst, src, feat)), softmax over incoming
/// edges, heads concatenated. With `residual` the result is added onto
/// dst_states; otherwise the raw attention read-out is returned.
ad::Var gatv2_round(GraphContext& ctx, ad::Var dst_states,
                    const std::vector<EdgeBatchRef>& batches, const std::string& prefix,
                    int hidden, int heads, bool residual);

/// Sinusoidal position encoding rows for the given relative timestep indices.
ad::Tensor time_encoding(const std::vector<int>& relative_steps, int hidden);

}  // namespace trajcast
