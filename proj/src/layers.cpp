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

#include "trajcast/layers.hpp"

#include <cmath>
#include <functional>

#include "trajcast/errors.hpp"

namespace trajcast {

using ad::Tensor;
using ad::Var;

namespace {

std::uint64_t name_hash(const std::string& name) {
  // FNV-1a
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Tensor init_tensor(const std::string& name, const std::vector<int>& shape,
                   std::uint64_t init_seed) {
  Tensor t(shape);
  if (ends_with(name, ".gamma")) {
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = 1.0;
    return t;
  }
  if (t.ndim() < 2) return t;  // biases and shifts start at zero
  std::int64_t fan_in = 1, fan_out = 1;
  if (t.ndim() == 2) {
    fan_in = shape[0];
    fan_out = shape[1];
  } else {
    // conv kernels: (out, in, kh, kw) or (in, out, kh, kw); both give the same
    // symmetric bound
    const std::int64_t receptive =
        ad::shape_size(std::vector<int>(shape.begin() + 2, shape.end()));
    fan_in = shape[1] * receptive;
    fan_out = shape[0] * receptive;
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::mt19937_64 rng(name_hash(name) ^ init_seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = dist(rng);
  return t;
}

}  // namespace

ad::Tensor& ParamStore::fetch(const std::string& name, const std::vector<int>& shape) {
  auto it = params.find(name);
  if (it != params.end()) {
    if (it->second.shape() != shape)
      throw ValidationError("parameter '" + name + "' shape changed");
    return it->second;
  }
  return params.emplace(name, init_tensor(name, shape, init_seed)).first->second;
}

ad::Tensor& ParamStore::buffer(const std::string& name, const std::vector<int>& shape,
                               double fill) {
  auto it = buffers.find(name);
  if (it != buffers.end()) return it->second;
  return buffers.emplace(name, Tensor::full(shape, fill)).first->second;
}

std::map<std::string, ad::Tensor> ParamStore::snapshot() const {
  std::map<std::string, ad::Tensor> out = params;
  for (const auto& [name, t] : buffers) out.emplace("buffer/" + name, t);
  return out;
}

void ParamStore::restore(const std::map<std::string, ad::Tensor>& snap) {
  for (const auto& [name, t] : snap) {
    if (name.rfind("buffer/", 0) == 0)
      buffers[name.substr(7)] = t;
    else
      params[name] = t;
  }
}

Var GraphContext::param(const std::string& name, const std::vector<int>& shape) {
  auto ov = overrides.find(name);
  if (ov != overrides.end()) return ov->second;
  auto it = bound.find(name);
  if (it != bound.end()) return it->second;
  Var v = tape.input(store.fetch(name, shape));
  bound.emplace(name, v);
  return v;
}

std::map<std::string, ad::Tensor> GraphContext::grads() const {
  std::map<std::string, ad::Tensor> out;
  for (const auto& [name, var] : bound) out.emplace(name, var.grad());
  return out;
}

Var linear(GraphContext& ctx, ad::Var x, const std::string& prefix, int in, int out) {
  Var w = ctx.param(prefix + ".weight", {in, out});
  Var b = ctx.param(prefix + ".bias", {out});
  return ad::add(ad::matmul(x, w), b);
}

Var mlp2(GraphContext& ctx, ad::Var x, const std::string& prefix, int in, int hidden, int out) {
  Var h = ad::relu(linear(ctx, x, prefix + ".l1", in, hidden));
  return linear(ctx, h, prefix + ".l2", hidden, out);
}

namespace {

// indegree > 0 indicator per destination row
Tensor indegree_mask(const std::vector<EdgeBatchRef>& batches, int num_dst) {
  Tensor mask({num_dst});
  for (const auto& b : batches)
    for (int dst : b.dst_rows) mask[dst] = 1.0;
  return mask;
}

}  // namespace

Var egcn_round(GraphContext& ctx, ad::Var dst_states, const std::vector<EdgeBatchRef>& batches,
               const std::string& prefix, int hidden) {
  const int num_dst = dst_states.value().dim(0);
  std::vector<Var> messages;
  std::vector<int> all_dsts;
  for (const auto& batch : batches) {
    if (batch.src_rows.empty()) continue;
    const int fd = batch.feats.ndim() == 2 ? batch.feats.dim(1) : 0;
    Var h_src = ad::gather_rows(batch.src_states, batch.src_rows);
    Var msg_in = fd > 0 ? ad::concat({h_src, ctx.constant(batch.feats)}, 1) : h_src;
    Var msg = ad::relu(linear(ctx, msg_in, prefix + "." + batch.param_prefix + ".msg",
                              hidden + fd, hidden));
    messages.push_back(msg);
    all_dsts.insert(all_dsts.end(), batch.dst_rows.begin(), batch.dst_rows.end());
  }
  if (messages.empty()) return dst_states;

  Var stacked = messages.size() == 1 ? messages[0] : ad::concat(messages, 0);
  Var agg = ad::scatter_mean(stacked, all_dsts, num_dst);
  Var upd_in = ad::concat({dst_states, agg}, 1);
  Var delta = ad::relu(linear(ctx, upd_in, prefix + ".update", 2 * hidden, hidden));
  Var masked = ad::row_scale(delta, ctx.constant(indegree_mask(batches, num_dst)));
  return ad::add(dst_states, masked);
}

Var gatv2_round(GraphContext& ctx, ad::Var dst_states, const std::vector<EdgeBatchRef>& batches,
                const std::string& prefix, int hidden, int heads, bool residual) {
  if (hidden % heads != 0) throw ValidationError("hidden dim not divisible by head count");
  const int att = hidden / heads;
  const int num_dst = dst_states.value().dim(0);

  std::vector<Var> scores_parts;
  std::vector<Var> values_parts;
  std::vector<int> all_dsts;
  for (const auto& batch : batches) {
    if (batch.src_rows.empty()) continue;
    const int fd = batch.feats.ndim() == 2 ? batch.feats.dim(1) : 0;
    const std::string p = prefix + "." + batch.param_prefix;
    Var h_src = ad::gather_rows(batch.src_states, batch.src_rows);
    Var h_dst = ad::gather_rows(dst_states, batch.dst_rows);
    std::vector<Var> score_in_parts = {h_dst, h_src};
    if (fd > 0) score_in_parts.push_back(ctx.constant(batch.feats));
    Var score_in = ad::concat(score_in_parts, 1);
    Var pre = ad::leaky_relu(linear(ctx, score_in, p + ".W", 2 * hidden + fd, hidden), 0.2);
    std::vector<Var> head_scores;
    for (int h = 0; h < heads; ++h) {
      Var pre_h = ad::slice(pre, 1, h * att, (h + 1) * att);
      Var a_h = ctx.param(p + ".a" + std::to_string(h), {att, 1});
      head_scores.push_back(ad::matmul(pre_h, a_h));
    }
    scores_parts.push_back(ad::concat(head_scores, 1));

    Var value_in = fd > 0 ? ad::concat({h_src, ctx.constant(batch.feats)}, 1) : h_src;
    values_parts.push_back(linear(ctx, value_in, p + ".U", hidden + fd, hidden));
    all_dsts.insert(all_dsts.end(), batch.dst_rows.begin(), batch.dst_rows.end());
  }
  if (scores_parts.empty())
    return residual ? dst_states : ctx.constant(Tensor({num_dst, hidden}));

  Var scores = scores_parts.size() == 1 ? scores_parts[0] : ad::concat(scores_parts, 0);
  Var values = values_parts.size() == 1 ? values_parts[0] : ad::concat(values_parts, 0);
  Var alpha = ad::scatter_softmax(scores, all_dsts, num_dst);

  const int num_edges = scores.value().dim(0);
  std::vector<Var> head_outputs;
  for (int h = 0; h < heads; ++h) {
    Var alpha_h = ad::reshape(ad::slice(alpha, 1, h, h + 1), {num_edges});
    Var v_h = ad::slice(values, 1, h * att, (h + 1) * att);
    head_outputs.push_back(ad::scatter_sum(ad::row_scale(v_h, alpha_h), all_dsts, num_dst));
  }
  Var out = ad::concat(head_outputs, 1);
  return residual ? ad::add(dst_states, out) : out;
}

ad::Tensor time_encoding(const std::vector<int>& relative_steps, int hidden) {
  Tensor enc({static_cast<int>(relative_steps.size()), hidden});
  for (size_t r = 0; r < relative_steps.size(); ++r) {
    const double pos = static_cast<double>(relative_steps[r]);
    for (int i = 0; i < hidden; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / hidden);
      enc[r * hidden + i] = std::sin(pos * freq);
      if (i + 1 < hidden) enc[r * hidden + i + 1] = std::cos(pos * freq);
    }
  }
  return enc;
}

}  // namespace trajcast
