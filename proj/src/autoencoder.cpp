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

#include "trajcast/autoencoder.hpp"

#include <algorithm>

#include "trajcast/checkpoint.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/optim.hpp"

namespace trajcast {

using ad::Tensor;
using ad::Var;

void AutoencoderConfig::validate() const {
  if (encoder_channels.empty()) throw ValidationError("autoencoder needs at least one layer");
  int expected = kernel;
  for (size_t i = 1; i < encoder_channels.size(); ++i) expected *= 2;
  if (input_size != expected)
    throw ValidationError("autoencoder input size must be kernel * 2^(layers-1); got " +
                          std::to_string(input_size) + " for " +
                          std::to_string(encoder_channels.size()) + " layers");
}

MapAutoencoder::MapAutoencoder(AutoencoderConfig config, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  store_.init_seed = seed;
}

namespace {

Var bn_layer(GraphContext& ctx, ParamStore& store, Var x, const std::string& name,
             int channels, bool train) {
  Var gamma = ctx.param(name + ".gamma", {channels});
  Var beta = ctx.param(name + ".beta", {channels});
  ad::BatchNormState state;
  state.running_mean = store.buffer(name + ".running_mean", {channels}, 0.0);
  state.running_var = store.buffer(name + ".running_var", {channels}, 1.0);
  Var y = ad::batchnorm2d(x, gamma, beta, state, train);
  if (train) {
    store.buffers[name + ".running_mean"] = state.running_mean;
    store.buffers[name + ".running_var"] = state.running_var;
  }
  return y;
}

}  // namespace

Var MapAutoencoder::encode(GraphContext& ctx, ad::Var x, bool train) {
  const int layers = static_cast<int>(config_.encoder_channels.size());
  int spatial = config_.input_size;
  int channels = config_.in_channels;
  Var h = x;
  for (int i = 0; i < layers; ++i) {
    const int out_ch = config_.encoder_channels[i];
    const int pad = spatial > config_.kernel ? 1 : 0;
    const std::string name = "enc" + std::to_string(i);
    Var w = ctx.param(name + ".weight", {out_ch, channels, config_.kernel, config_.kernel});
    Var b = ctx.param(name + ".bias", {out_ch});
    h = ad::conv2d(h, w, b, 2, pad);
    h = bn_layer(ctx, store_, h, name + ".bn", out_ch, train);
    h = ad::leaky_relu(h, 0.01);
    spatial = pad == 1 ? spatial / 2 : 1;
    channels = out_ch;
  }
  const int n = h.value().dim(0);
  return ad::reshape(h, {n, config_.latent_dim()});
}

std::pair<Var, Var> MapAutoencoder::forward(GraphContext& ctx, ad::Var x, bool train) {
  Var latent = encode(ctx, x, train);
  const int layers = static_cast<int>(config_.encoder_channels.size());
  const int n = latent.value().dim(0);

  Var h = ad::reshape(latent, {n, config_.latent_dim(), 1, 1});
  int spatial = 1;
  int channels = config_.latent_dim();
  for (int i = 0; i < layers; ++i) {
    const bool last = i == layers - 1;
    const int out_ch =
        last ? config_.in_channels : config_.encoder_channels[layers - 2 - i];
    const int pad = spatial == 1 ? 0 : 1;
    const std::string name = "dec" + std::to_string(i);
    Var w = ctx.param(name + ".weight", {channels, out_ch, config_.kernel, config_.kernel});
    Var b = ctx.param(name + ".bias", {out_ch});
    h = ad::deconv2d(h, w, b, 2, pad);
    if (!last) {
      h = bn_layer(ctx, store_, h, name + ".bn", out_ch, train);
      h = ad::relu(h);
    } else {
      h = ad::tanh_op(h);
    }
    spatial = pad == 0 ? config_.kernel : spatial * 2;
    channels = out_ch;
  }
  return {latent, h};
}

ad::Tensor MapAutoencoder::encode_values(const ad::Tensor& batch) {
  ad::Tape tape;
  GraphContext ctx(tape, store_);
  Var z = encode(ctx, ctx.constant(batch), false);
  return z.value();
}

std::pair<ad::Tensor, ad::Tensor> MapAutoencoder::reconstruct_values(const ad::Tensor& batch) {
  ad::Tape tape;
  GraphContext ctx(tape, store_);
  auto [z, recon] = forward(ctx, ctx.constant(batch), false);
  return {z.value(), recon.value()};
}

ad::Tensor MapAutoencoder::patches_to_tensor(const std::vector<RasterPatch>& patches) {
  if (patches.empty()) return Tensor({0, kRasterChannels, kRasterSize, kRasterSize});
  Tensor out({static_cast<int>(patches.size()), kRasterChannels, kRasterSize, kRasterSize});
  std::int64_t i = 0;
  for (const auto& patch : patches)
    for (std::uint8_t v : patch.data) out[i++] = v ? 1.0 : -1.0;
  return out;
}

void MapAutoencoder::save(const std::string& path) const {
  save_checkpoint(store_.snapshot(), path);
}

void MapAutoencoder::load(const std::string& path) { store_.restore(load_checkpoint(path)); }

std::vector<double> train_autoencoder(MapAutoencoder& model, const ad::Tensor& patches,
                                      const AutoencoderTrainConfig& config,
                                      const std::function<void(int, double)>& on_epoch) {
  if (patches.ndim() != 4 || patches.dim(1) != model.config().in_channels)
    throw ValidationError("autoencoder training batch has wrong channel count");
  const int n = patches.dim(0);
  if (n == 0) throw ValidationError("autoencoder training on empty batch");
  const std::int64_t sample = patches.size() / n;

  ad::AdamOptimizer opt({config.lr, 0.9, 0.999, 1e-8, 0.0});
  std::vector<double> curve;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int batches = 0;
    for (int start = 0; start < n; start += config.batch_size) {
      const int count = std::min(config.batch_size, n - start);
      Tensor batch({count, patches.dim(1), patches.dim(2), patches.dim(3)});
      std::copy(patches.data() + start * sample, patches.data() + (start + count) * sample,
                batch.data());
      ad::Tape tape;
      GraphContext ctx(tape, model.store());
      ctx.train = true;
      Var x = ctx.constant(batch);
      auto [latent, recon] = model.forward(ctx, x, true);
      (void)latent;
      Var diff = ad::sub(recon, ctx.constant(batch));
      Var loss = ad::mean_all(ad::mul(diff, diff));
      if (!loss.value().all_finite()) throw NumericError("autoencoder loss became non-finite");
      tape.backward(loss);
      opt.step(model.store().params, ctx.grads());
      epoch_loss += loss.value().item();
      ++batches;
    }
    curve.push_back(epoch_loss / batches);
    if (on_epoch) on_epoch(epoch, curve.back());
  }
  return curve;
}

double autoencoder_mse(MapAutoencoder& model, const ad::Tensor& patches) {
  auto [z, recon] = model.reconstruct_values(patches);
  (void)z;
  double acc = 0.0;
  for (std::int64_t i = 0; i < patches.size(); ++i) {
    const double d = recon[i] - patches[i];
    acc += d * d;
  }
  return acc / static_cast<double>(patches.size());
}

}  // namespace trajcast
