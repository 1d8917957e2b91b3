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

#include <functional>
#include <utility>
#include <vector>

#include "trajcast/layers.hpp"
#include "trajcast/raster.hpp"

namespace trajcast {

/// Six conv/deconv stages squeeze the patch down to a 1x1 spatial map whose
/// channel count is the latent width. Input size must equal
/// kernel * 2^(layers-1).
struct AutoencoderConfig {
  int in_channels = kRasterChannels;
  int input_size = kRasterSize;
  std::vector<int> encoder_channels = {16, 32, 64, 128, 128, 128};
  int kernel = 4;

  int latent_dim() const { return encoder_channels.back(); }
  void validate() const;
};

class MapAutoencoder {
 public:
  explicit MapAutoencoder(AutoencoderConfig config = {}, std::uint64_t seed = 0);

  const AutoencoderConfig& config() const { return config_; }
  ParamStore& store() { return store_; }

  /// x: (N, C, H, W) in {-1, +1}. Returns (latent (N, latent), reconstruction).
  std::pair<ad::Var, ad::Var> forward(GraphContext& ctx, ad::Var x, bool train);
  ad::Var encode(GraphContext& ctx, ad::Var x, bool train);

  /// Value-level eval-mode passes.
  ad::Tensor encode_values(const ad::Tensor& batch);
  std::pair<ad::Tensor, ad::Tensor> reconstruct_values(const ad::Tensor& batch);

  /// Binary masks mapped to {-1, +1}, stacked as (N, C, H, W).
  static ad::Tensor patches_to_tensor(const std::vector<RasterPatch>& patches);

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  AutoencoderConfig config_;
  ParamStore store_;
};

struct AutoencoderTrainConfig {
  int epochs = 100;
  double lr = 2e-4;
  int batch_size = 8;
  std::uint64_t seed = 0;
};

/// Adam-trained reconstruction (mean squared error against the {-1,+1}
/// targets); returns the per-epoch training MSE curve.
std::vector<double> train_autoencoder(MapAutoencoder& model, const ad::Tensor& patches,
                                      const AutoencoderTrainConfig& config,
                                      const std::function<void(int, double)>& on_epoch = {});

/// MSE of reconstructions on a batch, eval mode.
double autoencoder_mse(MapAutoencoder& model, const ad::Tensor& patches);

}  // namespace trajcast
