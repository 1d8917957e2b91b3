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

#include <filesystem>

#include "doctest.h"
#include "fixtures.hpp"
#include "trajcast/autoencoder.hpp"
#include "trajcast/errors.hpp"
#include "trajcast/raster.hpp"

using namespace trajcast;
using namespace trajcast::testing;
using ad::Tensor;

namespace {

AutoencoderConfig tiny_config() {
  AutoencoderConfig config;
  config.in_channels = 2;
  config.input_size = 8;
  config.encoder_channels = {4, 6};
  return config;
}

}  // namespace

TEST_CASE("default geometry: 10x128x128 in, latent 128, mirrored reconstruction") {
  MapAutoencoder model({}, 1);
  CHECK(model.config().latent_dim() == 128);
  const RasterPatch patch = rasterize(straight_graph(), {{10.0, 0.0}, 0.0});
  const Tensor batch = MapAutoencoder::patches_to_tensor({patch});
  auto [latent, recon] = model.reconstruct_values(batch);
  CHECK(latent.shape() == std::vector<int>{1, 128});
  CHECK(recon.shape() == std::vector<int>{1, 10, 128, 128});
  for (std::int64_t i = 0; i < batch.size(); ++i)
    CHECK((batch[i] == 1.0 || batch[i] == -1.0));
}

TEST_CASE("bad input channel count is rejected") {
  MapAutoencoder model(tiny_config(), 1);
  CHECK_THROWS_AS(train_autoencoder(model, Tensor({2, 3, 8, 8}), {}), ValidationError);
  CHECK_THROWS_AS(train_autoencoder(model, Tensor({0, 2, 8, 8}), {}), ValidationError);
}

TEST_CASE("config must match the kernel/halving geometry") {
  AutoencoderConfig bad = tiny_config();
  bad.input_size = 12;
  CHECK_THROWS_AS(MapAutoencoder(bad, 0), ValidationError);
}

TEST_CASE("training on constant zero patches drives MSE below 0.05") {
  MapAutoencoder model(tiny_config(), 3);
  Tensor zeros = Tensor::full({6, 2, 8, 8}, -1.0);  // empty masks map to -1
  AutoencoderTrainConfig tc;
  tc.epochs = 400;
  tc.lr = 1e-2;
  tc.batch_size = 6;
  const auto curve = train_autoencoder(model, zeros, tc);
  CHECK(autoencoder_mse(model, zeros) < 0.05);
  // decreasing trend on the fixed set
  CHECK(curve.back() < curve.front());
}

TEST_CASE("checkpoint round-trip reproduces the encoder output") {
  MapAutoencoder model(tiny_config(), 5);
  Tensor batch({2, 2, 8, 8});
  for (std::int64_t i = 0; i < batch.size(); ++i) batch[i] = (i % 3 == 0) ? 1.0 : -1.0;
  // one training step so batchnorm buffers are non-trivial
  AutoencoderTrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 2;
  train_autoencoder(model, batch, tc);
  const Tensor before = model.encode_values(batch);

  const std::string path = "/tmp/trajcast_ae_test.ckpt";
  model.save(path);
  MapAutoencoder loaded(tiny_config(), 99);
  loaded.load(path);
  const Tensor after = loaded.encode_values(batch);
  REQUIRE(before.shape() == after.shape());
  for (std::int64_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
  std::filesystem::remove(path);
}
