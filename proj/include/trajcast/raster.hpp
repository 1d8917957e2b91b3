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

#include <cstdint>
#include <string>
#include <vector>

#include "trajcast/lane_graph.hpp"

namespace trajcast {

inline constexpr int kRasterSize = 128;
inline constexpr double kRasterExtent = 50.0;  // meters covered per axis

struct PatchPose {
  Vec2 center;
  double heading = 0.0;  // direction of movement, rendered facing north (up)
};

/// Agent-centric local map patch: 10 binary masks of 128x128 pixels covering
/// 50 m x 50 m, rotated so the pose heading faces the top of the image.
struct RasterPatch {
  PatchPose pose;
  double resolution = kRasterExtent / kRasterSize;  // meters per pixel
  std::vector<std::uint8_t> data;                   // channel-major, row-major in-channel

  RasterPatch() : data(static_cast<size_t>(kRasterChannels) * kRasterSize * kRasterSize, 0) {}

  std::uint8_t& at(int channel, int row, int col) {
    return data[(static_cast<size_t>(channel) * kRasterSize + row) * kRasterSize + col];
  }
  std::uint8_t at(int channel, int row, int col) const {
    return data[(static_cast<size_t>(channel) * kRasterSize + row) * kRasterSize + col];
  }
};

RasterPatch rasterize(const LaneGraph& g, const PatchPose& pose);

/// Writes one portable graymap per channel plus a JSON pose sidecar, using
/// `prefix` as the common path stem.
void export_raster(const RasterPatch& patch, const std::string& prefix);

}  // namespace trajcast
