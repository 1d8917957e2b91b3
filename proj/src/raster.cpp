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

#include "trajcast/raster.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "trajcast/errors.hpp"

namespace trajcast {

namespace {

constexpr double kBorderHalfWidth = 0.3;
constexpr double kPolylineHalfWidth = 0.5;

int channel_index(const std::string& tag) {
  const auto& tags = raster_channel_tags();
  for (size_t i = 0; i < tags.size(); ++i)
    if (tags[i] == tag) return static_cast<int>(i);
  return -1;
}

}  // namespace

RasterPatch rasterize(const LaneGraph& g, const PatchPose& pose) {
  if (!std::isfinite(pose.heading)) throw ValidationError("rasterize: non-finite heading");
  RasterPatch patch;
  patch.pose = pose;
  const double res = patch.resolution;
  const Vec2 forward{std::cos(pose.heading), std::sin(pose.heading)};
  const Vec2 right{std::sin(pose.heading), -std::cos(pose.heading)};

  std::vector<const Lane*> lanes;
  lanes.reserve(g.lanes.size());
  for (const auto& [id, lane] : g.lanes) lanes.push_back(&lane);

  for (int row = 0; row < kRasterSize; ++row) {
    for (int col = 0; col < kRasterSize; ++col) {
      const double u = (col + 0.5 - kRasterSize / 2.0) * res;   // right of heading
      const double v = (kRasterSize / 2.0 - row - 0.5) * res;   // along heading
      const Vec2 world = pose.center + forward * v + right * u;

      for (const Lane* lane : lanes) {
        const double d = distance_to_polyline(lane->centerline, world);
        const double half_width = lane->width / 2.0;
        if (d <= half_width) {
          patch.at(0, row, col) = 1;  // drivable
          for (const auto& tag : lane->layer_tags) {
            const int c = channel_index(tag);
            if (c >= 0) patch.at(c, row, col) = 1;
          }
        }
        if (std::abs(d - half_width) <= kBorderHalfWidth) patch.at(1, row, col) = 1;
      }

      for (const auto& [tag, shapes] : g.extras) {
        const int c = channel_index(tag);
        if (c < 0) continue;
        if (patch.at(c, row, col)) continue;
        for (const auto& shape : shapes) {
          bool hit = false;
          if (shape.kind == MapShape::Kind::Polygon) {
            hit = point_in_polygon(shape.points, world);
          } else {
            hit = distance_to_polyline(shape.points, world) <= kPolylineHalfWidth;
          }
          if (hit) {
            patch.at(c, row, col) = 1;
            break;
          }
        }
      }
    }
  }
  return patch;
}

void export_raster(const RasterPatch& patch, const std::string& prefix) {
  for (int c = 0; c < kRasterChannels; ++c) {
    const std::string path = prefix + "_" + raster_channel_tags()[c] + ".pgm";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write raster file '" + path + "'");
    out << "P5\n" << kRasterSize << " " << kRasterSize << "\n255\n";
    for (int row = 0; row < kRasterSize; ++row)
      for (int col = 0; col < kRasterSize; ++col)
        out.put(patch.at(c, row, col) ? static_cast<char>(255) : 0);
  }
  nlohmann::json pose;
  pose["center"] = {patch.pose.center.x, patch.pose.center.y};
  pose["heading"] = patch.pose.heading;
  pose["resolution"] = patch.resolution;
  std::ofstream out(prefix + "_pose.json");
  if (!out) throw std::runtime_error("cannot write raster pose sidecar");
  out << pose.dump(2) << "\n";
}

}  // namespace trajcast
