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

#include <cmath>
#include <optional>
#include <vector>

namespace trajcast {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  Vec2 normalized() const {
    const double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
  double heading() const { return std::atan2(y, x); }
};

using Polyline = std::vector<Vec2>;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

/// Absolute difference between two angles after wrapping, in [0, pi].
double angle_diff(double a, double b);

double polyline_length(const Polyline& line);

/// Point at arc-length position `s` along the polyline (clamped to [0, length]).
Vec2 point_at_arc(const Polyline& line, double s);

/// Unit tangent of the segment containing arc position `s`; the last segment's
/// tangent is used at and beyond the end.
Vec2 tangent_at_arc(const Polyline& line, double s);

struct PolylineProjection {
  double arc_pos = 0.0;         // arc length of the foot point
  double distance = 0.0;        // unsigned distance to the foot point
  double signed_offset = 0.0;   // positive when left of travel direction
  int segment_index = 0;
  Vec2 foot;
};

/// Orthogonal projection of `p` onto the polyline (closest point over all
/// segments; earlier segment wins ties).
PolylineProjection project_point(const Polyline& line, const Vec2& p);

/// Proper or touching intersection of segments [a1,a2] and [b1,b2].
std::optional<Vec2> segment_intersection(const Vec2& a1, const Vec2& a2, const Vec2& b1,
                                         const Vec2& b2);

/// First crossing of two polylines in arc order of `a`; returns arc positions
/// on both lines and the crossing point.
struct PolylineCrossing {
  double arc_a = 0.0;
  double arc_b = 0.0;
  Vec2 point;
};
std::optional<PolylineCrossing> polyline_crossing(const Polyline& a, const Polyline& b);

/// True when `p` is inside or on the boundary of the polygon.
bool point_in_polygon(const Polyline& polygon, const Vec2& p);

/// Distance from `p` to the nearest point of the polyline.
double distance_to_polyline(const Polyline& line, const Vec2& p);

/// Resamples a polyline truncated at `max_len` arc length from its start.
Polyline truncate_polyline(const Polyline& line, double max_len);

}  // namespace trajcast
