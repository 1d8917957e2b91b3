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

#include "trajcast/geometry.hpp"

#include <algorithm>
#include <limits>

namespace trajcast {

double normalize_angle(double angle) {
  const double two_pi = 2.0 * M_PI;
  double a = std::fmod(angle, two_pi);
  if (a <= -M_PI) a += two_pi;
  if (a > M_PI) a -= two_pi;
  return a;
}

double angle_diff(double a, double b) { return std::abs(normalize_angle(a - b)); }

double polyline_length(const Polyline& line) {
  double len = 0.0;
  for (size_t i = 1; i < line.size(); ++i) len += (line[i] - line[i - 1]).norm();
  return len;
}

Vec2 point_at_arc(const Polyline& line, double s) {
  if (line.empty()) return {};
  if (s <= 0.0) return line.front();
  double acc = 0.0;
  for (size_t i = 1; i < line.size(); ++i) {
    const double seg = (line[i] - line[i - 1]).norm();
    if (acc + seg >= s) {
      const double t = seg > 0.0 ? (s - acc) / seg : 0.0;
      return line[i - 1] + (line[i] - line[i - 1]) * t;
    }
    acc += seg;
  }
  return line.back();
}

Vec2 tangent_at_arc(const Polyline& line, double s) {
  if (line.size() < 2) return {1.0, 0.0};
  double acc = 0.0;
  for (size_t i = 1; i < line.size(); ++i) {
    const double seg = (line[i] - line[i - 1]).norm();
    if (acc + seg >= s && seg > 0.0) return (line[i] - line[i - 1]) / seg;
    acc += seg;
  }
  return (line[line.size() - 1] - line[line.size() - 2]).normalized();
}

PolylineProjection project_point(const Polyline& line, const Vec2& p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (size_t i = 1; i < line.size(); ++i) {
    const Vec2 a = line[i - 1];
    const Vec2 b = line[i];
    const Vec2 ab = b - a;
    const double seg_len2 = ab.squared_norm();
    double t = seg_len2 > 0.0 ? std::clamp((p - a).dot(ab) / seg_len2, 0.0, 1.0) : 0.0;
    const Vec2 foot = a + ab * t;
    const double d = (p - foot).norm();
    if (d < best.distance) {
      best.distance = d;
      best.arc_pos = acc + std::sqrt(seg_len2) * t;
      best.segment_index = static_cast<int>(i - 1);
      best.foot = foot;
      const double side = ab.cross(p - a);
      best.signed_offset = side >= 0.0 ? d : -d;
    }
    acc += std::sqrt(seg_len2);
  }
  return best;
}

std::optional<Vec2> segment_intersection(const Vec2& a1, const Vec2& a2, const Vec2& b1,
                                         const Vec2& b2) {
  const Vec2 r = a2 - a1;
  const Vec2 s = b2 - b1;
  const double denom = r.cross(s);
  if (std::abs(denom) < 1e-12) return std::nullopt;  // parallel or degenerate
  const Vec2 qp = b1 - a1;
  const double t = qp.cross(s) / denom;
  const double u = qp.cross(r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return a1 + r * t;
}

std::optional<PolylineCrossing> polyline_crossing(const Polyline& a, const Polyline& b) {
  double arc_a = 0.0;
  for (size_t i = 1; i < a.size(); ++i) {
    double arc_b = 0.0;
    for (size_t j = 1; j < b.size(); ++j) {
      const auto hit = segment_intersection(a[i - 1], a[i], b[j - 1], b[j]);
      if (hit) {
        PolylineCrossing c;
        c.point = *hit;
        c.arc_a = arc_a + (*hit - a[i - 1]).norm();
        c.arc_b = arc_b + (*hit - b[j - 1]).norm();
        return c;
      }
      arc_b += (b[j] - b[j - 1]).norm();
    }
    arc_a += (a[i] - a[i - 1]).norm();
  }
  return std::nullopt;
}

bool point_in_polygon(const Polyline& polygon, const Vec2& p) {
  if (polygon.size() < 3) return false;
  bool inside = false;
  const size_t n = polygon.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = polygon[j];
    const Vec2& b = polygon[i];
    // boundary counts as inside
    const Vec2 ab = b - a;
    const double seg_len2 = ab.squared_norm();
    const double t = seg_len2 > 0.0 ? std::clamp((p - a).dot(ab) / seg_len2, 0.0, 1.0) : 0.0;
    if ((p - (a + ab * t)).norm() < 1e-9) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

double distance_to_polyline(const Polyline& line, const Vec2& p) {
  if (line.empty()) return std::numeric_limits<double>::infinity();
  if (line.size() == 1) return (p - line[0]).norm();
  return project_point(line, p).distance;
}

Polyline truncate_polyline(const Polyline& line, double max_len) {
  Polyline out;
  if (line.empty() || max_len <= 0.0) return out;
  out.push_back(line.front());
  double acc = 0.0;
  for (size_t i = 1; i < line.size(); ++i) {
    const double seg = (line[i] - line[i - 1]).norm();
    if (acc + seg >= max_len) {
      const double t = seg > 0.0 ? (max_len - acc) / seg : 0.0;
      out.push_back(line[i - 1] + (line[i] - line[i - 1]) * t);
      return out;
    }
    out.push_back(line[i]);
    acc += seg;
  }
  return out;
}

}  // namespace trajcast
