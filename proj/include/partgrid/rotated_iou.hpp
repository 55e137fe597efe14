// Copyright 2026 the partgrid authors
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

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "partgrid/geom.hpp"

namespace partgrid {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Intersections thinner than this (in m^2) are treated as empty so that
// touching edges do not produce jittery near-zero overlaps.
inline constexpr double kDegenerateArea = 1e-12;

/// BEV footprint corners, counterclockwise.
inline std::array<Vec2, 4> bev_corners(const BoxParams& b) {
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double hl = 0.5 * b.l, hw = 0.5 * b.w;
  static constexpr double sx[4] = {+1.0, -1.0, -1.0, +1.0};
  static constexpr double sy[4] = {+1.0, +1.0, -1.0, -1.0};
  std::array<Vec2, 4> out;
  for (int i = 0; i < 4; ++i) {
    const double lx = sx[i] * hl, ly = sy[i] * hw;
    out[i] = {b.center.x + lx * c - ly * s, b.center.y + lx * s + ly * c};
  }
  return out;
}

/// Shoelace area; positive for counterclockwise winding.
inline double polygon_area(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return 0.0;
  double acc = 0.0;
  for (size_t i = 0, n = poly.size(); i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

/// Sutherland-Hodgman clip of `subject` against a convex counterclockwise
/// `clip` polygon.
inline std::vector<Vec2> clip_convex(std::vector<Vec2> subject,
                                     const std::vector<Vec2>& clip) {
  auto cross_side = [](const Vec2& a, const Vec2& b, const Vec2& p) {
    return (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  };
  for (size_t i = 0, n = clip.size(); i < n && !subject.empty(); ++i) {
    const Vec2& a = clip[i];
    const Vec2& b = clip[(i + 1) % n];
    std::vector<Vec2> out;
    out.reserve(subject.size() + 2);
    for (size_t j = 0, m = subject.size(); j < m; ++j) {
      const Vec2& p = subject[j];
      const Vec2& q = subject[(j + 1) % m];
      const double sp = cross_side(a, b, p);
      const double sq = cross_side(a, b, q);
      if (sp >= 0.0) out.push_back(p);
      if ((sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0)) {
        const double t = sp / (sp - sq);
        out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
      }
    }
    subject = std::move(out);
  }
  return subject;
}

/// Rotated-rectangle intersection area in the bird's-eye view.
inline double bev_intersection_area(const BoxParams& a, const BoxParams& b) {
  const auto ca = bev_corners(a);
  const auto cb = bev_corners(b);
  const std::vector<Vec2> pa(ca.begin(), ca.end());
  const std::vector<Vec2> pb(cb.begin(), cb.end());
  const double area = polygon_area(clip_convex(pa, pb));
  return area > kDegenerateArea ? area : 0.0;
}

/// Rotated BEV IoU in [0, 1]; symmetric.
inline double bev_iou(const BoxParams& a, const BoxParams& b) {
  const double inter = bev_intersection_area(a, b);
  const double uni = a.l * a.w + b.l * b.w - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// Rotated 3D IoU: BEV intersection area times vertical overlap over the
/// volume union.
inline double iou3d(const BoxParams& a, const BoxParams& b) {
  const double z_lo = std::max(a.center.z - 0.5 * a.h, b.center.z - 0.5 * b.h);
  const double z_hi = std::min(a.center.z + 0.5 * a.h, b.center.z + 0.5 * b.h);
  const double dz = z_hi - z_lo;
  if (dz <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a, b) * dz;
  const double uni = a.volume() + b.volume() - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace partgrid
