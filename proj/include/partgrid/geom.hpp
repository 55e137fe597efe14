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

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace partgrid {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle to [-pi, pi).
inline double normalize_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r - kPi;
}

/// Point/vector in the LiDAR frame: x forward, y left, z up. Meters.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Oriented 3D box. `theta` is the bird's-eye-view yaw in [-pi, pi),
/// measured from the +x axis; at theta = 0 the length `l` spans x, the
/// width `w` spans y and the height `h` spans z, centered on `center`.
struct BoxParams {
  Vec3 center;
  double h = 1.0;  // height (z extent)
  double w = 1.0;  // width (lateral extent)
  double l = 1.0;  // length (heading extent)
  double theta = 0.0;

  BoxParams() = default;
  BoxParams(const Vec3& center_, double h_, double w_, double l_, double theta_)
      : center(center_), h(h_), w(w_), l(l_), theta(normalize_angle(theta_)) {
    if (!(h > 0.0) || !(w > 0.0) || !(l > 0.0)) {
      throw std::invalid_argument("BoxParams: dimensions must be strictly positive");
    }
  }

  double volume() const { return h * w * l; }
  /// Unit vector along the heading (length) axis.
  Vec3 heading_dir() const { return {std::cos(theta), std::sin(theta), 0.0}; }
  /// Full-space diagonal length.
  double diagonal() const { return std::sqrt(h * h + w * w + l * l); }
};

/// Rigid transform about the vertical axis: origin at a box center, local
/// x along the box heading, z unchanged.
struct CanonicalFrame {
  Vec3 origin;
  double yaw = 0.0;

  static CanonicalFrame of_box(const BoxParams& b) { return {b.center, b.theta}; }
};

/// Global point -> canonical coordinates of `frame`.
inline Vec3 to_canonical(const Vec3& p, const CanonicalFrame& frame) {
  const double c = std::cos(frame.yaw), s = std::sin(frame.yaw);
  const Vec3 d = p - frame.origin;
  return {d.x * c + d.y * s, -d.x * s + d.y * c, d.z};
}

/// Canonical coordinates -> global point. Exact inverse of to_canonical.
inline Vec3 from_canonical(const Vec3& q, const CanonicalFrame& frame) {
  const double c = std::cos(frame.yaw), s = std::sin(frame.yaw);
  return {frame.origin.x + q.x * c - q.y * s,
          frame.origin.y + q.x * s + q.y * c,
          frame.origin.z + q.z};
}

inline Vec3 to_canonical(const Vec3& p, const BoxParams& box) {
  return to_canonical(p, CanonicalFrame::of_box(box));
}

inline Vec3 from_canonical(const Vec3& q, const BoxParams& box) {
  return from_canonical(q, CanonicalFrame::of_box(box));
}

inline std::vector<Vec3> to_canonical(const std::vector<Vec3>& points, const BoxParams& box) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  const CanonicalFrame f = CanonicalFrame::of_box(box);
  for (const Vec3& p : points) out.push_back(to_canonical(p, f));
  return out;
}

inline std::vector<Vec3> from_canonical(const std::vector<Vec3>& points, const BoxParams& box) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  const CanonicalFrame f = CanonicalFrame::of_box(box);
  for (const Vec3& p : points) out.push_back(from_canonical(p, f));
  return out;
}

/// Closed box membership: boundary points count as inside.
inline bool point_in_box(const Vec3& p, const BoxParams& box) {
  const Vec3 q = to_canonical(p, box);
  return std::abs(q.x) <= 0.5 * box.l && std::abs(q.y) <= 0.5 * box.w &&
         std::abs(q.z) <= 0.5 * box.h;
}

/// The 8 corners in a fixed order: bottom face counterclockwise starting at
/// local (+l/2, +w/2, -h/2), then the top face in the same x-y order.
inline std::array<Vec3, 8> box_corners(const BoxParams& box) {
  static constexpr double sx[4] = {+0.5, -0.5, -0.5, +0.5};
  static constexpr double sy[4] = {+0.5, +0.5, -0.5, -0.5};
  std::array<Vec3, 8> out;
  for (int level = 0; level < 2; ++level) {
    const double z = (level == 0 ? -0.5 : +0.5) * box.h;
    for (int i = 0; i < 4; ++i) {
      out[level * 4 + i] =
          from_canonical({sx[i] * box.l, sy[i] * box.w, z}, box);
    }
  }
  return out;
}

}  // namespace partgrid
