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

#include <cmath>
#include <vector>

#include "partgrid/augment.hpp"
#include "partgrid/geom.hpp"
#include "partgrid/rng.hpp"
#include "partgrid/rotated_iou.hpp"
#include "partgrid/voxel.hpp"

namespace partgrid {

/// Synthetic scene parameters. Boxes are sampled without BEV overlap inside
/// a margin of the grid range; each box is filled with surface-biased points
/// and the rest of the range gets ground clutter.
struct SynthSpec {
  VoxelGridSpec area;
  int32_t num_objects = 6;
  int32_t points_per_object = 400;
  int32_t clutter_points = 3000;
  double surface_fraction = 0.7;  // points drawn on box faces vs interior
};

namespace detail {

// In-box point in canonical coordinates, inset from the faces so the point
// stays strictly inside after the float round trip to global coordinates.
inline Vec3 sample_in_box(const BoxParams& box, double surface_fraction, Rng& rng) {
  const double inset = 1e-4;
  const double hx = 0.5 * box.l * (1.0 - inset);
  const double hy = 0.5 * box.w * (1.0 - inset);
  const double hz = 0.5 * box.h * (1.0 - inset);
  Vec3 q{rng.uniform(-hx, hx), rng.uniform(-hy, hy), rng.uniform(-hz, hz)};
  if (rng.bernoulli(surface_fraction)) {
    const int face_axis = static_cast<int>(rng.uniform_int(0, 2));
    const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
    if (face_axis == 0) q.x = side * hx;
    if (face_axis == 1) q.y = side * hy;
    if (face_axis == 2) q.z = side * hz;
  }
  return from_canonical(q, box);
}

}  // namespace detail

/// Deterministic synthetic LiDAR scene for the given seed.
inline Scene synth_scene(const SynthSpec& spec, uint64_t seed) {
  Rng rng(seed);
  Scene scene;
  const Vec3 lo = spec.area.range_min, hi = spec.area.range_max;

  for (int32_t i = 0; i < spec.num_objects; ++i) {
    for (int attempt = 0; attempt < 50; ++attempt) {
      const double h = rng.uniform(1.3, 1.9);
      const double w = rng.uniform(1.4, 1.9);
      const double l = rng.uniform(3.2, 4.6);
      const double margin = 0.5 * std::hypot(l, w) + 0.5;
      if (hi.x - lo.x < 2 * margin || hi.y - lo.y < 2 * margin) break;
      const Vec3 center{rng.uniform(lo.x + margin, hi.x - margin),
                        rng.uniform(lo.y + margin, hi.y - margin),
                        rng.uniform(lo.z + 0.9, lo.z + 1.6)};
      const BoxParams box(center, h, w, l, rng.uniform(-kPi, kPi));
      bool collides = false;
      for (const BoxParams& other : scene.boxes) {
        if (bev_iou(box, other) > 0.0) {
          collides = true;
          break;
        }
      }
      if (!collides) {
        scene.boxes.push_back(box);
        break;
      }
    }
  }

  for (const BoxParams& box : scene.boxes) {
    for (int32_t i = 0; i < spec.points_per_object; ++i) {
      scene.points.push_back(detail::sample_in_box(box, spec.surface_fraction, rng));
    }
  }

  for (int32_t i = 0; i < spec.clutter_points; ++i) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      Vec3 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y), 0.0};
      p.z = rng.bernoulli(0.85) ? rng.uniform(lo.z + 0.9, lo.z + 1.5) : rng.uniform(lo.z, hi.z);
      bool inside = false;
      for (const BoxParams& box : scene.boxes) {
        if (point_in_box(p, box)) {
          inside = true;
          break;
        }
      }
      if (!inside) {
        scene.points.push_back(p);
        break;
      }
    }
  }
  return scene;
}

/// LiDAR-like point density: returns tightly clustered around surface seeds
/// so large point counts still occupy only tens of thousands of voxels, the
/// regime real scans land in.
inline std::vector<Vec3> synth_scan_points(const VoxelGridSpec& area, int32_t clusters,
                                           int32_t points_per_cluster, uint64_t seed) {
  Rng rng(seed);
  const Vec3 lo = area.range_min, hi = area.range_max;
  std::vector<Vec3> points;
  points.reserve(static_cast<size_t>(clusters) * points_per_cluster);
  for (int32_t c = 0; c < clusters; ++c) {
    const Vec3 center{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y),
                      rng.uniform(lo.z + 0.8, lo.z + 2.4)};
    for (int32_t i = 0; i < points_per_cluster; ++i) {
      Vec3 p{center.x + rng.normal(0.0, 0.008), center.y + rng.normal(0.0, 0.015),
             center.z + rng.normal(0.0, 0.008)};
      p.x = std::clamp(p.x, lo.x, hi.x - 1e-6);
      p.y = std::clamp(p.y, lo.y, hi.y - 1e-6);
      p.z = std::clamp(p.z, lo.z, hi.z - 1e-6);
      points.push_back(p);
    }
  }
  return points;
}

}  // namespace partgrid
