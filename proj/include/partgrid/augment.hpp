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
#include <stdexcept>
#include <vector>

#include "partgrid/geom.hpp"
#include "partgrid/rng.hpp"
#include "partgrid/rotated_iou.hpp"

namespace partgrid {

/// One object of the ground-truth sampling database: its box and the points
/// that were inside it, both in the source scene's LiDAR frame.
struct GtSample {
  BoxParams box;
  std::vector<Vec3> points;
};

struct GtDatabase {
  std::vector<GtSample> samples;
};

struct AugmentConfig {
  bool flip = true;                  // random flip over the x-z plane
  double scale_min = 0.95;
  double scale_max = 1.05;
  double rot_min = -0.25 * kPi;
  double rot_max = 0.25 * kPi;
  bool gt_sampling = false;
  int32_t gt_sample_count = 5;       // paste attempts per scene

  void validate() const {
    if (!(scale_min <= scale_max) || !(rot_min <= rot_max) || gt_sample_count < 0) {
      throw std::invalid_argument("AugmentConfig: ranges must be well-ordered");
    }
  }
};

struct Scene {
  std::vector<Vec3> points;
  std::vector<BoxParams> boxes;
};

namespace detail {

inline void flip_scene(Scene& scene) {
  for (Vec3& p : scene.points) p.y = -p.y;
  for (BoxParams& b : scene.boxes) {
    b = BoxParams({b.center.x, -b.center.y, b.center.z}, b.h, b.w, b.l, -b.theta);
  }
}

inline void rotate_scene(Scene& scene, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  auto rot = [&](const Vec3& p) { return Vec3{p.x * c - p.y * s, p.x * s + p.y * c, p.z}; };
  for (Vec3& p : scene.points) p = rot(p);
  for (BoxParams& b : scene.boxes) {
    b = BoxParams(rot(b.center), b.h, b.w, b.l, b.theta + angle);
  }
}

inline void scale_scene(Scene& scene, double s) {
  for (Vec3& p : scene.points) p = p * s;
  for (BoxParams& b : scene.boxes) {
    b = BoxParams(b.center * s, b.h * s, b.w * s, b.l * s, b.theta);
  }
}

}  // namespace detail

/// Scene-level training augmentation, applied in order: ground-truth
/// sampling paste, random flip (y -> -y, theta -> -theta), global rotation
/// about z, global scaling. A paste whose box overlaps any present box in
/// the bird's-eye view is skipped, not an error. Part labels are not
/// transformed here; callers recompute them from the augmented boxes.
inline Scene augment(const std::vector<Vec3>& points, const std::vector<BoxParams>& boxes,
                     const AugmentConfig& cfg, Rng& rng, const GtDatabase* db = nullptr) {
  cfg.validate();
  Scene scene{points, boxes};

  if (cfg.gt_sampling && db != nullptr && !db->samples.empty()) {
    for (int32_t i = 0; i < cfg.gt_sample_count; ++i) {
      const auto& sample =
          db->samples[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(db->samples.size()) - 1))];
      bool collides = false;
      for (const BoxParams& existing : scene.boxes) {
        if (bev_iou(sample.box, existing) > 0.0) {
          collides = true;
          break;
        }
      }
      if (collides) continue;
      scene.boxes.push_back(sample.box);
      scene.points.insert(scene.points.end(), sample.points.begin(), sample.points.end());
    }
  }

  if (cfg.flip && rng.bernoulli(0.5)) {
    detail::flip_scene(scene);
  }
  detail::rotate_scene(scene, rng.uniform(cfg.rot_min, cfg.rot_max));
  detail::scale_scene(scene, rng.uniform(cfg.scale_min, cfg.scale_max));
  return scene;
}

}  // namespace partgrid
