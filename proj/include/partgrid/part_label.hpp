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

#include "partgrid/geom.hpp"
#include "partgrid/rotated_iou.hpp"

namespace partgrid {

/// Ground-truth boxes overlap grossly; the labels are corrupt.
class OverlappingBoxesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free supervision for one point: foreground flag plus the normalized
/// position inside the owning box. Part components are meaningful only when
/// `foreground` is set.
struct PartLabel {
  bool foreground = false;
  std::array<double, 3> part{0.0, 0.0, 0.0};
  int32_t box_index = -1;
};

/// Normalized intra-object location of an in-box point. The planar offset is
/// rotated into the box frame; the lateral component is normalized by the
/// width, the heading component by the length, the vertical offset by the
/// height, each shifted by +0.5 so the box center maps to (0.5, 0.5, 0.5).
/// Clamping to [0, 1] absorbs only floating-point epsilon.
inline std::array<double, 3> part_location(const Vec3& p, const BoxParams& box) {
  const Vec3 q = to_canonical(p, box);  // q.x along heading, q.y lateral
  auto squeeze = [](double v) { return std::clamp(v, 0.0, 1.0); };
  return {squeeze(q.y / box.w + 0.5), squeeze(q.x / box.l + 0.5),
          squeeze(q.z / box.h + 0.5)};
}

/// Exact inverse of part_location: denormalize, rotate back, translate.
inline Vec3 invert_part_location(const std::array<double, 3>& part, const BoxParams& box) {
  const Vec3 q{(part[1] - 0.5) * box.l, (part[0] - 0.5) * box.w,
               (part[2] - 0.5) * box.h};
  return from_canonical(q, box);
}

/// Labels every point: foreground iff inside at least one ground-truth box,
/// with the part location computed against the owning box. A point inside
/// several boxes is assigned to the box with the nearest center (lower index
/// on ties); boxes overlapping by 3D IoU > 0.05 signal corrupt labels and
/// raise OverlappingBoxesError.
inline std::vector<PartLabel> compute_part_labels(const std::vector<Vec3>& points,
                                                  const std::vector<BoxParams>& gt_boxes) {
  for (size_t a = 0; a < gt_boxes.size(); ++a) {
    for (size_t b = a + 1; b < gt_boxes.size(); ++b) {
      if (iou3d(gt_boxes[a], gt_boxes[b]) > 0.05) {
        throw OverlappingBoxesError("ground-truth boxes " + std::to_string(a) + " and " +
                                    std::to_string(b) + " overlap by 3D IoU > 0.05");
      }
    }
  }

  std::vector<PartLabel> labels(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec3& p = points[i];
    int32_t best = -1;
    double best_dist = 0.0;
    for (size_t b = 0; b < gt_boxes.size(); ++b) {
      if (!point_in_box(p, gt_boxes[b])) continue;
      const double d = (p - gt_boxes[b].center).norm();
      if (best < 0 || d < best_dist) {
        best = static_cast<int32_t>(b);
        best_dist = d;
      }
    }
    if (best >= 0) {
      labels[i].foreground = true;
      labels[i].box_index = best;
      labels[i].part = part_location(p, gt_boxes[best]);
    }
  }
  return labels;
}

}  // namespace partgrid
