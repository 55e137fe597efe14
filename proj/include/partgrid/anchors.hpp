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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "partgrid/rotated_iou.hpp"
#include "partgrid/voxel.hpp"

namespace partgrid {

struct AnchorClassSpec {
  std::string name;
  double h = 0.0, w = 0.0, l = 0.0;     // anchor size, meters
  double z_center = -1.0;               // anchor center height
  double pos_iou_thresh = 0.6;
  double neg_iou_thresh = 0.45;

  void validate() const {
    if (!(h > 0.0) || !(w > 0.0) || !(l > 0.0)) {
      throw std::invalid_argument("AnchorClassSpec: sizes must be positive");
    }
    if (!(neg_iou_thresh >= 0.0) || !(neg_iou_thresh < pos_iou_thresh) || !(pos_iou_thresh <= 1.0)) {
      throw std::invalid_argument("AnchorClassSpec: need 0 <= neg < pos <= 1");
    }
  }
};

/// KITTI anchor configuration: car, pedestrian, cyclist.
inline std::vector<AnchorClassSpec> kitti_anchor_classes() {
  return {{"Car", 1.56, 1.6, 3.9, -1.0, 0.6, 0.45},
          {"Pedestrian", 1.7, 0.6, 0.8, -1.0, 0.5, 0.35},
          {"Cyclist", 1.7, 0.6, 1.7, -1.0, 0.5, 0.35}};
}

/// One anchor per (BEV cell, yaw in {0, pi/2}), centered in the cell at the
/// class z_center. Row-major over cells (x outer, y inner), yaw innermost:
/// 2 * bev_nx * bev_ny anchors.
inline std::vector<BoxParams> generate_anchors(int32_t bev_nx, int32_t bev_ny,
                                               const AnchorClassSpec& spec,
                                               const VoxelGridSpec& grid_spec) {
  spec.validate();
  if (bev_nx < 1 || bev_ny < 1) {
    throw std::invalid_argument("generate_anchors: BEV dims must be >= 1");
  }
  const double cell_x = (grid_spec.range_max.x - grid_spec.range_min.x) / bev_nx;
  const double cell_y = (grid_spec.range_max.y - grid_spec.range_min.y) / bev_ny;
  static constexpr double yaws[2] = {0.0, 0.5 * kPi};

  std::vector<BoxParams> anchors;
  anchors.reserve(static_cast<size_t>(2) * bev_nx * bev_ny);
  for (int32_t i = 0; i < bev_nx; ++i) {
    for (int32_t j = 0; j < bev_ny; ++j) {
      const Vec3 center{grid_spec.range_min.x + (i + 0.5) * cell_x,
                        grid_spec.range_min.y + (j + 0.5) * cell_y, spec.z_center};
      for (double yaw : yaws) {
        anchors.emplace_back(center, spec.h, spec.w, spec.l, yaw);
      }
    }
  }
  return anchors;
}

/// Per-anchor label: gt index when positive, kNegative, or kIgnore.
struct AnchorAssignment {
  static constexpr int32_t kNegative = -1;
  static constexpr int32_t kIgnore = -2;
  std::vector<int32_t> labels;

  size_t count(int32_t which) const {
    size_t n = 0;
    for (int32_t v : labels) {
      if (which >= 0 ? v >= 0 : v == which) ++n;
    }
    return n;
  }
  size_t num_positive() const { return count(0); }
  size_t num_negative() const { return count(kNegative); }
  size_t num_ignored() const { return count(kIgnore); }
};

/// Threshold assignment on BEV IoU: positive at >= pos_iou_thresh against the
/// best ground truth, negative below neg_iou_thresh, ignore in between. Every
/// ground truth additionally claims its best-IoU anchor as positive (if any
/// overlap exists), processed in ground-truth order.
inline AnchorAssignment assign_anchors(const std::vector<BoxParams>& anchors,
                                       const std::vector<BoxParams>& gt_boxes,
                                       const AnchorClassSpec& spec) {
  spec.validate();
  AnchorAssignment out;
  out.labels.assign(anchors.size(), AnchorAssignment::kNegative);

  std::vector<int32_t> best_anchor(gt_boxes.size(), -1);
  std::vector<double> best_anchor_iou(gt_boxes.size(), 0.0);

  for (size_t a = 0; a < anchors.size(); ++a) {
    double best_iou = 0.0;
    int32_t best_gt = -1;
    for (size_t g = 0; g < gt_boxes.size(); ++g) {
      // Cheap reject: BEV circumscribing circles do not touch.
      const Vec3 d = anchors[a].center - gt_boxes[g].center;
      const double planar = std::sqrt(d.x * d.x + d.y * d.y);
      const double reach = 0.5 * (std::hypot(anchors[a].l, anchors[a].w) +
                                  std::hypot(gt_boxes[g].l, gt_boxes[g].w));
      if (planar > reach) continue;

      const double iou = bev_iou(anchors[a], gt_boxes[g]);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int32_t>(g);
      }
      if (iou > best_anchor_iou[g]) {
        best_anchor_iou[g] = iou;
        best_anchor[g] = static_cast<int32_t>(a);
      }
    }
    if (best_gt >= 0 && best_iou >= spec.pos_iou_thresh) {
      out.labels[a] = best_gt;
    } else if (best_iou < spec.neg_iou_thresh) {
      out.labels[a] = AnchorAssignment::kNegative;
    } else {
      out.labels[a] = AnchorAssignment::kIgnore;
    }
  }

  // Force-match: a gt with any overlap keeps its best anchor positive even
  // below the threshold.
  for (size_t g = 0; g < gt_boxes.size(); ++g) {
    if (best_anchor[g] >= 0 && best_anchor_iou[g] > 0.0) {
      out.labels[best_anchor[g]] = static_cast<int32_t>(g);
    }
  }
  return out;
}

}  // namespace partgrid
