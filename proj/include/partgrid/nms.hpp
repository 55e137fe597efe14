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
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "partgrid/rotated_iou.hpp"

namespace partgrid {

struct ScoredBox {
  BoxParams box;
  double score = 0.0;
};

enum class IouMetric { kBev, k3d };

inline double box_iou(const BoxParams& a, const BoxParams& b, IouMetric metric) {
  return metric == IouMetric::kBev ? bev_iou(a, b) : iou3d(a, b);
}

/// Greedy rotated NMS. Returns the kept indices into `boxes`, ordered by
/// descending score; equal scores break ties toward the lower input index.
/// A candidate is suppressed when its IoU with an already kept box exceeds
/// `iou_thresh`.
inline std::vector<int32_t> rotated_nms(const std::vector<ScoredBox>& boxes,
                                        double iou_thresh,
                                        IouMetric metric = IouMetric::kBev) {
  if (iou_thresh < 0.0 || iou_thresh > 1.0) {
    throw std::invalid_argument("rotated_nms: iou_thresh must be in [0, 1]");
  }
  std::vector<int32_t> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    return boxes[a].score > boxes[b].score;
  });

  std::vector<int32_t> kept;
  std::vector<char> suppressed(boxes.size(), 0);
  for (int32_t idx : order) {
    if (suppressed[idx]) continue;
    kept.push_back(idx);
    for (int32_t other : order) {
      if (suppressed[other] || other == idx) continue;
      if (box_iou(boxes[idx].box, boxes[other].box, metric) > iou_thresh) {
        suppressed[other] = 1;
      }
    }
  }
  return kept;
}

/// NMS followed by truncation to the top `k` survivors (score order).
inline std::vector<int32_t> select_proposals(const std::vector<ScoredBox>& boxes,
                                             size_t k, double nms_thresh,
                                             IouMetric metric = IouMetric::kBev) {
  std::vector<int32_t> kept = rotated_nms(boxes, nms_thresh, metric);
  if (kept.size() > k) kept.resize(k);
  return kept;
}

}  // namespace partgrid
