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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "partgrid/nms.hpp"
#include "partgrid/rotated_iou.hpp"

namespace partgrid {

enum class Difficulty : int32_t { kEasy = 0, kModerate = 1, kHard = 2 };

struct EvalGroundTruth {
  BoxParams box;
  int32_t class_id = 0;
  Difficulty difficulty = Difficulty::kEasy;
};

struct EvalPrediction {
  BoxParams box;
  double score = 0.0;
  int32_t class_id = 0;
};

struct EvalFrame {
  std::vector<EvalPrediction> predictions;
  std::vector<EvalGroundTruth> ground_truths;
};

namespace detail {

// Prediction rank order: score descending, input index on ties.
inline std::vector<int32_t> score_order(const std::vector<EvalPrediction>& preds) {
  std::vector<int32_t> order(preds.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int32_t>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int32_t a, int32_t b) { return preds[a].score > preds[b].score; });
  return order;
}

}  // namespace detail

/// Fraction of ground truths covered (3D IoU >= iou_thresh) by any of each
/// frame's top-k proposals. Class-agnostic: filter frames upstream when a
/// single class is wanted.
inline double proposal_recall(const std::vector<EvalFrame>& frames, size_t k,
                              double iou_thresh) {
  size_t total = 0, matched = 0;
  for (const EvalFrame& frame : frames) {
    const auto order = detail::score_order(frame.predictions);
    const size_t top = std::min(k, order.size());
    for (const EvalGroundTruth& gt : frame.ground_truths) {
      ++total;
      for (size_t r = 0; r < top; ++r) {
        if (iou3d(frame.predictions[order[r]].box, gt.box) >= iou_thresh) {
          ++matched;
          break;
        }
      }
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(total);
}

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double score = 0.0;
};

/// Score-ranked greedy PR curve for one class and difficulty level. A
/// difficulty level includes the ground truths at or below it (easy is a
/// subset of moderate is a subset of hard). Each prediction claims the
/// highest-IoU unclaimed ground truth of its frame; it counts as a true
/// positive when that IoU reaches iou_thresh.
inline std::vector<PrPoint> pr_curve(const std::vector<EvalFrame>& frames, double iou_thresh,
                                     int32_t class_id, Difficulty difficulty) {
  struct Ranked {
    double score;
    int32_t frame;
    int32_t pred;
  };
  std::vector<Ranked> ranked;
  size_t total_gts = 0;
  std::vector<std::vector<char>> claimed(frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    claimed[f].assign(frames[f].ground_truths.size(), 0);
    for (const EvalGroundTruth& gt : frames[f].ground_truths) {
      if (gt.class_id == class_id && static_cast<int32_t>(gt.difficulty) <=
                                         static_cast<int32_t>(difficulty)) {
        ++total_gts;
      }
    }
    for (size_t p = 0; p < frames[f].predictions.size(); ++p) {
      if (frames[f].predictions[p].class_id == class_id) {
        ranked.push_back({frames[f].predictions[p].score, static_cast<int32_t>(f),
                          static_cast<int32_t>(p)});
      }
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.pred < b.pred;
  });

  std::vector<PrPoint> curve;
  if (total_gts == 0) return curve;
  size_t tp = 0, fp = 0;
  for (const Ranked& r : ranked) {
    const EvalFrame& frame = frames[r.frame];
    double best_iou = 0.0;
    int32_t best_gt = -1;
    for (size_t g = 0; g < frame.ground_truths.size(); ++g) {
      const EvalGroundTruth& gt = frame.ground_truths[g];
      if (claimed[r.frame][g] || gt.class_id != class_id ||
          static_cast<int32_t>(gt.difficulty) > static_cast<int32_t>(difficulty)) {
        continue;
      }
      const double iou = iou3d(frame.predictions[r.pred].box, gt.box);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = static_cast<int32_t>(g);
      }
    }
    if (best_gt >= 0 && best_iou >= iou_thresh) {
      claimed[r.frame][best_gt] = 1;
      ++tp;
    } else {
      ++fp;
    }
    curve.push_back({static_cast<double>(tp) / total_gts,
                     static_cast<double>(tp) / static_cast<double>(tp + fp), r.score});
  }
  return curve;
}

/// Mean average precision with 11 recall positions {0, 0.1, ..., 1.0}:
/// max precision at recall >= r, averaged. Zero when the class has no
/// eligible ground truths.
inline double average_precision_11(const std::vector<EvalFrame>& frames, double iou_thresh,
                                   int32_t class_id, Difficulty difficulty) {
  const auto curve = pr_curve(frames, iou_thresh, class_id, difficulty);
  if (curve.empty()) return 0.0;
  double ap = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double r = i / 10.0;
    double best = 0.0;
    for (const PrPoint& pt : curve) {
      if (pt.recall >= r - 1e-12) best = std::max(best, pt.precision);
    }
    ap += best / 11.0;
  }
  return ap;
}

/// Per-sample foreground part predictions paired with their labels.
struct PartErrorSample {
  std::vector<std::array<double, 3>> predicted;
  std::vector<std::array<double, 3>> truth;
};

struct PartError {
  double x = 0.0, y = 0.0, z = 0.0;
  double overall = 0.0;
};

/// Mean absolute part-location error per axis: averaged over each sample's
/// foreground set, then over samples; `overall` averages the three axes.
inline PartError part_abs_error(const std::vector<PartErrorSample>& samples) {
  std::array<double, 3> acc{};
  size_t used = 0;
  for (const PartErrorSample& s : samples) {
    if (s.predicted.size() != s.truth.size()) {
      throw std::invalid_argument("part_abs_error: prediction/label count mismatch");
    }
    if (s.predicted.empty()) continue;
    std::array<double, 3> sum{};
    for (size_t i = 0; i < s.predicted.size(); ++i) {
      for (int u = 0; u < 3; ++u) sum[u] += std::abs(s.predicted[i][u] - s.truth[i][u]);
    }
    for (int u = 0; u < 3; ++u) acc[u] += sum[u] / s.predicted.size();
    ++used;
  }
  PartError out;
  if (used == 0) return out;
  out.x = acc[0] / used;
  out.y = acc[1] / used;
  out.z = acc[2] / used;
  out.overall = (out.x + out.y + out.z) / 3.0;
  return out;
}

/// Two-pass Pearson correlation coefficient; 0 when either input is constant.
inline double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("pearson_correlation: need two equal-length series");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct FpBreakdown {
  double background = 0.0;
  double localization = 0.0;
  double other_class = 0.0;
};

/// Classifies the high-scored false positives: after greedy same-class
/// matching at iou_thresh, an unmatched prediction is a localization error
/// when its best same-class IoU lies in (0.1, iou_thresh), an other-class
/// confusion when its best any-class IoU reaches iou_thresh, and background
/// otherwise. Ratios sum to 1 when any false positive exists.
inline FpBreakdown fp_breakdown(const std::vector<EvalFrame>& frames, double score_threshold,
                                double iou_thresh) {
  size_t n_bg = 0, n_loc = 0, n_other = 0;
  for (const EvalFrame& frame : frames) {
    std::vector<char> claimed(frame.ground_truths.size(), 0);
    const auto order = detail::score_order(frame.predictions);
    std::vector<int32_t> unmatched;
    for (int32_t p : order) {
      const EvalPrediction& pred = frame.predictions[p];
      if (pred.score < score_threshold) continue;
      double best_iou = 0.0;
      int32_t best_gt = -1;
      for (size_t g = 0; g < frame.ground_truths.size(); ++g) {
        if (claimed[g] || frame.ground_truths[g].class_id != pred.class_id) continue;
        const double iou = iou3d(pred.box, frame.ground_truths[g].box);
        if (iou > best_iou) {
          best_iou = iou;
          best_gt = static_cast<int32_t>(g);
        }
      }
      if (best_gt >= 0 && best_iou >= iou_thresh) {
        claimed[best_gt] = 1;
      } else {
        unmatched.push_back(p);
      }
    }
    for (int32_t p : unmatched) {
      const EvalPrediction& pred = frame.predictions[p];
      double best_same = 0.0, best_any = 0.0;
      for (const EvalGroundTruth& gt : frame.ground_truths) {
        const double iou = iou3d(pred.box, gt.box);
        best_any = std::max(best_any, iou);
        if (gt.class_id == pred.class_id) best_same = std::max(best_same, iou);
      }
      if (best_same > 0.1 && best_same < iou_thresh) {
        ++n_loc;
      } else if (best_any >= iou_thresh) {
        ++n_other;
      } else {
        ++n_bg;
      }
    }
  }
  const size_t total = n_bg + n_loc + n_other;
  if (total == 0) return {};
  return {static_cast<double>(n_bg) / total, static_cast<double>(n_loc) / total,
          static_cast<double>(n_other) / total};
}

}  // namespace partgrid
