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

#include "partgrid/codec.hpp"
#include "partgrid/geom.hpp"

namespace partgrid {

struct LossConfig {
  double focal_alpha = 0.25;      // foreground weight; background gets 1 - alpha
  double focal_gamma = 2.0;
  double box_weight_lambda = 2.0; // stage-I box term weight
  double dir_weight_beta = 0.1;   // direction-classification weight
  double smooth_l1_beta = 1.0;    // quadratic/linear transition point
  double prob_floor = 1e-7;       // probabilities clamped to [floor, 1 - floor]

  void validate() const {
    if (focal_alpha < 0.0 || focal_gamma < 0.0 || box_weight_lambda < 0.0 ||
        dir_weight_beta < 0.0 || !(smooth_l1_beta > 0.0)) {
      throw std::invalid_argument("LossConfig: weights must be non-negative");
    }
  }
};

struct ScalarLoss {
  double value = 0.0;
  double grad = 0.0;
};

namespace detail {

inline double clamp_prob(double p, const LossConfig& cfg) {
  return std::clamp(p, cfg.prob_floor, 1.0 - cfg.prob_floor);
}

}  // namespace detail

/// Focal loss of a single point's foreground probability, with d/dp.
inline ScalarLoss focal_loss(double p, bool is_foreground, const LossConfig& cfg = {}) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("focal_loss: p must lie in (0, 1)");
  }
  const double pt = detail::clamp_prob(is_foreground ? p : 1.0 - p, cfg);
  const double alpha = is_foreground ? cfg.focal_alpha : 1.0 - cfg.focal_alpha;
  const double g = cfg.focal_gamma;
  const double one_minus = 1.0 - pt;
  const double value = -alpha * std::pow(one_minus, g) * std::log(pt);
  double d_pt = alpha * (g * std::pow(one_minus, g - 1.0) * std::log(pt) -
                         std::pow(one_minus, g) / pt);
  if (!is_foreground) d_pt = -d_pt;
  return {value, d_pt};
}

/// Binary cross entropy of a probability against a soft target, with d/dpred.
inline ScalarLoss binary_cross_entropy(double pred, double target, const LossConfig& cfg = {}) {
  if (!(pred > 0.0) || !(pred < 1.0)) {
    throw std::invalid_argument("binary_cross_entropy: pred must lie in (0, 1)");
  }
  const double q = detail::clamp_prob(pred, cfg);
  const double value = -target * std::log(q) - (1.0 - target) * std::log(1.0 - q);
  const double grad = -target / q + (1.0 - target) / (1.0 - q);
  return {value, grad};
}

/// Summed per-axis BCE of a predicted part-location triple (foreground points
/// only, by contract).
inline std::pair<double, std::array<double, 3>> part_bce_loss(
    const std::array<double, 3>& pred, const std::array<double, 3>& target,
    const LossConfig& cfg = {}) {
  double value = 0.0;
  std::array<double, 3> grad{};
  for (int u = 0; u < 3; ++u) {
    const ScalarLoss term = binary_cross_entropy(pred[u], target[u], cfg);
    value += term.value;
    grad[u] = term.grad;
  }
  return {value, grad};
}

/// Piecewise quadratic/linear loss: 0.5 x^2 / beta below the transition
/// point, |x| - beta/2 above.
inline ScalarLoss smooth_l1(double x, const LossConfig& cfg = {}) {
  const double beta = cfg.smooth_l1_beta;
  if (std::abs(x) < beta) {
    return {0.5 * x * x / beta, x / beta};
  }
  return {std::abs(x) - 0.5 * beta, x > 0.0 ? 1.0 : -1.0};
}

/// Predicted quantities scored by the bin-based box loss: one logit vector
/// per binned head plus the seven regressed residuals.
struct AnchorFreePrediction {
  std::vector<double> bin_x_logits;
  std::vector<double> bin_y_logits;
  std::vector<double> bin_theta_logits;
  double res_x = 0.0, res_y = 0.0, res_theta = 0.0;
  double res_z = 0.0, res_h = 0.0, res_w = 0.0, res_l = 0.0;
};

struct AnchorFreeBoxLoss {
  double value = 0.0;
  std::vector<double> d_bin_x, d_bin_y, d_bin_theta;
  // Residual gradients in the order x, y, theta, z, h, w, l.
  std::array<double, 7> d_res{};
};

namespace detail {

// Softmax cross entropy against a one-hot target; grad = softmax - onehot.
inline double softmax_ce(const std::vector<double>& logits, int32_t target,
                         std::vector<double>& grad) {
  if (target < 0 || target >= static_cast<int32_t>(logits.size())) {
    throw std::invalid_argument("softmax_ce: target bin out of range");
  }
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  grad.resize(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) {
    grad[i] = std::exp(logits[i] - lse);
  }
  grad[target] -= 1.0;
  return lse - logits[target];
}

}  // namespace detail

/// Bin classification (cross entropy) for x, y and theta plus smooth-L1 on
/// all residuals. Foreground points only, by contract.
inline AnchorFreeBoxLoss anchor_free_box_loss(const AnchorFreePrediction& pred,
                                              const AnchorFreeTarget& gt,
                                              const LossConfig& cfg = {}) {
  AnchorFreeBoxLoss out;
  out.value += detail::softmax_ce(pred.bin_x_logits, gt.bin_x, out.d_bin_x);
  out.value += detail::softmax_ce(pred.bin_y_logits, gt.bin_y, out.d_bin_y);
  out.value += detail::softmax_ce(pred.bin_theta_logits, gt.bin_theta, out.d_bin_theta);

  const std::array<double, 7> diffs{
      pred.res_x - gt.res_x, pred.res_y - gt.res_y, pred.res_theta - gt.res_theta,
      pred.res_z - gt.res_z, pred.res_h - gt.res_h, pred.res_w - gt.res_w,
      pred.res_l - gt.res_l};
  for (int i = 0; i < 7; ++i) {
    const ScalarLoss term = smooth_l1(diffs[i], cfg);
    out.value += term.value;
    out.d_res[i] = term.grad;
  }
  return out;
}

struct AnchorBoxLoss {
  double value = 0.0;
  // Gradients in the field order dx, dy, dz, dl, dh, dw, dtheta.
  std::array<double, 7> d_res{};
  double d_dir_logit = 0.0;
};

/// Smooth-L1 over the seven anchor residuals plus the weighted direction
/// term: beta * BCE(sigmoid(dir_logit), dir). Positive anchors only, by
/// contract.
inline AnchorBoxLoss anchor_box_loss(const AnchorResidualTarget& pred,
                                     const AnchorResidualTarget& gt, double dir_logit,
                                     const LossConfig& cfg = {}) {
  AnchorBoxLoss out;
  const std::array<double, 7> diffs{pred.dx - gt.dx, pred.dy - gt.dy, pred.dz - gt.dz,
                                    pred.dl - gt.dl, pred.dh - gt.dh, pred.dw - gt.dw,
                                    pred.dtheta - gt.dtheta};
  for (int i = 0; i < 7; ++i) {
    const ScalarLoss term = smooth_l1(diffs[i], cfg);
    out.value += term.value;
    out.d_res[i] = term.grad;
  }
  const double sig = 1.0 / (1.0 + std::exp(-dir_logit));
  const double q = detail::clamp_prob(sig, cfg);
  out.value += cfg.dir_weight_beta * (-gt.dir * std::log(q) - (1.0 - gt.dir) * std::log(1.0 - q));
  out.d_dir_logit = cfg.dir_weight_beta * (sig - gt.dir);
  return out;
}

struct CornerLoss {
  double value = 0.0;
  // Gradient w.r.t. the predicted box in the order x, y, z, h, w, l, theta.
  std::array<double, 7> grad{};
};

/// Corner regularization: mean smooth-L1 distance between corresponding
/// corners, taking the smaller of the ground truth and the ground truth
/// flipped by pi (heading sign is not penalized).
inline CornerLoss corner_loss(const BoxParams& pred, const BoxParams& gt,
                              const LossConfig& cfg = {}) {
  const auto pred_corners = box_corners(pred);

  auto eval = [&](const BoxParams& target, CornerLoss& out) {
    const auto tc = box_corners(target);
    const double c = std::cos(pred.theta), s = std::sin(pred.theta);
    static constexpr double sx[4] = {+0.5, -0.5, -0.5, +0.5};
    static constexpr double sy[4] = {+0.5, +0.5, -0.5, -0.5};
    out = CornerLoss{};
    for (int i = 0; i < 8; ++i) {
      const Vec3 d = pred_corners[i] - tc[i];
      const double dist = d.norm();
      const ScalarLoss term = smooth_l1(dist, cfg);
      out.value += term.value / 8.0;
      if (dist <= 0.0) continue;
      const double scale = term.grad / (8.0 * dist);
      const Vec3 dd = d * scale;  // d(loss)/d(corner position)
      const double lsx = sx[i % 4], lsy = sy[i % 4];
      const double lsz = i < 4 ? -0.5 : 0.5;
      const double ox = lsx * pred.l, oy = lsy * pred.w;  // local planar offset
      out.grad[0] += dd.x;
      out.grad[1] += dd.y;
      out.grad[2] += dd.z;
      out.grad[3] += dd.z * lsz;                                 // d/dh
      out.grad[4] += dd.x * (-lsy * s) + dd.y * (lsy * c);       // d/dw
      out.grad[5] += dd.x * (lsx * c) + dd.y * (lsx * s);        // d/dl
      out.grad[6] += dd.x * (-ox * s - oy * c) + dd.y * (ox * c - oy * s);  // d/dtheta
    }
  };

  CornerLoss direct, flipped;
  eval(gt, direct);
  eval(BoxParams(gt.center, gt.h, gt.w, gt.l, gt.theta + kPi), flipped);
  return direct.value <= flipped.value ? direct : flipped;
}

/// Pre-reduced loss components for the two stages. The part, box and
/// refinement terms are sums; the listed counts normalize them.
struct StageLossInputs {
  double seg_loss = 0.0;
  double part_loss_sum = 0.0;
  double num_foreground = 0.0;          // N_pos
  double box_loss_sum = 0.0;
  double num_box_positives = 0.0;       // M_pos
  double score_loss = 0.0;
  double box_refine_loss_sum = 0.0;
  double num_positive_proposals = 0.0;  // T_pos
};

struct StageLosses {
  double aware = 0.0;
  double aggregation = 0.0;
  double total = 0.0;
};

/// Composes the per-stage losses with equal stage weights:
/// aware = seg + part/N_pos + lambda * box/M_pos,
/// aggregation = score + refine/T_pos. A zero count drops its term.
inline StageLosses stage_losses(const StageLossInputs& in, const LossConfig& cfg = {}) {
  cfg.validate();
  auto ratio = [](double sum, double count) { return count > 0.0 ? sum / count : 0.0; };
  StageLosses out;
  out.aware = in.seg_loss + ratio(in.part_loss_sum, in.num_foreground) +
              cfg.box_weight_lambda * ratio(in.box_loss_sum, in.num_box_positives);
  out.aggregation = in.score_loss + ratio(in.box_refine_loss_sum, in.num_positive_proposals);
  out.total = out.aware + out.aggregation;
  return out;
}

/// Soft quality label from the proposal's 3D IoU with its ground truth.
inline double quality_target(double iou3d_value) {
  if (iou3d_value > 0.75) return 1.0;
  if (iou3d_value < 0.25) return 0.0;
  return 2.0 * iou3d_value - 0.5;
}

}  // namespace partgrid
