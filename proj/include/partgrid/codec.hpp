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
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "partgrid/geom.hpp"

namespace partgrid {

class OutOfSearchRangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClassMeanSize {
  double h = 0.0, w = 0.0, l = 0.0;
};

/// Parameters of the bin-based (anchor-free) codec. The defaults are a
/// conventional car-scale setting and are fully configurable.
struct CodecConfig {
  double search_range = 3.0;  // S, meters, per planar axis
  double bin_size = 0.5;      // delta, meters
  int32_t num_theta_bins = 12;
  std::vector<ClassMeanSize> mean_sizes;

  int32_t num_center_bins() const {
    return static_cast<int32_t>(std::llround(2.0 * search_range / bin_size));
  }
  double theta_bin_size() const { return 2.0 * kPi / num_theta_bins; }

  void validate() const {
    if (!(search_range > 0.0) || !(bin_size > 0.0)) {
      throw std::invalid_argument("CodecConfig: search_range and bin_size must be positive");
    }
    const double q = 2.0 * search_range / bin_size;
    if (std::abs(q - std::llround(q)) > 1e-9) {
      throw std::invalid_argument("CodecConfig: 2*search_range must be an integer multiple of bin_size");
    }
    if (num_theta_bins < 2) {
      throw std::invalid_argument("CodecConfig: num_theta_bins must be >= 2");
    }
    for (const ClassMeanSize& m : mean_sizes) {
      if (!(m.h > 0.0) || !(m.w > 0.0) || !(m.l > 0.0)) {
        throw std::invalid_argument("CodecConfig: mean sizes must be positive");
      }
    }
  }

  const ClassMeanSize& mean_size(size_t class_index) const {
    if (class_index >= mean_sizes.size()) {
      throw std::invalid_argument("CodecConfig: class index " + std::to_string(class_index) +
                                  " out of range");
    }
    return mean_sizes[class_index];
  }
};

/// Bin-based regression target of a foreground point: planar center bins with
/// in-bin residuals, direct z offset, orientation bin + residual, and size
/// residuals against the class mean.
struct AnchorFreeTarget {
  int32_t bin_x = 0;
  int32_t bin_y = 0;
  double res_x = 0.0;  // within-bin, normalized by bin_size, in [-0.5, 0.5]
  double res_y = 0.0;
  double res_z = 0.0;  // meters
  int32_t bin_theta = 0;
  double res_theta = 0.0;  // in [-1, 1]
  double res_h = 0.0;      // (gt - mean) / mean
  double res_w = 0.0;
  double res_l = 0.0;
};

/// Residual target of an anchor, sine-encoded orientation plus a binary
/// direction class resolving the half-circle.
struct AnchorResidualTarget {
  double dx = 0.0, dy = 0.0, dz = 0.0;
  double dl = 0.0, dh = 0.0, dw = 0.0;
  double dtheta = 0.0;
  int32_t dir = 0;
};

namespace detail {

inline double wrap_2pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  return r;
}

struct BinSplit {
  int32_t bin;
  double res;
};

// shifted in [0, extent]; residual normalized so that +-half covers one bin.
inline BinSplit split_bins(double shifted, double bin_size, int32_t num_bins, double res_scale) {
  int32_t bin = static_cast<int32_t>(std::floor(shifted / bin_size));
  bin = std::clamp(bin, 0, num_bins - 1);
  const double res = res_scale * (shifted - (bin * bin_size + 0.5 * bin_size));
  return {bin, res};
}

}  // namespace detail

inline AnchorFreeTarget encode_anchor_free(const Vec3& p, const BoxParams& gt,
                                           size_t class_index, const CodecConfig& cfg) {
  cfg.validate();
  const double S = cfg.search_range;
  const double delta = cfg.bin_size;
  const double off_x = gt.center.x - p.x;
  const double off_y = gt.center.y - p.y;
  if (std::abs(off_x) > S || std::abs(off_y) > S) {
    throw OutOfSearchRangeError("encode_anchor_free: center offset exceeds the search range");
  }

  AnchorFreeTarget t;
  const auto bx = detail::split_bins(off_x + S, delta, cfg.num_center_bins(), 1.0 / delta);
  const auto by = detail::split_bins(off_y + S, delta, cfg.num_center_bins(), 1.0 / delta);
  t.bin_x = bx.bin;
  t.res_x = bx.res;
  t.bin_y = by.bin;
  t.res_y = by.res;
  t.res_z = gt.center.z - p.z;

  const double omega = cfg.theta_bin_size();
  const double shifted = detail::wrap_2pi(gt.theta + 0.5 * omega);
  const auto bt = detail::split_bins(shifted, omega, cfg.num_theta_bins, 2.0 / omega);
  t.bin_theta = bt.bin;
  t.res_theta = bt.res;

  const ClassMeanSize& mean = cfg.mean_size(class_index);
  t.res_h = (gt.h - mean.h) / mean.h;
  t.res_w = (gt.w - mean.w) / mean.w;
  t.res_l = (gt.l - mean.l) / mean.l;
  return t;
}

inline BoxParams decode_anchor_free(const Vec3& p, const AnchorFreeTarget& t,
                                    size_t class_index, const CodecConfig& cfg) {
  cfg.validate();
  const double S = cfg.search_range;
  const double delta = cfg.bin_size;
  const double omega = cfg.theta_bin_size();
  const ClassMeanSize& mean = cfg.mean_size(class_index);

  Vec3 center;
  center.x = p.x - S + t.bin_x * delta + 0.5 * delta + t.res_x * delta;
  center.y = p.y - S + t.bin_y * delta + 0.5 * delta + t.res_y * delta;
  center.z = p.z + t.res_z;
  const double theta = t.bin_theta * omega + 0.5 * t.res_theta * omega;
  return BoxParams(center, mean.h * (1.0 + t.res_h), mean.w * (1.0 + t.res_w),
                   mean.l * (1.0 + t.res_l), normalize_angle(theta));
}

inline AnchorResidualTarget encode_anchor_residual(const BoxParams& anchor, const BoxParams& gt) {
  const double d = std::sqrt(anchor.l * anchor.l + anchor.w * anchor.w);
  AnchorResidualTarget t;
  t.dx = (gt.center.x - anchor.center.x) / d;
  t.dy = (gt.center.y - anchor.center.y) / d;
  t.dz = (gt.center.z - anchor.center.z) / anchor.h;
  t.dl = std::log(gt.l / anchor.l);
  t.dh = std::log(gt.h / anchor.h);
  t.dw = std::log(gt.w / anchor.w);
  t.dtheta = std::sin(gt.theta - anchor.theta);
  t.dir = gt.theta >= 0.0 ? 1 : 0;
  return t;
}

/// Inverts encode_anchor_residual. The sine encoding leaves two candidate
/// angles per half-period; the direction bit picks the candidate whose sign
/// matches, preferring the smaller angular correction. Recovery is exact for
/// |theta_gt - theta_anchor| < pi/2.
inline BoxParams decode_anchor_residual(const BoxParams& anchor, const AnchorResidualTarget& t) {
  const double d = std::sqrt(anchor.l * anchor.l + anchor.w * anchor.w);
  Vec3 center{anchor.center.x + t.dx * d, anchor.center.y + t.dy * d,
              anchor.center.z + t.dz * anchor.h};
  const double h = anchor.h * std::exp(t.dh);
  const double w = anchor.w * std::exp(t.dw);
  const double l = anchor.l * std::exp(t.dl);

  const double s = std::clamp(t.dtheta, -1.0, 1.0);
  const double small = std::asin(s);
  const double cand1 = normalize_angle(anchor.theta + small);
  const double cand2 = normalize_angle(anchor.theta + kPi - small);
  const bool want_positive = t.dir == 1;
  double theta = cand1;
  if ((cand1 >= 0.0) != want_positive && (cand2 >= 0.0) == want_positive) {
    theta = cand2;
  }
  return BoxParams(center, h, w, l, theta);
}

/// Stage-II refinement target: same residual form as the anchor codec but the
/// angle is encoded as the raw difference (proposals are IoU-constrained to a
/// small angular error), so no direction bit is involved.
inline AnchorResidualTarget encode_refine(const BoxParams& proposal, const BoxParams& gt) {
  AnchorResidualTarget t = encode_anchor_residual(proposal, gt);
  t.dtheta = gt.theta - proposal.theta;
  t.dir = 0;
  return t;
}

inline BoxParams decode_refine(const BoxParams& proposal, const AnchorResidualTarget& t) {
  const double d = std::sqrt(proposal.l * proposal.l + proposal.w * proposal.w);
  Vec3 center{proposal.center.x + t.dx * d, proposal.center.y + t.dy * d,
              proposal.center.z + t.dz * proposal.h};
  return BoxParams(center, proposal.h * std::exp(t.dh), proposal.w * std::exp(t.dw),
                   proposal.l * std::exp(t.dl), normalize_angle(proposal.theta + t.dtheta));
}

}  // namespace partgrid
