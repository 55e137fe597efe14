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
//
// Acceptance suite: one pass/fail line per criterion, each with its
// tolerance and runtime budget pinned here.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.hpp"
#include "oracles.hpp"
#include "partgrid/anchors.hpp"
#include "partgrid/backbone.hpp"
#include "partgrid/codec.hpp"
#include "partgrid/eval.hpp"
#include "partgrid/losses.hpp"
#include "partgrid/nms.hpp"
#include "partgrid/parallel.hpp"
#include "partgrid/part_label.hpp"
#include "partgrid/roi_pool.hpp"
#include "partgrid/synth.hpp"
#include "partgrid/voxel.hpp"
#include "test_support.hpp"

using namespace partgrid;

namespace {

struct Harness {
  int failures = 0;

  void criterion(int number, const std::string& title, double budget_seconds,
                 const std::function<bool(std::string&)>& body) {
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > budget_seconds) {
      ok = false;
      detail += (detail.empty() ? "" : "; ") + std::string("runtime ") + std::to_string(secs) +
                "s exceeds budget " + std::to_string(budget_seconds) + "s";
    }
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", ok ? "PASS" : "FAIL", number,
                title.c_str(), secs, detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

uint64_t fnv1a(const void* data, size_t bytes, uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
uint64_t fnv_vec(const std::vector<T>& v, uint64_t h) {
  return v.empty() ? h : fnv1a(v.data(), v.size() * sizeof(T), h);
}

// --------------------------------------------------------------------------
// Criterion bodies
// --------------------------------------------------------------------------

bool c1_quality_mapping(std::string& detail) {
  if (quality_target(0.8) != 1.0 || quality_target(0.1) != 0.0 ||
      std::abs(quality_target(0.5) - 0.5) > 1e-15) {
    detail = "spot values wrong";
    return false;
  }
  if (std::abs(quality_target(0.75) - 1.0) > 1e-12 || std::abs(quality_target(0.25)) > 1e-12) {
    detail = "discontinuous at the joins";
    return false;
  }
  for (double eps : {1e-9, 1e-7}) {
    if (std::abs(quality_target(0.75 + eps) - quality_target(0.75 - eps)) > 1e-6 ||
        std::abs(quality_target(0.25 + eps) - quality_target(0.25 - eps)) > 1e-6) {
      detail = "jump near a join";
      return false;
    }
  }
  return true;
}

bool c2_part_labels(std::string& detail) {
  Rng rng(2002);
  // Exact center mapping (the zero offset makes this exact in floats).
  for (int i = 0; i < 100; ++i) {
    const BoxParams b = test::random_box(rng, 40.0);
    const auto part = part_location(b.center, b);
    for (int u = 0; u < 3; ++u) {
      if (part[u] != 0.5) {
        detail = "center does not map to (0.5, 0.5, 0.5) exactly";
        return false;
      }
    }
  }
  // Inverse round trip on 1e5 random foreground points.
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const BoxParams b = test::random_box(rng, 60.0);
    const Vec3 p = test::random_point_in_box(rng, b);
    const Vec3 back = invert_part_location(part_location(p, b), b);
    worst = std::max(worst, (back - p).norm());
  }
  if (worst > 1e-9) {
    detail = "round-trip error " + std::to_string(worst);
    return false;
  }
  // Rigid-transform invariance.
  double worst_inv = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const BoxParams b = test::random_box(rng, 20.0);
    const Vec3 p = test::random_point_in_box(rng, b);
    const auto before = part_location(p, b);
    const double ang = rng.uniform(-kPi, kPi);
    const double c = std::cos(ang), s = std::sin(ang);
    const Vec3 shift{rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-4, 4)};
    const Vec3 mp{p.x * c - p.y * s + shift.x, p.x * s + p.y * c + shift.y, p.z + shift.z};
    const Vec3 mc{b.center.x * c - b.center.y * s + shift.x,
                  b.center.x * s + b.center.y * c + shift.y, b.center.z + shift.z};
    const auto after = part_location(mp, BoxParams(mc, b.h, b.w, b.l, b.theta + ang));
    for (int u = 0; u < 3; ++u) worst_inv = std::max(worst_inv, std::abs(after[u] - before[u]));
  }
  if (worst_inv > 1e-9) {
    detail = "rigid invariance error " + std::to_string(worst_inv);
    return false;
  }
  return true;
}

bool c3_codec_round_trips(std::string& detail) {
  Rng rng(2003);
  CodecConfig cfg;
  cfg.mean_sizes = {{1.56, 1.6, 3.9}};

  for (int i = 0; i < 10000; ++i) {
    const Vec3 p = test::random_point(rng, 40.0);
    const double s = cfg.search_range * 0.999;
    const BoxParams gt({p.x + rng.uniform(-s, s), p.y + rng.uniform(-s, s),
                        p.z + rng.uniform(-2, 2)},
                       rng.uniform(1.0, 2.2), rng.uniform(1.0, 2.2), rng.uniform(2.5, 5.0),
                       rng.uniform(-kPi, kPi));
    const BoxParams back = decode_anchor_free(p, encode_anchor_free(p, gt, 0, cfg), 0, cfg);
    if ((back.center - gt.center).norm() > 1e-6 ||
        test::angle_distance(back.theta, gt.theta) > 1e-6 || std::abs(back.h - gt.h) > 1e-6 ||
        std::abs(back.w - gt.w) > 1e-6 || std::abs(back.l - gt.l) > 1e-6) {
      detail = "anchor-free round trip failed at pair " + std::to_string(i);
      return false;
    }
  }
  for (int i = 0; i < 10000; ++i) {
    const BoxParams anchor = test::random_box(rng, 40.0);
    const BoxParams gt({anchor.center.x + rng.uniform(-2, 2),
                        anchor.center.y + rng.uniform(-2, 2),
                        anchor.center.z + rng.uniform(-1, 1)},
                       rng.uniform(1.0, 2.2), rng.uniform(0.6, 2.0), rng.uniform(1.5, 5.0),
                       anchor.theta + rng.uniform(-kPi / 2 + 1e-3, kPi / 2 - 1e-3));
    const BoxParams back = decode_anchor_residual(anchor, encode_anchor_residual(anchor, gt));
    if ((back.center - gt.center).norm() > 1e-6 ||
        test::angle_distance(back.theta, gt.theta) > 1e-6 || std::abs(back.l - gt.l) > 1e-6) {
      detail = "anchor-residual round trip failed at pair " + std::to_string(i);
      return false;
    }
  }
  for (int i = 0; i < 10000; ++i) {
    const BoxParams proposal = test::random_box(rng, 40.0);
    const BoxParams gt({proposal.center.x + rng.uniform(-1, 1),
                        proposal.center.y + rng.uniform(-1, 1),
                        proposal.center.z + rng.uniform(-0.5, 0.5)},
                       rng.uniform(1.0, 2.2), rng.uniform(0.6, 2.0), rng.uniform(1.5, 5.0),
                       proposal.theta + rng.uniform(-0.45, 0.45));
    const BoxParams back = decode_refine(proposal, encode_refine(proposal, gt));
    if ((back.center - gt.center).norm() > 1e-6 ||
        test::angle_distance(back.theta, gt.theta) > 1e-6) {
      detail = "refine round trip failed at pair " + std::to_string(i);
      return false;
    }
  }
  return true;
}

bool c4_roi_pooling(std::string& detail) {
  Rng rng(2004);
  const PoolSpec spec{14, 14, 14};

  for (int trial = 0; trial < 1000; ++trial) {
    const BoxParams box = test::random_box(rng, 8.0);
    const int n = 500;
    std::vector<Vec3> pts;
    std::vector<float> feats;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
      pts.push_back(rng.bernoulli(0.85) ? test::random_point_in_box(rng, box)
                                        : test::random_point(rng, 10.0));
      for (int c = 0; c < 4; ++c) feats.push_back(static_cast<float>(rng.uniform(-2, 2)));
    }

    // Independent oracle: explicit inverse rotation, per-point bin triple,
    // then a per-cell scan over the points.
    struct Binned {
      int ix, iy, iz;
      bool inside;
    };
    std::vector<Binned> bins(n);
    const double c = std::cos(-box.theta), s = std::sin(-box.theta);
    for (int i = 0; i < n; ++i) {
      const double dx = pts[i].x - box.center.x;
      const double dy = pts[i].y - box.center.y;
      const double dz = pts[i].z - box.center.z;
      const double qx = c * dx - s * dy;
      const double qy = s * dx + c * dy;
      bins[i].inside = std::abs(qx) <= box.l / 2 && std::abs(qy) <= box.w / 2 &&
                       std::abs(dz) <= box.h / 2;
      auto bin_of = [](double v, double half, int cells) {
        return std::clamp(static_cast<int>((v + half) * cells / (2 * half)), 0, cells - 1);
      };
      bins[i].ix = bin_of(qx, box.l / 2, spec.lx);
      bins[i].iy = bin_of(qy, box.w / 2, spec.ly);
      bins[i].iz = bin_of(dz, box.h / 2, spec.lz);
    }

    const PooledGrid max_got = roi_aware_pool(pts, feats, 4, box, spec, PoolMode::kMax);
    const PooledGrid avg_got = roi_aware_pool(pts, feats, 4, box, spec, PoolMode::kAvg);
    for (int ix = 0; ix < spec.lx; ++ix) {
      for (int iy = 0; iy < spec.ly; ++iy) {
        for (int iz = 0; iz < spec.lz; ++iz) {
          const size_t cell = max_got.cell_index(ix, iy, iz);
          float best[4] = {0, 0, 0, 0};
          double sum[4] = {0, 0, 0, 0};
          int count = 0;
          for (int i = 0; i < n; ++i) {
            if (!bins[i].inside || bins[i].ix != ix || bins[i].iy != iy || bins[i].iz != iz) {
              continue;
            }
            for (int ch = 0; ch < 4; ++ch) {
              const float f = feats[i * 4 + ch];
              best[ch] = count == 0 ? f : std::max(best[ch], f);
              sum[ch] += f;
            }
            ++count;
          }
          if ((count == 0) != max_got.is_empty(cell) || (count == 0) != avg_got.is_empty(cell)) {
            detail = "empty mask mismatch";
            return false;
          }
          for (int ch = 0; ch < 4; ++ch) {
            const float want_max = count == 0 ? 0.0f : best[ch];
            if (max_got.cell(cell)[ch] != want_max) {  // bitwise
              detail = "max value mismatch";
              return false;
            }
            const double want_avg = count == 0 ? 0.0 : sum[ch] / count;
            if (std::abs(avg_got.cell(cell)[ch] - want_avg) > 1e-6) {
              detail = "avg value mismatch";
              return false;
            }
          }
        }
      }
    }
  }

  // Ambiguity elimination: identical point set, different boxes, different masks.
  const BoxParams tight({0, 0, 0}, 1.0, 1.0, 2.0, 0.0);
  std::vector<Vec3> pts;
  std::vector<float> feats;
  for (int i = 0; i < 60; ++i) {
    pts.push_back(test::random_point_in_box(rng, tight, 0.05));
    feats.push_back(1.0f);
  }
  const BoxParams wide({0.4, 0.3, 0.2}, 1.8, 1.8, 2.8, 0.0);
  for (const Vec3& p : pts) {
    if (!point_in_box(p, wide)) {
      detail = "ambiguity fixture broken";
      return false;
    }
  }
  const PooledGrid ga = roi_aware_pool(pts, feats, 1, tight, spec, PoolMode::kMax);
  const PooledGrid gb = roi_aware_pool(pts, feats, 1, wide, spec, PoolMode::kMax);
  if (ga.empty == gb.empty) {
    detail = "identical masks for different proposals";
    return false;
  }
  return true;
}

bool c5_sparse_conv(std::string& detail) {
  Rng rng(2005);
  for (int trial = 0; trial < 50; ++trial) {
    SparseTensor t;
    t.dims = {static_cast<int32_t>(rng.uniform_int(8, 16)),
              static_cast<int32_t>(rng.uniform_int(8, 16)),
              static_cast<int32_t>(rng.uniform_int(8, 16))};
    t.channels = 3;
    const double density = rng.uniform(0.02, 0.25);
    for (int32_t i = 0; i < t.dims[0]; ++i) {
      for (int32_t j = 0; j < t.dims[1]; ++j) {
        for (int32_t k = 0; k < t.dims[2]; ++k) {
          if (rng.bernoulli(density)) t.coords.push_back({i, j, k});
        }
      }
    }
    t.features.resize(t.size() * 3);
    for (float& f : t.features) f = static_cast<float>(rng.uniform(-1, 1));

    for (const bool submanifold : {true, false}) {
      ConvSpec spec;
      spec.kernel = 3;
      spec.submanifold = submanifold;
      spec.stride = submanifold ? std::array<int32_t, 3>{1, 1, 1} : std::array<int32_t, 3>{2, 2, 2};
      spec.in_channels = 3;
      spec.out_channels = 4;
      spec.weights.resize(27ull * 3 * 4);
      for (float& w : spec.weights) w = static_cast<float>(rng.uniform(-0.5, 0.5));

      const SparseTensor out = conv_forward(t, spec);
      bool support_ok = false;
      const double diff = test::max_abs_diff(test::dense_conv(test::to_dense(t), spec), out,
                                             &support_ok);
      if (!support_ok || diff > 1e-5) {
        detail = (submanifold ? std::string("submanifold") : std::string("strided")) +
                 " mismatch " + std::to_string(diff);
        return false;
      }
    }
  }

  // Backbone output shapes.
  const Coord3 dims{32, 32, 16};
  SparseTensor t;
  t.dims = dims;
  t.channels = 3;
  std::set<int64_t> used;
  while (t.coords.size() < 800) {
    const Coord3 c{static_cast<int32_t>(rng.uniform_int(0, dims[0] - 1)),
                   static_cast<int32_t>(rng.uniform_int(0, dims[1] - 1)),
                   static_cast<int32_t>(rng.uniform_int(0, dims[2] - 1))};
    if (used.insert(pack_coord(c, dims)).second) t.coords.push_back(c);
  }
  t.features.resize(t.coords.size() * 3, 0.5f);
  sort_canonical(t);

  const BackboneConfig cfg;
  const BackboneOutput out = backbone_forward(t, cfg, init_backbone_weights(cfg, 3, 77));
  if (out.point_features.coords != t.coords ||
      out.point_features.channels != cfg.decoder_channels.back()) {
    detail = "per-point feature shape wrong";
    return false;
  }
  if (out.bev.nx != dims[0] / 8 || out.bev.ny != dims[1] / 8 ||
      out.bev.channels != (dims[2] / 16) * cfg.encoder_channels.back()) {
    detail = "BEV map shape wrong";
    return false;
  }
  return true;
}

bool c6_loss_gradients(std::string& detail) {
  Rng rng(2006);
  const LossConfig cfg;

  // Focal constants via the spot value.
  if (std::abs(focal_loss(0.5, true, cfg).value - 0.25 * 0.25 * std::log(2.0)) > 1e-12) {
    detail = "focal spot value (alpha_t = 0.25, gamma = 2) wrong";
    return false;
  }

  auto fd_ok = [&](const std::function<double(double)>& f, double x, double analytic) {
    const double numeric = test::central_difference(f, x, 1e-5);
    return test::gradient_close(analytic, numeric, 1e-4);
  };

  for (int i = 0; i < 100; ++i) {
    const double p = rng.uniform(0.05, 0.95);
    const bool fg = rng.bernoulli(0.5);
    if (!fd_ok([&](double q) { return focal_loss(q, fg, cfg).value; }, p,
               focal_loss(p, fg, cfg).grad)) {
      detail = "focal gradient";
      return false;
    }

    const std::array<double, 3> pred{rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
                                     rng.uniform(0.05, 0.95)};
    const std::array<double, 3> target{rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0, 1)};
    const auto bce = part_bce_loss(pred, target, cfg);
    for (int u = 0; u < 3; ++u) {
      if (!fd_ok(
              [&](double q) {
                auto p2 = pred;
                p2[u] = q;
                return part_bce_loss(p2, target, cfg).first;
              },
              pred[u], bce.second[u])) {
        detail = "part BCE gradient";
        return false;
      }
    }

    double x = rng.uniform(-3, 3);
    if (std::abs(std::abs(x) - cfg.smooth_l1_beta) < 1e-3) x += 0.01;
    if (!fd_ok([&](double q) { return smooth_l1(q, cfg).value; }, x, smooth_l1(x, cfg).grad)) {
      detail = "smooth-L1 gradient";
      return false;
    }

    // Composite anchor residual loss: one residual coordinate + the logit.
    AnchorResidualTarget pr, gt;
    pr.dx = rng.uniform(-0.8, 0.8);
    pr.dy = rng.uniform(-0.8, 0.8);
    pr.dtheta = rng.uniform(-0.8, 0.8);
    gt.dir = rng.bernoulli(0.5) ? 1 : 0;
    const double logit = rng.uniform(-2, 2);
    const auto abl = anchor_box_loss(pr, gt, logit, cfg);
    if (!fd_ok([&](double q) { return anchor_box_loss(pr, gt, q, cfg).value; }, logit,
               abl.d_dir_logit)) {
      detail = "direction logit gradient";
      return false;
    }
    if (!fd_ok(
            [&](double q) {
              auto p2 = pr;
              p2.dx = q;
              return anchor_box_loss(p2, gt, logit, cfg).value;
            },
            pr.dx, abl.d_res[0])) {
      detail = "anchor residual gradient";
      return false;
    }

    // Bin-based loss: a logit and a residual coordinate.
    AnchorFreePrediction fp;
    fp.bin_x_logits = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                       rng.uniform(-2, 2)};
    fp.bin_y_logits = fp.bin_x_logits;
    fp.bin_theta_logits = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    fp.res_x = rng.uniform(-0.4, 0.4);
    AnchorFreeTarget ft;
    ft.bin_x = static_cast<int32_t>(rng.uniform_int(0, 3));
    ft.bin_y = static_cast<int32_t>(rng.uniform_int(0, 3));
    ft.bin_theta = static_cast<int32_t>(rng.uniform_int(0, 1));
    const auto afl = anchor_free_box_loss(fp, ft, cfg);
    if (!fd_ok(
            [&](double q) {
              auto p2 = fp;
              p2.bin_x_logits[0] = q;
              return anchor_free_box_loss(p2, ft, cfg).value;
            },
            fp.bin_x_logits[0], afl.d_bin_x[0])) {
      detail = "bin logit gradient";
      return false;
    }

    // Corner loss over all 7 box parameters (off the flip tie by construction).
    const BoxParams gt_box = test::random_box(rng, 3.0);
    const BoxParams pred_box({gt_box.center.x + rng.uniform(-0.3, 0.3),
                              gt_box.center.y + rng.uniform(-0.3, 0.3),
                              gt_box.center.z + rng.uniform(-0.2, 0.2)},
                             gt_box.h * rng.uniform(0.92, 1.08), gt_box.w * rng.uniform(0.92, 1.08),
                             gt_box.l * rng.uniform(0.92, 1.08),
                             gt_box.theta + rng.uniform(-0.15, 0.15));
    const auto cl = corner_loss(pred_box, gt_box, cfg);
    auto corner_at = [&](int param, double q) {
      Vec3 c = pred_box.center;
      double h = pred_box.h, w = pred_box.w, l = pred_box.l, th = pred_box.theta;
      (param == 0 ? c.x : param == 1 ? c.y : param == 2 ? c.z
       : param == 3 ? h : param == 4 ? w : param == 5 ? l : th) = q;
      return corner_loss(BoxParams(c, h, w, l, th), gt_box, cfg).value;
    };
    const double vals[7] = {pred_box.center.x, pred_box.center.y, pred_box.center.z,
                            pred_box.h,        pred_box.w,        pred_box.l,
                            pred_box.theta};
    for (int pidx = 0; pidx < 7; ++pidx) {
      if (!fd_ok([&](double q) { return corner_at(pidx, q); }, vals[pidx], cl.grad[pidx])) {
        detail = "corner loss gradient (param " + std::to_string(pidx) + ")";
        return false;
      }
    }
  }
  return true;
}

bool c7_iou_and_nms(std::string& detail) {
  Rng rng(2007);
  double worst_bev = 0.0, worst_3d = 0.0;
  for (int i = 0; i < 500; ++i) {
    BoxParams a = test::random_box(rng, 2.0);
    BoxParams b = test::random_box(rng, 2.0);
    b.center.z = a.center.z + rng.uniform(-0.6, 0.6);
    worst_bev = std::max(worst_bev, std::abs(bev_iou(a, b) - test::mc_bev_iou(a, b, 250000, rng)));
    worst_3d = std::max(worst_3d, std::abs(iou3d(a, b) - test::mc_iou3d(a, b, 250000, rng)));
  }
  if (worst_bev > 0.01 || worst_3d > 0.01) {
    detail = "MC deviation bev=" + std::to_string(worst_bev) + " 3d=" + std::to_string(worst_3d);
    return false;
  }

  for (uint64_t seed = 1; seed <= 100; ++seed) {
    Rng nms_rng(seed);
    std::vector<ScoredBox> boxes;
    for (int i = 0; i < 200; ++i) {
      boxes.push_back({test::random_box(nms_rng, 14.0), nms_rng.uniform(0, 1)});
    }
    const double thresh = nms_rng.uniform(0.05, 0.7);
    for (const IouMetric metric : {IouMetric::kBev, IouMetric::k3d}) {
      const auto got = rotated_nms(boxes, thresh, metric);
      const auto want = test::reference_nms(boxes, thresh, [&](const BoxParams& x, const BoxParams& y) {
        return box_iou(x, y, metric);
      });
      if (got != want) {
        detail = "NMS keep-set mismatch at seed " + std::to_string(seed);
        return false;
      }
    }
  }
  return true;
}

bool c8_metrics(std::string& detail) {
  // Perfect detections: AP = 1.
  std::vector<EvalFrame> frames(2);
  auto car_at = [](double x, double y, double th) {
    return BoxParams({x, y, -1.0}, 1.56, 1.6, 3.9, th);
  };
  for (auto [f, boxes] : {std::pair<int, std::vector<BoxParams>>{0, {car_at(10, 0, 0), car_at(25, 5, 0.4)}},
                          {1, {car_at(14, -3, 1.0)}}}) {
    double score = 0.9;
    for (const BoxParams& b : boxes) {
      frames[f].ground_truths.push_back({b, 0, Difficulty::kEasy});
      frames[f].predictions.push_back({b, score, 0});
      score -= 0.1;
    }
  }
  if (std::abs(average_precision_11(frames, 0.7, 0, Difficulty::kEasy) - 1.0) > 1e-12) {
    detail = "perfect AP not 1";
    return false;
  }

  // Hand-computed 5-gt fixture (2 gts covered in the top-4, a third at k=5).
  EvalFrame fx;
  const std::vector<BoxParams> gts{car_at(10, 0, 0), car_at(20, 5, 0), car_at(30, -5, 0),
                                   car_at(40, 8, 0), car_at(50, -8, 0)};
  for (const BoxParams& g : gts) fx.ground_truths.push_back({g, 0, Difficulty::kEasy});
  fx.predictions = {{gts[0], 0.9, 0},        {gts[1], 0.8, 0},  {car_at(100, 0, 0), 0.7, 0},
                    {car_at(110, 0, 0), 0.6, 0}, {gts[2], 0.5, 0}, {car_at(120, 0, 0), 0.4, 0},
                    {car_at(130, 0, 0), 0.3, 0}, {car_at(140, 0, 0), 0.2, 0}};
  const std::vector<EvalFrame> fx_frames{fx};
  if (std::abs(proposal_recall(fx_frames, 4, 0.7) - 0.4) > 1e-12 ||
      std::abs(proposal_recall(fx_frames, 5, 0.7) - 0.6) > 1e-12 ||
      std::abs(proposal_recall(fx_frames, 8, 0.7) - 0.6) > 1e-12) {
    detail = "5-gt fixture recall wrong";
    return false;
  }

  // Monotone in k.
  double prev = -1.0;
  for (size_t k : {1u, 2u, 3u, 4u, 5u, 6u, 8u}) {
    const double r = proposal_recall(fx_frames, k, 0.7);
    if (r < prev) {
      detail = "recall not monotone in k";
      return false;
    }
    prev = r;
  }

  // Pearson vs the two-pass formula.
  Rng rng(2008);
  std::vector<double> xs, ys;
  for (int i = 0; i < 500; ++i) {
    xs.push_back(rng.uniform(-3, 3));
    ys.push_back(0.7 * xs.back() + rng.normal(0, 0.5));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxy += xs[i] * ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
  }
  const double want = (sxy / n - sx / n * sy / n) /
                      std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  if (std::abs(pearson_correlation(xs, ys) - want) > 1e-9) {
    detail = "pearson mismatch";
    return false;
  }
  return true;
}

bool c9_anchor_counts(std::string& detail) {
  VoxelGridSpec grid;
  grid.range_min = {0.0, -40.0, -3.0};
  grid.range_max = {70.4, 40.0, 1.0};
  grid.voxel_size = {0.05, 0.05, 0.1};
  const Coord3 dims = grid.grid_dims();
  const int32_t nx = dims[0] / 8, ny = dims[1] / 8;
  size_t one_class = 0, three_class = 0;
  for (const AnchorClassSpec& cls : kitti_anchor_classes()) {
    const size_t count = generate_anchors(nx, ny, cls, grid).size();
    if (one_class == 0) one_class = count;
    three_class += count;
  }
  detail = std::to_string(one_class) + " / " + std::to_string(three_class) + " anchors";
  const bool one_ok = one_class >= 63360 && one_class <= 77440;      // 70.4k +- 10%
  const bool three_ok = three_class >= 190080 && three_class <= 232320;  // 211.2k +- 10%
  return one_ok && three_ok;
}

struct PipelineResult {
  uint64_t hash = 0;
  double elapsed_seconds = 0.0;
};

PipelineResult run_pipeline(int threads) {
  const auto t0 = std::chrono::steady_clock::now();

  VoxelGridSpec grid;
  grid.range_min = {0.0, -20.0, -3.0};
  grid.range_max = {35.2, 20.0, 1.0};
  grid.voxel_size = {0.1, 0.1, 0.25};

  SynthSpec synth;
  synth.area = grid;
  synth.num_objects = 5;
  synth.points_per_object = 300;
  synth.clutter_points = 2500;

  CodecConfig codec;
  codec.mean_sizes = {{1.56, 1.6, 3.9}};

  BackboneConfig bb_cfg;
  const WeightStore weights = init_backbone_weights(bb_cfg, 3, 4242);
  const AnchorClassSpec car = kitti_anchor_classes()[0];
  const Coord3 dims = grid.grid_dims();
  const auto anchors = generate_anchors(dims[0] / 8, dims[1] / 8, car, grid);
  const PoolSpec pool_spec{14, 14, 14};

  const int num_scenes = 100;
  std::vector<uint64_t> scene_hashes(num_scenes, 0);
  std::vector<EvalFrame> frames(num_scenes);

  parallel_for(num_scenes, threads, [&](size_t begin, size_t end) {
    for (size_t idx = begin; idx < end; ++idx) {
      const Scene scene = synth_scene(synth, 9000 + idx);
      uint64_t h = fnv1a(&idx, sizeof(idx));

      // Labels.
      const auto labels = compute_part_labels(scene.points, scene.boxes);
      for (const PartLabel& l : labels) {
        if (l.foreground) h = fnv1a(l.part.data(), sizeof(l.part), h);
      }

      // Voxels.
      const SparseVoxelTensor vox = voxelize(scene.points, grid);
      h = fnv_vec(vox.features, h);

      // Anchor-free targets for a capped number of foreground points.
      int encoded = 0;
      for (size_t i = 0; i < scene.points.size() && encoded < 64; ++i) {
        if (!labels[i].foreground) continue;
        const auto t =
            encode_anchor_free(scene.points[i], scene.boxes[labels[i].box_index], 0, codec);
        h = fnv1a(&t.res_x, sizeof(t.res_x), h);
        h = fnv1a(&t.bin_x, sizeof(t.bin_x), h);
        ++encoded;
      }

      // Anchor assignment + residual targets.
      const auto assignment = assign_anchors(anchors, scene.boxes, car);
      for (size_t a = 0; a < anchors.size(); ++a) {
        if (assignment.labels[a] < 0) continue;
        const auto t = encode_anchor_residual(anchors[a], scene.boxes[assignment.labels[a]]);
        h = fnv1a(&t.dx, sizeof(t.dx), h);
      }

      // Backbone.
      const BackboneOutput bb = backbone_forward(vox, bb_cfg, weights);
      h = fnv_vec(bb.point_features.features, h);
      h = fnv_vec(bb.bev.features, h);

      // Proposals: jittered gts scored by their true IoU quality.
      Rng prop_rng(7000 + idx);
      std::vector<ScoredBox> proposals;
      for (const BoxParams& gt : scene.boxes) {
        for (int j = 0; j < 5; ++j) {
          const BoxParams prop({gt.center.x + prop_rng.uniform(-0.8, 0.8),
                                gt.center.y + prop_rng.uniform(-0.8, 0.8),
                                gt.center.z + prop_rng.uniform(-0.2, 0.2)},
                               gt.h * prop_rng.uniform(0.9, 1.1),
                               gt.w * prop_rng.uniform(0.9, 1.1),
                               gt.l * prop_rng.uniform(0.9, 1.1),
                               gt.theta + prop_rng.uniform(-0.2, 0.2));
          proposals.push_back({prop, quality_target(iou3d(prop, gt))});
        }
      }
      const auto kept = select_proposals(proposals, 100, 0.7, IouMetric::kBev);
      h = fnv_vec(kept, h);

      // RoI-aware pooling of the kept proposals.
      std::vector<float> feats;
      feats.reserve(scene.points.size() * 3);
      for (const Vec3& p : scene.points) {
        feats.push_back(static_cast<float>(p.x));
        feats.push_back(static_cast<float>(p.y));
        feats.push_back(static_cast<float>(p.z));
      }
      for (int32_t kidx : kept) {
        const PooledGrid g = roi_aware_pool(scene.points, feats, 3, proposals[kidx].box,
                                            pool_spec, PoolMode::kAvg);
        h = fnv_vec(g.values, h);
        const PooledGrid down = sparse_downpool(g);
        h = fnv_vec(down.values, h);
      }

      // Evaluation frame.
      for (const BoxParams& gt : scene.boxes) {
        frames[idx].ground_truths.push_back({gt, 0, Difficulty::kEasy});
      }
      for (int32_t kidx : kept) {
        frames[idx].predictions.push_back({proposals[kidx].box, proposals[kidx].score, 0});
      }
      scene_hashes[idx] = h;
    }
  });

  uint64_t total = fnv_vec(scene_hashes, 1469598103934665603ull);
  const double ap = average_precision_11(frames, 0.5, 0, Difficulty::kEasy);
  const double recall = proposal_recall(frames, 100, 0.5);
  total = fnv1a(&ap, sizeof(ap), total);
  total = fnv1a(&recall, sizeof(recall), total);

  PipelineResult result;
  result.hash = total;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

bool c10_end_to_end(std::string& detail) {
  const PipelineResult single = run_pipeline(1);
  if (single.elapsed_seconds >= 120.0) {
    detail = "single-threaded run took " + std::to_string(single.elapsed_seconds) + "s";
    return false;
  }
  const PipelineResult threaded = run_pipeline(8);
  if (single.hash != threaded.hash) {
    detail = "outputs differ between --threads 1 and --threads 8";
    return false;
  }
  std::ostringstream os;
  os << "100 scenes in " << single.elapsed_seconds << "s single-threaded, hash 0x" << std::hex
     << single.hash;
  detail = os.str();
  return true;
}

bool c11_performance(std::string& detail) {
  VoxelGridSpec grid;
  grid.range_min = {0.0, -40.0, -3.0};
  grid.range_max = {70.4, 40.0, 1.0};
  grid.voxel_size = {0.05, 0.05, 0.1};

  // ~120k points clustered the way scans are; must land in the ~16k
  // non-empty voxel regime of real sweeps.
  const auto points = synth_scan_points(grid, 8000, 15, 11);
  const size_t voxels = voxelize(points, grid).size();
  if (voxels < 8000 || voxels > 40000) {
    detail = "voxel count " + std::to_string(voxels) + " outside the 8k-40k band";
    return false;
  }

  std::vector<double> vox_ms;
  for (int rep = 0; rep < 20; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto t = voxelize(points, grid);
    const auto t1 = std::chrono::steady_clock::now();
    if (t.size() != voxels) {
      detail = "nondeterministic voxel count";
      return false;
    }
    vox_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(vox_ms.begin(), vox_ms.end());
  const double vox_p95 = vox_ms[static_cast<size_t>(0.95 * vox_ms.size())];

  // 100 proposals x 14^3 pooling on a realistic scene.
  SynthSpec synth;
  synth.area = grid;
  synth.num_objects = 10;
  synth.points_per_object = 600;
  synth.clutter_points = 10000;
  const Scene scene = synth_scene(synth, 12);
  std::vector<float> feats;
  for (const Vec3& p : scene.points) {
    feats.push_back(static_cast<float>(p.x));
    feats.push_back(static_cast<float>(p.y));
    feats.push_back(static_cast<float>(p.z));
  }
  Rng rng(13);
  std::vector<BoxParams> proposals;
  while (proposals.size() < 100 && !scene.boxes.empty()) {
    const BoxParams& b = scene.boxes[proposals.size() % scene.boxes.size()];
    proposals.emplace_back(Vec3{b.center.x + rng.uniform(-0.4, 0.4),
                                b.center.y + rng.uniform(-0.4, 0.4),
                                b.center.z + rng.uniform(-0.1, 0.1)},
                           b.h, b.w, b.l, b.theta + rng.uniform(-0.15, 0.15));
  }
  const PoolSpec spec{14, 14, 14};
  std::vector<double> pool_ms;
  for (int rep = 0; rep < 20; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const BoxParams& box : proposals) {
      const PooledGrid g = roi_aware_pool(scene.points, feats, 3, box, spec, PoolMode::kMax);
      (void)g;
    }
    const auto t1 = std::chrono::steady_clock::now();
    pool_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(pool_ms.begin(), pool_ms.end());
  const double pool_p95 = pool_ms[static_cast<size_t>(0.95 * pool_ms.size())];

  std::ostringstream os;
  os << "voxelize p95 " << vox_p95 << "ms over " << points.size() << " points -> " << voxels
     << " voxels; pooling p95 " << pool_p95 << "ms";
  detail = os.str();
  return vox_p95 < 50.0 && pool_p95 < 100.0;
}

}  // namespace

int main() {
  Harness h;
  h.criterion(1, "IoU quality mapping, exact with continuity at the joins", 1.0,
              c1_quality_mapping);
  h.criterion(2, "part labels: center at (0.5,0.5,0.5), 1e5 inverse round trips, rigid invariance",
              10.0, c2_part_labels);
  h.criterion(3, "codec round trips: anchor-free, anchor-residual, refine (1e4 pairs each)", 10.0,
              c3_codec_round_trips);
  h.criterion(4, "RoI-aware pooling equals the brute-force oracle; proposal masks disambiguate",
              30.0, c4_roi_pooling);
  h.criterion(5, "sparse conv vs dense oracle (1e-5); backbone output shapes exact", 60.0,
              c5_sparse_conv);
  h.criterion(6, "loss gradients vs central differences (rel 1e-4); focal constants", 10.0,
              c6_loss_gradients);
  h.criterion(7, "rotated IoU vs Monte-Carlo (0.01); NMS equals the O(n^2) reference (100 seeds)",
              60.0, c7_iou_and_nms);
  h.criterion(8, "metrics: perfect AP, recall monotonicity, 5-gt fixture, Pearson two-pass", 10.0,
              c8_metrics);
  h.criterion(9, "anchor counts: 70.4k per class, 211.2k for three classes (+-10%)", 5.0,
              c9_anchor_counts);
  h.criterion(10, "end-to-end synthetic smoke over 100 scenes, thread-count invariant", 300.0,
              c10_end_to_end);
  h.criterion(11, "performance: voxelize 120k points < 50ms p95; 100x14^3 pooling < 100ms p95",
              120.0, c11_performance);

  if (h.failures > 0) {
    std::printf("%d criterion(s) failed\n", h.failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
