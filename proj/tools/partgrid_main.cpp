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

#include <algorithm>
#include <chrono>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "partgrid/anchors.hpp"
#include "partgrid/augment.hpp"
#include "partgrid/backbone.hpp"
#include "partgrid/codec.hpp"
#include "partgrid/eval.hpp"
#include "partgrid/kitti_io.hpp"
#include "partgrid/log.hpp"
#include "partgrid/losses.hpp"
#include "partgrid/nms.hpp"
#include "partgrid/parallel.hpp"
#include "partgrid/part_label.hpp"
#include "partgrid/roi_pool.hpp"
#include "partgrid/serialize.hpp"
#include "partgrid/synth.hpp"
#include "partgrid/voxel.hpp"

namespace pg = partgrid;

namespace {

struct RunConfig {
  pg::VoxelGridSpec voxel;
  pg::CodecConfig codec;
  pg::PoolSpec pool;
  pg::BackboneConfig backbone;
  pg::SynthSpec synth;
  uint64_t seed = 0;
  int threads = 1;

  RunConfig() {
    codec.mean_sizes = {{1.56, 1.6, 3.9}};
    synth.area = voxel;
  }
};

pg::Vec3 vec3_from(const pg::Json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void overlay_config(RunConfig& cfg, const std::string& path) {
  const pg::Json doc = pg::load_json(path);
  if (doc.contains("voxel")) {
    const pg::Json& v = doc["voxel"];
    if (v.contains("range_min")) cfg.voxel.range_min = vec3_from(v["range_min"]);
    if (v.contains("range_max")) cfg.voxel.range_max = vec3_from(v["range_max"]);
    if (v.contains("voxel_size")) cfg.voxel.voxel_size = vec3_from(v["voxel_size"]);
    cfg.synth.area = cfg.voxel;
  }
  if (doc.contains("codec")) {
    const pg::Json& c = doc["codec"];
    cfg.codec.search_range = c.value("search_range", cfg.codec.search_range);
    cfg.codec.bin_size = c.value("bin_size", cfg.codec.bin_size);
    cfg.codec.num_theta_bins = c.value("num_theta_bins", cfg.codec.num_theta_bins);
    if (c.contains("mean_sizes")) {
      cfg.codec.mean_sizes.clear();
      for (const pg::Json& m : c["mean_sizes"]) {
        cfg.codec.mean_sizes.push_back(
            {m.at("h").get<double>(), m.at("w").get<double>(), m.at("l").get<double>()});
      }
    }
  }
  if (doc.contains("pool")) {
    const pg::Json& p = doc["pool"];
    cfg.pool.lx = p.value("lx", cfg.pool.lx);
    cfg.pool.ly = p.value("ly", cfg.pool.ly);
    cfg.pool.lz = p.value("lz", cfg.pool.lz);
  }
  if (doc.contains("synth")) {
    const pg::Json& s = doc["synth"];
    cfg.synth.num_objects = s.value("objects", cfg.synth.num_objects);
    cfg.synth.points_per_object = s.value("points_per_object", cfg.synth.points_per_object);
    cfg.synth.clutter_points = s.value("clutter", cfg.synth.clutter_points);
  }
}

pg::Scene load_scene(const std::string& scene_path, const std::string& velodyne_path,
                     const std::string& boxes_path) {
  pg::Scene scene;
  if (!scene_path.empty()) {
    return pg::scene_from_json(pg::load_json(scene_path));
  }
  for (const pg::PointIntensity& pt : pg::read_velodyne(velodyne_path)) {
    scene.points.push_back(pt.p);
  }
  if (!boxes_path.empty()) {
    const pg::Json doc = pg::load_json(boxes_path);
    for (const pg::Json& b : doc.at("boxes")) {
      scene.boxes.push_back(pg::box_from_json(b));
    }
  }
  return scene;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

int run_synth(const RunConfig& cfg, const std::string& out, const std::string& velodyne_out) {
  const pg::Scene scene = pg::synth_scene(cfg.synth, cfg.seed);
  pg::save_json(out, pg::to_json(scene));
  if (!velodyne_out.empty()) {
    std::vector<pg::PointIntensity> pts(scene.points.size());
    for (size_t i = 0; i < pts.size(); ++i) pts[i].p = scene.points[i];
    pg::write_velodyne(velodyne_out, pts);
  }
  pg::log_info("synth: " + std::to_string(scene.points.size()) + " points, " +
               std::to_string(scene.boxes.size()) + " boxes");
  return 0;
}

int run_gen_labels(const pg::Scene& scene, const std::string& out, std::string summary_path) {
  const auto labels = pg::compute_part_labels(scene.points, scene.boxes);
  pg::write_label_records(out, scene.points, labels);

  size_t num_fg = 0;
  std::vector<size_t> per_box(scene.boxes.size(), 0);
  for (const pg::PartLabel& l : labels) {
    if (l.foreground) {
      ++num_fg;
      ++per_box[l.box_index];
    }
  }
  if (summary_path.empty()) summary_path = out + ".json";
  pg::save_json(summary_path, pg::Json{{"num_points", labels.size()},
                                       {"num_foreground", num_fg},
                                       {"num_boxes", scene.boxes.size()},
                                       {"per_box_counts", per_box}});
  return 0;
}

int run_voxelize(const RunConfig& cfg, const pg::Scene& scene, const std::string& out) {
  const pg::SparseVoxelTensor t = pg::voxelize(scene.points, cfg.voxel);
  pg::save_sparse_tensor(out, t);
  pg::log_info("voxelize: " + std::to_string(t.size()) + " non-empty voxels");
  return 0;
}

int run_encode(const RunConfig& cfg, const pg::Scene& scene, const std::string& strategy,
               const std::string& out) {
  pg::Json doc{{"strategy", strategy}};
  if (strategy == "free") {
    const auto labels = pg::compute_part_labels(scene.points, scene.boxes);
    pg::Json targets = pg::Json::array();
    size_t skipped = 0;
    for (size_t i = 0; i < scene.points.size(); ++i) {
      if (!labels[i].foreground) continue;
      try {
        const auto t = pg::encode_anchor_free(scene.points[i], scene.boxes[labels[i].box_index],
                                              0, cfg.codec);
        targets.push_back({{"point", i},
                           {"box", labels[i].box_index},
                           {"bin_x", t.bin_x},
                           {"bin_y", t.bin_y},
                           {"res_x", t.res_x},
                           {"res_y", t.res_y},
                           {"res_z", t.res_z},
                           {"bin_theta", t.bin_theta},
                           {"res_theta", t.res_theta},
                           {"res_h", t.res_h},
                           {"res_w", t.res_w},
                           {"res_l", t.res_l}});
      } catch (const pg::OutOfSearchRangeError&) {
        ++skipped;
      }
    }
    doc["targets"] = std::move(targets);
    doc["skipped_out_of_range"] = skipped;
  } else {
    const pg::Coord3 dims = cfg.voxel.grid_dims();
    pg::Json targets = pg::Json::array();
    const auto classes = pg::kitti_anchor_classes();
    for (size_t cls = 0; cls < classes.size(); ++cls) {
      const auto anchors = pg::generate_anchors(std::max(1, dims[0] / 8), std::max(1, dims[1] / 8),
                                                classes[cls], cfg.voxel);
      const auto assignment = pg::assign_anchors(anchors, scene.boxes, classes[cls]);
      for (size_t a = 0; a < anchors.size(); ++a) {
        const int32_t label = assignment.labels[a];
        if (label < 0) continue;
        const auto t = pg::encode_anchor_residual(anchors[a], scene.boxes[label]);
        targets.push_back({{"anchor", a},
                           {"class", cls},
                           {"gt", label},
                           {"dx", t.dx},
                           {"dy", t.dy},
                           {"dz", t.dz},
                           {"dl", t.dl},
                           {"dh", t.dh},
                           {"dw", t.dw},
                           {"dtheta", t.dtheta},
                           {"dir", t.dir}});
      }
    }
    doc["targets"] = std::move(targets);
  }
  pg::save_json(out, doc);
  return 0;
}

int run_pool(const RunConfig& cfg, const pg::Scene& scene, const std::string& mode,
             const std::string& out) {
  const pg::PoolMode pool_mode = mode == "avg" ? pg::PoolMode::kAvg : pg::PoolMode::kMax;
  std::vector<float> feats;
  feats.reserve(scene.points.size() * 3);
  for (const pg::Vec3& p : scene.points) {
    feats.push_back(static_cast<float>(p.x));
    feats.push_back(static_cast<float>(p.y));
    feats.push_back(static_cast<float>(p.z));
  }
  std::vector<pg::PooledGrid> grids(scene.boxes.size());
  pg::parallel_for(scene.boxes.size(), cfg.threads, [&](size_t begin, size_t end) {
    for (size_t b = begin; b < end; ++b) {
      grids[b] = pg::roi_aware_pool(scene.points, feats, 3, scene.boxes[b], cfg.pool, pool_mode);
    }
  });
  pg::save_pooled_grids(out, grids, mode);
  return 0;
}

int run_backbone(const RunConfig& cfg, const pg::Scene& scene, const std::string& voxels_prefix,
                 const std::string& weights_bin, const std::string& weights_manifest,
                 const std::string& save_weights_prefix, const std::string& out) {
  pg::SparseTensor input;
  if (!voxels_prefix.empty()) {
    input = pg::load_sparse_tensor(voxels_prefix);
  } else {
    input = pg::voxelize(scene.points, cfg.voxel);
  }

  pg::WeightStore weights;
  if (!weights_bin.empty()) {
    weights = pg::load_weights(weights_bin, weights_manifest.empty() ? weights_bin + ".json"
                                                                     : weights_manifest);
  } else {
    weights = pg::init_backbone_weights(cfg.backbone, input.channels, cfg.seed);
  }
  if (!save_weights_prefix.empty()) {
    pg::save_weights(save_weights_prefix + ".bin", save_weights_prefix + ".json", cfg.backbone,
                     input.channels, weights);
  }

  const pg::BackboneOutput result = pg::backbone_forward(input, cfg.backbone, weights);
  pg::save_sparse_tensor(out + "_features", result.point_features);
  pg::save_bev_map(out + "_bev", result.bev);
  pg::log_info("backbone: " + std::to_string(result.point_features.size()) +
               " active voxels, BEV " + std::to_string(result.bev.size()) + " columns");
  return 0;
}

int run_nms(const std::string& in, double thresh, const std::string& metric,
            const std::string& out) {
  std::vector<pg::ScoredBox> boxes;
  const pg::Json doc = pg::load_json(in);
  for (const pg::Json& b : doc.at("boxes")) {
    boxes.push_back(pg::scored_box_from_json(b));
  }
  const auto kept = pg::rotated_nms(boxes, thresh,
                                    metric == "3d" ? pg::IouMetric::k3d : pg::IouMetric::kBev);
  pg::Json kept_boxes = pg::Json::array();
  for (int32_t idx : kept) kept_boxes.push_back(pg::to_json(boxes[idx]));
  pg::save_json(out, pg::Json{{"kept", kept}, {"boxes", std::move(kept_boxes)}});
  return 0;
}

int run_eval(const std::string& pred_path, const std::string& gt_path, double iou_thresh,
             double score_thresh, const std::string& out, const std::string& pr_csv) {
  const pg::Json pred_doc = pg::load_json(pred_path);
  const pg::Json gt_doc = pg::load_json(gt_path);
  const auto frames = pg::eval_frames_from_json(pred_doc, gt_doc);

  pg::Json metrics;
  pg::Json recall;
  for (size_t k : {10u, 20u, 30u, 40u, 50u, 100u, 200u, 300u}) {
    recall[std::to_string(k)] = pg::proposal_recall(frames, k, iou_thresh);
  }
  metrics["recall"] = std::move(recall);

  std::vector<int32_t> classes;
  for (const auto& frame : frames) {
    for (const auto& gt : frame.ground_truths) {
      if (std::find(classes.begin(), classes.end(), gt.class_id) == classes.end()) {
        classes.push_back(gt.class_id);
      }
    }
  }
  std::sort(classes.begin(), classes.end());
  pg::Json ap;
  for (int32_t cls : classes) {
    pg::Json per_diff;
    for (pg::Difficulty d :
         {pg::Difficulty::kEasy, pg::Difficulty::kModerate, pg::Difficulty::kHard}) {
      per_diff[pg::to_string(d)] = pg::average_precision_11(frames, iou_thresh, cls, d);
    }
    ap[std::to_string(cls)] = std::move(per_diff);
  }
  metrics["ap"] = std::move(ap);

  if (pred_doc.contains("part_samples")) {
    std::vector<pg::PartErrorSample> samples;
    for (const pg::Json& s : pred_doc["part_samples"]) {
      pg::PartErrorSample sample;
      for (const pg::Json& p : s.at("predicted")) {
        sample.predicted.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                    p.at(2).get<double>()});
      }
      for (const pg::Json& p : s.at("truth")) {
        sample.truth.push_back({p.at(0).get<double>(), p.at(1).get<double>(),
                                p.at(2).get<double>()});
      }
      samples.push_back(std::move(sample));
    }
    const pg::PartError err = pg::part_abs_error(samples);
    metrics["mabs_error"] = {{"x", err.x}, {"y", err.y}, {"z", err.z}, {"overall", err.overall}};
  } else {
    metrics["mabs_error"] = nullptr;
  }

  if (pred_doc.contains("correlation")) {
    const std::vector<double> xs = pred_doc["correlation"].at("part_errors").get<std::vector<double>>();
    const std::vector<double> ys = pred_doc["correlation"].at("box_errors").get<std::vector<double>>();
    metrics["pearson"] = pg::pearson_correlation(xs, ys);
  } else {
    metrics["pearson"] = nullptr;
  }

  const pg::FpBreakdown fb = pg::fp_breakdown(frames, score_thresh, iou_thresh);
  metrics["fp_ratios"] = {{"background", fb.background},
                          {"localization", fb.localization},
                          {"other_class", fb.other_class}};

  pg::save_json(out, metrics);

  if (!pr_csv.empty()) {
    std::ofstream csv(pr_csv);
    if (!csv) throw pg::FileFormatError("cannot open " + pr_csv);
    csv << "class,difficulty,score,recall,precision\n";
    for (int32_t cls : classes) {
      for (pg::Difficulty d :
           {pg::Difficulty::kEasy, pg::Difficulty::kModerate, pg::Difficulty::kHard}) {
        for (const pg::PrPoint& pt : pg::pr_curve(frames, iou_thresh, cls, d)) {
          csv << cls << "," << pg::to_string(d) << "," << pt.score << "," << pt.recall << ","
              << pt.precision << "\n";
        }
      }
    }
  }
  return 0;
}

int run_bench(const RunConfig& cfg, const std::string& what, int scenes) {
  std::vector<double> ms;
  if (what == "voxelize") {
    const auto points = pg::synth_scan_points(cfg.voxel, 8000, 15, cfg.seed);
    size_t voxels = 0;
    for (int i = 0; i < scenes; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto t = pg::voxelize(points, cfg.voxel);
      const auto t1 = std::chrono::steady_clock::now();
      voxels = t.size();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    pg::log_info("bench voxelize: " + std::to_string(points.size()) + " points -> " +
                 std::to_string(voxels) + " voxels");
  } else if (what == "pool") {
    pg::SynthSpec synth = cfg.synth;
    synth.num_objects = 10;
    synth.points_per_object = 800;
    synth.clutter_points = 8000;
    const pg::Scene scene = pg::synth_scene(synth, cfg.seed);
    std::vector<float> feats;
    for (const pg::Vec3& p : scene.points) {
      feats.push_back(static_cast<float>(p.x));
      feats.push_back(static_cast<float>(p.y));
      feats.push_back(static_cast<float>(p.z));
    }
    // 100 proposals: jittered copies of the scene boxes.
    pg::Rng rng(cfg.seed + 1);
    std::vector<pg::BoxParams> proposals;
    while (proposals.size() < 100 && !scene.boxes.empty()) {
      const pg::BoxParams& b = scene.boxes[proposals.size() % scene.boxes.size()];
      proposals.emplace_back(
          pg::Vec3{b.center.x + rng.uniform(-0.3, 0.3), b.center.y + rng.uniform(-0.3, 0.3),
                   b.center.z + rng.uniform(-0.1, 0.1)},
          b.h, b.w, b.l, b.theta + rng.uniform(-0.1, 0.1));
    }
    for (int i = 0; i < scenes; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      for (const pg::BoxParams& box : proposals) {
        const auto grid =
            pg::roi_aware_pool(scene.points, feats, 3, box, cfg.pool, pg::PoolMode::kMax);
        (void)grid;
      }
      const auto t1 = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  } else {
    throw std::invalid_argument("bench: unknown target '" + what + "'");
  }

  std::sort(ms.begin(), ms.end());
  auto quantile = [&](double q) {
    const size_t idx = std::min(ms.size() - 1, static_cast<size_t>(q * ms.size()));
    return ms[idx];
  };
  double mean = 0.0;
  for (double v : ms) mean += v;
  mean /= static_cast<double>(ms.size());
  pg::save_json("-", pg::Json{{"op", what},
                              {"scenes", scenes},
                              {"p50_ms", quantile(0.5)},
                              {"p95_ms", quantile(0.95)},
                              {"mean_ms", mean}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"partgrid: part-aware 3D detection pipeline tools"};
  app.require_subcommand(1);
  app.fallthrough(true);  // accept global flags after the subcommand name

  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config overlay")->check(CLI::ExistingFile);
  app.add_option("--seed", cfg.seed, "RNG seed");
  app.add_option("--threads", cfg.threads, "worker threads (results are thread-count invariant)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic scene");
  std::string synth_out = "-";
  std::string synth_velodyne;
  synth->add_option("--out", synth_out, "scene JSON path ('-' for stdout)");
  synth->add_option("--velodyne", synth_velodyne, "also write the points as a velodyne .bin");
  synth->add_option("--objects", cfg.synth.num_objects, "number of boxes");
  synth->add_option("--points-per-object", cfg.synth.points_per_object, "points per box");
  synth->add_option("--clutter", cfg.synth.clutter_points, "background points");

  // gen-labels
  auto* gen = app.add_subcommand("gen-labels", "per-point foreground + part-location labels");
  std::string gen_scene, gen_out = "labels.bin", gen_summary;
  gen->add_option("--scene", gen_scene, "scene JSON ('-' for stdin)")->required();
  gen->add_option("--out", gen_out, "binary label records path");
  gen->add_option("--summary", gen_summary, "JSON sidecar path (default <out>.json)");

  // voxelize
  auto* vox = app.add_subcommand("voxelize", "point cloud -> sparse voxel tensor");
  std::string vox_scene, vox_velodyne, vox_out = "voxels";
  vox->add_option("--scene", vox_scene, "scene JSON");
  vox->add_option("--velodyne", vox_velodyne, "velodyne .bin input")->check(CLI::ExistingFile);
  vox->add_option("--out", vox_out, "output prefix (.json header + .bin blob)");

  // encode
  auto* enc = app.add_subcommand("encode", "regression targets for either proposal strategy");
  std::string enc_strategy = "free", enc_scene, enc_out = "targets.json";
  enc->add_option("--strategy", enc_strategy, "free|anchor")
      ->check(CLI::IsMember({"free", "anchor"}));
  enc->add_option("--scene", enc_scene, "scene JSON ('-' for stdin)")->required();
  enc->add_option("--out", enc_out, "targets JSON path");

  // pool
  auto* pool = app.add_subcommand("pool", "RoI-aware pooling of scene points per box");
  std::string pool_scene, pool_mode = "max", pool_out = "pooled";
  pool->add_option("--scene", pool_scene, "scene JSON ('-' for stdin)")->required();
  pool->add_option("--mode", pool_mode, "max|avg")->check(CLI::IsMember({"max", "avg"}));
  pool->add_option("--out", pool_out, "output prefix");
  pool->add_option("--lx", cfg.pool.lx, "pool cells along the length axis");
  pool->add_option("--ly", cfg.pool.ly, "pool cells along the width axis");
  pool->add_option("--lz", cfg.pool.lz, "pool cells along the height axis");

  // backbone
  auto* bb = app.add_subcommand("backbone", "sparse UNet forward pass");
  std::string bb_scene, bb_voxels, bb_weights, bb_manifest, bb_save_weights, bb_out = "backbone";
  bb->add_option("--scene", bb_scene, "scene JSON ('-' for stdin)");
  bb->add_option("--voxels", bb_voxels, "sparse tensor prefix from `voxelize`");
  bb->add_option("--weights", bb_weights, "weight blob (.bin)")->check(CLI::ExistingFile);
  bb->add_option("--manifest", bb_manifest, "weight manifest (default <weights>.json)");
  bb->add_option("--save-weights", bb_save_weights, "write the weights used to this prefix");
  bb->add_option("--out", bb_out, "output prefix (<out>_features.*, <out>_bev.*)");

  // nms
  auto* nms = app.add_subcommand("nms", "rotated non-maximum suppression");
  std::string nms_in, nms_metric = "bev", nms_out = "-";
  double nms_thresh = 0.01;
  nms->add_option("--in", nms_in, "scored boxes JSON")->required()->check(CLI::ExistingFile);
  nms->add_option("--thresh", nms_thresh, "IoU suppression threshold");
  nms->add_option("--metric", nms_metric, "bev|3d")->check(CLI::IsMember({"bev", "3d"}));
  nms->add_option("--out", nms_out, "kept boxes JSON ('-' for stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "detection metrics over prediction/gt frames");
  std::string eval_pred, eval_gt, eval_out = "-", eval_csv;
  double eval_iou = 0.7, eval_score = 0.3;
  eval->add_option("--pred", eval_pred, "predictions JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", eval_gt, "ground truth JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--iou-thresh", eval_iou, "matching IoU threshold");
  eval->add_option("--score-thresh", eval_score, "score cut for the FP breakdown");
  eval->add_option("--out", eval_out, "metrics JSON ('-' for stdout)");
  eval->add_option("--pr-csv", eval_csv, "also write the PR curve as CSV");

  // bench
  auto* bench = app.add_subcommand("bench", "micro-benchmarks with p50/p95 timings");
  std::string bench_what;
  int bench_scenes = 20;
  bench->add_option("what", bench_what, "voxelize|pool")
      ->required()
      ->check(CLI::IsMember({"voxelize", "pool"}));
  bench->add_option("--scenes", bench_scenes, "repetitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 1;
  }

  try {
    if (!config_path.empty()) overlay_config(cfg, config_path);

    if (synth->parsed()) return run_synth(cfg, synth_out, synth_velodyne);
    if (gen->parsed()) return run_gen_labels(load_scene(gen_scene, "", ""), gen_out, gen_summary);
    if (vox->parsed()) {
      if (vox_scene.empty() && vox_velodyne.empty()) {
        throw std::invalid_argument("voxelize: need --scene or --velodyne");
      }
      return run_voxelize(cfg, load_scene(vox_scene, vox_velodyne, ""), vox_out);
    }
    if (enc->parsed()) {
      return run_encode(cfg, load_scene(enc_scene, "", ""), enc_strategy, enc_out);
    }
    if (pool->parsed()) return run_pool(cfg, load_scene(pool_scene, "", ""), pool_mode, pool_out);
    if (bb->parsed()) {
      pg::Scene scene;
      if (bb_voxels.empty()) {
        if (bb_scene.empty()) throw std::invalid_argument("backbone: need --scene or --voxels");
        scene = load_scene(bb_scene, "", "");
      }
      return run_backbone(cfg, scene, bb_voxels, bb_weights, bb_manifest, bb_save_weights, bb_out);
    }
    if (nms->parsed()) return run_nms(nms_in, nms_thresh, nms_metric, nms_out);
    if (eval->parsed()) {
      return run_eval(eval_pred, eval_gt, eval_iou, eval_score, eval_out, eval_csv);
    }
    if (bench->parsed()) return run_bench(cfg, bench_what, bench_scenes);
  } catch (const pg::FileFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
