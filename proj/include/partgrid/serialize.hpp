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
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "partgrid/augment.hpp"
#include "partgrid/backbone.hpp"
#include "partgrid/eval.hpp"
#include "partgrid/geom.hpp"
#include "partgrid/kitti_io.hpp"
#include "partgrid/nms.hpp"
#include "partgrid/part_label.hpp"
#include "partgrid/roi_pool.hpp"
#include "partgrid/sparse_tensor.hpp"
#include "partgrid/voxel.hpp"

namespace partgrid {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// JSON <-> core types
// ---------------------------------------------------------------------------

inline Json to_json(const BoxParams& b) {
  return Json{{"x", b.center.x}, {"y", b.center.y}, {"z", b.center.z},
              {"h", b.h},        {"w", b.w},        {"l", b.l},
              {"theta", b.theta}};
}

inline BoxParams box_from_json(const Json& j) {
  return BoxParams({j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()},
                   j.at("h").get<double>(), j.at("w").get<double>(), j.at("l").get<double>(),
                   j.at("theta").get<double>());
}

inline Json to_json(const ScoredBox& b) {
  Json j = to_json(b.box);
  j["score"] = b.score;
  return j;
}

inline ScoredBox scored_box_from_json(const Json& j) {
  return {box_from_json(j), j.at("score").get<double>()};
}

inline Json to_json(const Scene& scene) {
  Json points = Json::array();
  for (const Vec3& p : scene.points) points.push_back({p.x, p.y, p.z});
  Json boxes = Json::array();
  for (const BoxParams& b : scene.boxes) boxes.push_back(to_json(b));
  return Json{{"points", std::move(points)}, {"boxes", std::move(boxes)}};
}

inline Scene scene_from_json(const Json& j) {
  Scene scene;
  for (const Json& p : j.at("points")) {
    scene.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  for (const Json& b : j.at("boxes")) scene.boxes.push_back(box_from_json(b));
  return scene;
}

inline Difficulty difficulty_from_string(const std::string& s) {
  if (s == "easy") return Difficulty::kEasy;
  if (s == "moderate") return Difficulty::kModerate;
  if (s == "hard") return Difficulty::kHard;
  throw FileFormatError("unknown difficulty '" + s + "'");
}

inline std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kEasy: return "easy";
    case Difficulty::kModerate: return "moderate";
    default: return "hard";
  }
}

inline std::vector<EvalFrame> eval_frames_from_json(const Json& pred_doc, const Json& gt_doc) {
  const Json& pred_frames = pred_doc.at("frames");
  const Json& gt_frames = gt_doc.at("frames");
  if (pred_frames.size() != gt_frames.size()) {
    throw FileFormatError("eval inputs disagree on the frame count");
  }
  std::vector<EvalFrame> frames(pred_frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    for (const Json& p : pred_frames[f].at("predictions")) {
      frames[f].predictions.push_back(
          {box_from_json(p), p.at("score").get<double>(), p.value("class", 0)});
    }
    for (const Json& g : gt_frames[f].at("ground_truths")) {
      frames[f].ground_truths.push_back({box_from_json(g), g.value("class", 0),
                                         difficulty_from_string(g.value("difficulty", "easy"))});
    }
  }
  return frames;
}

// ---------------------------------------------------------------------------
// Flat binary files with JSON headers
// ---------------------------------------------------------------------------

namespace detail {

inline void write_exact(std::ofstream& out, const void* data, size_t bytes) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw FileFormatError("serialize: short write");
}

inline void read_exact(std::ifstream& in, void* data, size_t bytes) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
  if (!in) throw FileFormatError("serialize: short read");
}

}  // namespace detail

inline Json load_json(const std::string& path) {
  if (path == "-") {
    Json j;
    std::cin >> j;
    return j;
  }
  std::ifstream in(path);
  if (!in) throw FileFormatError("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_json(const std::string& path, const Json& j) {
  if (path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw FileFormatError("cannot open " + path);
  out << j.dump(2) << "\n";
}

/// Per-point label record stream, little-endian:
/// x, y, z (float32), foreground (uint8), part x/y/z (float32), box index
/// (int32). 29 bytes per point.
inline void write_label_records(const std::string& path, const std::vector<Vec3>& points,
                                const std::vector<PartLabel>& labels) {
  if (points.size() != labels.size()) {
    throw std::invalid_argument("write_label_records: points/labels length mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileFormatError("cannot open " + path);
  for (size_t i = 0; i < points.size(); ++i) {
    const float xyz[3] = {static_cast<float>(points[i].x), static_cast<float>(points[i].y),
                          static_cast<float>(points[i].z)};
    const uint8_t fg = labels[i].foreground ? 1 : 0;
    const float part[3] = {static_cast<float>(labels[i].part[0]),
                           static_cast<float>(labels[i].part[1]),
                           static_cast<float>(labels[i].part[2])};
    const int32_t box_index = labels[i].box_index;
    detail::write_exact(out, xyz, sizeof(xyz));
    detail::write_exact(out, &fg, 1);
    detail::write_exact(out, part, sizeof(part));
    detail::write_exact(out, &box_index, sizeof(box_index));
  }
}

struct LabelRecord {
  Vec3 point;
  PartLabel label;
};

inline std::vector<LabelRecord> read_label_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<size_t>(in.tellg());
  in.seekg(0);
  constexpr size_t kRecord = 29;
  if (bytes % kRecord != 0) {
    throw FileFormatError("read_label_records: length is not a multiple of the record size");
  }
  std::vector<LabelRecord> out(bytes / kRecord);
  for (LabelRecord& rec : out) {
    float xyz[3];
    uint8_t fg = 0;
    float part[3];
    int32_t box_index = 0;
    detail::read_exact(in, xyz, sizeof(xyz));
    detail::read_exact(in, &fg, 1);
    detail::read_exact(in, part, sizeof(part));
    detail::read_exact(in, &box_index, sizeof(box_index));
    rec.point = {xyz[0], xyz[1], xyz[2]};
    rec.label.foreground = fg != 0;
    rec.label.part = {part[0], part[1], part[2]};
    rec.label.box_index = box_index;
  }
  return out;
}

/// Sparse tensor as a raw blob (int32 coords then float32 features) plus a
/// JSON header at <prefix>.json describing dims, channels and count.
inline void save_sparse_tensor(const std::string& prefix, const SparseTensor& t) {
  Json header{{"dims", {t.dims[0], t.dims[1], t.dims[2]}},
              {"channels", t.channels},
              {"count", t.coords.size()},
              {"layout", "coords:int32[count][3] features:float32[count][channels]"}};
  save_json(prefix + ".json", header);
  std::ofstream out(prefix + ".bin", std::ios::binary);
  if (!out) throw FileFormatError("cannot open " + prefix + ".bin");
  if (!t.coords.empty()) {
    detail::write_exact(out, t.coords.data(), t.coords.size() * sizeof(Coord3));
    detail::write_exact(out, t.features.data(), t.features.size() * sizeof(float));
  }
}

inline SparseTensor load_sparse_tensor(const std::string& prefix) {
  const Json header = load_json(prefix + ".json");
  SparseTensor t;
  t.dims = {header.at("dims").at(0).get<int32_t>(), header.at("dims").at(1).get<int32_t>(),
            header.at("dims").at(2).get<int32_t>()};
  t.channels = header.at("channels").get<int32_t>();
  const auto count = header.at("count").get<size_t>();
  t.coords.resize(count);
  t.features.resize(count * t.channels);
  if (count > 0) {
    std::ifstream in(prefix + ".bin", std::ios::binary);
    if (!in) throw FileFormatError("cannot open " + prefix + ".bin");
    detail::read_exact(in, t.coords.data(), count * sizeof(Coord3));
    detail::read_exact(in, t.features.data(), t.features.size() * sizeof(float));
  }
  validate_tensor(t);
  return t;
}

/// Pooled grids as one blob (per grid: float32 values then uint8 empty mask)
/// with a JSON header giving dims, mode and the per-grid byte offsets.
inline void save_pooled_grids(const std::string& prefix, const std::vector<PooledGrid>& grids,
                              const std::string& mode) {
  Json offsets = Json::array();
  size_t offset = 0;
  for (const PooledGrid& g : grids) {
    const size_t value_bytes = g.values.size() * sizeof(float);
    offsets.push_back({{"values", offset}, {"mask", offset + value_bytes}});
    offset += value_bytes + g.empty.size();
  }
  Json header{{"count", grids.size()}, {"mode", mode}, {"offsets", std::move(offsets)}};
  if (!grids.empty()) {
    header["dims"] = {grids[0].lx, grids[0].ly, grids[0].lz, grids[0].channels};
  }
  save_json(prefix + ".json", header);
  std::ofstream out(prefix + ".bin", std::ios::binary);
  if (!out) throw FileFormatError("cannot open " + prefix + ".bin");
  for (const PooledGrid& g : grids) {
    detail::write_exact(out, g.values.data(), g.values.size() * sizeof(float));
    detail::write_exact(out, g.empty.data(), g.empty.size());
  }
}

/// BEV map as a raw blob (int32 coords then float32 rows) plus a JSON header.
inline void save_bev_map(const std::string& prefix, const BevMap& bev) {
  Json header{{"nx", bev.nx},
              {"ny", bev.ny},
              {"channels", bev.channels},
              {"count", bev.coords.size()},
              {"layout", "coords:int32[count][2] features:float32[count][channels]"}};
  save_json(prefix + ".json", header);
  std::ofstream out(prefix + ".bin", std::ios::binary);
  if (!out) throw FileFormatError("cannot open " + prefix + ".bin");
  if (!bev.coords.empty()) {
    detail::write_exact(out, bev.coords.data(), bev.coords.size() * sizeof(bev.coords[0]));
    detail::write_exact(out, bev.features.data(), bev.features.size() * sizeof(float));
  }
}

/// Backbone weights as a float32 blob plus a JSON manifest listing each
/// tensor's name, shape and element offset.
inline void save_weights(const std::string& bin_path, const std::string& manifest_path,
                         const BackboneConfig& cfg, int32_t input_channels,
                         const WeightStore& store) {
  Json manifest_layers = Json::array();
  std::vector<float> blob;
  for (const LayerDef& layer : backbone_layers(cfg, input_channels)) {
    for (const bool bias : {false, true}) {
      const std::string name = bias ? layer.name + ".bias" : layer.name;
      if (bias && !store.contains(name)) continue;
      const std::vector<float>& data = store.at(name);
      Json shape = bias ? Json{layer.out_channels}
                        : Json{layer.kernel, layer.kernel, layer.kernel, layer.in_channels,
                               layer.out_channels};
      manifest_layers.push_back(
          {{"name", name}, {"shape", shape}, {"offset", blob.size()}, {"count", data.size()}});
      blob.insert(blob.end(), data.begin(), data.end());
    }
  }
  save_json(manifest_path,
            Json{{"dtype", "float32"}, {"layers", std::move(manifest_layers)}});
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw FileFormatError("cannot open " + bin_path);
  detail::write_exact(out, blob.data(), blob.size() * sizeof(float));
}

inline WeightStore load_weights(const std::string& bin_path, const std::string& manifest_path) {
  const Json manifest = load_json(manifest_path);
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw FileFormatError("cannot open " + bin_path);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<size_t>(in.tellg());
  in.seekg(0);
  if (bytes % sizeof(float) != 0) throw FileFormatError("weight blob is not float32-aligned");
  std::vector<float> blob(bytes / sizeof(float));
  detail::read_exact(in, blob.data(), bytes);

  WeightStore store;
  for (const Json& layer : manifest.at("layers")) {
    const auto offset = layer.at("offset").get<size_t>();
    const auto count = layer.at("count").get<size_t>();
    if (offset + count > blob.size()) {
      throw FileFormatError("weight manifest points past the end of the blob");
    }
    store.blobs[layer.at("name").get<std::string>()] =
        std::vector<float>(blob.begin() + offset, blob.begin() + offset + count);
  }
  return store;
}

}  // namespace partgrid
