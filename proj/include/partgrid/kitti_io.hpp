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
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "partgrid/eval.hpp"
#include "partgrid/geom.hpp"

namespace partgrid {

class FileFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PointIntensity {
  Vec3 p;
  float intensity = 0.0f;
};

/// KITTI velodyne scan: packed little-endian float32 (x, y, z, intensity)
/// records.
inline std::vector<PointIntensity> read_velodyne(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError("read_velodyne: cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<size_t>(in.tellg());
  in.seekg(0);
  if (bytes % 16 != 0) {
    throw FileFormatError("read_velodyne: " + path + " length " + std::to_string(bytes) +
                          " is not a multiple of 16");
  }
  std::vector<float> raw(bytes / 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw FileFormatError("read_velodyne: short read on " + path);
  std::vector<PointIntensity> out(raw.size() / 4);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].p = {raw[4 * i], raw[4 * i + 1], raw[4 * i + 2]};
    out[i].intensity = raw[4 * i + 3];
  }
  return out;
}

inline void write_velodyne(const std::string& path, const std::vector<PointIntensity>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileFormatError("write_velodyne: cannot open " + path);
  std::vector<float> raw;
  raw.reserve(points.size() * 4);
  for (const PointIntensity& pt : points) {
    raw.push_back(static_cast<float>(pt.p.x));
    raw.push_back(static_cast<float>(pt.p.y));
    raw.push_back(static_cast<float>(pt.p.z));
    raw.push_back(pt.intensity);
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size() * 4));
}

/// One line of a KITTI label_2 file, camera-frame fields as stored.
struct KittiLabel {
  std::string type;
  double truncation = 0.0;
  int32_t occlusion = 0;
  double alpha = 0.0;
  std::array<double, 4> bbox{};  // left, top, right, bottom (pixels)
  double h = 0.0, w = 0.0, l = 0.0;
  Vec3 location;                 // camera frame, bottom center of the box
  double rotation_y = 0.0;
  std::optional<double> score;

  bool is_dontcare() const { return type == "DontCare"; }
};

inline std::vector<KittiLabel> read_label(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("read_label: cannot open " + path);
  std::vector<KittiLabel> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    KittiLabel label;
    double occ = 0.0;
    if (!(ss >> label.type >> label.truncation >> occ >> label.alpha >> label.bbox[0] >>
          label.bbox[1] >> label.bbox[2] >> label.bbox[3] >> label.h >> label.w >> label.l >>
          label.location.x >> label.location.y >> label.location.z >> label.rotation_y)) {
      throw FileFormatError(path + ":" + std::to_string(line_no) + ": malformed label line");
    }
    label.occlusion = static_cast<int32_t>(occ);
    double s = 0.0;
    if (ss >> s) label.score = s;
    out.push_back(std::move(label));
  }
  return out;
}

struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 inverse() const {
    const double a = m[0], b = m[1], c = m[2], d = m[3], e = m[4], f = m[5], g = m[6], h = m[7],
                 i = m[8];
    const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    if (std::abs(det) < 1e-12) throw FileFormatError("Mat3: singular calibration matrix");
    const double s = 1.0 / det;
    Mat3 r;
    r.m = {(e * i - f * h) * s, (c * h - b * i) * s, (b * f - c * e) * s,
           (f * g - d * i) * s, (a * i - c * g) * s, (c * d - a * f) * s,
           (d * h - e * g) * s, (b * g - a * h) * s, (a * e - b * d) * s};
    return r;
  }
};

/// Rectification and LiDAR->camera extrinsics from a KITTI calib file.
struct CalibData {
  Mat3 r0;            // R0_rect
  Mat3 velo_to_cam_r; // rotation part of Tr_velo_to_cam
  Vec3 velo_to_cam_t; // translation part

  Vec3 lidar_to_camera(const Vec3& p) const {
    return r0.apply(velo_to_cam_r.apply(p) + velo_to_cam_t);
  }
  Vec3 camera_to_lidar(const Vec3& p) const {
    return velo_to_cam_r.inverse().apply(r0.inverse().apply(p) - velo_to_cam_t);
  }
  Vec3 lidar_dir_to_camera(const Vec3& d) const { return r0.apply(velo_to_cam_r.apply(d)); }
  Vec3 camera_dir_to_lidar(const Vec3& d) const {
    return velo_to_cam_r.inverse().apply(r0.inverse().apply(d));
  }
};

inline CalibData read_calib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileFormatError("read_calib: cannot open " + path);
  CalibData calib;
  bool have_r0 = false, have_tr = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::istringstream ss(line.substr(colon + 1));
    std::vector<double> vals;
    double v = 0.0;
    while (ss >> v) vals.push_back(v);
    if (key == "R0_rect" || key == "R_rect") {
      if (vals.size() != 9) {
        throw FileFormatError(path + ":" + std::to_string(line_no) + ": R0_rect needs 9 values");
      }
      std::copy(vals.begin(), vals.end(), calib.r0.m.begin());
      have_r0 = true;
    } else if (key == "Tr_velo_to_cam" || key == "Tr_velo_cam") {
      if (vals.size() != 12) {
        throw FileFormatError(path + ":" + std::to_string(line_no) +
                              ": Tr_velo_to_cam needs 12 values");
      }
      calib.velo_to_cam_r.m = {vals[0], vals[1], vals[2], vals[4], vals[5],
                               vals[6], vals[8], vals[9], vals[10]};
      calib.velo_to_cam_t = {vals[3], vals[7], vals[11]};
      have_tr = true;
    }
  }
  if (!have_r0 || !have_tr) {
    throw FileFormatError("read_calib: " + path + " lacks R0_rect or Tr_velo_to_cam");
  }
  return calib;
}

/// KITTI difficulty from truncation, occlusion and 2D box pixel height;
/// nullopt when the object is harder than "hard".
inline std::optional<Difficulty> kitti_difficulty(const KittiLabel& label) {
  const double height = label.bbox[3] - label.bbox[1];
  if (height >= 40.0 && label.occlusion <= 0 && label.truncation <= 0.15) {
    return Difficulty::kEasy;
  }
  if (height >= 25.0 && label.occlusion <= 1 && label.truncation <= 0.30) {
    return Difficulty::kModerate;
  }
  if (height >= 25.0 && label.occlusion <= 2 && label.truncation <= 0.50) {
    return Difficulty::kHard;
  }
  return std::nullopt;
}

/// Camera-frame label -> LiDAR-frame box. The stored location is the box
/// bottom center (camera y points down), so the volumetric center sits at
/// location - (0, h/2, 0) in camera coordinates; the yaw comes from mapping
/// the camera-frame heading direction into the LiDAR frame.
inline BoxParams label_to_lidar_box(const KittiLabel& label, const CalibData& calib) {
  if (!(label.h > 0.0) || !(label.w > 0.0) || !(label.l > 0.0)) {
    throw FileFormatError("label_to_lidar_box: non-positive box dimensions");
  }
  const Vec3 center_cam{label.location.x, label.location.y - 0.5 * label.h, label.location.z};
  const Vec3 center = calib.camera_to_lidar(center_cam);
  const Vec3 dir_cam{std::cos(label.rotation_y), 0.0, -std::sin(label.rotation_y)};
  const Vec3 dir = calib.camera_dir_to_lidar(dir_cam);
  return BoxParams(center, label.h, label.w, label.l, std::atan2(dir.y, dir.x));
}

/// Inverse of label_to_lidar_box for the camera-frame fields it determines.
inline KittiLabel lidar_box_to_label(const BoxParams& box, const CalibData& calib) {
  KittiLabel label;
  label.h = box.h;
  label.w = box.w;
  label.l = box.l;
  const Vec3 center_cam = calib.lidar_to_camera(box.center);
  label.location = {center_cam.x, center_cam.y + 0.5 * box.h, center_cam.z};
  const Vec3 dir_cam = calib.lidar_dir_to_camera(box.heading_dir());
  label.rotation_y = std::atan2(-dir_cam.z, dir_cam.x);
  return label;
}

}  // namespace partgrid
