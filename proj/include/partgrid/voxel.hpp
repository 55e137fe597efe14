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
#include <vector>

#include "partgrid/geom.hpp"
#include "partgrid/sparse_tensor.hpp"

namespace partgrid {

/// Voxelization grid over a half-open range [range_min, range_max).
struct VoxelGridSpec {
  Vec3 range_min{0.0, -40.0, -3.0};
  Vec3 range_max{70.4, 40.0, 1.0};
  Vec3 voxel_size{0.05, 0.05, 0.1};

  /// Number of voxels per axis. Ranges that are not an exact multiple of the
  /// voxel size get a final partial voxel.
  Coord3 grid_dims() const {
    auto cells = [](double lo, double hi, double size) {
      if (!(size > 0.0)) throw std::invalid_argument("VoxelGridSpec: voxel_size must be positive");
      if (!(hi > lo)) throw std::invalid_argument("VoxelGridSpec: range_max must exceed range_min");
      const double q = (hi - lo) / size;
      return static_cast<int32_t>(std::max(1.0, std::ceil(q - 1e-9)));
    };
    return {cells(range_min.x, range_max.x, voxel_size.x),
            cells(range_min.y, range_max.y, voxel_size.y),
            cells(range_min.z, range_max.z, voxel_size.z)};
  }

  bool contains(const Vec3& p) const {
    return p.x >= range_min.x && p.x < range_max.x && p.y >= range_min.y &&
           p.y < range_max.y && p.z >= range_min.z && p.z < range_max.z;
  }

  Coord3 voxel_of(const Vec3& p) const {
    const Coord3 dims = grid_dims();
    auto idx = [](double v, double lo, double size, int32_t n) {
      const int32_t i = static_cast<int32_t>(std::floor((v - lo) / size));
      return std::clamp(i, 0, n - 1);
    };
    return {idx(p.x, range_min.x, voxel_size.x, dims[0]),
            idx(p.y, range_min.y, voxel_size.y, dims[1]),
            idx(p.z, range_min.z, voxel_size.z, dims[2])};
  }
};

struct SparseVoxelTensor : SparseTensor {
  VoxelGridSpec spec;
};

/// Buckets points into voxels; the feature of each non-empty voxel is the
/// componentwise mean of its points' coordinates (C = 3). Points outside the
/// range are dropped. Output voxels are sorted lexicographically by (i,j,k);
/// the mean is accumulated in double over a canonical point order, so the
/// result does not depend on the input permutation.
inline SparseVoxelTensor voxelize(const std::vector<Vec3>& points, const VoxelGridSpec& spec) {
  const Coord3 dims = spec.grid_dims();

  struct Entry {
    int64_t key;
    int32_t point;
  };
  std::vector<Entry> entries;
  entries.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    if (!spec.contains(points[i])) continue;
    entries.push_back({pack_coord(spec.voxel_of(points[i]), dims), static_cast<int32_t>(i)});
  }
  std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key < b.key;
    const Vec3& pa = points[a.point];
    const Vec3& pb = points[b.point];
    if (pa.x != pb.x) return pa.x < pb.x;
    if (pa.y != pb.y) return pa.y < pb.y;
    return pa.z < pb.z;
  });

  SparseVoxelTensor out;
  out.spec = spec;
  out.dims = dims;
  out.channels = 3;
  for (size_t i = 0; i < entries.size();) {
    size_t j = i;
    double sx = 0.0, sy = 0.0, sz = 0.0;
    while (j < entries.size() && entries[j].key == entries[i].key) {
      const Vec3& p = points[entries[j].point];
      sx += p.x;
      sy += p.y;
      sz += p.z;
      ++j;
    }
    const double n = static_cast<double>(j - i);
    const int64_t key = entries[i].key;
    const auto k = static_cast<int32_t>(key % dims[2]);
    const auto jj = static_cast<int32_t>((key / dims[2]) % dims[1]);
    const auto ii = static_cast<int32_t>(key / (static_cast<int64_t>(dims[1]) * dims[2]));
    out.coords.push_back({ii, jj, k});
    out.features.push_back(static_cast<float>(sx / n));
    out.features.push_back(static_cast<float>(sy / n));
    out.features.push_back(static_cast<float>(sz / n));
    i = j;
  }
  return out;
}

/// Geometric centers of the occupied voxels, in meters, parallel to coords.
inline std::vector<Vec3> voxel_centers(const SparseVoxelTensor& t) {
  std::vector<Vec3> out;
  out.reserve(t.size());
  for (const Coord3& c : t.coords) {
    out.push_back({t.spec.range_min.x + (c[0] + 0.5) * t.spec.voxel_size.x,
                   t.spec.range_min.y + (c[1] + 0.5) * t.spec.voxel_size.y,
                   t.spec.range_min.z + (c[2] + 0.5) * t.spec.voxel_size.z});
  }
  return out;
}

}  // namespace partgrid
