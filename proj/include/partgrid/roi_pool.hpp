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
#include <stdexcept>
#include <vector>

#include "partgrid/geom.hpp"

namespace partgrid {

class IndivisibleDimsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PoolSpec {
  int32_t lx = 14;
  int32_t ly = 14;
  int32_t lz = 14;

  void validate() const {
    if (lx < 1 || ly < 1 || lz < 1) {
      throw std::invalid_argument("PoolSpec: dims must be >= 1");
    }
  }
};

enum class PoolMode { kMax, kAvg };

/// Fixed-shape feature volume over a proposal's canonical box, with an
/// explicit per-cell empty flag. Empty cells hold all-zero features.
struct PooledGrid {
  int32_t lx = 0, ly = 0, lz = 0;
  int32_t channels = 0;
  std::vector<float> values;      // lx*ly*lz rows of `channels` floats
  std::vector<uint8_t> empty;     // 1 = no point fell into the cell

  size_t num_cells() const { return static_cast<size_t>(lx) * ly * lz; }
  size_t cell_index(int32_t ix, int32_t iy, int32_t iz) const {
    return (static_cast<size_t>(ix) * ly + iy) * lz + iz;
  }
  float* cell(size_t i) { return values.data() + i * channels; }
  const float* cell(size_t i) const { return values.data() + i * channels; }
  bool is_empty(size_t i) const { return empty[i] != 0; }

  static PooledGrid zeros(int32_t lx, int32_t ly, int32_t lz, int32_t channels) {
    PooledGrid g;
    g.lx = lx;
    g.ly = ly;
    g.lz = lz;
    g.channels = channels;
    g.values.assign(static_cast<size_t>(lx) * ly * lz * channels, 0.0f);
    g.empty.assign(static_cast<size_t>(lx) * ly * lz, 1);
    return g;
  }
};

/// Scatters the points inside `box` into an lx*ly*lz grid over the box's
/// canonical frame (x bins span the length, y the width, z the height) and
/// reduces per cell with max or mean. Points outside the closed box are
/// excluded; a point exactly on the upper face lands in the last bin. The
/// average accumulates in double, so the result is independent of point
/// order.
inline PooledGrid roi_aware_pool(const std::vector<Vec3>& points,
                                 const std::vector<float>& feats, int32_t channels,
                                 const BoxParams& box, const PoolSpec& spec,
                                 PoolMode mode) {
  spec.validate();
  if (channels < 1) throw std::invalid_argument("roi_aware_pool: channels must be >= 1");
  if (feats.size() != points.size() * static_cast<size_t>(channels)) {
    throw std::invalid_argument("roi_aware_pool: points/features length mismatch");
  }

  PooledGrid grid = PooledGrid::zeros(spec.lx, spec.ly, spec.lz, channels);
  std::vector<double> acc;
  std::vector<int32_t> counts;
  if (mode == PoolMode::kAvg) {
    acc.assign(grid.num_cells() * channels, 0.0);
    counts.assign(grid.num_cells(), 0);
  }

  const CanonicalFrame frame = CanonicalFrame::of_box(box);
  const double sx = spec.lx / box.l, sy = spec.ly / box.w, sz = spec.lz / box.h;
  for (size_t i = 0; i < points.size(); ++i) {
    const Vec3 q = to_canonical(points[i], frame);
    if (std::abs(q.x) > 0.5 * box.l || std::abs(q.y) > 0.5 * box.w ||
        std::abs(q.z) > 0.5 * box.h) {
      continue;
    }
    const int32_t ix = std::clamp(static_cast<int32_t>((q.x + 0.5 * box.l) * sx), 0, spec.lx - 1);
    const int32_t iy = std::clamp(static_cast<int32_t>((q.y + 0.5 * box.w) * sy), 0, spec.ly - 1);
    const int32_t iz = std::clamp(static_cast<int32_t>((q.z + 0.5 * box.h) * sz), 0, spec.lz - 1);
    const size_t cell = grid.cell_index(ix, iy, iz);
    const float* f = feats.data() + i * channels;
    if (mode == PoolMode::kMax) {
      float* out = grid.cell(cell);
      if (grid.empty[cell]) {
        std::copy_n(f, channels, out);
      } else {
        for (int32_t c = 0; c < channels; ++c) out[c] = std::max(out[c], f[c]);
      }
    } else {
      double* a = acc.data() + cell * channels;
      for (int32_t c = 0; c < channels; ++c) a[c] += f[c];
      ++counts[cell];
    }
    grid.empty[cell] = 0;
  }

  if (mode == PoolMode::kAvg) {
    for (size_t cell = 0; cell < grid.num_cells(); ++cell) {
      if (counts[cell] == 0) continue;
      float* out = grid.cell(cell);
      const double* a = acc.data() + cell * channels;
      for (int32_t c = 0; c < channels; ++c) {
        out[c] = static_cast<float>(a[c] / counts[cell]);
      }
    }
  }
  return grid;
}

/// Channelwise linear map applied per cell: out[co] = sum_ci in[ci] * w[ci*out_c + co]
/// (+ bias), evaluated on non-empty cells only.
struct CellLift {
  int32_t in_channels = 0;
  int32_t out_channels = 0;
  std::vector<float> weights;  // in_channels * out_channels, input-major
  std::vector<float> bias;     // empty or out_channels

  void validate() const {
    if (in_channels < 1 || out_channels < 1) {
      throw std::invalid_argument("CellLift: channel counts must be >= 1");
    }
    if (weights.size() != static_cast<size_t>(in_channels) * out_channels) {
      throw std::invalid_argument("CellLift: weight size mismatch");
    }
    if (!bias.empty() && bias.size() != static_cast<size_t>(out_channels)) {
      throw std::invalid_argument("CellLift: bias size mismatch");
    }
  }
};

/// Lifts the pooled part-location grid to the semantic feature width with a
/// 1x1x1 linear map on its non-empty cells, then concatenates the semantic
/// grid channelwise. A cell of the output is non-empty when either input cell
/// is non-empty.
inline PooledGrid fuse_part_semantic(const PooledGrid& part_grid, const PooledGrid& sem_grid,
                                     const CellLift& lift) {
  lift.validate();
  if (part_grid.lx != sem_grid.lx || part_grid.ly != sem_grid.ly || part_grid.lz != sem_grid.lz) {
    throw std::invalid_argument("fuse_part_semantic: spatial dims mismatch");
  }
  if (lift.in_channels != part_grid.channels || lift.out_channels != sem_grid.channels) {
    throw std::invalid_argument("fuse_part_semantic: lift shape does not match the grids");
  }

  const int32_t c2 = sem_grid.channels;
  PooledGrid out = PooledGrid::zeros(part_grid.lx, part_grid.ly, part_grid.lz, 2 * c2);
  for (size_t cell = 0; cell < out.num_cells(); ++cell) {
    const bool part_live = !part_grid.is_empty(cell);
    const bool sem_live = !sem_grid.is_empty(cell);
    if (!part_live && !sem_live) continue;
    out.empty[cell] = 0;
    float* dst = out.cell(cell);
    if (part_live) {
      const float* src = part_grid.cell(cell);
      for (int32_t co = 0; co < c2; ++co) {
        double v = lift.bias.empty() ? 0.0 : lift.bias[co];
        for (int32_t ci = 0; ci < lift.in_channels; ++ci) {
          v += static_cast<double>(src[ci]) * lift.weights[ci * c2 + co];
        }
        dst[co] = static_cast<float>(v);
      }
    }
    if (sem_live) {
      std::copy_n(sem_grid.cell(cell), c2, dst + c2);
    }
  }
  return out;
}

/// 2x2x2 stride-2 max-pool over non-empty cells; a block with no non-empty
/// cell stays empty.
inline PooledGrid sparse_downpool(const PooledGrid& grid) {
  if (grid.lx % 2 != 0 || grid.ly % 2 != 0 || grid.lz % 2 != 0) {
    throw IndivisibleDimsError("sparse_downpool: grid dims must be divisible by 2");
  }
  PooledGrid out = PooledGrid::zeros(grid.lx / 2, grid.ly / 2, grid.lz / 2, grid.channels);
  for (int32_t ix = 0; ix < grid.lx; ++ix) {
    for (int32_t iy = 0; iy < grid.ly; ++iy) {
      for (int32_t iz = 0; iz < grid.lz; ++iz) {
        const size_t src = grid.cell_index(ix, iy, iz);
        if (grid.is_empty(src)) continue;
        const size_t dst = out.cell_index(ix / 2, iy / 2, iz / 2);
        float* o = out.cell(dst);
        const float* f = grid.cell(src);
        if (out.empty[dst]) {
          std::copy_n(f, grid.channels, o);
          out.empty[dst] = 0;
        } else {
          for (int32_t c = 0; c < grid.channels; ++c) o[c] = std::max(o[c], f[c]);
        }
      }
    }
  }
  return out;
}

}  // namespace partgrid
