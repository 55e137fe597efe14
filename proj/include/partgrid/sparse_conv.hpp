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
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "partgrid/sparse_tensor.hpp"

namespace partgrid {

/// Forward sparse 3D convolution parameters.
///
/// The kernel is cubic with an odd side and centered taps: an output site at
/// y gathers input at stride*y + d for offsets d in [-k/2, k/2]^3 ("same"
/// padding). Offsets are enumerated z-major (dz slowest, dx fastest) and the
/// weight tap for linear offset o is the in_C x out_C block at
/// weights[o * in_C * out_C], laid out input-major. This layout is what the
/// weight files store, so it is part of the format.
struct ConvSpec {
  int32_t kernel = 3;
  std::array<int32_t, 3> stride{1, 1, 1};
  bool submanifold = true;
  int32_t in_channels = 0;
  int32_t out_channels = 0;
  std::vector<float> weights;  // kernel^3 * in_channels * out_channels
  std::vector<float> bias;     // empty or out_channels

  int32_t num_offsets() const { return kernel * kernel * kernel; }

  void validate() const {
    if (kernel < 1 || kernel % 2 == 0) {
      throw std::invalid_argument("ConvSpec: kernel must be odd and >= 1");
    }
    for (int32_t s : stride) {
      if (s != 1 && s != 2) throw std::invalid_argument("ConvSpec: stride must be 1 or 2");
    }
    if (submanifold && (stride[0] != 1 || stride[1] != 1 || stride[2] != 1)) {
      throw std::invalid_argument("ConvSpec: submanifold implies stride 1");
    }
    if (in_channels < 1 || out_channels < 1) {
      throw std::invalid_argument("ConvSpec: channel counts must be >= 1");
    }
    if (weights.size() != static_cast<size_t>(num_offsets()) * in_channels * out_channels) {
      throw std::invalid_argument("ConvSpec: weight size mismatch");
    }
    if (!bias.empty() && bias.size() != static_cast<size_t>(out_channels)) {
      throw std::invalid_argument("ConvSpec: bias size mismatch");
    }
  }
};

/// Centered kernel offsets in the weight layout's linear order.
inline std::vector<Coord3> kernel_offsets(int32_t kernel) {
  const int32_t r = kernel / 2;
  std::vector<Coord3> out;
  out.reserve(static_cast<size_t>(kernel) * kernel * kernel);
  for (int32_t dz = -r; dz <= r; ++dz) {
    for (int32_t dy = -r; dy <= r; ++dy) {
      for (int32_t dx = -r; dx <= r; ++dx) {
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

/// Gather/scatter plan: per kernel offset, the (input site, output site)
/// index pairs contributing through that tap.
struct Rulebook {
  Coord3 out_dims{0, 0, 0};
  std::vector<Coord3> out_coords;                              // sorted
  std::vector<std::vector<std::pair<int32_t, int32_t>>> pairs; // per offset
};

/// Builds the rulebook and output active set for `spec` applied to `input`.
/// Submanifold mode keeps the input active set; strided mode places outputs
/// at the distinct floor-divided images of the active input sites, and each
/// output still gathers over its full receptive field.
inline Rulebook build_rulebook(const SparseTensor& input, const ConvSpec& spec) {
  spec.validate();
  Rulebook rb;
  const auto offsets = kernel_offsets(spec.kernel);
  rb.pairs.resize(offsets.size());

  const bool strided = !(spec.stride[0] == 1 && spec.stride[1] == 1 && spec.stride[2] == 1);
  if (!strided || spec.submanifold) {
    rb.out_dims = input.dims;
    rb.out_coords = input.coords;
  } else {
    for (int a = 0; a < 3; ++a) {
      rb.out_dims[a] = (input.dims[a] + spec.stride[a] - 1) / spec.stride[a];
    }
    std::vector<int64_t> keys;
    keys.reserve(input.size());
    for (const Coord3& c : input.coords) {
      const Coord3 image{c[0] / spec.stride[0], c[1] / spec.stride[1], c[2] / spec.stride[2]};
      keys.push_back(pack_coord(image, rb.out_dims));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    rb.out_coords.reserve(keys.size());
    for (int64_t key : keys) {
      const auto z = static_cast<int32_t>(key % rb.out_dims[2]);
      const auto y = static_cast<int32_t>((key / rb.out_dims[2]) % rb.out_dims[1]);
      const auto x = static_cast<int32_t>(key / (static_cast<int64_t>(rb.out_dims[1]) * rb.out_dims[2]));
      rb.out_coords.push_back({x, y, z});
    }
  }

  const CoordIndex index(input);
  for (size_t o = 0; o < rb.out_coords.size(); ++o) {
    const Coord3& y = rb.out_coords[o];
    const Coord3 base{y[0] * spec.stride[0], y[1] * spec.stride[1], y[2] * spec.stride[2]};
    for (size_t t = 0; t < offsets.size(); ++t) {
      const Coord3 nb{base[0] + offsets[t][0], base[1] + offsets[t][1], base[2] + offsets[t][2]};
      const int32_t in_idx = index.find(nb);
      if (in_idx >= 0) {
        rb.pairs[t].push_back({in_idx, static_cast<int32_t>(o)});
      }
    }
  }
  return rb;
}

namespace detail {

inline SparseTensor run_rulebook(const SparseTensor& input, const ConvSpec& spec,
                                 const Rulebook& rb) {
  SparseTensor out;
  out.dims = rb.out_dims;
  out.channels = spec.out_channels;
  out.coords = rb.out_coords;
  const size_t n_out = out.coords.size();
  std::vector<double> acc(n_out * spec.out_channels, 0.0);

  const size_t tap_sz = static_cast<size_t>(spec.in_channels) * spec.out_channels;
  for (size_t t = 0; t < rb.pairs.size(); ++t) {
    const float* w = spec.weights.data() + t * tap_sz;
    for (const auto& [in_idx, out_idx] : rb.pairs[t]) {
      const float* f = input.feature(in_idx);
      double* a = acc.data() + static_cast<size_t>(out_idx) * spec.out_channels;
      for (int32_t ci = 0; ci < spec.in_channels; ++ci) {
        const double v = f[ci];
        const float* wrow = w + static_cast<size_t>(ci) * spec.out_channels;
        for (int32_t co = 0; co < spec.out_channels; ++co) {
          a[co] += v * wrow[co];
        }
      }
    }
  }

  out.features.resize(n_out * spec.out_channels);
  for (size_t i = 0; i < n_out; ++i) {
    for (int32_t co = 0; co < spec.out_channels; ++co) {
      double v = acc[i * spec.out_channels + co];
      if (!spec.bias.empty()) v += spec.bias[co];
      out.features[i * spec.out_channels + co] = static_cast<float>(v);
    }
  }
  return out;
}

}  // namespace detail

namespace detail {

inline bool coords_sorted(const SparseTensor& t) {
  int64_t prev = -1;
  for (const Coord3& c : t.coords) {
    const int64_t key = pack_coord(c, t.dims);
    if (key <= prev) return false;
    prev = key;
  }
  return true;
}

}  // namespace detail

/// Sparse convolution forward pass (submanifold or strided per `spec`).
/// Accepts coordinates in any order; unsorted input is canonicalized first,
/// so the result depends only on the active set.
inline SparseTensor conv_forward(const SparseTensor& input, const ConvSpec& spec) {
  spec.validate();
  if (input.channels != spec.in_channels) {
    throw std::invalid_argument("conv_forward: input channel mismatch");
  }
  if (!detail::coords_sorted(input)) {
    SparseTensor sorted = input;
    sort_canonical(sorted);
    return conv_forward(sorted, spec);
  }
  const Rulebook rb = build_rulebook(input, spec);
  return detail::run_rulebook(input, spec, rb);
}

/// Transposed strided convolution: scatters the coarse `input` onto the
/// caller-provided fine active set (normally the matching encoder stage's
/// coordinates). Fine site x receives input at y through tap d whenever
/// stride*y + d = x; targets with no contributor keep zero features.
inline SparseTensor deconv_forward(const SparseTensor& input, const ConvSpec& spec,
                                   const std::vector<Coord3>& target_coords,
                                   const Coord3& target_dims) {
  spec.validate();
  if (input.channels != spec.in_channels) {
    throw std::invalid_argument("deconv_forward: input channel mismatch");
  }
  if (target_coords.empty()) {
    throw std::invalid_argument("deconv_forward: target active set is empty");
  }
  int64_t prev = -1;
  for (const Coord3& c : target_coords) {
    const int64_t key = pack_coord(c, target_dims);
    if (key <= prev) {
      throw std::invalid_argument("deconv_forward: target coords must be sorted and unique");
    }
    prev = key;
  }

  Rulebook rb;
  rb.out_dims = target_dims;
  rb.out_coords = target_coords;
  const auto offsets = kernel_offsets(spec.kernel);
  rb.pairs.resize(offsets.size());
  const CoordIndex index(input);
  for (size_t o = 0; o < target_coords.size(); ++o) {
    const Coord3& x = target_coords[o];
    for (size_t t = 0; t < offsets.size(); ++t) {
      Coord3 src;
      bool ok = true;
      for (int a = 0; a < 3; ++a) {
        const int32_t v = x[a] - offsets[t][a];
        if (v % spec.stride[a] != 0) {
          ok = false;
          break;
        }
        src[a] = v / spec.stride[a];
      }
      if (!ok) continue;
      const int32_t in_idx = index.find(src);
      if (in_idx >= 0) {
        rb.pairs[t].push_back({in_idx, static_cast<int32_t>(o)});
      }
    }
  }
  return detail::run_rulebook(input, spec, rb);
}

}  // namespace partgrid
