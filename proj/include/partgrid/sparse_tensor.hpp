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

namespace partgrid {

using Coord3 = std::array<int32_t, 3>;

/// Coordinate-list tensor over a dense integer grid. Coordinates are unique
/// and sorted lexicographically; `features` holds one contiguous row of
/// `channels` floats per coordinate.
struct SparseTensor {
  Coord3 dims{0, 0, 0};
  int32_t channels = 0;
  std::vector<Coord3> coords;
  std::vector<float> features;

  size_t size() const { return coords.size(); }
  float* feature(size_t i) { return features.data() + i * channels; }
  const float* feature(size_t i) const { return features.data() + i * channels; }
};

inline int64_t pack_coord(const Coord3& c, const Coord3& dims) {
  return (static_cast<int64_t>(c[0]) * dims[1] + c[1]) * dims[2] + c[2];
}

inline bool coord_in_bounds(const Coord3& c, const Coord3& dims) {
  return c[0] >= 0 && c[0] < dims[0] && c[1] >= 0 && c[1] < dims[1] &&
         c[2] >= 0 && c[2] < dims[2];
}

/// Sorted packed keys of the active sites; lookup table for site indices.
struct CoordIndex {
  Coord3 dims{0, 0, 0};
  std::vector<int64_t> keys;  // sorted, parallel to the tensor's coords

  explicit CoordIndex(const SparseTensor& t) : dims(t.dims) {
    keys.reserve(t.coords.size());
    for (const Coord3& c : t.coords) keys.push_back(pack_coord(c, dims));
  }

  /// Site index of `c`, or -1 when inactive.
  int32_t find(const Coord3& c) const {
    if (!coord_in_bounds(c, dims)) return -1;
    const int64_t key = pack_coord(c, dims);
    const auto it = std::lower_bound(keys.begin(), keys.end(), key);
    if (it == keys.end() || *it != key) return -1;
    return static_cast<int32_t>(it - keys.begin());
  }
};

/// Reorders sites into canonical (lexicographic) coordinate order.
inline void sort_canonical(SparseTensor& t) {
  if (t.features.size() != t.coords.size() * static_cast<size_t>(t.channels)) {
    throw std::invalid_argument("sort_canonical: features length mismatch");
  }
  const size_t n = t.size();
  std::vector<int32_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = static_cast<int32_t>(i);
  std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
    return pack_coord(t.coords[a], t.dims) < pack_coord(t.coords[b], t.dims);
  });
  std::vector<Coord3> coords(n);
  std::vector<float> feats(t.features.size());
  for (size_t i = 0; i < n; ++i) {
    coords[i] = t.coords[order[i]];
    std::copy_n(t.feature(order[i]), t.channels, feats.data() + i * t.channels);
  }
  t.coords = std::move(coords);
  t.features = std::move(feats);
}

inline void validate_tensor(const SparseTensor& t) {
  if (t.channels < 1) throw std::invalid_argument("SparseTensor: channels must be >= 1");
  if (t.features.size() != t.coords.size() * static_cast<size_t>(t.channels)) {
    throw std::invalid_argument("SparseTensor: features length mismatch");
  }
  int64_t prev = -1;
  for (const Coord3& c : t.coords) {
    if (!coord_in_bounds(c, t.dims)) throw std::invalid_argument("SparseTensor: coord out of bounds");
    const int64_t key = pack_coord(c, t.dims);
    if (key <= prev) throw std::invalid_argument("SparseTensor: coords must be sorted and unique");
    prev = key;
  }
}

}  // namespace partgrid
