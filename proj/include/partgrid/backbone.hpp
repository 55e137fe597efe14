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

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "partgrid/rng.hpp"
#include "partgrid/sparse_conv.hpp"

namespace partgrid {

/// UNet-style encoder/decoder over sparse voxels. The encoder downsamples
/// x and y by 8 with three stride-2 convolutions; an extra stride-(1,1,2)
/// convolution halves z once more before the height collapse into the BEV
/// map. Decoder blocks upsample back to full resolution with skip fusion
/// (concatenation + 1x1x1 channel-reducing convolution); the last block has
/// stride 1.
struct BackboneConfig {
  std::vector<int32_t> encoder_channels{16, 32, 64, 64};
  std::vector<int32_t> decoder_channels{64, 64, 32, 16};
  int32_t subm_layers_per_stage = 2;

  void validate() const {
    if (encoder_channels.size() < 2 || decoder_channels.size() != encoder_channels.size()) {
      throw std::invalid_argument("BackboneConfig: encoder/decoder stage counts must match (>= 2)");
    }
    for (int32_t c : encoder_channels) {
      if (c < 1) throw std::invalid_argument("BackboneConfig: channels must be >= 1");
    }
    for (int32_t c : decoder_channels) {
      if (c < 1) throw std::invalid_argument("BackboneConfig: channels must be >= 1");
    }
    if (subm_layers_per_stage < 1) {
      throw std::invalid_argument("BackboneConfig: subm_layers_per_stage must be >= 1");
    }
  }
};

/// Static description of one backbone layer: everything except the weights.
struct LayerDef {
  std::string name;
  int32_t kernel = 3;
  std::array<int32_t, 3> stride{1, 1, 1};
  bool submanifold = true;
  bool deconv = false;
  int32_t in_channels = 0;
  int32_t out_channels = 0;

  size_t weight_count() const {
    return static_cast<size_t>(kernel) * kernel * kernel * in_channels * out_channels;
  }
};

/// The full layer list, in execution order. Weight files address layers by
/// these names, so the list doubles as the weight-file schema.
inline std::vector<LayerDef> backbone_layers(const BackboneConfig& cfg, int32_t input_channels) {
  cfg.validate();
  const auto& enc = cfg.encoder_channels;
  const auto& dec = cfg.decoder_channels;
  const size_t stages = enc.size();
  std::vector<LayerDef> layers;

  int32_t prev = input_channels;
  for (size_t s = 0; s < stages; ++s) {
    const std::string stage = "enc" + std::to_string(s);
    if (s > 0) {
      layers.push_back({stage + ".down", 3, {2, 2, 2}, false, false, prev, enc[s]});
      prev = enc[s];
    }
    for (int32_t i = 0; i < cfg.subm_layers_per_stage; ++i) {
      layers.push_back({stage + ".subm" + std::to_string(i), 3, {1, 1, 1}, true, false, prev, enc[s]});
      prev = enc[s];
    }
  }

  layers.push_back({"bev.zdown", 3, {1, 1, 2}, false, false, enc.back(), enc.back()});

  prev = enc.back();
  for (size_t i = 0; i + 1 < stages; ++i) {
    const std::string block = "dec" + std::to_string(i);
    const int32_t skip_c = enc[stages - 2 - i];
    layers.push_back({block + ".up", 3, {2, 2, 2}, false, true, prev, dec[i]});
    layers.push_back({block + ".fuse", 1, {1, 1, 1}, true, false, dec[i] + skip_c, dec[i]});
    prev = dec[i];
  }
  layers.push_back({"dec" + std::to_string(stages - 1) + ".conv", 3, {1, 1, 1}, true, false,
                    prev, dec.back()});
  return layers;
}

/// Named weight blobs. Each layer stores its kernel weights under its name
/// and an optional bias under "<name>.bias".
struct WeightStore {
  std::map<std::string, std::vector<float>> blobs;

  const std::vector<float>& at(const std::string& name) const {
    const auto it = blobs.find(name);
    if (it == blobs.end()) {
      throw std::invalid_argument("WeightStore: missing tensor '" + name + "'");
    }
    return it->second;
  }
  bool contains(const std::string& name) const { return blobs.count(name) > 0; }
};

/// He-style random weights, reproducible from the seed alone.
inline WeightStore init_backbone_weights(const BackboneConfig& cfg, int32_t input_channels,
                                         uint64_t seed) {
  WeightStore store;
  Rng rng(seed);
  for (const LayerDef& layer : backbone_layers(cfg, input_channels)) {
    const double scale =
        std::sqrt(2.0 / (static_cast<double>(layer.kernel) * layer.kernel * layer.kernel *
                         layer.in_channels));
    std::vector<float> w(layer.weight_count());
    for (float& v : w) v = static_cast<float>(rng.normal(0.0, scale));
    store.blobs[layer.name] = std::move(w);
    store.blobs[layer.name + ".bias"] = std::vector<float>(layer.out_channels, 0.0f);
  }
  return store;
}

inline ConvSpec make_conv_spec(const LayerDef& layer, const WeightStore& weights) {
  ConvSpec spec;
  spec.kernel = layer.kernel;
  spec.stride = layer.stride;
  spec.submanifold = layer.submanifold;
  spec.in_channels = layer.in_channels;
  spec.out_channels = layer.out_channels;
  spec.weights = weights.at(layer.name);
  if (weights.contains(layer.name + ".bias")) {
    spec.bias = weights.at(layer.name + ".bias");
  }
  if (spec.weights.size() != layer.weight_count()) {
    throw std::invalid_argument("backbone: weight size mismatch for layer '" + layer.name + "'");
  }
  return spec;
}

/// Height-collapsed bird's-eye-view feature map: one row of
/// z_cells * feature_channels floats per active (i, j) column.
struct BevMap {
  int32_t nx = 0, ny = 0;
  int32_t channels = 0;
  std::vector<std::array<int32_t, 2>> coords;  // sorted, unique
  std::vector<float> features;

  size_t size() const { return coords.size(); }
};

struct BackboneOutput {
  SparseTensor point_features;  // full resolution, decoder_channels.back()
  BevMap bev;
};

namespace detail {

inline SparseTensor concat_channels(const SparseTensor& a, const SparseTensor& b) {
  if (a.coords != b.coords) {
    throw std::invalid_argument("concat_channels: active sets differ");
  }
  SparseTensor out;
  out.dims = a.dims;
  out.channels = a.channels + b.channels;
  out.coords = a.coords;
  out.features.resize(out.size() * out.channels);
  for (size_t i = 0; i < out.size(); ++i) {
    float* dst = out.feature(i);
    std::copy_n(a.feature(i), a.channels, dst);
    std::copy_n(b.feature(i), b.channels, dst + a.channels);
  }
  return out;
}

inline BevMap collapse_height(const SparseTensor& t) {
  BevMap bev;
  bev.nx = t.dims[0];
  bev.ny = t.dims[1];
  bev.channels = t.dims[2] * t.channels;
  for (size_t i = 0; i < t.size();) {
    const int32_t x = t.coords[i][0], y = t.coords[i][1];
    bev.coords.push_back({x, y});
    const size_t row = bev.features.size();
    bev.features.resize(row + bev.channels, 0.0f);
    while (i < t.size() && t.coords[i][0] == x && t.coords[i][1] == y) {
      std::copy_n(t.feature(i), t.channels,
                  bev.features.data() + row + static_cast<size_t>(t.coords[i][2]) * t.channels);
      ++i;
    }
  }
  return bev;
}

}  // namespace detail

/// Runs the encoder/decoder and returns full-resolution per-voxel features
/// plus the height-collapsed BEV map of the 8x-downsampled encoder output.
inline BackboneOutput backbone_forward(const SparseTensor& input, const BackboneConfig& cfg,
                                       const WeightStore& weights) {
  cfg.validate();
  const auto layers = backbone_layers(cfg, input.channels);
  auto layer_named = [&](const std::string& name) -> const LayerDef& {
    for (const LayerDef& l : layers) {
      if (l.name == name) return l;
    }
    throw std::logic_error("backbone: no layer named '" + name + "'");
  };

  const size_t stages = cfg.encoder_channels.size();
  std::vector<SparseTensor> stage_out(stages);

  SparseTensor cur = input;
  for (size_t s = 0; s < stages; ++s) {
    const std::string stage = "enc" + std::to_string(s);
    if (s > 0) {
      cur = conv_forward(cur, make_conv_spec(layer_named(stage + ".down"), weights));
    }
    for (int32_t i = 0; i < cfg.subm_layers_per_stage; ++i) {
      cur = conv_forward(cur, make_conv_spec(layer_named(stage + ".subm" + std::to_string(i)), weights));
    }
    stage_out[s] = cur;
  }

  const SparseTensor zdown =
      conv_forward(stage_out.back(), make_conv_spec(layer_named("bev.zdown"), weights));

  BackboneOutput out;
  out.bev = detail::collapse_height(zdown);

  cur = stage_out.back();
  for (size_t i = 0; i + 1 < stages; ++i) {
    const std::string block = "dec" + std::to_string(i);
    const SparseTensor& skip = stage_out[stages - 2 - i];
    if (skip.size() == 0) {
      // Nothing active at this resolution; propagate emptiness.
      cur = SparseTensor{skip.dims, cfg.decoder_channels[i], {}, {}};
      continue;
    }
    const SparseTensor up =
        deconv_forward(cur, make_conv_spec(layer_named(block + ".up"), weights), skip.coords,
                       skip.dims);
    cur = conv_forward(detail::concat_channels(up, skip),
                       make_conv_spec(layer_named(block + ".fuse"), weights));
  }
  out.point_features = conv_forward(
      cur, make_conv_spec(layer_named("dec" + std::to_string(stages - 1) + ".conv"), weights));
  return out;
}

}  // namespace partgrid
