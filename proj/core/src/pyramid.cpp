// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/pyramid.hpp"

#include <algorithm>
#include <string>

#include "sptad/error.hpp"

namespace sptad {

std::vector<LevelFeature> concat_streams(const std::vector<LevelFeature>& rgb,
                                         const std::vector<LevelFeature>& flow) {
  if (rgb.size() != flow.size()) {
    throw ShapeMismatch("concat_streams: " + std::to_string(rgb.size()) + " rgb levels vs " +
                        std::to_string(flow.size()) + " flow levels");
  }
  std::vector<LevelFeature> out;
  out.reserve(rgb.size());
  for (std::size_t l = 0; l < rgb.size(); ++l) {
    const auto& a = rgb[l];
    const auto& b = flow[l];
    if (a.length() != b.length() || a.temporal_stride != b.temporal_stride) {
      throw ShapeMismatch("concat_streams: level " + std::to_string(l) +
                          " differs in length or stride");
    }
    LevelFeature cat{Matrix(a.length(), a.channels() + b.channels()), a.temporal_stride};
    for (std::size_t t = 0; t < a.length(); ++t) {
      auto dst = cat.data.row(t);
      std::copy(a.data.row(t).begin(), a.data.row(t).end(), dst.begin());
      std::copy(b.data.row(t).begin(), b.data.row(t).end(), dst.begin() + a.channels());
    }
    out.push_back(std::move(cat));
  }
  return out;
}

LevelFeature lateral_project(const LevelFeature& level, const LinearParams& params,
                             int out_channels) {
  if (params.out_features() != static_cast<std::size_t>(out_channels)) {
    throw ShapeMismatch("lateral_project: expected " + std::to_string(out_channels) +
                        " output channels, params give " +
                        std::to_string(params.out_features()));
  }
  return {linear(level.data, params), level.temporal_stride};
}

LevelFeature top_down_fuse(const LevelFeature& coarse, const LevelFeature& fine) {
  if (fine.length() != 2 * coarse.length() || fine.channels() != coarse.channels()) {
    throw ShapeMismatch("top_down_fuse: fine must be twice as long with equal channels");
  }
  LevelFeature out = fine;
  for (std::size_t t = 0; t < out.length(); ++t) {
    auto dst = out.data.row(t);
    auto src = coarse.data.row(t / 2);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
  return out;
}

LevelFeature max_pool_stride2(const LevelFeature& level) {
  if (level.length() % 2 != 0) {
    throw OddLength("max_pool_stride2: length " + std::to_string(level.length()) + " is odd");
  }
  LevelFeature out{Matrix(level.length() / 2, level.channels()), level.temporal_stride * 2};
  for (std::size_t t = 0; t < out.length(); ++t) {
    auto a = level.data.row(2 * t);
    auto b = level.data.row(2 * t + 1);
    auto dst = out.data.row(t);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] = std::max(a[c], b[c]);
  }
  return out;
}

FeaturePyramid build_pyramid(const std::vector<LevelFeature>& backbone_levels,
                             const PyramidParams& params, int channels) {
  if (backbone_levels.size() != kBackboneLevels) {
    throw ShapeMismatch("build_pyramid: expected 3 backbone levels, got " +
                        std::to_string(backbone_levels.size()));
  }
  constexpr std::array<int, kBackboneLevels> kStrides{2, 4, 8};
  for (int l = 0; l < kBackboneLevels; ++l) {
    if (backbone_levels[l].temporal_stride != kStrides[l]) {
      throw ShapeMismatch("build_pyramid: level " + std::to_string(l) + " has stride " +
                          std::to_string(backbone_levels[l].temporal_stride));
    }
  }
  std::array<LevelFeature, kBackboneLevels> lat;
  for (int l = 0; l < kBackboneLevels; ++l) {
    lat[l] = lateral_project(backbone_levels[l], params.lateral[l], channels);
  }
  FeaturePyramid pyr;
  pyr.levels.resize(kPyramidLevels);
  pyr.levels[2] = lat[2];
  pyr.levels[1] = top_down_fuse(pyr.levels[2], lat[1]);
  pyr.levels[0] = top_down_fuse(pyr.levels[1], lat[0]);
  pyr.levels[3] = max_pool_stride2(pyr.levels[2]);
  return pyr;
}

PyramidParams make_pyramid_params(const std::array<int, kBackboneLevels>& in_channels,
                                  int out_channels, std::uint64_t seed) {
  PyramidParams p;
  for (int l = 0; l < kBackboneLevels; ++l) {
    const std::string name = "pyramid.lateral" + std::to_string(l);
    p.lateral[l].weight = seeded_init(out_channels, in_channels[l], seed,
                                      InitScheme::kUniformFan, name + ".weight");
    p.lateral[l].bias.assign(out_channels, 0.0);
  }
  return p;
}

}  // namespace sptad
