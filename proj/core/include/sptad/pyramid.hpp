// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sptad/numerics.hpp"

namespace sptad {

inline constexpr int kPyramidChannels = 256;
inline constexpr int kBackboneLevels = 3;
inline constexpr int kPyramidLevels = 4;

/// One temporal resolution: T_l x C features, each step covering
/// `temporal_stride` frames of the clip.
struct LevelFeature {
  Matrix data;
  int temporal_stride = 1;

  std::size_t length() const { return data.rows(); }
  std::size_t channels() const { return data.cols(); }
};

/// Per-stream backbone outputs, already spatially pooled to 1D.
struct BackboneFeatures {
  std::vector<LevelFeature> rgb;
  std::vector<LevelFeature> flow;
};

/// Index 0 is the finest level.
struct FeaturePyramid {
  std::vector<LevelFeature> levels;

  /// Highest level index (l0 in the level-assignment rule).
  int top_level() const { return static_cast<int>(levels.size()) - 1; }
};

/// Kernel-size-1 lateral projections, one per backbone level.
struct PyramidParams {
  std::array<LinearParams, kBackboneLevels> lateral;
};

/// Per-level channel concatenation [rgb | flow].
std::vector<LevelFeature> concat_streams(const std::vector<LevelFeature>& rgb,
                                         const std::vector<LevelFeature>& flow);

/// Per-timestep linear map to `out_channels` channels.
LevelFeature lateral_project(const LevelFeature& level, const LinearParams& params,
                             int out_channels = kPyramidChannels);

/// fine + nearest-neighbour 2x upsample of coarse.
LevelFeature top_down_fuse(const LevelFeature& coarse, const LevelFeature& fine);

/// Pairwise max along time; throws OddLength on an odd number of steps.
LevelFeature max_pool_stride2(const LevelFeature& level);

/// Three backbone levels (strides 2, 4, 8) -> four pyramid levels (strides
/// 2, 4, 8, 16): lateral projection, top-down fusion, then max-pooling of
/// the highest level.
FeaturePyramid build_pyramid(const std::vector<LevelFeature>& backbone_levels,
                             const PyramidParams& params, int channels = kPyramidChannels);

/// Lateral projections drawn from `seed`; names are "pyramid.lateral{i}.*".
PyramidParams make_pyramid_params(const std::array<int, kBackboneLevels>& in_channels,
                                  int out_channels, std::uint64_t seed);

}  // namespace sptad
