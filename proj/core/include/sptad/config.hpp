// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

namespace sptad {

/// Architecture and run configuration of the detector.
struct ModelConfig {
  int num_proposals = 50;
  int num_classes = 20;
  /// Feature width d; also the pyramid channel width.
  int d_model = 256;
  /// Hidden width d_h of the dynamic interaction.
  int d_hidden = 64;
  /// Aligned SoI resolution.
  int align_len = 16;
  int samples_per_bin = 2;
  /// Expansion divisor applied to proposal segments before alignment.
  double eta = 5.0;
  int stages = 4;
  int attn_heads = 8;
  /// Clip length in frames.
  int clip_len = 256;
  /// Concatenated (rgb + flow) channel width of each backbone level.
  std::array<int, 3> backbone_channels{32, 48, 64};
  /// Place initial proposals randomly instead of covering the full clip.
  bool random_init = false;
  std::uint64_t seed = 0;
};

/// Throws InvalidConfig naming the first violated invariant.
void validate(const ModelConfig& cfg);

}  // namespace sptad
