// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sptad/numerics.hpp"
#include "sptad/pyramid.hpp"
#include "sptad/segment.hpp"

namespace sptad {

struct AlignConfig {
  /// Expansion divisor: each side grows by length / eta.
  double eta = 5.0;
  /// Output resolution T'.
  int align_len = 16;
  int samples_per_bin = 2;
};

/// Throws InvalidConfig on eta <= 0, align_len < 2 or samples_per_bin < 1.
void validate(const AlignConfig& cfg);

/// [s - l/eta, e + l/eta] clamped into [0,1].
TemporalSegment expand_segment(const TemporalSegment& seg, double eta);

/// floor(l0 + log2(length)) clamped into [0, l0]. `length` is the proposal
/// duration as a fraction of the clip. Throws NonPositiveLength for length <= 0.
int assign_level(double length, int l0);

/// 1D align: the segment is split into align_len equal bins; each bin
/// averages samples_per_bin linear interpolations at evenly spaced interior
/// offsets. Level sample i sits at normalized position (i + 0.5) / T_l;
/// positions outside the sample range clamp to the edge samples.
Matrix soi_align(const LevelFeature& level, const TemporalSegment& seg, const AlignConfig& cfg);

/// Expand, pick the level from the pre-expansion length, then align.
Matrix extract_soi(const FeaturePyramid& pyramid, const TemporalSegment& seg,
                   const AlignConfig& cfg);

}  // namespace sptad
