// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/segment_features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sptad/error.hpp"

namespace sptad {

void validate(const AlignConfig& cfg) {
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) throw InvalidConfig("align: eta must be > 0");
  if (cfg.align_len < 2) throw InvalidConfig("align: align_len must be >= 2");
  if (cfg.samples_per_bin < 1) throw InvalidConfig("align: samples_per_bin must be >= 1");
}

TemporalSegment expand_segment(const TemporalSegment& seg, double eta) {
  const double grow = seg.length() / eta;
  return validate_segment(seg.start() - grow, seg.end() + grow);
}

int assign_level(double length, int l0) {
  if (!(length > 0.0)) {
    throw NonPositiveLength("assign_level: length must be positive, got " +
                            std::to_string(length));
  }
  const double raw = std::floor(static_cast<double>(l0) + std::log2(length));
  return static_cast<int>(std::clamp(raw, 0.0, static_cast<double>(l0)));
}

Matrix soi_align(const LevelFeature& level, const TemporalSegment& seg, const AlignConfig& cfg) {
  validate(cfg);
  if (level.length() == 0 || level.channels() == 0) {
    throw ShapeMismatch("soi_align: empty level");
  }
  const std::size_t len = level.length();
  const std::size_t channels = level.channels();
  const double steps = static_cast<double>(len);
  const double bin_width = seg.length() / cfg.align_len;
  const double sample_step = bin_width / cfg.samples_per_bin;
  const double inv_samples = 1.0 / cfg.samples_per_bin;
  const double last = steps - 1.0;

  Matrix out(static_cast<std::size_t>(cfg.align_len), channels);
  for (int b = 0; b < cfg.align_len; ++b) {
    auto dst = out.row(static_cast<std::size_t>(b));
    const double bin_start = seg.start() + b * bin_width;
    for (int s = 0; s < cfg.samples_per_bin; ++s) {
      const double pos = bin_start + (s + 0.5) * sample_step;
      const double x = std::clamp(pos * steps - 0.5, 0.0, last);
      const std::size_t lo = static_cast<std::size_t>(std::floor(x));
      const std::size_t hi = std::min(lo + 1, len - 1);
      const double frac = x - static_cast<double>(lo);
      auto a = level.data.row(lo);
      auto c = level.data.row(hi);
      for (std::size_t ch = 0; ch < channels; ++ch) {
        dst[ch] += ((1.0 - frac) * a[ch] + frac * c[ch]) * inv_samples;
      }
    }
  }
  return out;
}

Matrix extract_soi(const FeaturePyramid& pyramid, const TemporalSegment& seg,
                   const AlignConfig& cfg) {
  if (pyramid.levels.empty()) throw ShapeMismatch("extract_soi: empty pyramid");
  const TemporalSegment expanded = expand_segment(seg, cfg.eta);
  const int level = assign_level(seg.length(), pyramid.top_level());
  return soi_align(pyramid.levels[static_cast<std::size_t>(level)], expanded, cfg);
}

}  // namespace sptad
