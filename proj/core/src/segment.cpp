// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/segment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sptad/error.hpp"

namespace sptad {

TemporalSegment validate_segment(double start, double end) {
  if (!std::isfinite(start) || !std::isfinite(end)) {
    throw DegenerateSegment("segment bounds must be finite");
  }
  const double s = std::clamp(start, 0.0, 1.0);
  const double e = std::clamp(end, 0.0, 1.0);
  if (!(e - s > kMinSegmentLength)) {
    std::ostringstream msg;
    msg << "degenerate segment [" << start << ", " << end << "] (clamped length "
        << (e - s) << ")";
    throw DegenerateSegment(msg.str());
  }
  return TemporalSegment(s, e);
}

TemporalSegment to_start_end(const CenterLengthSegment& seg) {
  if (!(seg.length > 0.0) || !std::isfinite(seg.center)) {
    throw DegenerateSegment("center/length segment needs a finite center and positive length");
  }
  const double half = 0.5 * seg.length;
  return validate_segment(seg.center - half, seg.center + half);
}

CenterLengthSegment to_center_length(const TemporalSegment& seg) {
  return {seg.center(), seg.length()};
}

}  // namespace sptad
