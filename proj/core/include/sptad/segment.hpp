// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace sptad {

/// Segments shorter than this (in clip fractions) are rejected as degenerate.
inline constexpr double kMinSegmentLength = 1e-6;

/// Unconstrained closed interval. Used for geometry in arbitrary units
/// (seconds, frames) where the [0,1] clip invariant does not apply.
struct Span {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// A normalized interval on a clip timeline.
///
/// Always satisfies 0 <= start < end <= 1 with end - start > kMinSegmentLength.
/// The only ways to obtain one are validate_segment(), to_start_end() and
/// the default constructor (the full clip).
class TemporalSegment {
 public:
  TemporalSegment() = default;

  double start() const { return start_; }
  double end() const { return end_; }
  double length() const { return end_ - start_; }
  double center() const { return 0.5 * (start_ + end_); }

  Span span() const { return {start_, end_}; }
  operator Span() const { return span(); }  // NOLINT(google-explicit-constructor)

  friend bool operator==(const TemporalSegment&, const TemporalSegment&) = default;

 private:
  friend TemporalSegment validate_segment(double start, double end);
  TemporalSegment(double start, double end) : start_(start), end_(end) {}

  double start_ = 0.0;
  double end_ = 1.0;
};

/// Proposal parameterization: normalized center and duration.
struct CenterLengthSegment {
  double center = 0.5;
  double length = 1.0;

  friend bool operator==(const CenterLengthSegment&, const CenterLengthSegment&) = default;
};

struct GroundTruthInstance {
  TemporalSegment segment;
  int label = 0;
};

/// A scored, classified segment in clip coordinates.
struct Detection {
  TemporalSegment segment;
  int label = 0;
  double score = 0.0;
};

/// A scored, classified segment in video seconds.
struct VideoDetection {
  Span segment;
  int label = 0;
  double score = 0.0;

  friend bool operator==(const VideoDetection&, const VideoDetection&) = default;
};

using DetectionSet = std::vector<VideoDetection>;

/// A labelled ground-truth action in video seconds.
struct VideoInstance {
  Span segment;
  int label = 0;

  friend bool operator==(const VideoInstance&, const VideoInstance&) = default;
};

/// Clamps both ends into [0,1]. Throws DegenerateSegment on non-finite input
/// or when the clamped length is not above kMinSegmentLength.
TemporalSegment validate_segment(double start, double end);

/// (c - l/2, c + l/2) clamped into [0,1].
TemporalSegment to_start_end(const CenterLengthSegment& seg);

CenterLengthSegment to_center_length(const TemporalSegment& seg);

}  // namespace sptad
