// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sptad/numerics.hpp"
#include "sptad/pipeline.hpp"
#include "sptad/pyramid.hpp"
#include "sptad/segment.hpp"

namespace sptad {

struct VideoAnnotation {
  double duration_sec = 0.0;
  double fps = 10.0;
  std::vector<VideoInstance> instances;

  std::int64_t num_frames() const;
  friend bool operator==(const VideoAnnotation&, const VideoAnnotation&) = default;
};

/// A label map plus per-video annotations, ordered by video id.
struct AnnotationSet {
  std::vector<std::string> labels;
  std::map<std::string, VideoAnnotation> videos;

  /// Ground truths per video in the shape evaluate() takes.
  std::map<std::string, std::vector<VideoInstance>> ground_truths() const;
  friend bool operator==(const AnnotationSet&, const AnnotationSet&) = default;
};

/// Parameters of the synthetic dataset and backbone.
struct SyntheticSpec {
  std::uint64_t seed = 0;
  int n_videos = 20;
  int num_classes = 4;
  double min_duration_sec = 45.0;
  double max_duration_sec = 75.0;
  double fps = 10.0;
  int clip_len = 256;
  int min_instances = 1;
  int max_instances = 3;
  /// Instance length as a fraction of the clip duration: with probability
  /// short_mass it is drawn from [min_length_frac, 0.25], otherwise from
  /// (0.25, max_length_frac].
  double short_mass = 0.8;
  double min_length_frac = 0.04;
  double max_length_frac = 0.45;
  double min_gap_sec = 1.0;
  /// Per-stream channel widths of the three backbone levels.
  std::array<int, 3> rgb_channels{16, 24, 32};
  std::array<int, 3> flow_channels{16, 24, 32};
  /// Hash noise is uniform in [-noise_amplitude, noise_amplitude].
  double noise_amplitude = 0.5;
  /// Added to channel `label` in proportion to how much of a step a ground
  /// truth covers.
  double bump_amplitude = 8.0;
};

/// Throws InvalidSpec naming the first violated constraint.
void validate(const SyntheticSpec& spec);

inline constexpr double kShortLengthFrac = 0.25;

/// Deterministic dataset: video ids "video_0000"..., labels "action_00"...,
/// non-overlapping instances separated by at least min_gap_sec.
AnnotationSet synth_dataset(const SyntheticSpec& spec);

/// Three levels per stream at T/2, T/4, T/8 (strides 2, 4, 8). Values are hash
/// noise keyed by (seed, video, stream, level, absolute frame, channel) plus
/// the class-keyed coverage bump of every ground truth in `gts` (video seconds).
BackboneFeatures synth_backbone(const std::string& video_id, const ClipWindow& window,
                                std::span<const VideoInstance> gts, const SyntheticSpec& spec);

/// Mean over H and W of a (T, H, W, C) row-major tensor -> T x C.
Matrix spatial_average_pool(std::span<const double> data, std::size_t t, std::size_t h,
                            std::size_t w, std::size_t c);

/// Feature provider backed by synth_backbone over an annotation set.
class SyntheticFeatureProvider : public FeatureProvider {
 public:
  SyntheticFeatureProvider(const AnnotationSet& annotations, SyntheticSpec spec);

  std::int64_t num_frames(const std::string& video_id) const override;
  double fps(const std::string& video_id) const override;
  BackboneFeatures features(const std::string& video_id, const ClipWindow& window) const override;

 private:
  const VideoAnnotation& video(const std::string& video_id) const;

  const AnnotationSet& annotations_;
  SyntheticSpec spec_;
};

/// Reads the planted bumps back: thresholds each class channel of the finest
/// rgb level at half the bump amplitude and refines the run boundaries from
/// the partial coverage of the edge steps. Runs cut by a window edge that is
/// not a video edge score 0.5, complete runs score 1.
class PlantedBumpDetector : public ClipDetector {
 public:
  explicit PlantedBumpDetector(SyntheticSpec spec);

  std::vector<Detection> detect(const BackboneFeatures& features, const ClipWindow& window,
                                std::int64_t video_frames) const override;

 private:
  SyntheticSpec spec_;
};

/// {"labels": [...], "database": {id: {"duration_sec", "fps",
///  "annotations": [{"label", "segment": [s0, s1]}]}}}
AnnotationSet load_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const AnnotationSet& annotations);

/// {"results": {id: [{"label", "score", "segment": [s0, s1]}]}}. Labels are
/// resolved against `labels`; an unknown label throws UnknownClass.
std::map<std::string, DetectionSet> load_detections(const std::filesystem::path& path,
                                                    std::span<const std::string> labels);
void write_detections(const std::filesystem::path& path,
                      const std::map<std::string, DetectionSet>& results,
                      std::span<const std::string> labels);

/// Ground truths as score-1 detections.
std::map<std::string, DetectionSet> oracle_detections(const AnnotationSet& annotations);

}  // namespace sptad
