// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sptad/config.hpp"
#include "sptad/detect_head.hpp"
#include "sptad/numerics.hpp"
#include "sptad/pyramid.hpp"
#include "sptad/segment.hpp"

namespace sptad {

struct ClipWindow {
  std::int64_t start_frame = 0;
  /// Clip length in frames.
  int length = 256;
  double fps = 10.0;

  Span seconds() const {
    return {static_cast<double>(start_frame) / fps,
            static_cast<double>(start_frame + length) / fps};
  }
  friend bool operator==(const ClipWindow&, const ClipWindow&) = default;
};

enum class NmsMode { kGaussian, kLinear, kHard };

struct NmsConfig {
  NmsMode mode = NmsMode::kGaussian;
  /// Gaussian decay width: score *= exp(-tIoU^2 / sigma).
  double sigma = 0.5;
  /// Overlap above which the linear and hard modes act.
  double overlap_threshold = 0.5;
  double score_floor = 1e-3;
  int top_k = 200;
};

void validate(const NmsConfig& cfg);

inline constexpr int kTrainStride = 30;
inline constexpr int kInferenceStride = 128;

/// Window starts 0, stride, 2*stride, ... while the window fits; a final
/// window ending at the last frame is appended when the regular ones stop
/// short of it. Videos shorter than clip_len yield one window at frame 0.
/// Throws InvalidConfig unless 0 < stride <= clip_len.
std::vector<ClipWindow> make_windows(std::int64_t video_frames, int clip_len, int stride,
                                     double fps = 10.0);

/// Ground truths whose tIoA with the window exceeds 0.5 (strictly), truncated
/// to the window and renormalized to clip coordinates.
std::vector<GroundTruthInstance> select_training_targets(std::span<const VideoInstance> gts,
                                                         const ClipWindow& window);

/// Per-class product of proposal and clip-level probabilities.
Matrix fuse_scores(const Matrix& stage_probs, std::span<const double> clip_probs);

/// Class-wise soft-NMS. Repeatedly keeps the best remaining detection and
/// decays same-class overlaps; drops scores below the floor; keeps at most
/// top_k. Output is sorted by score (descending), ties by earlier start.
DetectionSet soft_nms(const DetectionSet& dets, const NmsConfig& cfg);

VideoDetection to_video_time(const Detection& det, const ClipWindow& window);

/// Source of per-window backbone features for a video.
class FeatureProvider {
 public:
  virtual ~FeatureProvider() = default;
  virtual std::int64_t num_frames(const std::string& video_id) const = 0;
  virtual double fps(const std::string& video_id) const = 0;
  virtual BackboneFeatures features(const std::string& video_id,
                                    const ClipWindow& window) const = 0;
};

/// Turns one clip's backbone features into clip-coordinate detections.
class ClipDetector {
 public:
  virtual ~ClipDetector() = default;
  virtual std::vector<Detection> detect(const BackboneFeatures& features,
                                        const ClipWindow& window,
                                        std::int64_t video_frames) const = 0;
};

/// The full network: pyramid, stacked heads, clip-level score fusion. Each
/// proposal of the last stage yields one detection carrying the argmax class
/// of its fused scores.
class NetworkDetector : public ClipDetector {
 public:
  NetworkDetector(ModelConfig cfg, const ModelParams& params, int threads = 1);

  std::vector<Detection> detect(const BackboneFeatures& features, const ClipWindow& window,
                                std::int64_t video_frames) const override;

 private:
  ModelConfig cfg_;
  const ModelParams& params_;
  int threads_;
};

struct InferenceConfig {
  int clip_len = 256;
  int stride = kInferenceStride;
};

/// Slides windows over the video, detects per window, maps to seconds, pools
/// the detections in window order and applies soft-NMS.
DetectionSet infer_video(const FeatureProvider& provider, const std::string& video_id,
                         const ClipDetector& detector, const InferenceConfig& cfg,
                         const NmsConfig& nms);

}  // namespace sptad
