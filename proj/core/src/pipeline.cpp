// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sptad/error.hpp"
#include "sptad/match_loss.hpp"

namespace sptad {

namespace {

// Higher score first; ties go to the earlier start.
bool ranks_before(const VideoDetection& a, const VideoDetection& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.segment.start < b.segment.start;
}

double decay(double overlap, const NmsConfig& cfg) {
  switch (cfg.mode) {
    case NmsMode::kGaussian:
      return std::exp(-(overlap * overlap) / cfg.sigma);
    case NmsMode::kLinear:
      return overlap > cfg.overlap_threshold ? 1.0 - overlap : 1.0;
    case NmsMode::kHard:
      return overlap > cfg.overlap_threshold ? 0.0 : 1.0;
  }
  return 1.0;
}

}  // namespace

void validate(const NmsConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw InvalidConfig("nms: sigma must be > 0");
  if (!(cfg.score_floor >= 0.0)) throw InvalidConfig("nms: score_floor must be >= 0");
  if (cfg.top_k < 1) throw InvalidConfig("nms: top_k must be >= 1");
  if (!(cfg.overlap_threshold >= 0.0 && cfg.overlap_threshold <= 1.0)) {
    throw InvalidConfig("nms: overlap_threshold must lie in [0, 1]");
  }
}

std::vector<ClipWindow> make_windows(std::int64_t video_frames, int clip_len, int stride,
                                     double fps) {
  if (clip_len <= 0 || stride <= 0) throw InvalidConfig("windows: clip_len and stride must be > 0");
  if (stride > clip_len) throw InvalidConfig("windows: stride must not exceed clip_len");
  if (!(fps > 0.0)) throw InvalidConfig("windows: fps must be > 0");
  std::vector<ClipWindow> windows;
  if (video_frames <= clip_len) {
    windows.push_back({0, clip_len, fps});
    return windows;
  }
  std::int64_t start = 0;
  for (; start + clip_len <= video_frames; start += stride) {
    windows.push_back({start, clip_len, fps});
  }
  if (windows.back().start_frame + clip_len < video_frames) {
    windows.push_back({video_frames - clip_len, clip_len, fps});
  }
  return windows;
}

std::vector<GroundTruthInstance> select_training_targets(std::span<const VideoInstance> gts,
                                                         const ClipWindow& window) {
  const Span w = window.seconds();
  std::vector<GroundTruthInstance> out;
  for (const auto& gt : gts) {
    if (!(tioa(gt.segment, w) > 0.5)) continue;
    const double s = std::max(gt.segment.start, w.start);
    const double e = std::min(gt.segment.end, w.end);
    out.push_back({validate_segment((s - w.start) / w.length(), (e - w.start) / w.length()),
                   gt.label});
  }
  return out;
}

Matrix fuse_scores(const Matrix& stage_probs, std::span<const double> clip_probs) {
  if (stage_probs.cols() != clip_probs.size()) {
    throw ShapeMismatch("fuse_scores: " + std::to_string(stage_probs.cols()) +
                        " classes vs " + std::to_string(clip_probs.size()) + " clip scores");
  }
  Matrix fused = stage_probs;
  for (std::size_t r = 0; r < fused.rows(); ++r) {
    auto row = fused.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] *= clip_probs[c];
  }
  return fused;
}

DetectionSet soft_nms(const DetectionSet& dets, const NmsConfig& cfg) {
  validate(cfg);
  DetectionSet pool = dets;
  std::vector<char> alive(pool.size(), 1);
  DetectionSet kept;
  while (kept.size() < static_cast<std::size_t>(cfg.top_k)) {
    std::ptrdiff_t best = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (alive[i] && (best < 0 || ranks_before(pool[i], pool[static_cast<std::size_t>(best)]))) {
        best = static_cast<std::ptrdiff_t>(i);
      }
    }
    if (best < 0) break;
    const VideoDetection top = pool[static_cast<std::size_t>(best)];
    alive[static_cast<std::size_t>(best)] = 0;
    // Everything left scores no higher.
    if (top.score < cfg.score_floor) break;
    kept.push_back(top);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!alive[i] || pool[i].label != top.label) continue;
      const double w = decay(tiou(top.segment, pool[i].segment), cfg);
      if (cfg.mode == NmsMode::kHard && w == 0.0) {
        alive[i] = 0;
      } else {
        pool[i].score *= w;
      }
    }
  }
  std::stable_sort(kept.begin(), kept.end(), ranks_before);
  return kept;
}

VideoDetection to_video_time(const Detection& det, const ClipWindow& window) {
  const double base = static_cast<double>(window.start_frame);
  const double len = static_cast<double>(window.length);
  return {{(base + det.segment.start() * len) / window.fps,
           (base + det.segment.end() * len) / window.fps},
          det.label,
          det.score};
}

NetworkDetector::NetworkDetector(ModelConfig cfg, const ModelParams& params, int threads)
    : cfg_(std::move(cfg)), params_(params), threads_(threads) {
  validate(cfg_);
}

std::vector<Detection> NetworkDetector::detect(const BackboneFeatures& features,
                                               const ClipWindow& /*window*/,
                                               std::int64_t /*video_frames*/) const {
  ForwardOptions opts;
  opts.threads = threads_;
  const ClipForward fwd = forward_clip(features, cfg_, params_, opts);
  const StageOutput& last = fwd.stages.back();
  const Matrix fused = fuse_scores(last.class_probs, fwd.clip_probs);
  std::vector<Detection> dets;
  dets.reserve(fused.rows());
  for (std::size_t n = 0; n < fused.rows(); ++n) {
    auto row = fused.row(n);
    const auto best = std::max_element(row.begin(), row.end());
    dets.push_back({last.segments[n], static_cast<int>(best - row.begin()), *best});
  }
  return dets;
}

DetectionSet infer_video(const FeatureProvider& provider, const std::string& video_id,
                         const ClipDetector& detector, const InferenceConfig& cfg,
                         const NmsConfig& nms) {
  const std::int64_t frames = provider.num_frames(video_id);
  const double fps = provider.fps(video_id);
  DetectionSet pooled;
  for (const ClipWindow& w : make_windows(frames, cfg.clip_len, cfg.stride, fps)) {
    const BackboneFeatures feats = provider.features(video_id, w);
    for (const Detection& d : detector.detect(feats, w, frames)) {
      pooled.push_back(to_video_time(d, w));
    }
  }
  return soft_nms(pooled, nms);
}

}  // namespace sptad
