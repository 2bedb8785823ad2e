// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sptad/segment.hpp"

namespace sptad {

/// tIoU thresholds 0.3:0.1:0.7.
inline const std::vector<double> kDefaultThresholds{0.3, 0.4, 0.5, 0.6, 0.7};

/// A detection or ground truth of a single class, tagged with its video.
struct ClassDetection {
  int video = 0;
  Span segment;
  double score = 0.0;
};

struct ClassGroundTruth {
  int video = 0;
  Span segment;
};

/// Interpolated AP of one class at one tIoU threshold. Detections are ranked
/// by score (ties: earlier start, then input order); each one claims the
/// unmatched same-video ground truth of highest tIoU when that tIoU reaches
/// the threshold, otherwise it is a false positive.
double average_precision(std::span<const ClassDetection> dets,
                         std::span<const ClassGroundTruth> gts, double threshold);

struct EvalReport {
  std::vector<double> thresholds;
  /// class -> AP per threshold, only for classes with at least one ground truth.
  std::map<int, std::vector<double>> per_class_ap;
  std::vector<double> map_at;
  double map_avg = 0.0;
};

/// Pools every video per class; mAP@t averages classes that have ground
/// truths; map_avg averages mAP@t over thresholds. Throws UnknownClass for a
/// label outside [0, num_classes).
EvalReport evaluate(const std::map<std::string, DetectionSet>& dets_by_video,
                    const std::map<std::string, std::vector<VideoInstance>>& gts_by_video,
                    int num_classes, std::span<const double> thresholds = kDefaultThresholds);

/// Fixed-width text table (one row per threshold plus the average).
std::string format_report(const EvalReport& report);

void write_report_json(const std::filesystem::path& path, const EvalReport& report,
                       std::span<const std::string> labels);

}  // namespace sptad
