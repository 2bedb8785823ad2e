// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "sptad/error.hpp"
#include "sptad/match_loss.hpp"

namespace sptad {

double average_precision(std::span<const ClassDetection> dets,
                         std::span<const ClassGroundTruth> gts, double threshold) {
  if (gts.empty()) return 0.0;
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&dets](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    return dets[a].segment.start < dets[b].segment.start;
  });

  std::vector<char> claimed(gts.size(), 0);
  std::vector<double> precision;
  std::vector<double> recall;
  precision.reserve(dets.size());
  recall.reserve(dets.size());
  std::size_t tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const ClassDetection& d = dets[order[rank]];
    double best = -1.0;
    std::ptrdiff_t best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (claimed[g] || gts[g].video != d.video) continue;
      const double ov = tiou(d.segment, gts[g].segment);
      if (ov > best) {
        best = ov;
        best_gt = static_cast<std::ptrdiff_t>(g);
      }
    }
    if (best_gt >= 0 && best >= threshold) {
      claimed[static_cast<std::size_t>(best_gt)] = 1;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(rank + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }

  // Precision envelope, then area under the recall staircase.
  std::vector<double> mprec{0.0};
  std::vector<double> mrec{0.0};
  mprec.insert(mprec.end(), precision.begin(), precision.end());
  mrec.insert(mrec.end(), recall.begin(), recall.end());
  mprec.push_back(0.0);
  mrec.push_back(1.0);
  for (std::size_t i = mprec.size() - 1; i > 0; --i) {
    mprec[i - 1] = std::max(mprec[i - 1], mprec[i]);
  }
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i) {
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mprec[i];
  }
  return ap;
}

EvalReport evaluate(const std::map<std::string, DetectionSet>& dets_by_video,
                    const std::map<std::string, std::vector<VideoInstance>>& gts_by_video,
                    int num_classes, std::span<const double> thresholds) {
  std::map<std::string, int> video_index;
  for (const auto& [id, _] : gts_by_video) video_index.emplace(id, static_cast<int>(video_index.size()));
  for (const auto& [id, _] : dets_by_video) video_index.emplace(id, static_cast<int>(video_index.size()));

  const auto k = static_cast<std::size_t>(num_classes);
  std::vector<std::vector<ClassDetection>> dets(k);
  std::vector<std::vector<ClassGroundTruth>> gts(k);
  for (const auto& [id, list] : gts_by_video) {
    for (const auto& g : list) {
      if (g.label < 0 || g.label >= num_classes) {
        throw UnknownClass("ground truth in '" + id + "' has label " + std::to_string(g.label));
      }
      gts[static_cast<std::size_t>(g.label)].push_back({video_index.at(id), g.segment});
    }
  }
  for (const auto& [id, list] : dets_by_video) {
    for (const auto& d : list) {
      if (d.label < 0 || d.label >= num_classes) {
        throw UnknownClass("detection in '" + id + "' has label " + std::to_string(d.label));
      }
      dets[static_cast<std::size_t>(d.label)].push_back({video_index.at(id), d.segment, d.score});
    }
  }

  EvalReport report;
  report.thresholds.assign(thresholds.begin(), thresholds.end());
  report.map_at.assign(thresholds.size(), 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    if (gts[c].empty()) continue;
    auto& aps = report.per_class_ap[static_cast<int>(c)];
    for (double t : thresholds) aps.push_back(average_precision(dets[c], gts[c], t));
  }
  if (!report.per_class_ap.empty()) {
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      double sum = 0.0;
      for (const auto& [_, aps] : report.per_class_ap) sum += aps[t];
      report.map_at[t] = sum / static_cast<double>(report.per_class_ap.size());
    }
  }
  if (!thresholds.empty()) {
    report.map_avg = std::accumulate(report.map_at.begin(), report.map_at.end(), 0.0) /
                     static_cast<double>(thresholds.size());
  }
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  char line[64];
  out << "tIoU      mAP\n";
  for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
    std::snprintf(line, sizeof(line), "%-8.2f  %.4f\n", report.thresholds[t], report.map_at[t]);
    out << line;
  }
  std::snprintf(line, sizeof(line), "map_avg %.4f\n", report.map_avg);
  out << line;
  return out.str();
}

void write_report_json(const std::filesystem::path& path, const EvalReport& report,
                       std::span<const std::string> labels) {
  nlohmann::ordered_json doc;
  doc["thresholds"] = report.thresholds;
  doc["map_at"] = report.map_at;
  doc["map_avg"] = report.map_avg;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (const auto& [c, aps] : report.per_class_ap) {
    const std::string name = static_cast<std::size_t>(c) < labels.size()
                                 ? labels[static_cast<std::size_t>(c)]
                                 : std::to_string(c);
    per_class[name] = aps;
  }
  doc["per_class_ap"] = std::move(per_class);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace sptad
