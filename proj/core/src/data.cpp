// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sptad/error.hpp"

namespace sptad {

namespace {

using nlohmann::ordered_json;

std::string numbered(const char* fmt, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), fmt, i);
  return buf;
}

void require_spec(bool ok, const std::string& what) {
  if (!ok) throw InvalidSpec("invalid synthetic spec: " + what);
}

ordered_json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const ordered_json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Typed field access that reports the JSON path on failure.
const ordered_json& field(const ordered_json& obj, const std::string& key,
                          const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + ": missing field '" + key + "'");
  return *it;
}

double number(const ordered_json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  return v.get<double>();
}

std::string text(const ordered_json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path + ": expected a string");
  return v.get<std::string>();
}

Span segment_of(const ordered_json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ParseError(path + ": expected [start, end]");
  return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
}

std::map<std::string, int> label_lookup(std::span<const std::string> labels) {
  std::map<std::string, int> lookup;
  for (std::size_t i = 0; i < labels.size(); ++i) lookup.emplace(labels[i], static_cast<int>(i));
  return lookup;
}

}  // namespace

std::int64_t VideoAnnotation::num_frames() const {
  return static_cast<std::int64_t>(std::llround(duration_sec * fps));
}

std::map<std::string, std::vector<VideoInstance>> AnnotationSet::ground_truths() const {
  std::map<std::string, std::vector<VideoInstance>> out;
  for (const auto& [id, video] : videos) out.emplace(id, video.instances);
  return out;
}

void validate(const SyntheticSpec& spec) {
  require_spec(spec.n_videos >= 0, "n_videos must be >= 0");
  require_spec(spec.num_classes >= 1, "num_classes must be >= 1");
  for (int l = 0; l < 3; ++l) {
    require_spec(spec.rgb_channels[l] >= spec.num_classes &&
                     spec.flow_channels[l] >= spec.num_classes,
                 "every stream level needs at least num_classes channels");
  }
  require_spec(spec.fps > 0.0, "fps must be > 0");
  require_spec(spec.clip_len >= 16 && spec.clip_len % 16 == 0,
               "clip_len must be a positive multiple of 16");
  require_spec(spec.min_duration_sec > 0.0 && spec.min_duration_sec <= spec.max_duration_sec,
               "need 0 < min_duration_sec <= max_duration_sec");
  require_spec(spec.min_instances >= 0 && spec.min_instances <= spec.max_instances,
               "need 0 <= min_instances <= max_instances");
  require_spec(spec.short_mass >= 0.0 && spec.short_mass <= 1.0, "short_mass must lie in [0,1]");
  require_spec(spec.min_length_frac > 0.0 && spec.min_length_frac <= kShortLengthFrac &&
                   spec.max_length_frac >= kShortLengthFrac && spec.max_length_frac <= 1.0,
               "need 0 < min_length_frac <= 0.25 <= max_length_frac <= 1");
  require_spec(spec.min_gap_sec >= 0.0, "min_gap_sec must be >= 0");
  const double clip_sec = spec.clip_len / spec.fps;
  require_spec(spec.max_instances * (spec.max_length_frac * clip_sec + spec.min_gap_sec) <=
                   spec.min_duration_sec + spec.min_gap_sec,
               "max_instances of the longest length do not fit in min_duration_sec");
  require_spec(spec.noise_amplitude >= 0.0, "noise_amplitude must be >= 0");
  require_spec(spec.bump_amplitude > 2.0 * spec.noise_amplitude,
               "bump_amplitude must exceed twice the noise amplitude");
}

AnnotationSet synth_dataset(const SyntheticSpec& spec) {
  validate(spec);
  AnnotationSet set;
  for (int k = 0; k < spec.num_classes; ++k) set.labels.push_back(numbered("action_%02d", k));

  const double clip_sec = spec.clip_len / spec.fps;
  const CounterRng rng(spec.seed, "synth_dataset");
  for (int v = 0; v < spec.n_videos; ++v) {
    std::uint64_t counter = static_cast<std::uint64_t>(v) << 16;
    auto draw = [&rng, &counter] { return rng.uniform(counter++); };

    VideoAnnotation video;
    video.fps = spec.fps;
    const double raw = spec.min_duration_sec + (spec.max_duration_sec - spec.min_duration_sec) * draw();
    video.duration_sec = std::round(raw * spec.fps) / spec.fps;

    const int span = spec.max_instances - spec.min_instances + 1;
    const int count =
        spec.min_instances + std::min(span - 1, static_cast<int>(draw() * span));
    std::vector<double> lengths(static_cast<std::size_t>(count));
    std::vector<int> labels(static_cast<std::size_t>(count));
    double occupied = 0.0;
    for (int i = 0; i < count; ++i) {
      const bool is_short = draw() < spec.short_mass;
      const double u = draw();
      const double frac =
          is_short ? spec.min_length_frac + (kShortLengthFrac - spec.min_length_frac) * u
                   : spec.max_length_frac - (spec.max_length_frac - kShortLengthFrac) * u;
      lengths[static_cast<std::size_t>(i)] = frac * clip_sec;
      labels[static_cast<std::size_t>(i)] =
          std::min(spec.num_classes - 1, static_cast<int>(draw() * spec.num_classes));
      occupied += lengths[static_cast<std::size_t>(i)];
    }
    const double gaps = count > 0 ? (count - 1) * spec.min_gap_sec : 0.0;
    const double slack = std::max(0.0, video.duration_sec - occupied - gaps);
    std::vector<double> cuts(static_cast<std::size_t>(count));
    for (double& c : cuts) c = draw() * slack;
    std::sort(cuts.begin(), cuts.end());
    double cursor = 0.0;
    for (int i = 0; i < count; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double start = cuts[idx] + cursor;
      const double end = std::min(video.duration_sec, start + lengths[idx]);
      video.instances.push_back({{start, end}, labels[idx]});
      cursor += lengths[idx] + spec.min_gap_sec;
    }
    set.videos.emplace(numbered("video_%04d", v), std::move(video));
  }
  return set;
}

BackboneFeatures synth_backbone(const std::string& video_id, const ClipWindow& window,
                                std::span<const VideoInstance> gts, const SyntheticSpec& spec) {
  validate(spec);
  if (window.length != spec.clip_len) {
    throw InvalidSpec("synth_backbone: window length differs from spec clip_len");
  }
  BackboneFeatures out;
  for (int stream = 0; stream < 2; ++stream) {
    const auto& widths = stream == 0 ? spec.rgb_channels : spec.flow_channels;
    auto& levels = stream == 0 ? out.rgb : out.flow;
    for (int l = 0; l < 3; ++l) {
      const int stride = 2 << l;
      const std::size_t steps = static_cast<std::size_t>(spec.clip_len / stride);
      const std::size_t channels = static_cast<std::size_t>(widths[l]);
      const CounterRng rng(spec.seed, "backbone/" + video_id + (stream == 0 ? "/rgb/" : "/flow/") +
                                          std::to_string(l));
      LevelFeature level{Matrix(steps, channels), stride};
      for (std::size_t t = 0; t < steps; ++t) {
        const std::int64_t frame = window.start_frame + static_cast<std::int64_t>(t) * stride;
        auto row = level.data.row(t);
        for (std::size_t c = 0; c < channels; ++c) {
          const std::uint64_t key = static_cast<std::uint64_t>(frame) * channels + c;
          row[c] = (2.0 * rng.uniform(key) - 1.0) * spec.noise_amplitude;
        }
        const double f0 = static_cast<double>(frame);
        for (const auto& gt : gts) {
          const double gs = gt.segment.start * window.fps;
          const double ge = gt.segment.end * window.fps;
          const double overlap = std::min(ge, f0 + stride) - std::max(gs, f0);
          if (overlap > 0.0) {
            row[static_cast<std::size_t>(gt.label)] += spec.bump_amplitude * overlap / stride;
          }
        }
      }
      levels.push_back(std::move(level));
    }
  }
  return out;
}

Matrix spatial_average_pool(std::span<const double> data, std::size_t t, std::size_t h,
                            std::size_t w, std::size_t c) {
  if (data.size() != t * h * w * c) throw ShapeMismatch("spatial_average_pool: size mismatch");
  if (h == 0 || w == 0) throw ShapeMismatch("spatial_average_pool: empty spatial extent");
  Matrix out(t, c);
  const double inv = 1.0 / static_cast<double>(h * w);
  for (std::size_t ti = 0; ti < t; ++ti) {
    auto row = out.row(ti);
    for (std::size_t p = 0; p < h * w; ++p) {
      const double* src = data.data() + (ti * h * w + p) * c;
      for (std::size_t ci = 0; ci < c; ++ci) row[ci] += src[ci];
    }
    for (double& v : row) v *= inv;
  }
  return out;
}

SyntheticFeatureProvider::SyntheticFeatureProvider(const AnnotationSet& annotations,
                                                   SyntheticSpec spec)
    : annotations_(annotations), spec_(std::move(spec)) {
  validate(spec_);
}

const VideoAnnotation& SyntheticFeatureProvider::video(const std::string& video_id) const {
  auto it = annotations_.videos.find(video_id);
  if (it == annotations_.videos.end()) throw ValidationError("unknown video '" + video_id + "'");
  return it->second;
}

std::int64_t SyntheticFeatureProvider::num_frames(const std::string& video_id) const {
  return video(video_id).num_frames();
}

double SyntheticFeatureProvider::fps(const std::string& video_id) const {
  return video(video_id).fps;
}

BackboneFeatures SyntheticFeatureProvider::features(const std::string& video_id,
                                                    const ClipWindow& window) const {
  return synth_backbone(video_id, window, video(video_id).instances, spec_);
}

PlantedBumpDetector::PlantedBumpDetector(SyntheticSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
}

std::vector<Detection> PlantedBumpDetector::detect(const BackboneFeatures& features,
                                                   const ClipWindow& window,
                                                   std::int64_t video_frames) const {
  if (features.rgb.empty()) throw ShapeMismatch("planted-bump detector needs rgb levels");
  const LevelFeature& level = features.rgb.front();
  const std::size_t steps = level.length();
  const double stride = level.temporal_stride;
  const double amp = spec_.bump_amplitude;
  const bool left_is_video_edge = window.start_frame <= 0;
  const bool right_is_video_edge = window.start_frame + window.length >= video_frames;

  std::vector<Detection> dets;
  std::vector<double> cover(steps);
  for (int c = 0; c < spec_.num_classes; ++c) {
    for (std::size_t t = 0; t < steps; ++t) {
      cover[t] = std::clamp(level.data(t, static_cast<std::size_t>(c)) / amp, 0.0, 1.0);
    }
    std::size_t t = 0;
    while (t < steps) {
      if (cover[t] <= 0.5) {
        ++t;
        continue;
      }
      const std::size_t first = t;
      while (t + 1 < steps && cover[t + 1] > 0.5) ++t;
      const std::size_t last = t;
      ++t;
      const double before = first > 0 ? cover[first - 1] : 0.0;
      const double after = last + 1 < steps ? cover[last + 1] : 0.0;
      const double start_step = static_cast<double>(first) + 1.0 - cover[first] - before;
      const double end_step = static_cast<double>(last) + cover[last] + after;
      const bool cut = (first == 0 && !left_is_video_edge) ||
                       (last + 1 == steps && !right_is_video_edge);
      const double clip = static_cast<double>(window.length);
      try {
        dets.push_back({validate_segment(start_step * stride / clip, end_step * stride / clip), c,
                        cut ? 0.5 : 1.0});
      } catch (const DegenerateSegment&) {
        // A run too short to resolve carries no usable boundary.
      }
    }
  }
  return dets;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  const ordered_json doc = read_json(path);
  const std::string root = path.filename().string();
  AnnotationSet set;
  const auto& labels = field(doc, "labels", root);
  if (!labels.is_array()) throw ParseError(root + ".labels: expected an array");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    set.labels.push_back(text(labels[i], root + ".labels[" + std::to_string(i) + "]"));
  }
  const auto lookup = label_lookup(set.labels);
  if (lookup.size() != set.labels.size()) throw SchemaError(root + ".labels: duplicate label");

  const auto& db = field(doc, "database", root);
  if (!db.is_object()) throw ParseError(root + ".database: expected an object");
  for (const auto& [id, entry] : db.items()) {
    const std::string where = root + ".database." + id;
    VideoAnnotation video;
    video.duration_sec = number(field(entry, "duration_sec", where), where + ".duration_sec");
    video.fps = number(field(entry, "fps", where), where + ".fps");
    if (!(video.duration_sec > 0.0)) throw SchemaError(where + ".duration_sec must be > 0");
    if (!(video.fps > 0.0)) throw SchemaError(where + ".fps must be > 0");
    const auto& anns = field(entry, "annotations", where);
    if (!anns.is_array()) throw ParseError(where + ".annotations: expected an array");
    for (std::size_t i = 0; i < anns.size(); ++i) {
      const std::string at = where + ".annotations[" + std::to_string(i) + "]";
      const std::string label = text(field(anns[i], "label", at), at + ".label");
      const Span seg = segment_of(field(anns[i], "segment", at), at + ".segment");
      auto it = lookup.find(label);
      if (it == lookup.end()) throw SchemaError(at + ".label '" + label + "' is not declared");
      if (!(seg.start >= 0.0 && seg.start < seg.end && seg.end <= video.duration_sec)) {
        std::ostringstream msg;
        msg << at << ".segment [" << seg.start << ", " << seg.end
            << "] violates 0 <= start < end <= duration_sec";
        throw SchemaError(msg.str());
      }
      video.instances.push_back({seg, it->second});
    }
    set.videos.emplace(id, std::move(video));
  }
  return set;
}

void write_annotations(const std::filesystem::path& path, const AnnotationSet& annotations) {
  ordered_json doc;
  doc["labels"] = annotations.labels;
  ordered_json db = ordered_json::object();
  for (const auto& [id, video] : annotations.videos) {
    ordered_json entry;
    entry["duration_sec"] = video.duration_sec;
    entry["fps"] = video.fps;
    ordered_json anns = ordered_json::array();
    for (const auto& inst : video.instances) {
      ordered_json a;
      a["label"] = annotations.labels.at(static_cast<std::size_t>(inst.label));
      a["segment"] = {inst.segment.start, inst.segment.end};
      anns.push_back(std::move(a));
    }
    entry["annotations"] = std::move(anns);
    db[id] = std::move(entry);
  }
  doc["database"] = std::move(db);
  write_json(path, doc);
}

std::map<std::string, DetectionSet> load_detections(const std::filesystem::path& path,
                                                    std::span<const std::string> labels) {
  const ordered_json doc = read_json(path);
  const std::string root = path.filename().string();
  const auto lookup = label_lookup(labels);
  const auto& results = field(doc, "results", root);
  if (!results.is_object()) throw ParseError(root + ".results: expected an object");
  std::map<std::string, DetectionSet> out;
  for (const auto& [id, list] : results.items()) {
    const std::string where = root + ".results." + id;
    if (!list.is_array()) throw ParseError(where + ": expected an array");
    DetectionSet dets;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string at = where + "[" + std::to_string(i) + "]";
      const std::string label = text(field(list[i], "label", at), at + ".label");
      const double score = number(field(list[i], "score", at), at + ".score");
      const Span seg = segment_of(field(list[i], "segment", at), at + ".segment");
      auto it = lookup.find(label);
      if (it == lookup.end()) throw UnknownClass(at + ".label '" + label + "' is not a known class");
      if (!(score >= 0.0 && score <= 1.0)) throw SchemaError(at + ".score must lie in [0, 1]");
      if (!(seg.start < seg.end)) throw SchemaError(at + ".segment must have start < end");
      dets.push_back({seg, it->second, score});
    }
    out.emplace(id, std::move(dets));
  }
  return out;
}

void write_detections(const std::filesystem::path& path,
                      const std::map<std::string, DetectionSet>& results,
                      std::span<const std::string> labels) {
  ordered_json doc;
  ordered_json res = ordered_json::object();
  for (const auto& [id, dets] : results) {
    ordered_json list = ordered_json::array();
    for (const auto& d : dets) {
      if (d.label < 0 || static_cast<std::size_t>(d.label) >= labels.size()) {
        throw UnknownClass("detection label " + std::to_string(d.label) + " has no name");
      }
      ordered_json e;
      e["label"] = labels[static_cast<std::size_t>(d.label)];
      e["score"] = d.score;
      e["segment"] = {d.segment.start, d.segment.end};
      list.push_back(std::move(e));
    }
    res[id] = std::move(list);
  }
  doc["results"] = std::move(res);
  write_json(path, doc);
}

std::map<std::string, DetectionSet> oracle_detections(const AnnotationSet& annotations) {
  std::map<std::string, DetectionSet> out;
  for (const auto& [id, video] : annotations.videos) {
    DetectionSet dets;
    for (const auto& inst : video.instances) dets.push_back({inst.segment, inst.label, 1.0});
    out.emplace(id, std::move(dets));
  }
  return out;
}

}  // namespace sptad
