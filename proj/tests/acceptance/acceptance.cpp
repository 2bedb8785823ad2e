// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "grad_check.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "sptad/data.hpp"
#include "sptad/detect_head.hpp"
#include "sptad/error.hpp"
#include "sptad/eval.hpp"
#include "sptad/match_loss.hpp"
#include "sptad/pipeline.hpp"
#include "sptad/pyramid.hpp"
#include "sptad/segment_features.hpp"
#include "test_util.hpp"

namespace sptad {
namespace {

using testing::Rand;
namespace fs = std::filesystem;

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Collects failed checks of one criterion.
class Verdict {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool passed() const { return failed_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& n : notes_) s += (s.empty() ? "" : "; ") + n;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + ("FAILED " + f);
    if (failed_ > failures_.size()) s += "; +" + std::to_string(failed_ - failures_.size()) + " more";
    return s;
  }

 private:
  std::vector<std::string> notes_;
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

TemporalSegment random_segment(Rand& rng, double min_len = 1e-3) {
  const double s = rng.uniform(0.0, 1.0 - min_len);
  return validate_segment(s, rng.uniform(s + min_len, 1.0));
}

// 1 ---------------------------------------------------------------------------
void hungarian_optimality(Verdict& v) {
  Rand rng(101);
  const Clock clock;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 7));
    const auto m = static_cast<std::size_t>(rng.integer(1, static_cast<int>(n)));
    Matrix cost(n, m);
    const bool integral = trial % 4 == 0;
    for (double& c : cost.values()) c = integral ? rng.integer(0, 4) : rng.uniform(-2.0, 10.0);
    const MatchResult r = hungarian(cost);
    const auto oracle = testing::exhaustive_assignment(cost);
    std::vector<int> sorted = r.pred_for_gt;
    std::sort(sorted.begin(), sorted.end());
    v.check(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "injective assignment, trial " + std::to_string(trial));
    v.check(assignment_cost(cost, r) == oracle.cost, "exact minimum, trial " + std::to_string(trial));
  }
  const double t = clock.seconds();
  v.check(t < 10.0, "runtime < 10 s");
  v.note("1000 matrices up to 7x7, " + fmt("%.2f s", t));
}

// 2 ---------------------------------------------------------------------------
void interval_suite(Verdict& v) {
  Rand rng(202);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const TemporalSegment a = random_segment(rng);
    const TemporalSegment b = random_segment(rng);
    const double t = tiou(a, b);
    const double g = giou_1d(a, b);
    worst = std::max({worst, std::abs(t - testing::interval_tiou(a, b)),
                      std::abs(g - testing::interval_giou(a, b))});
    const double inter = testing::interval_intersection(a.start(), a.end(), b.start(), b.end());
    worst = std::max({worst, std::abs(tioa(a, b) - inter / a.length()),
                      std::abs(tioa(b, a) - inter / b.length())});
    v.check(t >= 0.0 && t <= 1.0, "tIoU range");
    v.check(g > -1.0 && g <= 1.0, "GIoU range");
    v.check(tioa(a, b) >= 0.0 && tioa(a, b) <= 1.0, "tIoA range");
    v.check(t == tiou(b, a) && g == giou_1d(b, a), "symmetry");
    v.check(tiou(a, a) == 1.0 && giou_1d(a, a) == 1.0 && tioa(a, a) == 1.0, "identity");
    v.check(g <= t + 1e-15, "GIoU <= tIoU");
    if (a.end() <= b.start() || b.end() <= a.start()) {
      v.check(t == 0.0 && tioa(a, b) == 0.0 && g <= 0.0, "disjoint");
    }
    if (b.start() >= a.start() && b.end() <= a.end()) {
      v.check(std::abs(tioa(b, a) - 1.0) < 1e-12, "containment tIoA");
      v.check(std::abs(t - b.length() / a.length()) < 1e-12, "containment tIoU");
      v.check(std::abs(g - t) < 1e-12, "containment GIoU");
    }
  }
  auto seg = validate_segment;
  v.check(std::abs(tiou(seg(0.0, 0.4), seg(0.2, 0.6)) - 1.0 / 3.0) < 1e-12, "fixture tIoU 1/3");
  v.check(std::abs(giou_1d(seg(0.0, 0.4), seg(0.2, 0.6)) - 1.0 / 3.0) < 1e-12, "fixture GIoU 1/3");
  v.check(std::abs(giou_1d(seg(0.0, 0.1), seg(0.9, 1.0)) + 0.8) < 1e-12, "fixture GIoU -0.8");
  v.check(std::abs(tioa(seg(0.2, 0.6), seg(0.4, 1.0)) - 0.5) < 1e-12, "fixture tIoA 0.5");
  v.check(worst < 1e-12, "oracle agreement within 1e-12");
  v.note("10000 pairs, max oracle deviation " + fmt("%.1e", worst));
}

// 3 ---------------------------------------------------------------------------
void gradient_audit(Verdict& v) {
  const Clock clock;
  cli::GradCheckOptions opts;
  opts.trials = 50;
  opts.proposals = 6;
  opts.ground_truths = 3;
  opts.classes = 5;
  opts.step = 1e-5;
  const cli::GradCheckResult r = cli::run_grad_check(2024, opts, LossWeights{});
  const double t = clock.seconds();
  v.check(r.max_rel_error < 1e-4, "max relative error < 1e-4");
  v.check(r.checked > 50 * (6 * 5), "enough derivatives checked");
  v.check(t < 30.0, "runtime < 30 s");
  v.note("max rel error " + fmt("%.2e", r.max_rel_error) + " over " + std::to_string(r.checked) +
         " derivatives (" + std::to_string(r.skipped) + " near kinks skipped), " + fmt("%.2f s", t));
}

// 4 ---------------------------------------------------------------------------
void soi_align_oracle(Verdict& v) {
  Rand rng(404);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int level = i % 4;
    const auto len = static_cast<std::size_t>(128 >> level);
    const LevelFeature f{rng.matrix(len, 6), 2 << level};
    const TemporalSegment s = random_segment(rng);
    const AlignConfig cfg{5.0, rng.integer(2, 24), rng.integer(1, 4)};
    worst = std::max(worst, testing::max_abs_diff(
                                soi_align(f, s, cfg),
                                testing::dense_align_oracle(f.data, s.start(), s.end(),
                                                            cfg.align_len, cfg.samples_per_bin)));
  }
  v.check(worst < 1e-9, "dense oracle within 1e-9");

  double lin = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Matrix a = rng.matrix(64, 5);
    const Matrix b = rng.matrix(64, 5);
    const double alpha = rng.uniform(-2, 2);
    const double beta = rng.uniform(-2, 2);
    Matrix mix(64, 5);
    for (std::size_t k = 0; k < mix.size(); ++k) mix.values()[k] = alpha * a.values()[k] + beta * b.values()[k];
    const TemporalSegment s = random_segment(rng);
    const AlignConfig cfg;
    const Matrix ra = soi_align({a, 4}, s, cfg);
    const Matrix rb = soi_align({b, 4}, s, cfg);
    const Matrix rm = soi_align({mix, 4}, s, cfg);
    for (std::size_t k = 0; k < rm.size(); ++k) {
      lin = std::max(lin, std::abs(rm.values()[k] - (alpha * ra.values()[k] + beta * rb.values()[k])));
    }
  }
  v.check(lin < 1e-12, "linearity");

  bool local = true;
  for (int i = 0; i < 50; ++i) {
    Matrix f = rng.matrix(64, 4);
    const TemporalSegment s = random_segment(rng, 0.05);
    const Matrix before = soi_align({f, 4}, s, AlignConfig{});
    const double lo = std::floor(s.start() * 64 - 0.5);
    const double hi = std::ceil(s.end() * 64 - 0.5);
    for (std::size_t t = 0; t < 64; ++t) {
      if (static_cast<double>(t) < lo || static_cast<double>(t) > hi) {
        for (double& x : f.row(t)) x = rng.uniform(-100, 100);
      }
    }
    local = local && soi_align({f, 4}, s, AlignConfig{}) == before;
  }
  v.check(local, "locality");
  v.note("500 pairs over 4 levels, max deviation " + fmt("%.1e", worst));
}

// 5 ---------------------------------------------------------------------------
void level_assignment(Verdict& v) {
  Rand rng(505);
  std::vector<double> lengths;
  for (int i = 0; i < 1000; ++i) lengths.push_back(std::exp(rng.uniform(std::log(1e-5), 0.0)));
  int mismatches = 0;
  for (double l : lengths) mismatches += assign_level(l, 3) != testing::assign_level_oracle(l, 3);
  v.check(mismatches == 0, "formula agreement");
  std::sort(lengths.begin(), lengths.end());
  bool monotone = true;
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    monotone = monotone && assign_level(lengths[i], 3) >= assign_level(lengths[i - 1], 3);
  }
  v.check(monotone, "monotone in length");
  v.check(assign_level(1.0, 3) == 3 && assign_level(1e-5, 3) == 0, "clamping");
  v.note("1000 lengths, " + std::to_string(mismatches) + " mismatches");
}

// 6 ---------------------------------------------------------------------------
void pyramid_geometry(Verdict& v) {
  Rand rng(606);
  const std::array<int, 3> widths{32, 48, 64};
  const PyramidParams params = make_pyramid_params(widths, kPyramidChannels, 6);
  for (int t : {64, 128, 256}) {
    std::vector<LevelFeature> levels;
    for (int l = 0; l < 3; ++l) {
      levels.push_back({rng.matrix(static_cast<std::size_t>(t >> (l + 1)),
                                   static_cast<std::size_t>(widths[l])),
                        2 << l});
    }
    const FeaturePyramid p = build_pyramid(levels, params, kPyramidChannels);
    v.check(p.levels.size() == 4, "four levels at T=" + std::to_string(t));
    for (std::size_t l = 0; l < p.levels.size(); ++l) {
      v.check(p.levels[l].length() == static_cast<std::size_t>(t >> (l + 1)),
              "length T/" + std::to_string(2 << l) + " at T=" + std::to_string(t));
      v.check(p.levels[l].temporal_stride == (2 << l), "stride at T=" + std::to_string(t));
      v.check(p.levels[l].channels() == 256, "256 channels at T=" + std::to_string(t));
    }
  }
  v.note("T in {64,128,256}: lengths T/2..T/16, strides 2..16, 256 channels");
}

// 7 ---------------------------------------------------------------------------
bool bitwise_equal(const std::vector<StageOutput>& a, const std::vector<StageOutput>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (!(a[s].class_probs == b[s].class_probs) || !(a[s].features == b[s].features) ||
        !(a[s].segments == b[s].segments)) {
      return false;
    }
  }
  return true;
}

FeaturePyramid default_pyramid(const ModelConfig& cfg, const ModelParams& params) {
  SyntheticSpec spec;
  const std::vector<VideoInstance> gts{{{3.0, 9.0}, 1}, {{14.0, 16.5}, 3}};
  const BackboneFeatures f = synth_backbone("acceptance", {0, cfg.clip_len, 10.0}, gts, spec);
  return build_pyramid(concat_streams(f.rgb, f.flow), params.pyramid, cfg.d_model);
}

void forward_suite(Verdict& v) {
  ModelConfig cfg;  // N=50, d=256, d_h=64, 4 stages, T=256
  cfg.seed = 77;
  cfg.random_init = true;
  const ModelParams params = make_model_params(cfg);
  const FeaturePyramid pyr = default_pyramid(cfg, params);

  const Clock clock;
  const auto first = run_detector(pyr, cfg, params.head);
  const double t = clock.seconds();
  const auto second = run_detector(pyr, cfg, params.head);
  ForwardOptions threaded;
  threaded.threads = 4;
  const auto parallel = run_detector(pyr, cfg, params.head, threaded);
  v.check(bitwise_equal(first, second), "bitwise repeatable across runs");
  v.check(bitwise_equal(first, parallel), "bitwise identical with 4 threads");
  v.check(t < 1.0, "single-threaded forward < 1 s");

  bool valid = first.size() == 4;
  for (const auto& st : first) {
    valid = valid && st.segments.size() == 50 && st.class_probs.rows() == 50 &&
            st.class_probs.cols() == 20 && st.features.cols() == 256;
    for (const auto& s : st.segments) valid = valid && s.start() >= 0.0 && s.end() <= 1.0 && s.start() < s.end();
    for (double p : st.class_probs.values()) valid = valid && p >= 0.0 && p <= 1.0;
  }
  v.check(valid, "valid segments and probabilities");

  std::vector<std::size_t> perm(50);
  for (std::size_t i = 0; i < 50; ++i) perm[i] = (i * 17 + 5) % 50;
  HeadParams shuffled = params.head;
  for (std::size_t i = 0; i < 50; ++i) {
    shuffled.proposal_segments[i] = params.head.proposal_segments[perm[i]];
    auto src = params.head.proposal_features.row(perm[i]);
    std::copy(src.begin(), src.end(), shuffled.proposal_features.row(i).begin());
  }
  const auto permuted = run_detector(pyr, cfg, shuffled);
  double dev = 0.0;
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t i = 0; i < 50; ++i) {
      const auto& a = first[s];
      const auto& b = permuted[s];
      dev = std::max({dev, std::abs(a.segments[perm[i]].start() - b.segments[i].start()),
                      std::abs(a.segments[perm[i]].end() - b.segments[i].end())});
      for (std::size_t k = 0; k < 20; ++k) {
        dev = std::max(dev, std::abs(a.class_probs(perm[i], k) - b.class_probs(i, k)));
      }
    }
  }
  v.check(dev < 1e-9, "permutation equivariance within 1e-9");
  v.note("forward " + fmt("%.3f s", t) + ", equivariance deviation " + fmt("%.1e", dev));
}

// 8 ---------------------------------------------------------------------------
void refinement_plumbing(Verdict& v) {
  ModelConfig cfg;
  cfg.seed = 88;
  cfg.random_init = true;
  ModelParams params = make_model_params(cfg);
  const FeaturePyramid pyr = default_pyramid(cfg, params);

  std::vector<ProposalState> inputs;
  ForwardOptions opts;
  opts.observer = [&inputs](int, const ProposalState& s) { inputs.push_back(s); };
  const auto outs = run_detector(pyr, cfg, params.head, opts);
  v.check(inputs.size() == 4, "observer sees 4 stages");
  v.check(inputs.size() == 4 && inputs[0].segments == params.head.proposal_segments &&
              inputs[0].features == params.head.proposal_features,
          "stage 0 consumes the learnable proposals");
  for (std::size_t s = 1; s < inputs.size(); ++s) {
    std::vector<CenterLengthSegment> expected;
    for (const auto& seg : outs[s - 1].segments) expected.push_back(to_center_length(seg));
    v.check(inputs[s].segments == expected, "stage " + std::to_string(s) + " consumes previous segments");
    v.check(inputs[s].features == outs[s - 1].features,
            "stage " + std::to_string(s) + " consumes previous features");
  }
  bool moved = false;
  for (std::size_t s = 1; s < outs.size(); ++s) moved = moved || !(outs[s].segments == outs[0].segments);
  v.check(moved, "nonzero regression moves segments");

  for (auto& st : params.head.stages) {
    std::fill(st.reg3.weight.values().begin(), st.reg3.weight.values().end(), 0.0);
    std::fill(st.reg3.bias.begin(), st.reg3.bias.end(), 0.0);
  }
  const auto frozen = run_detector(pyr, cfg, params.head);
  double drift = 0.0;
  for (const auto& st : frozen) {
    for (std::size_t i = 0; i < st.segments.size(); ++i) {
      const TemporalSegment init = to_start_end(params.head.proposal_segments[i]);
      drift = std::max({drift, std::abs(st.segments[i].start() - init.start()),
                        std::abs(st.segments[i].end() - init.end())});
    }
  }
  v.check(drift < 1e-12, "zero regression keeps segments fixed over 4 stages");
  v.note("zero-regression drift " + fmt("%.1e", drift));
}

// 9 ---------------------------------------------------------------------------
using DetMap = std::map<std::string, DetectionSet>;
using GtMap = std::map<std::string, std::vector<VideoInstance>>;

double oracle_map(const DetMap& dets, const GtMap& gts, int classes, const std::vector<double>& ts) {
  std::map<std::string, int> vid;
  for (const auto& [id, _] : gts) vid.emplace(id, static_cast<int>(vid.size()));
  for (const auto& [id, _] : dets) vid.emplace(id, static_cast<int>(vid.size()));
  double total = 0.0;
  for (double t : ts) {
    double sum = 0.0;
    int counted = 0;
    for (int c = 0; c < classes; ++c) {
      std::vector<ClassDetection> cd;
      std::vector<ClassGroundTruth> cg;
      for (const auto& [id, list] : gts)
        for (const auto& g : list)
          if (g.label == c) cg.push_back({vid[id], g.segment});
      for (const auto& [id, list] : dets)
        for (const auto& d : list)
          if (d.label == c) cd.push_back({vid[id], d.segment, d.score});
      if (cg.empty()) continue;
      sum += testing::staircase_ap(cd, cg, t);
      ++counted;
    }
    total += counted ? sum / counted : 0.0;
  }
  return total / static_cast<double>(ts.size());
}

void evaluator_oracle(Verdict& v) {
  Rand rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    GtMap gts;
    DetMap dets;
    const int videos = rng.integer(1, 3);
    for (int g = 0; g < 5; ++g) {
      const std::string id = "v" + std::to_string(rng.integer(0, videos - 1));
      const double s = rng.uniform(0, 30);
      gts[id].push_back({{s, s + rng.uniform(0.5, 6)}, rng.integer(0, 2)});
    }
    for (int d = 0; d < 20; ++d) {
      const std::string id = "v" + std::to_string(rng.integer(0, videos - 1));
      const double s = rng.uniform(0, 30);
      VideoDetection det{{s, s + rng.uniform(0.5, 6)}, rng.integer(0, 2), rng.integer(1, 10) / 10.0};
      auto it = gts.find(id);
      if (it != gts.end() && rng.uniform() < 0.5) {
        const auto& g = it->second[static_cast<std::size_t>(rng.integer(0, static_cast<int>(it->second.size()) - 1))];
        const double l = g.segment.length();
        det.segment = {g.segment.start + rng.uniform(-0.3, 0.3) * l,
                       g.segment.end + rng.uniform(-0.3, 0.3) * l};
        det.label = g.label;
      }
      dets[id].push_back(det);
    }
    const double got = evaluate(dets, gts, 3).map_avg;
    worst = std::max(worst, std::abs(got - oracle_map(dets, gts, 3, kDefaultThresholds)));
  }
  v.check(worst < 1e-9, "staircase oracle within 1e-9");

  SyntheticSpec spec;
  spec.n_videos = 20;
  const AnnotationSet set = synth_dataset(spec);
  const EvalReport perfect = evaluate(oracle_detections(set), set.ground_truths(), spec.num_classes);
  v.check(perfect.map_avg == 1.0, "oracle detections give map_avg 1.0");

  double prev = 2.0;
  bool monotone = true;
  std::vector<double> curve;
  for (double jitter = 0.0; jitter <= 0.5001; jitter += 0.05) {
    DetMap dets;
    Rand signs(5);
    for (const auto& [id, video] : set.videos) {
      for (const auto& g : video.instances) {
        const double l = g.segment.length();
        const double a = signs.uniform(-1, 1);
        const double b = signs.uniform(-1, 1);
        const double score = signs.uniform(0.5, 1.0);
        dets[id].push_back({{g.segment.start + jitter * a * l, g.segment.end + jitter * b * l},
                            g.label, score});
      }
    }
    const double m = evaluate(dets, set.ground_truths(), spec.num_classes).map_avg;
    monotone = monotone && m <= prev;
    prev = m;
    curve.push_back(m);
  }
  v.check(monotone && curve.back() < curve.front(), "jitter degrades map_avg monotonically");
  v.note("200 instances, max deviation " + fmt("%.1e", worst) + ", jitter curve " +
         fmt("%.3f", curve.front()) + " -> " + fmt("%.3f", curve.back()));
}

// 10 --------------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::vector<std::string>& args, std::string* err_text) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

void end_to_end(Verdict& v) {
  const Clock clock;
  testing::TempDir dir("acceptance");
  std::string err;
  const int oracle = run_cli({"e2e", "--detector", "oracle", "--videos", "20", "--seed", "7",
                              "--out", (dir / "oracle").string()},
                             &err);
  v.check(oracle == 0, "oracle e2e exit 0 " + err);
  double map_avg = -1.0;
  if (oracle == 0) {
    map_avg = nlohmann::json::parse(slurp(dir / "oracle" / "report.json"))["map_avg"].get<double>();
  }
  v.check(map_avg >= 0.99, "oracle map_avg >= 0.99");

  std::ofstream(dir / "net.json") << R"({"model": {"d_model": 128}})";
  const double net_start = clock.seconds();
  for (const char* run : {"net_a", "net_b"}) {
    const int code = run_cli({"e2e", "--detector", "network", "--videos", "20", "--seed", "7",
                              "--config", (dir / "net.json").string(), "--out", (dir / run).string()},
                             &err);
    v.check(code == 0, std::string(run) + " exit 0 " + err);
  }
  const double net_time = clock.seconds() - net_start;
  const std::string a = slurp(dir / "net_a" / "detections.json");
  v.check(!a.empty() && a == slurp(dir / "net_b" / "detections.json"), "network detections byte-reproducible");
  v.check(slurp(dir / "net_a" / "report.json") == slurp(dir / "net_b" / "report.json"),
          "network report byte-reproducible");

  std::size_t count = 0;
  try {
    const AnnotationSet ann = load_annotations(dir / "net_a" / "annotations.json");
    const auto dets = load_detections(dir / "net_a" / "detections.json", ann.labels);
    for (const auto& [id, list] : dets) {
      v.check(ann.videos.count(id) == 1, "detections reference known videos");
      for (const auto& d : list) {
        ++count;
        v.check(d.score >= 0.0 && d.score <= 1.0 && d.segment.start < d.segment.end,
                "detection fields valid");
      }
    }
    v.check(count > 0, "network path emits detections");
  } catch (const Error& e) {
    v.check(false, std::string("network detections schema-valid: ") + e.what());
  }
  const double t = clock.seconds();
  v.check(t < 60.0, "runtime < 60 s");
  v.note("oracle map_avg " + fmt("%.4f", map_avg) + ", network path " + std::to_string(count) +
         " detections in " + fmt("%.1f s", net_time / 2) + " per run (d_model 128), total " +
         fmt("%.1f s", t));
}

// 11 --------------------------------------------------------------------------
void soft_nms_suite(Verdict& v) {
  auto det = [](double s, double e, double score, int label = 0) {
    return VideoDetection{{s, e}, label, score};
  };
  const DetectionSet pair = soft_nms({det(1, 3, 0.9), det(1, 3, 0.8)}, NmsConfig{});
  v.check(pair.size() == 2 && std::abs(pair[1].score - 0.8 * std::exp(-2.0)) < 1e-12,
          "gaussian 0.8 e^-2 fixture");

  // Classical NMS has no score floor.
  NmsConfig hard;
  hard.mode = NmsMode::kHard;
  hard.score_floor = 0.0;
  const DetectionSet fixture{det(0, 10, 0.95), det(1, 10, 0.9), det(8, 20, 0.85), det(9, 19, 0.6),
                             det(0, 9, 0.5, 1)};
  v.check(soft_nms(fixture, hard) == testing::classical_nms(fixture, hard.overlap_threshold),
          "hard mode equals classical NMS on the fixture");

  Rand rng(1111);
  for (int trial = 0; trial < 300; ++trial) {
    DetectionSet dets;
    const int n = rng.integer(1, 40);
    for (int i = 0; i < n; ++i) {
      const double s = rng.uniform(0, 60);
      dets.push_back(det(s, s + rng.uniform(0.5, 12), rng.uniform(0, 1), rng.integer(0, 2)));
    }
    v.check(soft_nms(dets, hard) == testing::classical_nms(dets, hard.overlap_threshold),
            "hard mode equals classical NMS on random input");
    for (NmsMode mode : {NmsMode::kGaussian, NmsMode::kLinear, NmsMode::kHard}) {
      NmsConfig cfg;
      cfg.mode = mode;
      cfg.top_k = rng.integer(1, 30);
      const DetectionSet out = soft_nms(dets, cfg);
      v.check(out.size() <= std::min<std::size_t>(dets.size(), static_cast<std::size_t>(cfg.top_k)),
              "top_k respected");
      for (const auto& o : out) {
        double original = -1.0;
        for (const auto& d : dets)
          if (d.segment == o.segment && d.label == o.label) original = std::max(original, d.score);
        v.check(o.score <= original, "scores never increase");
      }
    }
  }
  v.note("fixtures plus 300 random sets x 3 modes");
}

// 12 --------------------------------------------------------------------------
void windowing_targets(Verdict& v) {
  auto starts = [](std::int64_t frames) {
    std::vector<std::int64_t> s;
    for (const auto& w : make_windows(frames, 256, 128)) s.push_back(w.start_frame);
    return s;
  };
  v.check(starts(512) == std::vector<std::int64_t>{0, 128, 256}, "512 frames -> [0,128,256]");
  v.check(starts(600) == std::vector<std::int64_t>{0, 128, 256, 344}, "600 frames -> [0,128,256,344]");
  v.check(starts(256) == std::vector<std::int64_t>{0}, "256 frames -> [0]");

  Rand rng(1212);
  for (int trial = 0; trial < 500; ++trial) {
    const std::int64_t frames = rng.integer(1, 4000);
    const int stride = trial % 2 ? kTrainStride : kInferenceStride;
    std::vector<char> covered(static_cast<std::size_t>(frames), 0);
    for (const auto& w : make_windows(frames, 256, stride)) {
      for (std::int64_t f = w.start_frame; f < std::min(frames, w.start_frame + w.length); ++f) {
        covered[static_cast<std::size_t>(f)] = 1;
      }
    }
    v.check(std::all_of(covered.begin(), covered.end(), [](char c) { return c != 0; }),
            "windows cover every frame");
  }

  // fps 8 makes every boundary exact in binary: window [0, 32] s.
  const ClipWindow w{0, 256, 8.0};
  auto kept = [&w](double s, double e) {
    return select_training_targets(std::vector<VideoInstance>{{{s, e}, 0}}, w).size() == 1;
  };
  v.check(!kept(30.0, 34.0), "exactly half inside at the right edge is dropped");
  v.check(!kept(-2.0, 2.0), "exactly half inside at the left edge is dropped");
  v.check(kept(29.0, 34.0), "60% inside is kept");
  v.check(kept(4.0, 9.0), "fully inside is kept");
  const auto t = select_training_targets(std::vector<VideoInstance>{{{29.0, 34.0}, 2}}, w);
  v.check(t.size() == 1 && t[0].segment.start() == 29.0 / 32.0 && t[0].segment.end() == 1.0 &&
              t[0].label == 2,
          "kept target truncated and renormalized");
  const ClipWindow offset{128, 256, 8.0};  // [16, 48] s
  v.check(select_training_targets(std::vector<VideoInstance>{{{14.0, 18.0}, 0}}, offset).empty(),
          "exactly half inside an offset window is dropped");
  v.note("fixtures plus 500 random coverage checks");
}

}  // namespace
}  // namespace sptad

int main() {
  using sptad::Verdict;
  const std::vector<std::pair<const char*, std::function<void(Verdict&)>>> criteria{
      {"Hungarian optimality", sptad::hungarian_optimality},
      {"GIoU/tIoU/tIoA interval suite", sptad::interval_suite},
      {"Loss gradient audit", sptad::gradient_audit},
      {"SoI Align oracle", sptad::soi_align_oracle},
      {"Level assignment conformance", sptad::level_assignment},
      {"Pyramid geometry", sptad::pyramid_geometry},
      {"Forward determinism and shapes", sptad::forward_suite},
      {"Iterative-refinement plumbing", sptad::refinement_plumbing},
      {"Evaluator oracle", sptad::evaluator_oracle},
      {"End-to-end synthetic run", sptad::end_to_end},
      {"Soft-NMS", sptad::soft_nms_suite},
      {"Windowing and training targets", sptad::windowing_targets},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    std::printf("%s  %2zu. %s: %s\n", v.passed() ? "PASS" : "FAIL", i + 1, criteria[i].first,
                v.summary().c_str());
    std::fflush(stdout);
    failed += v.passed() ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
