// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "grad_check.hpp"
#include "json.hpp"
#include "run_config.hpp"
#include "sptad/data.hpp"
#include "sptad/detect_head.hpp"
#include "sptad/error.hpp"
#include "sptad/eval.hpp"
#include "sptad/match_loss.hpp"
#include "sptad/pipeline.hpp"

namespace sptad::cli {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> stride;
  std::optional<int> clip_len;
  std::optional<int> stages;
  std::optional<int> proposals;
  std::optional<double> nms_sigma;
  std::optional<std::string> nms_mode;
  std::optional<std::string> thresholds;
  std::optional<int> threads;
  std::optional<int> videos;
  std::optional<int> classes;
  // Subcommand-specific inputs.
  std::string detections;
  std::string annotations;
  std::string fixture;
  std::string detector = "oracle";
  int trials = 50;
};

void add_config(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON run configuration; flags override it");
  app->add_option("--seed", f.seed, "Seed for every random draw");
}

void add_model(CLI::App* app, Flags& f) {
  app->add_option("--clip-len", f.clip_len, "Clip length in frames");
  app->add_option("--stages", f.stages, "Number of detection heads");
  app->add_option("--proposals", f.proposals, "Number of proposals N");
  app->add_option("--threads", f.threads, "Worker threads (results do not depend on it)");
}

void add_data(CLI::App* app, Flags& f) {
  app->add_option("--videos", f.videos, "Number of synthetic videos");
  app->add_option("--classes", f.classes, "Number of synthetic classes");
}

void add_nms(CLI::App* app, Flags& f) {
  app->add_option("--nms-sigma", f.nms_sigma, "Gaussian soft-NMS width");
  app->add_option("--nms-mode", f.nms_mode, "gaussian, linear or hard");
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.seed) set_seed(cfg, *f.seed);
  if (f.out) cfg.out = *f.out;
  if (f.stride) cfg.inference.stride = *f.stride;
  if (f.clip_len) set_clip_len(cfg, *f.clip_len);
  if (f.stages) cfg.model.stages = *f.stages;
  if (f.proposals) cfg.model.num_proposals = *f.proposals;
  if (f.nms_sigma) cfg.nms.sigma = *f.nms_sigma;
  if (f.nms_mode) cfg.nms.mode = parse_nms_mode(*f.nms_mode);
  if (f.thresholds) cfg.thresholds = parse_thresholds(*f.thresholds);
  if (f.threads) cfg.threads = *f.threads;
  if (f.videos) cfg.synthetic.n_videos = *f.videos;
  if (f.classes) cfg.synthetic.num_classes = *f.classes;
  return cfg;
}

void write_json(const fs::path& path, const ordered_json& doc) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream file(path);
  if (!file) throw IoError("cannot open '" + path.string() + "' for writing");
  file << doc.dump(2) << '\n';
  if (!file) throw IoError("failed writing '" + path.string() + "'");
}

fs::path out_dir(const RunConfig& cfg, const char* fallback) {
  const fs::path dir = cfg.out.empty() ? fs::path(fallback) : cfg.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  return dir;
}

ordered_json segments_json(const std::vector<TemporalSegment>& segs) {
  ordered_json arr = ordered_json::array();
  for (const auto& s : segs) arr.push_back({s.start(), s.end()});
  return arr;
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json arr = ordered_json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    arr.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return arr;
}

ordered_json breakdown_json(const LossBreakdown& b) {
  return {{"cls", b.cls},   {"l1", b.l1},       {"giou", b.giou},
          {"act", b.act},   {"total", b.total}, {"n_pos", b.n_pos}};
}

int cmd_synth(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  validate(cfg);
  const AnnotationSet set = synth_dataset(cfg.synthetic);
  const fs::path dir = out_dir(cfg, ".");
  write_annotations(dir / "annotations.json", set);
  write_detections(dir / "oracle_detections.json", oracle_detections(set), set.labels);
  std::size_t instances = 0;
  for (const auto& [id, v] : set.videos) instances += v.instances.size();
  out << "wrote " << set.videos.size() << " videos, " << instances << " instances to "
      << (dir / "annotations.json").string() << '\n';
  return kExitOk;
}

int cmd_forward(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  bind_model_to_data(cfg);
  validate(cfg);
  SyntheticSpec spec = cfg.synthetic;
  spec.n_videos = 1;
  const AnnotationSet set = synth_dataset(spec);
  const auto& [id, video] = *set.videos.begin();
  const ClipWindow window{0, cfg.model.clip_len, video.fps};
  const BackboneFeatures features = synth_backbone(id, window, video.instances, spec);
  const ModelParams params = make_model_params(cfg.model);
  ForwardOptions opts;
  opts.threads = cfg.threads;
  const ClipForward fwd = forward_clip(features, cfg.model, params, opts);

  ordered_json doc;
  doc["video"] = id;
  doc["window"] = {window.start_frame, window.start_frame + window.length};
  ordered_json stages = ordered_json::array();
  for (std::size_t s = 0; s < fwd.stages.size(); ++s) {
    const StageOutput& st = fwd.stages[s];
    double max_prob = 0.0;
    double mean_len = 0.0;
    for (double p : st.class_probs.values()) max_prob = std::max(max_prob, p);
    for (const auto& seg : st.segments) mean_len += seg.length();
    mean_len /= static_cast<double>(st.segments.size());
    char line[128];
    std::snprintf(line, sizeof(line), "stage %zu: %zu proposals, mean length %.4f, max prob %.4f\n",
                  s, st.segments.size(), mean_len, max_prob);
    out << line;
    stages.push_back({{"segments", segments_json(st.segments)},
                      {"class_probs", matrix_json(st.class_probs)}});
  }
  doc["stages"] = std::move(stages);
  doc["clip_probs"] = fwd.clip_probs;
  if (!cfg.out.empty()) {
    write_json(cfg.out, doc);
    out << "wrote " << cfg.out.string() << '\n';
  }
  return kExitOk;
}

// Fixture: {"class_probs": [[...]], "segments": [[s, e], ...],
//           "ground_truths": [{"segment": [s, e], "label": k}]}
struct MatchFixture {
  StageOutput preds;
  std::vector<GroundTruthInstance> gts;
};

MatchFixture load_fixture(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture '" + path.string() + "'");
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  MatchFixture fx;
  try {
    const auto rows = doc.at("class_probs").get<std::vector<std::vector<double>>>();
    const std::size_t k = rows.empty() ? 0 : rows.front().size();
    fx.preds.class_probs = Matrix(rows.size(), k);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != k) throw ShapeMismatch("fixture: ragged class_probs");
      std::copy(rows[r].begin(), rows[r].end(), fx.preds.class_probs.row(r).begin());
    }
    for (const auto& s : doc.at("segments")) {
      fx.preds.segments.push_back(validate_segment(s.at(0).get<double>(), s.at(1).get<double>()));
    }
    for (const auto& g : doc.at("ground_truths")) {
      const auto& s = g.at("segment");
      fx.gts.push_back({validate_segment(s.at(0).get<double>(), s.at(1).get<double>()),
                        g.at("label").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (fx.preds.segments.size() != fx.preds.class_probs.rows()) {
    throw ShapeMismatch("fixture: segments and class_probs disagree on N");
  }
  for (const auto& g : fx.gts) {
    if (g.label < 0 || static_cast<std::size_t>(g.label) >= fx.preds.class_probs.cols()) {
      throw UnknownClass("fixture: ground-truth label " + std::to_string(g.label));
    }
  }
  return fx;
}

MatchFixture random_fixture(std::uint64_t seed, int n, int m, int k) {
  const CounterRng rng(seed, "match_fixture");
  std::uint64_t c = 0;
  auto seg = [&] {
    const double center = 0.1 + 0.8 * rng.uniform(c++);
    const double length = 0.05 + 0.35 * rng.uniform(c++);
    return validate_segment(center - length / 2, center + length / 2);
  };
  MatchFixture fx;
  fx.preds.class_probs = Matrix(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
  for (double& p : fx.preds.class_probs.values()) p = 0.02 + 0.96 * rng.uniform(c++);
  for (int i = 0; i < n; ++i) fx.preds.segments.push_back(seg());
  for (int j = 0; j < m; ++j) {
    const TemporalSegment s = seg();
    fx.gts.push_back({s, std::min(k - 1, static_cast<int>(rng.uniform(c++) * k))});
  }
  return fx;
}

int cmd_match(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  validate(cfg.loss);
  const MatchFixture fx =
      f.fixture.empty()
          ? random_fixture(cfg.model.seed, f.proposals.value_or(6), 3, f.classes.value_or(5))
          : load_fixture(f.fixture);
  const Matrix cost = match_cost(fx.preds, fx.gts, cfg.loss);
  const MatchResult match = hungarian(cost);
  const std::vector<StageOutput> stages{fx.preds};
  const std::vector<MatchResult> matches{match};
  const LossBreakdown loss = loss_with_matching(stages, matches, fx.gts, cfg.loss);

  ordered_json pairs = ordered_json::array();
  char line[128];
  for (std::size_t m = 0; m < match.pred_for_gt.size(); ++m) {
    const int n = match.pred_for_gt[m];
    const double c = cost(static_cast<std::size_t>(n), m);
    std::snprintf(line, sizeof(line), "gt %zu -> prediction %d  cost %.6f\n", m, n, c);
    out << line;
    pairs.push_back({{"gt", m}, {"prediction", n}, {"cost", c}});
  }
  std::snprintf(line, sizeof(line),
                "assignment cost %.6f\nloss cls %.6f l1 %.6f giou %.6f total %.6f\n",
                assignment_cost(cost, match), loss.cls, loss.l1, loss.giou, loss.total);
  out << line;
  if (!cfg.out.empty()) {
    ordered_json doc;
    doc["matches"] = std::move(pairs);
    doc["assignment_cost"] = assignment_cost(cost, match);
    doc["loss"] = breakdown_json(loss);
    write_json(cfg.out, doc);
  }
  return kExitOk;
}

int cmd_grad_check(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  validate(cfg.loss);
  if (f.trials < 1) throw InvalidConfig("--trials must be >= 1");
  GradCheckOptions opts;
  opts.trials = f.trials;
  if (f.proposals) opts.proposals = *f.proposals;
  if (f.classes) opts.classes = *f.classes;
  if (opts.proposals < opts.ground_truths || opts.classes < 1) {
    throw InvalidConfig("grad-check needs at least 3 proposals and 1 class");
  }
  const GradCheckResult r = run_grad_check(cfg.model.seed, opts, cfg.loss);
  char line[160];
  std::snprintf(line, sizeof(line), "max_rel_error %.3e  (%ld derivatives, %ld near kinks skipped)\n",
                r.max_rel_error, r.checked, r.skipped);
  out << line;
  if (!cfg.out.empty()) {
    write_json(cfg.out, {{"max_rel_error", r.max_rel_error},
                         {"checked", r.checked},
                         {"skipped", r.skipped},
                         {"trials", opts.trials}});
  }
  return kExitOk;
}

int cmd_nms(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  validate(cfg.nms);
  if (cfg.out.empty()) throw InvalidConfig("nms needs --out");
  const AnnotationSet ann = load_annotations(f.annotations);
  const auto dets = load_detections(f.detections, ann.labels);
  std::map<std::string, DetectionSet> kept;
  std::size_t before = 0;
  std::size_t after = 0;
  for (const auto& [id, list] : dets) {
    before += list.size();
    kept[id] = soft_nms(list, cfg.nms);
    after += kept[id].size();
  }
  write_detections(cfg.out, kept, ann.labels);
  out << "kept " << after << " of " << before << " detections\n";
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  validate(cfg);
  const AnnotationSet ann = load_annotations(f.annotations);
  const auto dets = load_detections(f.detections, ann.labels);
  const EvalReport report = evaluate(dets, ann.ground_truths(),
                                     static_cast<int>(ann.labels.size()), cfg.thresholds);
  out << format_report(report);
  if (!cfg.out.empty()) write_report_json(cfg.out, report, ann.labels);
  return kExitOk;
}

int cmd_e2e(const Flags& f, std::ostream& out) {
  RunConfig cfg = resolve(f);
  bind_model_to_data(cfg);
  validate(cfg);
  if (f.detector != "oracle" && f.detector != "network") {
    throw InvalidConfig("--detector must be oracle or network");
  }
  const fs::path dir = out_dir(cfg, "e2e_out");
  const AnnotationSet set = synth_dataset(cfg.synthetic);
  write_annotations(dir / "annotations.json", set);

  const SyntheticFeatureProvider provider(set, cfg.synthetic);
  std::optional<ModelParams> params;
  std::unique_ptr<ClipDetector> detector;
  if (f.detector == "network") {
    params = make_model_params(cfg.model);
    detector = std::make_unique<NetworkDetector>(cfg.model, *params, cfg.threads);
  } else {
    detector = std::make_unique<PlantedBumpDetector>(cfg.synthetic);
  }
  std::map<std::string, DetectionSet> results;
  for (const auto& [id, video] : set.videos) {
    results[id] = infer_video(provider, id, *detector, cfg.inference, cfg.nms);
  }
  write_detections(dir / "detections.json", results, set.labels);
  const EvalReport report = evaluate(results, set.ground_truths(),
                                     static_cast<int>(set.labels.size()), cfg.thresholds);
  write_report_json(dir / "report.json", report, set.labels);
  out << format_report(report);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse-proposal temporal action detection toolkit", "sptad"};
  app.require_subcommand(1);
  Flags f;

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset and oracle detections");
  add_config(synth, f);
  add_data(synth, f);
  synth->add_option("--clip-len", f.clip_len, "Clip length in frames");
  synth->add_option("--out", f.out, "Output directory (default: .)");

  auto* forward = app.add_subcommand("forward", "Run the detector on one synthetic clip");
  add_config(forward, f);
  add_model(forward, f);
  add_data(forward, f);
  forward->add_option("--out", f.out, "Write per-stage outputs as JSON");

  auto* match = app.add_subcommand("match", "Hungarian matching and loss on a fixture");
  add_config(match, f);
  match->add_option("--fixture", f.fixture, "Fixture JSON (default: random from --seed)");
  match->add_option("--proposals", f.proposals, "Predictions in the random fixture");
  match->add_option("--classes", f.classes, "Classes in the random fixture");
  match->add_option("--out", f.out, "Write matches and loss as JSON");

  auto* grad = app.add_subcommand("grad-check", "Finite-difference audit of the loss gradient");
  add_config(grad, f);
  grad->add_option("--trials", f.trials, "Random instances (default 50)");
  grad->add_option("--proposals", f.proposals, "Predictions per instance (default 6)");
  grad->add_option("--classes", f.classes, "Classes per instance (default 5)");
  grad->add_option("--out", f.out, "Write the result as JSON");

  auto* nms = app.add_subcommand("nms", "Soft-NMS over a detection file");
  add_config(nms, f);
  add_nms(nms, f);
  nms->add_option("--detections", f.detections, "Detection JSON")->required();
  nms->add_option("--annotations", f.annotations, "Annotation JSON providing the label map")
      ->required();
  nms->add_option("--out", f.out, "Output detection JSON")->required();

  auto* eval = app.add_subcommand("eval", "mAP of detections against annotations");
  add_config(eval, f);
  eval->add_option("--detections", f.detections, "Detection JSON")->required();
  eval->add_option("--annotations", f.annotations, "Annotation JSON")->required();
  eval->add_option("--thresholds", f.thresholds, "Comma list (default 0.3,0.4,0.5,0.6,0.7)");
  eval->add_option("--out", f.out, "Write the report as JSON");

  auto* e2e = app.add_subcommand("e2e", "Synthesize, detect every video, evaluate");
  add_config(e2e, f);
  add_model(e2e, f);
  add_data(e2e, f);
  add_nms(e2e, f);
  e2e->add_option("--stride", f.stride, "Inference window stride in frames");
  e2e->add_option("--thresholds", f.thresholds, "Comma list (default 0.3,0.4,0.5,0.6,0.7)");
  e2e->add_option("--detector", f.detector, "oracle (planted-bump reader) or network")
      ->check(CLI::IsMember({"oracle", "network"}));
  e2e->add_option("--out", f.out, "Output directory (default: e2e_out)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (synth->parsed()) return cmd_synth(f, out);
    if (forward->parsed()) return cmd_forward(f, out);
    if (match->parsed()) return cmd_match(f, out);
    if (grad->parsed()) return cmd_grad_check(f, out);
    if (nms->parsed()) return cmd_nms(f, out);
    if (eval->parsed()) return cmd_eval(f, out);
    if (e2e->parsed()) return cmd_e2e(f, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitValidation;
}

}  // namespace sptad::cli
