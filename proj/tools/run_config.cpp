// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "run_config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sptad/error.hpp"
#include "sptad/segment_features.hpp"

namespace sptad::cli {

namespace {

using nlohmann::json;

using Setter = std::function<void(const json&, const std::string&)>;

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path + ": expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path + ": expected an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw ParseError(path + ": expected true or false");
  return v.get<bool>();
}

std::array<int, 3> as_triple(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ParseError(path + ": expected three integers");
  return {as_int(v[0], path + "[0]"), as_int(v[1], path + "[1]"), as_int(v[2], path + "[2]")};
}

void apply(const json& section, const std::string& path,
           const std::map<std::string, Setter>& setters) {
  if (!section.is_object()) throw ParseError(path + ": expected an object");
  for (const auto& [key, value] : section.items()) {
    auto it = setters.find(key);
    if (it == setters.end()) throw SchemaError(path + ": unknown key '" + key + "'");
    it->second(value, path + "." + key);
  }
}

template <typename T>
Setter num(T& dst) {
  return [&dst](const json& v, const std::string& p) {
    if constexpr (std::is_same_v<T, int>) {
      dst = as_int(v, p);
    } else {
      dst = as_number(v, p);
    }
  };
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  RunConfig cfg;
  ModelConfig& m = cfg.model;
  LossWeights& l = cfg.loss;
  NmsConfig& n = cfg.nms;
  SyntheticSpec& s = cfg.synthetic;
  const std::string root = path.filename().string();

  std::map<std::string, Setter> top{
      {"model",
       [&](const json& v, const std::string& p) {
         apply(v, p,
               {{"num_proposals", num(m.num_proposals)},
                {"num_classes", num(m.num_classes)},
                {"d_model", num(m.d_model)},
                {"d_hidden", num(m.d_hidden)},
                {"align_len", num(m.align_len)},
                {"samples_per_bin", num(m.samples_per_bin)},
                {"eta", num(m.eta)},
                {"stages", num(m.stages)},
                {"attn_heads", num(m.attn_heads)},
                {"clip_len", num(m.clip_len)},
                {"backbone_channels",
                 [&](const json& x, const std::string& q) { m.backbone_channels = as_triple(x, q); }},
                {"random_init",
                 [&](const json& x, const std::string& q) { m.random_init = as_bool(x, q); }}});
       }},
      {"loss",
       [&](const json& v, const std::string& p) {
         apply(v, p,
               {{"cls", num(l.cls)},
                {"l1", num(l.l1)},
                {"giou", num(l.giou)},
                {"act", num(l.act)},
                {"focal_alpha", num(l.focal_alpha)},
                {"focal_gamma", num(l.focal_gamma)}});
       }},
      {"nms",
       [&](const json& v, const std::string& p) {
         apply(v, p,
               {{"mode",
                 [&](const json& x, const std::string& q) {
                   if (!x.is_string()) throw ParseError(q + ": expected a string");
                   n.mode = parse_nms_mode(x.get<std::string>());
                 }},
                {"sigma", num(n.sigma)},
                {"overlap_threshold", num(n.overlap_threshold)},
                {"score_floor", num(n.score_floor)},
                {"top_k", num(n.top_k)}});
       }},
      {"synthetic",
       [&](const json& v, const std::string& p) {
         apply(v, p,
               {{"n_videos", num(s.n_videos)},
                {"num_classes", num(s.num_classes)},
                {"min_duration_sec", num(s.min_duration_sec)},
                {"max_duration_sec", num(s.max_duration_sec)},
                {"fps", num(s.fps)},
                {"min_instances", num(s.min_instances)},
                {"max_instances", num(s.max_instances)},
                {"short_mass", num(s.short_mass)},
                {"min_length_frac", num(s.min_length_frac)},
                {"max_length_frac", num(s.max_length_frac)},
                {"min_gap_sec", num(s.min_gap_sec)},
                {"rgb_channels",
                 [&](const json& x, const std::string& q) { s.rgb_channels = as_triple(x, q); }},
                {"flow_channels",
                 [&](const json& x, const std::string& q) { s.flow_channels = as_triple(x, q); }},
                {"noise_amplitude", num(s.noise_amplitude)},
                {"bump_amplitude", num(s.bump_amplitude)}});
       }},
      {"inference",
       [&](const json& v, const std::string& p) {
         apply(v, p, {{"stride", num(cfg.inference.stride)}});
       }},
      {"clip_len",
       [&](const json& v, const std::string& p) { set_clip_len(cfg, as_int(v, p)); }},
      {"seed",
       [&](const json& v, const std::string& p) {
         if (!v.is_number_unsigned()) throw ParseError(p + ": expected a non-negative integer");
         set_seed(cfg, v.get<std::uint64_t>());
       }},
      {"threads", num(cfg.threads)},
      {"thresholds",
       [&](const json& v, const std::string& p) {
         if (!v.is_array()) throw ParseError(p + ": expected an array");
         cfg.thresholds.clear();
         for (std::size_t i = 0; i < v.size(); ++i) {
           cfg.thresholds.push_back(as_number(v[i], p + "[" + std::to_string(i) + "]"));
         }
       }},
      {"out",
       [&](const json& v, const std::string& p) {
         if (!v.is_string()) throw ParseError(p + ": expected a string");
         cfg.out = v.get<std::string>();
       }},
  };
  apply(doc, root, top);
  return cfg;
}

void set_seed(RunConfig& cfg, std::uint64_t seed) {
  cfg.model.seed = seed;
  cfg.synthetic.seed = seed;
}

void set_clip_len(RunConfig& cfg, int clip_len) {
  cfg.model.clip_len = clip_len;
  cfg.synthetic.clip_len = clip_len;
  cfg.inference.clip_len = clip_len;
}

void bind_model_to_data(RunConfig& cfg) {
  cfg.model.num_classes = cfg.synthetic.num_classes;
  for (std::size_t l = 0; l < 3; ++l) {
    cfg.model.backbone_channels[l] = cfg.synthetic.rgb_channels[l] + cfg.synthetic.flow_channels[l];
  }
}

void validate(const RunConfig& cfg) {
  sptad::validate(cfg.model);
  sptad::validate(cfg.loss);
  sptad::validate(cfg.nms);
  sptad::validate(cfg.synthetic);
  sptad::validate(AlignConfig{cfg.model.eta, cfg.model.align_len, cfg.model.samples_per_bin});
  if (cfg.inference.stride < 1) throw InvalidConfig("inference stride must be >= 1");
  if (cfg.inference.clip_len != cfg.model.clip_len ||
      cfg.synthetic.clip_len != cfg.model.clip_len) {
    throw InvalidConfig("clip_len differs between model, synthetic and inference sections");
  }
  if (cfg.threads < 1) throw InvalidConfig("threads must be >= 1");
  if (cfg.thresholds.empty()) throw InvalidConfig("threshold list is empty");
  for (double t : cfg.thresholds) {
    if (!(t > 0.0 && t <= 1.0)) throw InvalidConfig("thresholds must lie in (0, 1]");
  }
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidConfig("malformed threshold '" + item + "'");
    }
    if (used != item.size()) throw InvalidConfig("malformed threshold '" + item + "'");
    if (!(v > 0.0 && v <= 1.0)) throw InvalidConfig("threshold " + item + " outside (0, 1]");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidConfig("empty threshold list");
  return out;
}

NmsMode parse_nms_mode(const std::string& text) {
  if (text == "gaussian") return NmsMode::kGaussian;
  if (text == "linear") return NmsMode::kLinear;
  if (text == "hard") return NmsMode::kHard;
  throw InvalidConfig("unknown nms mode '" + text + "' (gaussian, linear, hard)");
}

}  // namespace sptad::cli
