// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/detect_head.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>
#include <type_traits>

#include "sptad/error.hpp"

namespace sptad {

namespace {

LinearParams alloc_linear(std::size_t out, std::size_t in) {
  return {Matrix(out, in), std::vector<double>(out, 0.0)};
}

LayerNormParams alloc_norm(std::size_t n) {
  return {std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

Matrix feed_forward(const Matrix& x, const LinearParams& fc1, const LinearParams& fc2) {
  Matrix h = linear(x, fc1);
  relu_inplace(h);
  return linear(h, fc2);
}

std::size_t hidden_width(const StageParams& params, std::size_t d) {
  const std::size_t out = params.dynamic_a.out_features();
  if (d == 0 || out % d != 0 || params.dynamic_b.out_features() != out) {
    throw ShapeMismatch("sparse_interact: dynamic generators must emit d*d_h values");
  }
  return out / d;
}

// Applies the generated (d x d_h) and (d_h x d) kernels to one SoI feature and
// writes the flattened T' x d result to `out`.
void interact_kernels(const Matrix& soi, std::span<const double> gen_a,
                      std::span<const double> gen_b, const StageParams& params, std::size_t d,
                      std::size_t d_h, std::span<double> out) {
  if (soi.cols() != d) {
    throw ShapeMismatch("sparse_interact: SoI width " + std::to_string(soi.cols()) +
                        " != feature width " + std::to_string(d));
  }
  const Matrix a(d, d_h, std::vector<double>(gen_a.begin(), gen_a.end()));
  const Matrix b(d_h, d, std::vector<double>(gen_b.begin(), gen_b.end()));
  Matrix h = layer_norm(matmul(soi, a), params.dynamic_norm_a);
  relu_inplace(h);
  Matrix g = layer_norm(matmul(h, b), params.dynamic_norm_b);
  relu_inplace(g);
  if (out.size() != g.size()) throw ShapeMismatch("sparse_interact: flatten width mismatch");
  std::copy(g.values().begin(), g.values().end(), out.begin());
}

CenterLengthSegment refine(const CenterLengthSegment& seg, double d_center, double d_log_len) {
  CenterLengthSegment next;
  next.center = std::clamp(seg.center + d_center * seg.length, 0.0, 1.0);
  next.length = std::clamp(seg.length * std::exp(d_log_len), kMinProposalLength, 1.0);
  return next;
}

}  // namespace

AlignConfig align_config(const ModelConfig& cfg) {
  return {cfg.eta, cfg.align_len, cfg.samples_per_bin};
}

ModelParams make_model_params(const ModelConfig& cfg) {
  validate(cfg);
  const std::size_t d = cfg.d_model;
  const std::size_t dh = cfg.d_hidden;
  const std::size_t k = cfg.num_classes;
  const std::size_t n = cfg.num_proposals;

  ModelParams params;
  for (int l = 0; l < kBackboneLevels; ++l) {
    params.pyramid.lateral[l] = alloc_linear(d, cfg.backbone_channels[l]);
  }
  HeadParams& head = params.head;
  head.proposal_segments.resize(n);
  head.proposal_features = Matrix(n, d);
  head.stages.resize(cfg.stages);
  for (auto& st : head.stages) {
    st.attention = {alloc_linear(d, d), alloc_linear(d, d), alloc_linear(d, d),
                    alloc_linear(d, d)};
    st.attention_norm = alloc_norm(d);
    st.dynamic_a = alloc_linear(d * dh, d);
    st.dynamic_b = alloc_linear(dh * d, d);
    st.dynamic_norm_a = alloc_norm(dh);
    st.dynamic_norm_b = alloc_norm(d);
    st.flatten = alloc_linear(d, static_cast<std::size_t>(cfg.align_len) * d);
    st.interact_norm = alloc_norm(d);
    st.ffn = {alloc_linear(d, d), alloc_linear(d, d)};
    st.ffn_norm = alloc_norm(d);
    st.classifier = alloc_linear(k, d);
    st.reg1 = alloc_linear(d, d);
    st.reg2 = alloc_linear(d, d);
    st.reg3 = alloc_linear(2, d);
  }
  std::size_t pooled = 0;
  for (int c : cfg.backbone_channels) pooled += static_cast<std::size_t>(c);
  head.action_classifier = alloc_linear(k, pooled);

  visit_params(params, [&cfg](const std::string& name, auto& value) {
    using T = std::decay_t<decltype(value)>;
    if constexpr (std::is_same_v<T, Matrix>) {
      value = seeded_init(value.rows(), value.cols(), cfg.seed, InitScheme::kUniformFan, name);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      std::fill(value.begin(), value.end(), ends_with(name, ".gamma") ? 1.0 : 0.0);
    } else {
      if (!cfg.random_init) {
        std::fill(value.begin(), value.end(), CenterLengthSegment{0.5, 1.0});
        return;
      }
      const CounterRng rng(cfg.seed, name);
      for (std::size_t i = 0; i < value.size(); ++i) {
        value[i].center = rng.uniform(2 * i);
        value[i].length = 0.02 + 0.98 * rng.uniform(2 * i + 1);
      }
    }
  });
  return params;
}

std::vector<double> sparse_interact(const Matrix& soi, std::span<const double> proposal_feature,
                                    const StageParams& params) {
  const std::size_t d = proposal_feature.size();
  const std::size_t d_h = hidden_width(params, d);
  const std::vector<double> gen_a = linear(proposal_feature, params.dynamic_a);
  const std::vector<double> gen_b = linear(proposal_feature, params.dynamic_b);
  std::vector<double> flat(soi.rows() * d);
  interact_kernels(soi, gen_a, gen_b, params, d, d_h, flat);
  return linear(std::span<const double>(flat), params.flatten);
}

StageOutput stage_forward(const FeaturePyramid& pyramid, const ProposalState& state,
                          const StageParams& params, const ModelConfig& cfg,
                          const ForwardOptions& opts) {
  const std::size_t n = state.segments.size();
  const std::size_t d = static_cast<std::size_t>(cfg.d_model);
  if (state.features.rows() != n || state.features.cols() != d) {
    throw ShapeMismatch("stage_forward: proposal features must be N x d");
  }
  const std::size_t d_h = hidden_width(params, d);
  const AlignConfig align = align_config(cfg);

  const Matrix attended = layer_norm(
      add(state.features, multi_head_self_attention(state.features, params.attention,
                                                    cfg.attn_heads)),
      params.attention_norm);

  const Matrix gen_a = linear(attended, params.dynamic_a, opts.threads);
  const Matrix gen_b = linear(attended, params.dynamic_b, opts.threads);

  std::vector<TemporalSegment> input_segments;
  input_segments.reserve(n);
  for (const auto& seg : state.segments) input_segments.push_back(to_start_end(seg));

  Matrix flat(n, static_cast<std::size_t>(cfg.align_len) * d);
  parallel_for(n, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Matrix soi = extract_soi(pyramid, input_segments[k], align);
      interact_kernels(soi, gen_a.row(k), gen_b.row(k), params, d, d_h, flat.row(k));
    }
  });
  const Matrix interacted = linear(flat, params.flatten, opts.threads);
  const Matrix segment_feats = layer_norm(add(attended, interacted), params.interact_norm);
  Matrix refined = layer_norm(
      add(segment_feats, feed_forward(segment_feats, params.ffn.fc1, params.ffn.fc2)),
      params.ffn_norm);

  StageOutput out;
  out.class_probs = linear(refined, params.classifier);
  for (double& v : out.class_probs.values()) v = sigmoid(v);

  Matrix hidden = linear(refined, params.reg1);
  relu_inplace(hidden);
  hidden = linear(hidden, params.reg2);
  relu_inplace(hidden);
  const Matrix deltas = linear(hidden, params.reg3);
  if (deltas.cols() != 2) throw ShapeMismatch("stage_forward: regression must emit 2 values");

  out.segments.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.segments.push_back(to_start_end(refine(state.segments[k], deltas(k, 0), deltas(k, 1))));
  }
  out.features = std::move(refined);
  return out;
}

std::vector<StageOutput> run_detector(const FeaturePyramid& pyramid, const ModelConfig& cfg,
                                      const HeadParams& params, const ForwardOptions& opts) {
  validate(cfg);
  if (params.stages.size() != static_cast<std::size_t>(cfg.stages)) {
    throw ShapeMismatch("run_detector: " + std::to_string(params.stages.size()) +
                        " parameter bundles for " + std::to_string(cfg.stages) + " stages");
  }
  if (params.proposal_segments.size() != static_cast<std::size_t>(cfg.num_proposals)) {
    throw ShapeMismatch("run_detector: proposal count does not match config");
  }
  ProposalState state{params.proposal_segments, params.proposal_features};
  std::vector<StageOutput> outputs;
  outputs.reserve(params.stages.size());
  for (std::size_t s = 0; s < params.stages.size(); ++s) {
    if (opts.observer) opts.observer(static_cast<int>(s), state);
    outputs.push_back(stage_forward(pyramid, state, params.stages[s], cfg, opts));
    const StageOutput& last = outputs.back();
    state.segments.clear();
    for (const auto& seg : last.segments) state.segments.push_back(to_center_length(seg));
    state.features = last.features;
  }
  return outputs;
}

std::vector<double> action_cls_head(const std::vector<LevelFeature>& backbone_levels,
                                    const LinearParams& params) {
  if (backbone_levels.size() != kBackboneLevels) {
    throw ShapeMismatch("action_cls_head: expected 3 backbone levels");
  }
  std::vector<double> pooled;
  for (const auto& level : backbone_levels) {
    if (level.length() == 0) throw ShapeMismatch("action_cls_head: empty level");
    std::vector<double> mean(level.channels(), 0.0);
    for (std::size_t t = 0; t < level.length(); ++t) {
      auto row = level.data.row(t);
      for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += row[c];
    }
    for (double& m : mean) m /= static_cast<double>(level.length());
    pooled.insert(pooled.end(), mean.begin(), mean.end());
  }
  std::vector<double> probs = linear(std::span<const double>(pooled), params);
  for (double& p : probs) p = sigmoid(p);
  return probs;
}

ClipForward forward_clip(const BackboneFeatures& features, const ModelConfig& cfg,
                         const ModelParams& params, const ForwardOptions& opts) {
  const std::vector<LevelFeature> levels = concat_streams(features.rgb, features.flow);
  const FeaturePyramid pyramid = build_pyramid(levels, params.pyramid, cfg.d_model);
  ClipForward out;
  out.stages = run_detector(pyramid, cfg, params.head, opts);
  out.clip_probs = action_cls_head(levels, params.head.action_classifier);
  return out;
}

}  // namespace sptad
