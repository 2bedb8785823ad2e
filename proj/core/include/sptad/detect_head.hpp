// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sptad/config.hpp"
#include "sptad/numerics.hpp"
#include "sptad/pyramid.hpp"
#include "sptad/segment.hpp"
#include "sptad/segment_features.hpp"

namespace sptad {

/// Proposals shorter than this are clamped after each refinement step.
inline constexpr double kMinProposalLength = 1e-3;

struct ProposalState {
  std::vector<CenterLengthSegment> segments;
  /// N x d proposal features.
  Matrix features;
};

struct StageOutput {
  /// N x K independent per-class probabilities.
  Matrix class_probs;
  std::vector<TemporalSegment> segments;
  /// N x d segment features, fed to the next stage.
  Matrix features;
};

struct FeedForwardParams {
  LinearParams fc1;
  LinearParams fc2;
};

/// One detection head.
struct StageParams {
  AttentionParams attention;
  LayerNormParams attention_norm;
  /// Dynamic parameter generators: d -> d*d_h and d -> d_h*d.
  LinearParams dynamic_a;
  LinearParams dynamic_b;
  LayerNormParams dynamic_norm_a;
  LayerNormParams dynamic_norm_b;
  /// Flattened T'*d interaction output -> d.
  LinearParams flatten;
  LayerNormParams interact_norm;
  FeedForwardParams ffn;
  LayerNormParams ffn_norm;
  LinearParams classifier;
  /// 3-layer regression branch d -> d -> d -> 2 (delta center, delta log-length).
  LinearParams reg1;
  LinearParams reg2;
  LinearParams reg3;
};

struct HeadParams {
  /// Learnable initial proposals.
  std::vector<CenterLengthSegment> proposal_segments;
  Matrix proposal_features;
  std::vector<StageParams> stages;
  /// Clip-level action classifier over the pooled backbone levels.
  LinearParams action_classifier;
};

struct ModelParams {
  PyramidParams pyramid;
  HeadParams head;
};

/// Every parameter drawn from cfg.seed keyed by its name: weights uniform-fan,
/// biases and betas zero, gammas one. Proposals cover the full clip unless
/// cfg.random_init.
ModelParams make_model_params(const ModelConfig& cfg);

/// Calls v(name, x) for every parameter, where x is a Matrix&,
/// std::vector<double>& or std::vector<CenterLengthSegment>& (const-qualified
/// when `params` is const). Names are stable and double as RNG stream keys.
template <class Params, class Visitor>
void visit_params(Params& params, Visitor&& v);

AlignConfig align_config(const ModelConfig& cfg);

/// Dynamic interaction of one proposal with its SoI feature (T' x d):
/// A = reshape(dynamic_a(p), d x d_h), B = reshape(dynamic_b(p), d_h x d),
/// g = relu(LN(relu(LN(soi A)) B)), result = flatten(vec(g)).
std::vector<double> sparse_interact(const Matrix& soi, std::span<const double> proposal_feature,
                                    const StageParams& params);

struct ForwardOptions {
  int threads = 1;
  /// Called with each stage's input state before the stage runs.
  std::function<void(int stage, const ProposalState& input)> observer;
};

StageOutput stage_forward(const FeaturePyramid& pyramid, const ProposalState& state,
                          const StageParams& params, const ModelConfig& cfg,
                          const ForwardOptions& opts = {});

/// Runs every stage, each consuming the previous stage's segments and
/// features. All stage outputs are returned (the auxiliary losses need them).
std::vector<StageOutput> run_detector(const FeaturePyramid& pyramid, const ModelConfig& cfg,
                                      const HeadParams& params, const ForwardOptions& opts = {});

/// Temporal mean of each backbone level, concatenated, linear, sigmoid.
std::vector<double> action_cls_head(const std::vector<LevelFeature>& backbone_levels,
                                    const LinearParams& params);

/// Full single-clip forward: streams -> pyramid -> heads, plus clip scores.
struct ClipForward {
  std::vector<StageOutput> stages;
  std::vector<double> clip_probs;
};

ClipForward forward_clip(const BackboneFeatures& features, const ModelConfig& cfg,
                         const ModelParams& params, const ForwardOptions& opts = {});

// ---------------------------------------------------------------------------

template <class Params, class Visitor>
void visit_params(Params& params, Visitor&& v) {
  auto linear = [&v](const std::string& name, auto& lp) {
    v(name + ".weight", lp.weight);
    v(name + ".bias", lp.bias);
  };
  auto norm = [&v](const std::string& name, auto& np) {
    v(name + ".gamma", np.gamma);
    v(name + ".beta", np.beta);
  };
  for (std::size_t l = 0; l < params.pyramid.lateral.size(); ++l) {
    linear("pyramid.lateral" + std::to_string(l), params.pyramid.lateral[l]);
  }
  auto& head = params.head;
  v(std::string("head.proposal_segments"), head.proposal_segments);
  v(std::string("head.proposal_features"), head.proposal_features);
  for (std::size_t s = 0; s < head.stages.size(); ++s) {
    auto& st = head.stages[s];
    const std::string p = "head.stage" + std::to_string(s);
    linear(p + ".attention.query", st.attention.query);
    linear(p + ".attention.key", st.attention.key);
    linear(p + ".attention.value", st.attention.value);
    linear(p + ".attention.output", st.attention.output);
    norm(p + ".attention_norm", st.attention_norm);
    linear(p + ".dynamic_a", st.dynamic_a);
    linear(p + ".dynamic_b", st.dynamic_b);
    norm(p + ".dynamic_norm_a", st.dynamic_norm_a);
    norm(p + ".dynamic_norm_b", st.dynamic_norm_b);
    linear(p + ".flatten", st.flatten);
    norm(p + ".interact_norm", st.interact_norm);
    linear(p + ".ffn.fc1", st.ffn.fc1);
    linear(p + ".ffn.fc2", st.ffn.fc2);
    norm(p + ".ffn_norm", st.ffn_norm);
    linear(p + ".classifier", st.classifier);
    linear(p + ".reg1", st.reg1);
    linear(p + ".reg2", st.reg2);
    linear(p + ".reg3", st.reg3);
  }
  linear("head.action_classifier", head.action_classifier);
}

}  // namespace sptad
