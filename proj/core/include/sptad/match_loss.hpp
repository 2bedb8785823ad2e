// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "sptad/detect_head.hpp"
#include "sptad/numerics.hpp"
#include "sptad/segment.hpp"

namespace sptad {

/// Probabilities are clamped into [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-12;

struct LossWeights {
  double cls = 2.0;
  double l1 = 5.0;
  double giou = 2.0;
  double act = 1.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
};

void validate(const LossWeights& w);

/// Temporal IoU. 1 for identical spans, 0 for disjoint ones.
double tiou(const Span& a, const Span& b);

/// Intersection over the length of `p1` (asymmetric).
double tioa(const Span& p1, const Span& p2);

/// tIoU minus the fraction of the enclosing hull not covered by the union.
double giou_1d(const Span& a, const Span& b);

/// target 1: -alpha (1-p)^gamma ln p;  target 0: -(1-alpha) p^gamma ln(1-p).
double focal_loss(double prob, int target, double alpha, double gamma);
/// d focal_loss / d prob (zero where the probability clamp is active).
double focal_loss_grad(double prob, int target, double alpha, double gamma);

/// Injective assignment from ground truths to predictions. Predictions that
/// no ground truth maps to take the no-action target.
struct MatchResult {
  /// pred_for_gt[m] is the prediction matched to ground truth m.
  std::vector<int> pred_for_gt;
  int num_predictions = 0;

  /// Inverse map, -1 for unmatched predictions.
  std::vector<int> gt_for_pred() const;
};

/// N x M matrix: lambda_cls * focal(p[n][label_m], 1) + lambda_l1 * L1(start, end)
/// + lambda_giou * (1 - GIoU). Throws TooManyGroundTruths when M > N.
Matrix match_cost(const StageOutput& preds, std::span<const GroundTruthInstance> gts,
                  const LossWeights& w);

/// Minimum-cost assignment of the M columns (ground truths) of an N x M cost
/// matrix to distinct rows (predictions). Among optimal assignments the
/// lexicographically smallest pred_for_gt vector is returned.
MatchResult hungarian(const Matrix& cost);

/// Sum over m of cost(pred_for_gt[m], m), accumulated in m order.
double assignment_cost(const Matrix& cost, const MatchResult& match);

struct LossBreakdown {
  double cls = 0.0;
  double l1 = 0.0;
  double giou = 0.0;
  double act = 0.0;
  double total = 0.0;
  /// Positive samples per stage (= number of ground truths).
  int n_pos = 0;
};

/// Mean over classes of binary cross-entropy.
double bce_action_loss(std::span<const double> clip_probs, std::span<const double> labels);

/// Multi-hot vector of the classes present among `gts`.
std::vector<double> clip_labels(std::span<const GroundTruthInstance> gts, int num_classes);

struct StageGradient {
  /// d total / d class_probs, N x K.
  Matrix d_probs;
  /// d total / d (start, end) of each predicted segment, N x 2.
  Matrix d_segments;
};

struct LossGradient {
  std::vector<StageGradient> stages;
  std::vector<double> d_clip_probs;
};

/// Objective with the per-stage matching held fixed. Matched predictions get
/// focal (one-hot target), L1 on (start, end) and 1 - GIoU; unmatched ones get
/// focal against the all-zero target. Each stage's terms are divided by
/// max(1, n_pos); stages are summed with equal weight. The action term is
/// included when `clip_probs` is non-empty. Fills `grad` when given.
LossBreakdown loss_with_matching(std::span<const StageOutput> stages,
                                 std::span<const MatchResult> matches,
                                 std::span<const GroundTruthInstance> gts, const LossWeights& w,
                                 std::span<const double> clip_probs = {},
                                 std::span<const double> labels = {},
                                 LossGradient* grad = nullptr);

/// Matches every stage independently, then evaluates loss_with_matching.
LossBreakdown set_prediction_loss(std::span<const StageOutput> stages,
                                  std::span<const GroundTruthInstance> gts, const LossWeights& w,
                                  std::span<const double> clip_probs = {},
                                  std::span<const double> labels = {},
                                  std::vector<MatchResult>* matches_out = nullptr);

}  // namespace sptad
