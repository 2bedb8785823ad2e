// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/match_loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sptad/error.hpp"

namespace sptad {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

double intersection(const Span& a, const Span& b) {
  return std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

struct Assignment {
  std::vector<int> col_for_row;
  double value = 0.0;
};

// Shortest-augmenting-path Hungarian on the rows/cols subsets. rows.size()
// must not exceed cols.size(). cost(r, c) reads the caller's matrix.
template <class Cost>
Assignment solve_assignment(const std::vector<int>& rows, const std::vector<int>& cols,
                            const Cost& cost) {
  const std::size_t n = rows.size();
  const std::size_t m = cols.size();
  Assignment out;
  out.col_for_row.assign(n, -1);
  if (n == 0) return out;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(rows[i0 - 1], cols[j - 1]) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) out.col_for_row[p[j] - 1] = cols[j - 1];
  }
  for (std::size_t i = 0; i < n; ++i) out.value += cost(rows[i], out.col_for_row[i]);
  return out;
}

void giou_and_grad(const Span& a, const Span& b, double& giou, double& d_start, double& d_end) {
  const double inter = intersection(a, b);
  const double uni = a.length() + b.length() - inter;
  const double hull = std::max(a.end, b.end) - std::min(a.start, b.start);
  giou = inter / uni - (hull - uni) / hull;

  const bool overlap = inter > 0.0;
  const double di_ds = (overlap && a.start > b.start) ? -1.0 : 0.0;
  const double di_de = (overlap && a.end < b.end) ? 1.0 : 0.0;
  const double du_ds = -1.0 - di_ds;
  const double du_de = 1.0 - di_de;
  const double dh_ds = a.start < b.start ? -1.0 : 0.0;
  const double dh_de = a.end > b.end ? 1.0 : 0.0;
  auto d = [&](double di, double du, double dh) {
    return (di * uni - inter * du) / (uni * uni) + (du * hull - uni * dh) / (hull * hull);
  };
  d_start = d(di_ds, du_ds, dh_ds);
  d_end = d(di_de, du_de, dh_de);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

void validate(const LossWeights& w) {
  for (double x : {w.cls, w.l1, w.giou, w.act, w.focal_gamma}) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidConfig("loss weights and focal gamma must be finite and >= 0");
    }
  }
  if (!(w.focal_alpha >= 0.0 && w.focal_alpha <= 1.0)) {
    throw InvalidConfig("focal alpha must lie in [0, 1]");
  }
}

double tiou(const Span& a, const Span& b) {
  const double inter = intersection(a, b);
  const double uni = a.length() + b.length() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double tioa(const Span& p1, const Span& p2) {
  const double len = p1.length();
  return len > 0.0 ? intersection(p1, p2) / len : 0.0;
}

double giou_1d(const Span& a, const Span& b) {
  const double inter = intersection(a, b);
  const double uni = a.length() + b.length() - inter;
  const double hull = std::max(a.end, b.end) - std::min(a.start, b.start);
  return inter / uni - (hull - uni) / hull;
}

double focal_loss(double prob, int target, double alpha, double gamma) {
  const double p = clamp_prob(prob);
  if (target == 1) return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
  return -(1.0 - alpha) * std::pow(p, gamma) * std::log(1.0 - p);
}

double focal_loss_grad(double prob, int target, double alpha, double gamma) {
  if (prob < kProbClamp || prob > 1.0 - kProbClamp) return 0.0;
  const double p = prob;
  if (target == 1) {
    const double q = 1.0 - p;
    const double mod = gamma == 0.0 ? 0.0 : gamma * std::pow(q, gamma - 1.0) * std::log(p);
    return alpha * (mod - std::pow(q, gamma) / p);
  }
  const double mod = gamma == 0.0 ? 0.0 : gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p);
  return (1.0 - alpha) * (-mod + std::pow(p, gamma) / (1.0 - p));
}

std::vector<int> MatchResult::gt_for_pred() const {
  std::vector<int> inv(static_cast<std::size_t>(num_predictions), -1);
  for (std::size_t m = 0; m < pred_for_gt.size(); ++m) {
    inv[static_cast<std::size_t>(pred_for_gt[m])] = static_cast<int>(m);
  }
  return inv;
}

Matrix match_cost(const StageOutput& preds, std::span<const GroundTruthInstance> gts,
                  const LossWeights& w) {
  const std::size_t n = preds.segments.size();
  const std::size_t m = gts.size();
  if (m > n) {
    throw TooManyGroundTruths(std::to_string(m) + " ground truths for " + std::to_string(n) +
                              " predictions");
  }
  if (preds.class_probs.rows() != n) throw ShapeMismatch("match_cost: probs/segments disagree");
  Matrix cost(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const Span p = preds.segments[i];
    for (std::size_t j = 0; j < m; ++j) {
      const Span g = gts[j].segment;
      const int label = gts[j].label;
      if (label < 0 || static_cast<std::size_t>(label) >= preds.class_probs.cols()) {
        throw UnknownClass("match_cost: label " + std::to_string(label) + " out of range");
      }
      const double cls = focal_loss(preds.class_probs(i, static_cast<std::size_t>(label)), 1,
                                    w.focal_alpha, w.focal_gamma);
      const double l1 = std::abs(p.start - g.start) + std::abs(p.end - g.end);
      cost(i, j) = w.cls * cls + w.l1 * l1 + w.giou * (1.0 - giou_1d(p, g));
    }
  }
  return cost;
}

MatchResult hungarian(const Matrix& cost) {
  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  MatchResult result;
  result.num_predictions = static_cast<int>(n);
  if (m == 0) return result;
  if (m > n) {
    throw TooManyGroundTruths(std::to_string(m) + " ground truths for " + std::to_string(n) +
                              " predictions");
  }
  for (double v : cost.values()) {
    if (!std::isfinite(v)) throw ValidationError("hungarian: cost matrix must be finite");
  }
  // Solved with ground truths as rows.
  auto gt_cost = [&cost](int gt, int pred) {
    return cost(static_cast<std::size_t>(pred), static_cast<std::size_t>(gt));
  };
  std::vector<int> all_gts(m), all_preds(n);
  for (std::size_t i = 0; i < m; ++i) all_gts[i] = static_cast<int>(i);
  for (std::size_t i = 0; i < n; ++i) all_preds[i] = static_cast<int>(i);
  const Assignment best = solve_assignment(all_gts, all_preds, gt_cost);
  const double tol = 1e-12 * std::max(1.0, std::abs(best.value));

  // Fix ground truths in order, each to the smallest prediction index that
  // still admits an optimal completion.
  std::vector<char> taken(n, 0);
  double fixed = 0.0;
  result.pred_for_gt.assign(m, -1);
  for (std::size_t g = 0; g < m; ++g) {
    std::vector<int> rest_gts(all_gts.begin() + static_cast<std::ptrdiff_t>(g + 1), all_gts.end());
    bool placed = false;
    for (std::size_t r = 0; r < n && !placed; ++r) {
      if (taken[r]) continue;
      const double head = fixed + gt_cost(static_cast<int>(g), static_cast<int>(r));
      double total = head;
      if (!rest_gts.empty()) {
        std::vector<int> rest_preds;
        for (std::size_t q = 0; q < n; ++q) {
          if (!taken[q] && q != r) rest_preds.push_back(static_cast<int>(q));
        }
        total += solve_assignment(rest_gts, rest_preds, gt_cost).value;
      }
      if (total <= best.value + tol) {
        result.pred_for_gt[g] = static_cast<int>(r);
        taken[r] = 1;
        fixed = head;
        placed = true;
      }
    }
    if (!placed) {
      // Rounding pushed every candidate past the tolerance; keep the solver's choice.
      const int r = best.col_for_row[g];
      if (taken[static_cast<std::size_t>(r)]) return {best.col_for_row, static_cast<int>(n)};
      result.pred_for_gt[g] = r;
      taken[static_cast<std::size_t>(r)] = 1;
      fixed += gt_cost(static_cast<int>(g), r);
    }
  }
  return result;
}

double assignment_cost(const Matrix& cost, const MatchResult& match) {
  double total = 0.0;
  for (std::size_t m = 0; m < match.pred_for_gt.size(); ++m) {
    total += cost(static_cast<std::size_t>(match.pred_for_gt[m]), m);
  }
  return total;
}

double bce_action_loss(std::span<const double> clip_probs, std::span<const double> labels) {
  if (clip_probs.size() != labels.size()) throw ShapeMismatch("bce: probs/labels size differ");
  if (clip_probs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < clip_probs.size(); ++k) {
    const double p = clamp_prob(clip_probs[k]);
    const double y = labels[k];
    total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
  }
  return total / static_cast<double>(clip_probs.size());
}

std::vector<double> clip_labels(std::span<const GroundTruthInstance> gts, int num_classes) {
  std::vector<double> labels(static_cast<std::size_t>(num_classes), 0.0);
  for (const auto& g : gts) {
    if (g.label < 0 || g.label >= num_classes) {
      throw UnknownClass("clip_labels: label " + std::to_string(g.label) + " out of range");
    }
    labels[static_cast<std::size_t>(g.label)] = 1.0;
  }
  return labels;
}

LossBreakdown loss_with_matching(std::span<const StageOutput> stages,
                                 std::span<const MatchResult> matches,
                                 std::span<const GroundTruthInstance> gts, const LossWeights& w,
                                 std::span<const double> clip_probs,
                                 std::span<const double> labels, LossGradient* grad) {
  validate(w);
  if (stages.empty()) throw ValidationError("set prediction loss needs at least one stage");
  if (matches.size() != stages.size()) throw ShapeMismatch("one match result per stage");
  LossBreakdown out;
  out.n_pos = static_cast<int>(gts.size());
  const double norm = 1.0 / std::max(1.0, static_cast<double>(gts.size()));
  if (grad) grad->stages.clear();

  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StageOutput& st = stages[s];
    const std::size_t n = st.segments.size();
    const std::size_t k = st.class_probs.cols();
    if (st.class_probs.rows() != n) throw ShapeMismatch("stage probs/segments disagree");
    if (matches[s].pred_for_gt.size() != gts.size() ||
        matches[s].num_predictions != static_cast<int>(n)) {
      throw ShapeMismatch("match result does not fit stage " + std::to_string(s));
    }
    const std::vector<int> owner = matches[s].gt_for_pred();
    StageGradient sg{Matrix(n, k), Matrix(n, 2)};

    double cls = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = owner[i] >= 0 ? gts[static_cast<std::size_t>(owner[i])].label : -1;
      for (std::size_t c = 0; c < k; ++c) {
        const int target = static_cast<int>(c) == label ? 1 : 0;
        const double p = st.class_probs(i, c);
        cls += focal_loss(p, target, w.focal_alpha, w.focal_gamma);
        sg.d_probs(i, c) =
            w.cls * norm * focal_loss_grad(p, target, w.focal_alpha, w.focal_gamma);
      }
    }
    double l1 = 0.0;
    double giou = 0.0;
    for (std::size_t m = 0; m < gts.size(); ++m) {
      const std::size_t i = static_cast<std::size_t>(matches[s].pred_for_gt[m]);
      const Span p = st.segments[i];
      const Span g = gts[m].segment;
      l1 += std::abs(p.start - g.start) + std::abs(p.end - g.end);
      double gi = 0.0, d_s = 0.0, d_e = 0.0;
      giou_and_grad(p, g, gi, d_s, d_e);
      giou += 1.0 - gi;
      sg.d_segments(i, 0) = norm * (w.l1 * sign(p.start - g.start) - w.giou * d_s);
      sg.d_segments(i, 1) = norm * (w.l1 * sign(p.end - g.end) - w.giou * d_e);
    }
    out.cls += cls * norm;
    out.l1 += l1 * norm;
    out.giou += giou * norm;
    if (grad) grad->stages.push_back(std::move(sg));
  }

  if (!clip_probs.empty()) {
    out.act = bce_action_loss(clip_probs, labels);
    if (grad) {
      grad->d_clip_probs.assign(clip_probs.size(), 0.0);
      const double inv_k = 1.0 / static_cast<double>(clip_probs.size());
      for (std::size_t c = 0; c < clip_probs.size(); ++c) {
        const double p = clip_probs[c];
        if (p < kProbClamp || p > 1.0 - kProbClamp) continue;
        const double y = labels[c];
        grad->d_clip_probs[c] = w.act * inv_k * (-y / p + (1.0 - y) / (1.0 - p));
      }
    }
  } else if (grad) {
    grad->d_clip_probs.clear();
  }
  out.total = w.cls * out.cls + w.l1 * out.l1 + w.giou * out.giou + w.act * out.act;
  return out;
}

LossBreakdown set_prediction_loss(std::span<const StageOutput> stages,
                                  std::span<const GroundTruthInstance> gts, const LossWeights& w,
                                  std::span<const double> clip_probs,
                                  std::span<const double> labels,
                                  std::vector<MatchResult>* matches_out) {
  std::vector<MatchResult> matches;
  matches.reserve(stages.size());
  for (const auto& st : stages) matches.push_back(hungarian(match_cost(st, gts, w)));
  LossBreakdown out = loss_with_matching(stages, matches, gts, w, clip_probs, labels);
  if (matches_out) *matches_out = std::move(matches);
  return out;
}

}  // namespace sptad
