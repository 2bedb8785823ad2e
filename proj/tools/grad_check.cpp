// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sptad/numerics.hpp"

namespace sptad::cli {

namespace {

struct Instance {
  std::vector<StageOutput> stages;
  std::vector<GroundTruthInstance> gts;
  std::vector<double> clip_probs;
  std::vector<double> labels;
};

TemporalSegment random_segment(const CounterRng& rng, std::uint64_t& c) {
  const double center = 0.1 + 0.8 * rng.uniform(c++);
  const double length = 0.05 + 0.35 * rng.uniform(c++);
  return validate_segment(center - length / 2, center + length / 2);
}

Instance make_instance(const CounterRng& rng, std::uint64_t base, const GradCheckOptions& o) {
  std::uint64_t c = base;
  Instance inst;
  for (int m = 0; m < o.ground_truths; ++m) {
    const TemporalSegment seg = random_segment(rng, c);
    inst.gts.push_back({seg, std::min(o.classes - 1, static_cast<int>(rng.uniform(c++) * o.classes))});
  }
  const auto n = static_cast<std::size_t>(o.proposals);
  const auto k = static_cast<std::size_t>(o.classes);
  for (int s = 0; s < o.stages; ++s) {
    StageOutput st;
    st.class_probs = Matrix(n, k);
    for (double& p : st.class_probs.values()) p = 0.05 + 0.9 * rng.uniform(c++);
    for (std::size_t i = 0; i < n; ++i) st.segments.push_back(random_segment(rng, c));
    inst.stages.push_back(std::move(st));
  }
  for (std::size_t i = 0; i < k; ++i) inst.clip_probs.push_back(0.05 + 0.9 * rng.uniform(c++));
  inst.labels = clip_labels(inst.gts, o.classes);
  return inst;
}

double rel_error(double analytic, double numeric) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  return scale < 1e-8 ? 0.0 : std::abs(analytic - numeric) / scale;
}

}  // namespace

GradCheckResult run_grad_check(std::uint64_t seed, const GradCheckOptions& o,
                               const LossWeights& w) {
  const CounterRng rng(seed, "grad_check");
  GradCheckResult result;
  const double h = o.step;
  for (int trial = 0; trial < o.trials; ++trial) {
    Instance inst = make_instance(rng, static_cast<std::uint64_t>(trial) << 20, o);
    std::vector<MatchResult> matches;
    set_prediction_loss(inst.stages, inst.gts, w, inst.clip_probs, inst.labels, &matches);
    LossGradient grad;
    loss_with_matching(inst.stages, matches, inst.gts, w, inst.clip_probs, inst.labels, &grad);
    auto objective = [&] {
      return loss_with_matching(inst.stages, matches, inst.gts, w, inst.clip_probs, inst.labels)
          .total;
    };
    auto record = [&](double analytic, double numeric) {
      result.max_rel_error = std::max(result.max_rel_error, rel_error(analytic, numeric));
      ++result.checked;
    };

    for (std::size_t s = 0; s < inst.stages.size(); ++s) {
      StageOutput& st = inst.stages[s];
      for (double& p : st.class_probs.values()) {
        const double keep = p;
        const std::size_t idx = static_cast<std::size_t>(&p - st.class_probs.values().data());
        p = keep + h;
        const double up = objective();
        p = keep - h;
        const double down = objective();
        p = keep;
        record(grad.stages[s].d_probs.values()[idx], (up - down) / (2 * h));
      }
      for (std::size_t i = 0; i < st.segments.size(); ++i) {
        for (int side = 0; side < 2; ++side) {
          const TemporalSegment keep = st.segments[i];
          const double coord = side == 0 ? keep.start() : keep.end();
          bool near_kink = coord - h <= 0.0 || coord + h >= 1.0;
          for (const auto& gt : inst.gts) {
            near_kink = near_kink || std::abs(coord - gt.segment.start()) < o.kink_margin ||
                        std::abs(coord - gt.segment.end()) < o.kink_margin;
          }
          if (near_kink) {
            ++result.skipped;
            continue;
          }
          auto shifted = [&](double d) {
            return side == 0 ? validate_segment(keep.start() + d, keep.end())
                             : validate_segment(keep.start(), keep.end() + d);
          };
          st.segments[i] = shifted(h);
          const double up = objective();
          st.segments[i] = shifted(-h);
          const double down = objective();
          st.segments[i] = keep;
          record(grad.stages[s].d_segments(i, static_cast<std::size_t>(side)),
                 (up - down) / (2 * h));
        }
      }
    }
    for (std::size_t c = 0; c < inst.clip_probs.size(); ++c) {
      const double keep = inst.clip_probs[c];
      inst.clip_probs[c] = keep + h;
      const double up = objective();
      inst.clip_probs[c] = keep - h;
      const double down = objective();
      inst.clip_probs[c] = keep;
      record(grad.d_clip_probs[c], (up - down) / (2 * h));
    }
  }
  return result;
}

}  // namespace sptad::cli
