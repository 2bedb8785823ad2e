// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "sptad/match_loss.hpp"

namespace sptad::cli {

struct GradCheckOptions {
  int trials = 50;
  int proposals = 6;
  int ground_truths = 3;
  int classes = 5;
  int stages = 2;
  double step = 1e-5;
  /// Coordinates closer than this to any ground-truth endpoint are skipped
  /// (L1 and hull kinks).
  double kink_margin = 1e-3;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  long checked = 0;
  long skipped = 0;
};

/// Central differences of the fixed-matching objective against its analytic
/// gradient on random instances drawn from `seed`.
GradCheckResult run_grad_check(std::uint64_t seed, const GradCheckOptions& opts,
                               const LossWeights& weights);

}  // namespace sptad::cli
