// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include "sptad/config.hpp"

#include <cmath>
#include <string>

#include "sptad/error.hpp"

namespace sptad {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidConfig("invalid model config: " + what);
}

}  // namespace

void validate(const ModelConfig& cfg) {
  require(cfg.num_proposals >= 1, "num_proposals must be >= 1");
  require(cfg.num_classes >= 1, "num_classes must be >= 1");
  require(cfg.d_model >= 1, "d_model must be >= 1");
  require(cfg.d_hidden >= 1, "d_hidden must be >= 1");
  require(cfg.attn_heads >= 1, "attn_heads must be >= 1");
  require(cfg.d_model % cfg.attn_heads == 0,
          "d_model (" + std::to_string(cfg.d_model) + ") must be divisible by attn_heads (" +
              std::to_string(cfg.attn_heads) + ")");
  require(cfg.align_len >= 2, "align_len must be >= 2");
  require(cfg.samples_per_bin >= 1, "samples_per_bin must be >= 1");
  require(std::isfinite(cfg.eta) && cfg.eta > 0.0, "eta must be > 0");
  require(cfg.stages >= 1, "stages must be >= 1");
  require(cfg.clip_len >= 16 && cfg.clip_len % 16 == 0,
          "clip_len must be a positive multiple of 16");
  for (int c : cfg.backbone_channels) require(c >= 1, "backbone channel widths must be >= 1");
}

}  // namespace sptad
