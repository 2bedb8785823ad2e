// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sptad/config.hpp"
#include "sptad/data.hpp"
#include "sptad/eval.hpp"
#include "sptad/match_loss.hpp"
#include "sptad/pipeline.hpp"

namespace sptad::cli {

/// Everything a subcommand may need. Loaded from JSON; flags override.
struct RunConfig {
  ModelConfig model;
  LossWeights loss;
  NmsConfig nms;
  SyntheticSpec synthetic;
  InferenceConfig inference;
  std::vector<double> thresholds = kDefaultThresholds;
  int threads = 1;
  std::filesystem::path out;
};

/// Reads a JSON object whose sections ("model", "loss", "nms", "synthetic",
/// "inference") and top-level keys ("seed", "threads", "thresholds", "out")
/// are all optional. Unknown keys raise SchemaError.
RunConfig load_run_config(const std::filesystem::path& path);

/// Sets every seed in the config.
void set_seed(RunConfig& cfg, std::uint64_t seed);

/// Sets the clip length of the model, the synthetic backbone and inference.
void set_clip_len(RunConfig& cfg, int clip_len);

/// Model class count and backbone widths follow the synthetic spec.
void bind_model_to_data(RunConfig& cfg);

/// Validates every section; throws the first violation.
void validate(const RunConfig& cfg);

/// Parses "0.3,0.4,0.5"; throws InvalidConfig on malformed or out-of-range values.
std::vector<double> parse_thresholds(const std::string& text);

NmsMode parse_nms_mode(const std::string& text);

}  // namespace sptad::cli
