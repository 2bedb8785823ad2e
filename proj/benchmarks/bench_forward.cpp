// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "sptad/data.hpp"
#include "sptad/detect_head.hpp"

namespace {

using namespace sptad;

struct Fixture {
  ModelConfig cfg;
  ModelParams params;
  FeaturePyramid pyramid;

  explicit Fixture(int d_model) {
    cfg.d_model = d_model;
    cfg.random_init = true;
    params = make_model_params(cfg);
    const std::vector<VideoInstance> gts{{{3.0, 9.0}, 1}};
    const BackboneFeatures f = synth_backbone("bench", {0, cfg.clip_len, 10.0}, gts, SyntheticSpec{});
    pyramid = build_pyramid(concat_streams(f.rgb, f.flow), params.pyramid, cfg.d_model);
  }
};

void BM_StageForward(benchmark::State& state) {
  const Fixture fx(static_cast<int>(state.range(0)));
  const ProposalState init{fx.params.head.proposal_segments, fx.params.head.proposal_features};
  for (auto _ : state) {
    benchmark::DoNotOptimize(stage_forward(fx.pyramid, init, fx.params.head.stages[0], fx.cfg));
  }
}
BENCHMARK(BM_StageForward)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_RunDetector(benchmark::State& state) {
  const Fixture fx(256);
  for (auto _ : state) benchmark::DoNotOptimize(run_detector(fx.pyramid, fx.cfg, fx.params.head));
}
BENCHMARK(BM_RunDetector)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
