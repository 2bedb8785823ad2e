// Copyright (C) 2026 The sptad Authors
// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "sptad/match_loss.hpp"
#include "sptad/numerics.hpp"
#include "sptad/pipeline.hpp"
#include "sptad/segment_features.hpp"

namespace {

using namespace sptad;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = u(gen);
  return m;
}

void BM_Linear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const Matrix x = random_matrix(n, d, 1);
  const LinearParams p{random_matrix(d, d, 2), std::vector<double>(d, 0.1)};
  for (auto _ : state) benchmark::DoNotOptimize(linear(x, p));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * d * d));
}
BENCHMARK(BM_Linear)->Args({50, 256})->Args({50, 1024})->Args({16, 256});

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 256, 3);
  const Matrix b = random_matrix(256, 64, 4);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(128);

void BM_SoiAlign(benchmark::State& state) {
  const LevelFeature level{random_matrix(static_cast<std::size_t>(state.range(0)), 256, 5), 2};
  const TemporalSegment seg = validate_segment(0.23, 0.61);
  const AlignConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(soi_align(level, seg, cfg));
}
BENCHMARK(BM_SoiAlign)->Arg(16)->Arg(128);

void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix cost = random_matrix(n, static_cast<std::size_t>(state.range(1)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(cost));
}
BENCHMARK(BM_Hungarian)->Args({7, 7})->Args({50, 5})->Args({100, 20});

void BM_SoftNms(benchmark::State& state) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DetectionSet dets;
  for (int i = 0; i < state.range(0); ++i) {
    const double s = 60.0 * u(gen);
    dets.push_back({{s, s + 1.0 + 10.0 * u(gen)}, static_cast<int>(4 * u(gen)), u(gen)});
  }
  const NmsConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(soft_nms(dets, cfg));
}
BENCHMARK(BM_SoftNms)->Arg(100)->Arg(1000);

}  // namespace
