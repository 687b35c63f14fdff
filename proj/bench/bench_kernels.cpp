// Copyright 2026 The chunkflow Authors
// SPDX-License-Identifier: Apache-2.0

// Serial vs OpenMP timings for the per-step kernels and a full batch.
// The second argument of every benchmark selects the path: 0 serial,
// 1 parallel.

#include <benchmark/benchmark.h>

#include <random>

#include "chunkflow/kernels.hpp"
#include "chunkflow/matching.hpp"
#include "chunkflow/models.hpp"
#include "chunkflow/noise.hpp"
#include "chunkflow/sampler.hpp"

namespace {

using namespace chunkflow;

Execution exec_of(const benchmark::State& state) { return state.range(1) ? Execution::Parallel : Execution::Serial; }

std::vector<Frames> chunks_for(const ChunkGeometry& g, Eigen::Index d) {
  NoiseSource noise(1);
  std::vector<Frames> out;
  for (int k = 0; k < g.K; ++k) out.push_back(noise.draw(g.F, d));
  return out;
}

void BM_EvaluateVelocities(benchmark::State& state) {
  const auto g = ChunkGeometry::make(16, 8, 7, static_cast<int>(state.range(0)));
  const GaussianProcessModel model(0.9, Vector::Zero(8), Matrix::Identity(8, 8), g.F);
  const auto chunks = chunks_for(g, 8);
  const std::vector<Vector> conds(static_cast<std::size_t>(g.K));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::evaluate_velocities(model, chunks, 0.5, conds, exec_of(state)));
  }
}

void BM_Aggregate(benchmark::State& state) {
  const auto g = ChunkGeometry::make(16, 8, 7, static_cast<int>(state.range(0)));
  const auto chunks = chunks_for(g, 64);
  const auto sched = lambda_schedule(g.F, g.O);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(chunks, g, sched, exec_of(state)));
}

void BM_Renoise(benchmark::State& state) {
  NoiseSource noise(2);
  const Frames b0 = noise.draw(state.range(0), 64), b1 = noise.draw(state.range(0), 64), eps = noise.draw(state.range(0), 64);
  Frames out;
  for (auto _ : state) {
    kernels::renoise(b0, b1, 0.4, 0.4, eps, out, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_SampleBatch(benchmark::State& state) {
  const auto g = ChunkGeometry::make(8, 4, 4, 4);
  const GaussianProcessModel model(0.9, Vector::Zero(2), Matrix::Identity(2, 2), g.F);
  SamplerConfig cfg;
  cfg.steps = 50;
  cfg.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_batch(cfg, model, ConditionSet{}, g, static_cast<int>(state.range(0)), exec_of(state)));
  }
}

BENCHMARK(BM_EvaluateVelocities)->ArgsProduct({{4, 32}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Aggregate)->ArgsProduct({{4, 64}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Renoise)->ArgsProduct({{256, 8192}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SampleBatch)->ArgsProduct({{64}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
