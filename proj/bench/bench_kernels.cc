// bench/bench_kernels.cc

// Copyright 2026  The MLSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts.  Sizes follow
// the default pipeline: 768-dim inputs, 256 hidden units, batch 64.

#include <benchmark/benchmark.h>

#include "mlsd/kernels.h"
#include "mlsd/metric_net.h"
#include "mlsd/rng.h"

namespace {

using mlsd::Exec;
using mlsd::Matrix;

Matrix<float> random_matrix(size_t rows, size_t cols, uint64_t seed) {
  mlsd::Rng rng(seed);
  Matrix<float> m(rows, cols);
  for (float &v : m.data) v = static_cast<float>(rng.normal());
  return m;
}

Exec exec_of(const benchmark::State &state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_Affine(benchmark::State &state) {
  const auto x = random_matrix(64, 768, 1), w = random_matrix(256, 768, 2);
  const std::vector<float> b(256, 0.1f);
  Matrix<float> y;
  for (auto _ : state) {
    mlsd::kernels::affine(x, w, std::span<const float>(b), y, exec_of(state));
    benchmark::DoNotOptimize(y.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_WeightGrad(benchmark::State &state) {
  const auto dy = random_matrix(64, 256, 3), x = random_matrix(64, 768, 4);
  Matrix<float> dw(256, 768);
  for (auto _ : state) {
    mlsd::kernels::accumulate_weight_grad(dy, x, dw, exec_of(state));
    benchmark::DoNotOptimize(dw.data.data());
  }
}

void BM_InputGrad(benchmark::State &state) {
  const auto dy = random_matrix(64, 256, 5), w = random_matrix(256, 768, 6);
  Matrix<float> dx;
  for (auto _ : state) {
    mlsd::kernels::input_grad(dy, w, dx, exec_of(state));
    benchmark::DoNotOptimize(dx.data.data());
  }
}

void BM_CosineMatrix(benchmark::State &state) {
  const auto q = random_matrix(256, 768, 7), k = random_matrix(1024, 768, 8);
  Matrix<double> s;
  for (auto _ : state) {
    mlsd::kernels::cosine_matrix(q, k, s, exec_of(state));
    benchmark::DoNotOptimize(s.data.data());
  }
  state.SetItemsProcessed(state.iterations() * 256 * 1024);
}

void BM_TripletBatchGradient(benchmark::State &state) {
  const auto a = random_matrix(64, 768, 9), p = random_matrix(64, 768, 10), n = random_matrix(64, 768, 11);
  const auto params = mlsd::init_projection<float>(768, 256, 128, 12);
  for (auto _ : state) {
    auto g = mlsd::triplet_batch_gradient(a, p, n, params, 1.0, exec_of(state));
    benchmark::DoNotOptimize(g);
  }
}

}  // namespace

BENCHMARK(BM_Affine)->ArgName("omp")->Arg(0)->Arg(1);
BENCHMARK(BM_WeightGrad)->ArgName("omp")->Arg(0)->Arg(1);
BENCHMARK(BM_InputGrad)->ArgName("omp")->Arg(0)->Arg(1);
BENCHMARK(BM_CosineMatrix)->ArgName("omp")->Arg(0)->Arg(1);
BENCHMARK(BM_TripletBatchGradient)->ArgName("omp")->Arg(0)->Arg(1);

BENCHMARK_MAIN();
