// Copyright 2026 The gpsreg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include "gpsreg/autodiff/ops.hpp"
#include "gpsreg/autodiff/param_set.hpp"
#include "gpsreg/edgereg/edge_reg.hpp"
#include "gpsreg/graph/generators.hpp"
#include "gpsreg/model/gps_model.hpp"
#include "gpsreg/posenc/encoding.hpp"
#include "gpsreg/posenc/jacobi.hpp"

namespace {

using namespace gpsreg;

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t = Tensor::zeros({r, c});
  for (double& v : t.mutable_data()) v = rng.normal();
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

Graph bench_graph(std::size_t n, std::size_t d_in) {
  Graph g = er_graph(n, 4.0 / n, 7);
  Rng rng(3);
  g.x = random_matrix(n, d_in, rng);
  g.y = {0.5};
  return g;
}

// One training step's worth of tape work: forward, L1 regularizer, backward.
void BM_ModelForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ModelConfig cfg;
  cfg.d_in = 5;
  cfg.reg = RegConfig{RegVariant::kL1, 0.1, true};
  GpsModel model(cfg, 0);
  const Graph g = bench_graph(n, 5);
  const Tensor a = adjacency_dense(g);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Tape tape;
    const BoundParams b = model.params().bind(tape);
    const ForwardOutput out = model.forward(g, b, {true, seed++});
    const Tensor main = mse_mean(out.prediction, Tensor({1, 1}, g.y));
    const Tensor reg = reg_loss(build_score_cache(out, b, true), a, cfg.reg);
    benchmark::DoNotOptimize(backward(total_loss(main, reg, cfg.reg.lambda), model.params()));
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ModelInfer(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ModelConfig cfg;
  cfg.d_in = 5;
  const GpsModel model(cfg, 0);
  const Graph g = bench_graph(n, 5);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(model.infer(g, model.params().bind(tape)));
  }
}
BENCHMARK(BM_ModelInfer)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Jacobi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Graph g = er_graph(n, 0.3, 5);
  const Tensor l = normalized_laplacian(g);
  for (auto _ : state) benchmark::DoNotOptimize(jacobi_eigen(l));
}
BENCHMARK(BM_Jacobi)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Rwse(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Graph g = er_graph(n, 0.2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rwse(g, 16));
}
BENCHMARK(BM_Rwse)->Arg(32)->Arg(128);

void BM_Knn(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(9);
  const Tensor coords = random_matrix(n, 3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(knn_graph(coords, 8));
}
BENCHMARK(BM_Knn)->Arg(128)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
