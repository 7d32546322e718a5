// Copyright 2026 The qtomo Authors.
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

#include "qtomo/harness.hpp"
#include "qtomo/infogeo.hpp"
#include "qtomo/param.hpp"

namespace {

qtomo::ExperimentConfig small_config(qtomo::Strategy s) {
  const auto preset = qtomo::make_preset("HES");
  qtomo::ExperimentConfig cfg;
  cfg.state_name = preset.name;
  cfg.rho = preset.rho;
  cfg.k_true = preset.k_true;
  cfg.t_grid = {2.0};
  cfg.r = 16;
  cfg.master_seed = 7;
  cfg.strategies = {s};
  return cfg;
}

void BM_ExperimentSerial(benchmark::State& state) {
  const auto cfg = small_config(static_cast<qtomo::Strategy>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qtomo::run_experiment_serial(cfg));
  state.SetItemsProcessed(state.iterations() * cfg.r);
}

void BM_ExperimentParallel(benchmark::State& state) {
  const auto cfg = small_config(static_cast<qtomo::Strategy>(state.range(0)));
  const int threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(qtomo::run_experiment(cfg, threads));
  state.SetItemsProcessed(state.iterations() * cfg.r);
}

void BM_FisherBundle(benchmark::State& state) {
  const auto preset = qtomo::make_preset("VNMS");
  const auto ps = qtomo::default_projectors();
  const auto p = qtomo::project_to_rank(preset.rho, static_cast<int>(state.range(0)), 500.0);
  for (auto _ : state) benchmark::DoNotOptimize(qtomo::fisher_bundle(p, ps, 1.0));
}

}  // namespace

BENCHMARK(BM_ExperimentSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentParallel)
    ->Args({0, 0})
    ->Args({1, 0})
    ->Args({0, 4})
    ->Args({1, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_FisherBundle)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
