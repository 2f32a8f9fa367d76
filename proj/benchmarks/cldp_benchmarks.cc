//
// Copyright 2026 The CLDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <cstdint>
#include <vector>

#include "benchmark/benchmark.h"
#include "cldp/accountant.h"
#include "cldp/linalg.h"
#include "cldp/mechanisms.h"
#include "cldp/rng.h"
#include "cldp/wire.h"

namespace cldp {
namespace {

Vec Ramp(int d, double norm_p, double radius) {
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = (i % 3 == 0 ? -1.0 : 1.0) * (1.0 + i % 5);
  const double scale = radius / NormP(x, norm_p);
  for (double& v : x) v *= scale;
  return x;
}

MechanismSpec Spec(double p, int d) {
  MechanismSpec spec;
  spec.ball = BallSpec{p, 1.0, d};
  spec.epsilon0 = 1.0;
  return spec;
}

void BM_Fwht(benchmark::State& state) {
  Vec x = Ramp(static_cast<int>(state.range(0)), 2.0, 1.0);
  for (auto _ : state) {
    FwhtInPlace(x);
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Fwht)->RangeMultiplier(4)->Range(16, 1 << 16);

void BM_R1Encode(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MechanismSpec spec = Spec(1.0, d);
  const Vec x = Ramp(d, 1.0, 0.8);
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(R1Encode(x, spec, rng));
}
BENCHMARK(BM_R1Encode)->RangeMultiplier(8)->Range(8, 1 << 15);

void BM_R2Encode(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const MechanismSpec spec = Spec(2.0, d);
  const Vec x = Ramp(d, 2.0, 0.8);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(R2Encode(x, spec, rng));
}
BENCHMARK(BM_R2Encode)->RangeMultiplier(8)->Range(8, 4096);

void BM_HistogramPack(benchmark::State& state) {
  const auto s = static_cast<std::uint64_t>(state.range(0));
  const std::uint64_t alphabet = 1 << 12;
  std::vector<std::uint64_t> atoms(s);
  for (std::uint64_t i = 0; i < s; ++i) atoms[i] = (i * 2654435761u) % alphabet;
  for (auto _ : state) {
    auto code = HistogramPack(atoms, alphabet);
    benchmark::DoNotOptimize(code);
  }
}
BENCHMARK(BM_HistogramPack)->RangeMultiplier(4)->Range(1, 256);

void BM_HistogramUnpack(benchmark::State& state) {
  const auto s = static_cast<std::uint64_t>(state.range(0));
  const std::uint64_t alphabet = 1 << 12;
  std::vector<std::uint64_t> atoms(s);
  for (std::uint64_t i = 0; i < s; ++i) atoms[i] = (i * 2654435761u) % alphabet;
  const HistogramCode code = HistogramPack(atoms, alphabet).value();
  for (auto _ : state) benchmark::DoNotOptimize(HistogramUnpack(code));
}
BENCHMARK(BM_HistogramUnpack)->RangeMultiplier(4)->Range(1, 256);

void BM_EndToEnd(benchmark::State& state) {
  const SamplingParams params{100000, 2000, 10, 1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        EndToEnd(0.4, 1e-6, 1000, params, ShuffleBound::Erlingsson()));
  }
}
BENCHMARK(BM_EndToEnd);

}  // namespace
}  // namespace cldp

BENCHMARK_MAIN();
