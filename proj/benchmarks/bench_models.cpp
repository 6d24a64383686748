// Copyright 2026 The hammerlab Authors
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

#include "hammerlab/attacks.hpp"
#include "hammerlab/fault_attack.hpp"
#include "hammerlab/platform.hpp"
#include "hammerlab/rsa.hpp"

namespace hl = hammerlab;

static void BM_CacheAccess(benchmark::State& state) {
  hl::System sys(hl::platform_preset("pac"), 1);
  hl::Picoseconds t = 0;
  hl::PhysAddr a = 0x4000'0000;
  for (auto _ : state) {
    const auto r = sys.cache.cpu_access(a, hl::MemOp::kRead, false, t);
    benchmark::DoNotOptimize(r.cycles);
    t += 30'000;
    a += 64 * 2053;
    if (a > 0x8000'0000) a = 0x4000'0000;
  }
}
BENCHMARK(BM_CacheAccess);

static void BM_HammerBatchWindow(benchmark::State& state) {
  hl::System sys(hl::platform_preset("pac"), 1);
  const std::vector<hl::DramLocation> aggs{{0, 99, 0}, {0, 101, 0}};
  hl::Picoseconds t = 0;
  const hl::Picoseconds window = 64 * hl::kPsPerMs;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.dram.hammer_batch(aggs, 1'239'000, t, t + window));
    t += window;
  }
}
BENCHMARK(BM_HammerBatchWindow);

static void BM_SignCrt(benchmark::State& state) {
  hl::SeededRng rng(1, 2);
  const hl::RsaKey key = hl::keygen(static_cast<unsigned>(state.range(0)), rng);
  const hl::BigInt m = hl::random_below(key.N, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hl::sign_crt(m, key).value);
  }
}
BENCHMARK(BM_SignCrt)->Arg(512)->Arg(1024)->Arg(2048);

static void BM_FaultTrial(benchmark::State& state) {
  hl::System sys(hl::platform_preset("pac"), 1);
  hl::SeededRng rng(1, 3);
  const hl::VictimKey key = hl::make_victim_key(1024, rng);
  hl::FaultAttackConfig cfg;
  cfg.eviction_interval_ms = 96;
  hl::FaultAttackRunner runner(sys, cfg);
  std::uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(runner.run(key, trial++).recovered);
  }
}
BENCHMARK(BM_FaultTrial);

BENCHMARK_MAIN();
