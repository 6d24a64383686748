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


#include <doctest.h>

#include <vector>

#include "hammerlab/platform.hpp"

using namespace hammerlab;

namespace {

struct Targets {
  PhysAddr a;
  PhysAddr b;
};

// Two lines in rows r-1 and r+1 of one bank.
Targets same_bank_pair(System& sys, std::uint32_t bank, std::uint32_t row) {
  return {sys.dram.address_of({bank, row - 1, 0}), sys.dram.address_of({bank, row + 1, 0})};
}

}  // namespace

TEST_SUITE("afu") {

TEST_CASE("zero accesses finish immediately") {
  System sys(platform_preset("pac"), 1);
  const auto t = same_bank_pair(sys, 2, 100);
  const auto st = hammer_run(sys.sim, sys.fabric, {t.a, t.b, 0, ChannelPolicy::kAuto});
  CHECK(st.done);
  CHECK(st.remaining == 0);
  CHECK(st.total_send_cycles == 0);
  CHECK(sys.dram.total_activations() == 0);
}

TEST_CASE("invalid targets are rejected through the status register") {
  System sys(platform_preset("pac"), 1);
  try {
    hammer_run(sys.sim, sys.fabric, {0, 0, 10, ChannelPolicy::kAuto});
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  CHECK(sys.fabric.mmio_read(hammer_reg::kErrorCode, 32) == 1);
  CHECK_THROWS_AS(hammer_run(sys.sim, sys.fabric, {0x1008, 0, 10, ChannelPolicy::kAuto}), Error);
  CHECK(sys.fabric.mmio_read(hammer_reg::kErrorCode, 32) == 2);
}

TEST_CASE("register map round trips 64-bit fields") {
  System sys(platform_preset("pac"), 1);
  sys.fabric.mmio_write(hammer_reg::kTargetA, 64, 0x1234'5678'9ABC'DEC0ULL);
  CHECK(sys.fabric.mmio_read(hammer_reg::kTargetA, 64) == 0x1234'5678'9ABC'DEC0ULL);
  CHECK(sys.fabric.mmio_read(hammer_reg::kTargetA, 32) == 0x9ABC'DEC0ULL);
  CHECK(sys.fabric.mmio_read(hammer_reg::kTargetA + 1, 32) == 0x1234'5678ULL);
  // Status and telemetry are read-only.
  sys.fabric.mmio_write(hammer_reg::kRemaining, 64, 99);
  CHECK(sys.fabric.mmio_read(hammer_reg::kRemaining, 64) == 0);
}

TEST_CASE("remaining count polls are non-increasing and end at zero") {
  System sys(platform_preset("pac"), 3);
  sys.afu.set_chunk(50'000);
  const auto t = same_bank_pair(sys, 1, 300);
  const std::uint64_t total = 1'000'000;
  sys.fabric.mmio_write(hammer_reg::kTargetA, 64, t.a);
  sys.fabric.mmio_write(hammer_reg::kTargetB, 64, t.b);
  sys.fabric.mmio_write(hammer_reg::kTotal, 64, total);
  sys.fabric.mmio_write(hammer_reg::kControl, 32, 1);
  std::vector<std::uint64_t> polls;
  for (int i = 0; i < 10'000; ++i) {
    const auto st = hammer_status(sys.fabric);
    polls.push_back(st.remaining);
    if (st.done) break;
    sys.sim.run_until(sys.sim.now() + 100 * kPsPerMs / 1000);
  }
  REQUIRE(polls.size() > 3);
  CHECK(polls.front() <= total);
  CHECK(polls.back() == 0);
  for (std::size_t i = 1; i < polls.size(); ++i) CHECK(polls[i] <= polls[i - 1]);
}

TEST_CASE("send time covers first to last issue") {
  System sys(platform_preset("pac"), 5);
  sys.afu.set_chunk(100'000);
  const auto t = same_bank_pair(sys, 3, 500);
  const std::uint64_t n = 1'000'000;
  const auto st = hammer_run(sys.sim, sys.fabric, {t.a, t.b, n, ChannelPolicy::kAuto});
  CHECK(st.done);
  const double per = static_cast<double>(st.total_send_cycles) / static_cast<double>(n - 1);
  CHECK(per >= 9.5);
  CHECK(per <= 10.5);
  CHECK(sys.dram.total_activations() >= n - 2);
}

TEST_CASE("hammer reads leave the LLC untouched") {
  System sys(platform_preset("pac"), 5);
  const auto t = same_bank_pair(sys, 3, 500);
  sys.cache.cpu_access(t.b, MemOp::kRead, false, 0);
  const auto digest = sys.cache.llc_digest();
  hammer_run(sys.sim, sys.fabric, {t.a, t.b, 100'000, ChannelPolicy::kAuto});
  CHECK(sys.cache.llc_digest() == digest);
  CHECK_FALSE(sys.cache.in_llc(t.a));
}

TEST_CASE("single-sided hammering disturbs only one side of the victim") {
  System sys(platform_preset("pac"), 7);
  const auto t = same_bank_pair(sys, 4, 800);
  const auto st = hammer_run(sys.sim, sys.fabric, {t.a, 0, 200'000, ChannelPolicy::kAuto});
  CHECK(st.done);
  // The only aggressor sits in row 799, below the victim.
  const RowState* victim = sys.dram.row_state(4, 800);
  REQUIRE(victim != nullptr);
  CHECK(victim->lower > 0);
  CHECK(victim->upper == 0);
}

TEST_CASE("covert sender writes three times per one bit") {
  System sys(platform_preset("integrated"), 9);
  const PhysAddr line = sys.fabric.alloc_buffer(4096).base_phys;
  CovertSendConfig cfg;
  cfg.target_line = line;
  cfg.bit_period_cycles = 4211;

  cfg.payload.assign(64, false);
  covert_send(sys.sim, sys.fabric, cfg);
  sys.sim.run();
  CHECK(sys.afu.writes_issued() == 0);
  CHECK((sys.fabric.mmio_read(covert_reg::kStatus, 32) & kStatusDone) != 0);

  cfg.payload = {true};
  const auto before = sys.afu.writes_issued();
  const auto base = covert_send(sys.sim, sys.fabric, cfg);
  const Picoseconds start = cycles_to_ps(sys.fabric.fpga_domain(), base);
  const Picoseconds end = cycles_to_ps(sys.fabric.fpga_domain(), base + cfg.bit_period_cycles);
  sys.sim.run_until(end - 1);
  CHECK(sys.afu.writes_issued() - before == 3);
  CHECK(sys.sim.now() >= start);
  CHECK(sys.cache.in_llc(line));

  SeededRng rng(1, 1);
  std::vector<bool> bits(500);
  std::uint64_t ones = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bits[i] = rng.bernoulli(0.5);
    ones += bits[i];
  }
  cfg.payload = bits;
  sys.sim.run();
  const auto mark = sys.afu.writes_issued();
  covert_send(sys.sim, sys.fabric, cfg);
  sys.sim.run();
  CHECK(sys.afu.writes_issued() - mark == 3 * ones);
}

TEST_CASE("covert sender rejects impossible periods") {
  System sys(platform_preset("integrated"), 9);
  CovertSendConfig cfg;
  cfg.target_line = 0x4000;
  cfg.payload = {true, false};
  cfg.bit_period_cycles = 0;
  CHECK_THROWS_AS(covert_send(sys.sim, sys.fabric, cfg), Error);
  cfg.bit_period_cycles = 29;  // below 3 writes x 10 cycles
  CHECK_THROWS_AS(covert_send(sys.sim, sys.fabric, cfg), Error);
  cfg.bit_period_cycles = 30;
  CHECK_NOTHROW(covert_send(sys.sim, sys.fabric, cfg));
}

TEST_CASE("sender bound at 400 MHz is 40 Mbit/s") {
  CHECK(covert_sender_bound_bps(400'000'000) == 40'000'000.0);
  CHECK(covert_sender_bound_bps(200'000'000) == 20'000'000.0);
  CHECK_THROWS_AS(covert_sender_bound_bps(400'000'000, 0), Error);
}

}  // TEST_SUITE
