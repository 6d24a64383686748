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

#include "hammerlab/fault_attack.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <mutex>
#include <limits>
#include <thread>

#include "hammerlab/attacks.hpp"
#include "hammerlab/error.hpp"

namespace hammerlab {

std::string_view to_string(Attacker a) {
  return a == Attacker::kCpu ? "cpu" : "fpga";
}

Attacker parse_attacker(std::string_view s) {
  if (s == "cpu") return Attacker::kCpu;
  if (s == "fpga") return Attacker::kFpga;
  fail(ErrorKind::kConfig, "unknown attacker '" + std::string(s) + "'");
}

void FaultAttackConfig::validate(const DramGeometry& geom) const {
  if (!(eviction_interval_ms > 0)) fail(ErrorKind::kConfig, "eviction interval must be > 0");
  if (!(signature_period_ms > 0)) fail(ErrorKind::kConfig, "signature period must be > 0");
  if (cpu_rate_jitter < 0 || fpga_rate_jitter < 0) {
    fail(ErrorKind::kConfig, "rate jitter must be >= 0");
  }
  if (max_signatures == 0) fail(ErrorKind::kConfig, "max_signatures must be > 0");
  if (offset_bits == 0 || offset_bits % 512 != 0) {
    fail(ErrorKind::kConfig, "offset_bits must be a positive multiple of 512");
  }
  if (std::uint64_t{offsets} * offset_bits != std::uint64_t{geom.row_bytes} * 8) {
    fail(ErrorKind::kConfig, "offsets x offset_bits must cover one row");
  }
  for (const auto& r : target_rows) {
    if (r.bank >= geom.banks || r.row == 0 || r.row + 1 >= geom.rows_per_bank) {
      fail(ErrorKind::kConfig, "target row needs two in-range neighbours");
    }
  }
}

VictimKey make_victim_key(unsigned bits, SeededRng& rng) {
  VictimKey v;
  v.key = keygen(bits, rng);
  v.message = random_below(v.key.N, rng);
  v.reference = sign_crt(v.message, v.key).value;
  return v;
}

// ---------------------------------------------------------------------------

FaultAttackRunner::FaultAttackRunner(System& sys, FaultAttackConfig cfg)
    : sys_(sys), cfg_(std::move(cfg)) {
  const DramGeometry& g = sys_.dram.geometry();
  cfg_.validate(g);
  // Measure the attacker on a spare aggressor pair.
  const std::uint32_t mid = g.rows_per_bank / 2;
  const std::vector<PhysAddr> pair{sys_.dram.address_of({0, mid - 1, 0}),
                                   sys_.dram.address_of({0, mid + 1, 0})};
  constexpr std::uint64_t kProbe = 1 << 20;
  if (cfg_.attacker == Attacker::kFpga) {
    const StreamResult s = sys_.fabric.dma_read_stream(
        pair, kProbe, CachingHint::kRdLineI, ChannelPolicy::kAuto,
        static_cast<double>(sys_.fabric.hw_timer_read()));
    const double cycles = s.last_issue_cycle - s.first_issue_cycle;
    rate_ = static_cast<double>(s.requests - 1) *
            static_cast<double>(sys_.fabric.fpga_domain().frequency_hz) / cycles;
  } else {
    const CpuHammerResult r =
        cpu_hammer_stream(sys_, pair, kProbe, false, sys_.sim.now());
    rate_ = static_cast<double>(r.requests) / r.seconds;
  }
  origin_ps_ = ms_to_ps(1000);
  const Picoseconds run_ps = static_cast<Picoseconds>(cfg_.max_signatures) *
                             ms_to_ps(cfg_.signature_period_ms);
  slot_ps_ = (run_ps / kPsPerMs + 200) * kPsPerMs;
}

DramLocation FaultAttackRunner::pick_victim(SeededRng& rng) {
  if (!cfg_.target_rows.empty()) {
    const auto i = rng.uniform_int(0, static_cast<std::int64_t>(cfg_.target_rows.size()) - 1);
    return cfg_.target_rows[static_cast<std::size_t>(i)];
  }
  const DramGeometry& g = sys_.dram.geometry();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const auto bank = static_cast<std::uint32_t>(rng.uniform_int(0, g.banks - 1));
    const auto row = static_cast<std::uint32_t>(rng.uniform_int(2, g.rows_per_bank - 3));
    if (sys_.dram.is_vulnerable(bank, row)) return {bank, row, 0};
  }
  fail(ErrorKind::kConfig, "no vulnerable victim row found");
}

FaultAttackRecord FaultAttackRunner::run(const VictimKey& vk, std::uint64_t trial) {
  SeededRng rng(sys_.seed(), hash_combine(hash_name("fault-trial"), trial));
  FaultAttackRecord rec;
  rec.victim = pick_victim(rng);
  rec.offset = static_cast<std::uint32_t>(rng.uniform_int(0, cfg_.offsets - 1));
  const double phase = rng.uniform01();
  const auto gap = static_cast<Picoseconds>(rng.uniform_int(0, 64 * static_cast<std::int64_t>(kPsPerMs)));

  const std::uint32_t bytes = cfg_.offset_bits / 8;
  const std::uint32_t line = sys_.cache.config().llc.line_bytes;
  const PhysAddr addr =
      sys_.dram.address_of({rec.victim.bank, rec.victim.row, rec.offset * bytes});
  const Picoseconds t0 = origin_ps_ + trial * slot_ps_ + gap;
  const Picoseconds tsig = ms_to_ps(cfg_.signature_period_ms);
  const Picoseconds interval = ms_to_ps(cfg_.eviction_interval_ms);
  const auto phi = static_cast<Picoseconds>(phase * static_cast<double>(interval));
  const std::vector<DramLocation> aggressors{
      {rec.victim.bank, rec.victim.row - 1, 0},
      {rec.victim.bank, rec.victim.row + 1, 0}};

  DramResidentExponent exponent(sys_.dram, addr, bytes);
  exponent.store(vk.key.d_q, t0);
  const std::vector<std::uint8_t> original = to_bytes(vk.key.d_q, bytes);
  for (PhysAddr a = addr; a < addr + bytes; a += line) sys_.cache.cpu_flush(a, t0);

  // Signatures between two flushes hit in the cache and leave DRAM alone,
  // so only the first signature after each flush is simulated.
  std::uint64_t k = 0;
  while (true) {
    const Picoseconds tk = t0 + k * tsig;
    for (PhysAddr a = addr; a < addr + bytes; a += line) {
      sys_.cache.cpu_access(a, MemOp::kRead, false, tk);
    }
    if (sys_.dram.read_bits(addr, bytes, tk) != original) {
      std::optional<BigInt> r;
      if (cfg_.blinding) r = random_below(vk.key.N - 2, rng) + 2;
      FaultSpec fault;
      fault.branch = Branch::kQ;
      fault.mode = FaultMode::kDramResident;
      fault.exponent = &exponent;
      fault.when = tk;
      const Signature s = sign_crt(vk.message, vk.key, r, &fault);
      if (s.value != vk.reference) {
        if (cfg_.verify_countermeasure) {
          rec.fault_withheld = true;
          return rec;
        }
        rec.signatures_to_fault = static_cast<std::uint32_t>(k + 1);
        try {
          const auto [p, q] = bellcore_recover_pair(vk.reference, s.value, vk.key.N);
          rec.recovered = p * q == vk.key.N;
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kRecoveryFailed) throw;
        }
        return rec;
      }
    }
    // Next flush strictly after this read, then the signature that follows it.
    const Picoseconds rel = tk - t0;
    const std::uint64_t j = rel < phi ? 0 : (rel - phi) / interval + 1;
    const Picoseconds flush = t0 + phi + j * interval;
    const std::uint64_t next = (flush - t0 + tsig - 1) / tsig;
    if (next >= cfg_.max_signatures) return rec;
    for (PhysAddr a = addr; a < addr + bytes; a += line) sys_.cache.cpu_flush(a, flush);
    const Picoseconds tn = t0 + next * tsig;
    const double rate = rate_ * std::exp(cfg_.rate_jitter() * rng.normal());
    const auto count = static_cast<std::uint64_t>(
        std::llround(rate * ps_to_seconds(tn - tk)));
    sys_.dram.hammer_batch(aggressors, count, tk, tn);
    k = next;
  }
}

FaultAttackRecord fault_attack_run(const FaultAttackConfig& cfg,
                                   const VictimKey& key,
                                   const PlatformConfig& platform,
                                   std::uint64_t seed) {
  System sys(platform, seed);
  FaultAttackRunner runner(sys, cfg);
  return runner.run(key, 0);
}

// ---------------------------------------------------------------------------

std::vector<FaultSweepCell> fault_sweep(const FaultSweepConfig& cfg,
                                        const PlatformConfig& platform,
                                        std::uint64_t seed) {
  if (cfg.trials == 0 || cfg.key_pool == 0) {
    fail(ErrorKind::kConfig, "fault sweep needs trials and keys");
  }
  SeededRng key_rng(seed, hash_name("fault-keys"));
  std::vector<VictimKey> keys;
  for (std::uint32_t i = 0; i < cfg.key_pool; ++i) {
    keys.push_back(make_victim_key(cfg.key_bits, key_rng));
  }

  std::vector<FaultSweepCell> cells;
  for (Attacker a : cfg.attackers) {
    for (double iv : cfg.intervals_ms) {
      FaultSweepCell c;
      c.attacker = a;
      c.interval_ms = iv;
      cells.push_back(c);
    }
  }
  auto run_cell = [&](FaultSweepCell& c) {
    FaultAttackConfig fc = cfg.base;
    fc.attacker = c.attacker;
    fc.eviction_interval_ms = c.interval_ms;
    System sys(platform, seed);
    FaultAttackRunner runner(sys, fc);
    c.hammer_rate = runner.hammer_rate();
    double sum = 0;
    for (std::uint32_t t = 0; t < cfg.trials; ++t) {
      const FaultAttackRecord r = runner.run(keys[t % keys.size()], t);
      if (r.signatures_to_fault || r.fault_withheld) ++c.faults;
      if (r.recovered) {
        ++c.successes;
        sum += *r.signatures_to_fault;
      }
    }
    c.trials = cfg.trials;
    c.success_rate = static_cast<double>(c.successes) / cfg.trials;
    c.mean_signatures = c.successes == 0 ? std::numeric_limits<double>::quiet_NaN()
                                         : sum / c.successes;
  };

  // Cells are independent machines; results land in fixed slots.
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), cells.size()));
  std::vector<std::future<void>> jobs;
  std::size_t next = 0;
  std::mutex m;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&] {
      while (true) {
        std::size_t i;
        {
          std::lock_guard lock(m);
          if (next >= cells.size()) return;
          i = next++;
        }
        run_cell(cells[i]);
      }
    }));
  }
  for (auto& j : jobs) j.get();
  return cells;
}

}  // namespace hammerlab
