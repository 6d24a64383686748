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

#include "hammerlab/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

namespace hammerlab {

namespace {

double dram_min_cycles(const System& sys) {
  const auto& t = sys.dram.config().timing;
  return std::min({t.row_hit_cycles.min(), t.row_miss_cycles.min(),
                   t.row_conflict_cycles.min(),
                   sys.cache.config().latency.dram.min()});
}

double dram_max_cycles(const System& sys) {
  const auto& t = sys.dram.config().timing;
  return std::max({t.row_hit_cycles.max(), t.row_miss_cycles.max(),
                   t.row_conflict_cycles.max(),
                   sys.cache.config().latency.dram.max()});
}

double cpu_read(System& sys, PhysAddr a, bool uncachable, Picoseconds& cursor) {
  const double c = sys.cache.cpu_access(a, MemOp::kRead, uncachable, cursor).cycles;
  cursor += sys.cpu_cycles_to_ps(c);
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------

double time_pair(System& sys, PhysAddr a, PhysAddr b, Picoseconds& cursor) {
  // Let every open row time out first.
  cursor += sys.dram.config().timing.row_close_ps + 1000;
  // Both loads are in flight together; the second issues one cycle later.
  const Picoseconds start = cursor;
  const double ca = sys.cache.cpu_access(a, MemOp::kRead, true, start).cycles;
  const Picoseconds tb = start + sys.cpu_cycles_to_ps(1);
  const double cb = sys.cache.cpu_access(b, MemOp::kRead, true, tb).cycles;
  cursor = std::max(start + sys.cpu_cycles_to_ps(ca), tb + sys.cpu_cycles_to_ps(cb));
  return cb;
}

std::vector<RowGroup> group_by_bank(System& sys, const SharedBuffer& buffer,
                                    GroupingOptions opts) {
  const std::uint64_t rb = sys.dram.geometry().row_bytes;
  if (!buffer.contiguous) {
    fail(ErrorKind::kContract, "bank grouping needs a contiguous buffer");
  }
  std::vector<PhysAddr> chunks;
  for (PhysAddr a = (buffer.base_phys + rb - 1) / rb * rb;
       a + rb <= buffer.base_phys + buffer.size; a += rb) {
    chunks.push_back(a);
  }
  if (chunks.size() < 4) {
    fail(ErrorKind::kInsufficientSample, "buffer spans fewer than four rows");
  }
  const unsigned reps = std::max(1U, opts.repeats);
  Picoseconds cursor = sys.sim.now();
  auto measure = [&](PhysAddr a, PhysAddr b) {
    std::vector<double> v;
    for (unsigned r = 0; r < reps; ++r) v.push_back(time_pair(sys, a, b, cursor));
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };

  // Threshold: widest gap among latencies seen from a few pivots.
  std::vector<double> sample;
  const std::size_t pivots = std::min<std::size_t>(4, chunks.size());
  for (std::size_t p = 0; p < pivots; ++p) {
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      if (i != p) sample.push_back(measure(chunks[p], chunks[i]));
    }
  }
  std::sort(sample.begin(), sample.end());
  double gap = 0;
  double threshold = 0;
  for (std::size_t i = 1; i < sample.size(); ++i) {
    if (sample[i] - sample[i - 1] > gap) {
      gap = sample[i] - sample[i - 1];
      threshold = 0.5 * (sample[i] + sample[i - 1]);
    }
  }
  if (gap < 4.0) {
    fail(ErrorKind::kInsufficientSample, "no row-conflict latency cluster found");
  }

  std::vector<RowGroup> groups;
  std::vector<PhysAddr> rest = chunks;
  while (!rest.empty()) {
    RowGroup g;
    g.id = static_cast<std::uint32_t>(groups.size());
    const PhysAddr pivot = rest.front();
    g.addresses.push_back(pivot);
    std::vector<PhysAddr> next;
    for (std::size_t i = 1; i < rest.size(); ++i) {
      if (measure(pivot, rest[i]) > threshold) {
        g.addresses.push_back(rest[i]);
      } else {
        next.push_back(rest[i]);
      }
    }
    if (g.addresses.size() < 2) {
      fail(ErrorKind::kInsufficientSample,
           fmt::format("no same-bank partner for row at {:#x}", pivot));
    }
    std::sort(g.addresses.begin(), g.addresses.end());
    groups.push_back(std::move(g));
    rest = std::move(next);
  }
  sys.sim.run_until(cursor);
  return groups;
}

// ---------------------------------------------------------------------------

std::vector<PhysAddr> reduce_eviction_set(std::vector<PhysAddr> candidates,
                                          std::size_t ways,
                                          const EvictionTest& evicts) {
  if (ways == 0 || candidates.size() < ways || !evicts(candidates)) {
    fail(ErrorKind::kConstructionFailed,
         fmt::format("{} candidates do not evict the target", candidates.size()));
  }
  while (candidates.size() > ways) {
    const std::size_t n = candidates.size();
    const std::size_t parts = std::min(ways + 1, n);
    bool reduced = false;
    for (std::size_t g = 0; g < parts && !reduced; ++g) {
      const std::size_t lo = g * n / parts;
      const std::size_t hi = (g + 1) * n / parts;
      if (lo == hi) continue;
      std::vector<PhysAddr> kept;
      kept.reserve(n - (hi - lo));
      kept.insert(kept.end(), candidates.begin(), candidates.begin() + lo);
      kept.insert(kept.end(), candidates.begin() + hi, candidates.end());
      if (kept.size() >= ways && evicts(kept)) {
        candidates = std::move(kept);
        reduced = true;
      }
    }
    if (!reduced) {
      fail(ErrorKind::kConstructionFailed,
           fmt::format("reduction stalled at {} addresses", n));
    }
  }
  return candidates;
}

std::vector<PhysAddr> congruent_candidates(const SharedBuffer& buffer,
                                           PhysAddr target,
                                           const CacheGeometry& geom,
                                           std::size_t limit) {
  const std::uint64_t stride = std::uint64_t{geom.sets} * geom.line_bytes;
  const std::uint64_t offset = (target / geom.line_bytes * geom.line_bytes) % stride;
  std::vector<PhysAddr> out;
  PhysAddr a = buffer.base_phys / stride * stride + offset;
  if (a < buffer.base_phys) a += stride;
  for (; a + geom.line_bytes <= buffer.base_phys + buffer.size; a += stride) {
    if (a == target) continue;
    out.push_back(a);
    if (limit != 0 && out.size() >= limit) break;
  }
  return out;
}

bool llc_test1(System& sys, PhysAddr target, std::span<const PhysAddr> set,
               Picoseconds& cursor) {
  const double thr = latency_thresholds(sys).cached;
  cpu_read(sys, target, false, cursor);
  for (PhysAddr a : set) cpu_read(sys, a, false, cursor);
  return cpu_read(sys, target, false, cursor) > thr;
}

bool fpga_test1(System& sys, PhysAddr target, std::span<const PhysAddr> set) {
  if (!sys.cache.config().fpga.present || !sys.fabric.channel_available(Channel::kUpi)) {
    fail(ErrorKind::kConstructionFailed, "platform has no coherent FPGA cache");
  }
  const auto& upi = sys.fabric.config().upi;
  const double thr = 0.5 * (upi.fpga_cache.max() + upi.llc.min());
  std::uint64_t cycle = sys.fabric.hw_timer_read();
  auto read = [&](PhysAddr a) {
    DmaRequest req;
    req.addr = a;
    req.hint = CachingHint::kRdLineS;
    req.channel = Channel::kUpi;
    req.issue_cycle = cycle;
    const DmaCompletion c = sys.fabric.dma_submit(req);
    cycle = c.completion_cycle;
    return static_cast<double>(c.completion_cycle - c.issue_cycle);
  };
  read(target);
  for (PhysAddr a : set) read(a);
  return read(target) > thr;
}

EvictionSet build_eviction_set(System& sys, PhysAddr target,
                               std::span<const PhysAddr> candidates) {
  std::vector<PhysAddr> pool;
  for (PhysAddr a : candidates) {
    if (a / 64 != target / 64) pool.push_back(a / 64 * 64);
  }
  Picoseconds cursor = sys.sim.now();
  EvictionSet out;
  out.addresses = reduce_eviction_set(
      std::move(pool), sys.cache.config().llc.ways,
      [&](std::span<const PhysAddr> s) { return llc_test1(sys, target, s, cursor); });
  out.target_set = sys.cache.set_of(target);
  out.target_slice = sys.cache.slice_of(target);
  sys.sim.run_until(cursor);
  return out;
}

EvictionSet build_fpga_eviction_set(System& sys, PhysAddr target,
                                    std::span<const PhysAddr> candidates) {
  std::vector<PhysAddr> pool;
  for (PhysAddr a : candidates) {
    if (a / 64 != target / 64) pool.push_back(a / 64 * 64);
  }
  EvictionSet out;
  out.addresses = reduce_eviction_set(
      std::move(pool), 1,
      [&](std::span<const PhysAddr> s) { return fpga_test1(sys, target, s); });
  out.target_set = sys.cache.fpga_index_of(target);
  out.target_slice = 0;
  return out;
}

// ---------------------------------------------------------------------------

ProbeResult probe_set(System& sys, const EvictionSet& set, double threshold,
                      Picoseconds& cursor) {
  ProbeResult r;
  r.cycles = sys.cache.sample(sys.config().cpu.probe_overhead);
  cursor += sys.cpu_cycles_to_ps(r.cycles);
  for (PhysAddr a : set.addresses) r.cycles += cpu_read(sys, a, false, cursor);
  r.hit = r.cycles > threshold;
  return r;
}

double calibrate_probe_threshold(System& sys, const EvictionSet& set,
                                 PhysAddr target, unsigned samples,
                                 Picoseconds& cursor) {
  if (samples == 0) fail(ErrorKind::kConfig, "calibration needs samples");
  probe_set(sys, set, 0, cursor);
  double all_hit = 0;
  for (unsigned i = 0; i < samples; ++i) {
    all_hit = std::max(all_hit, probe_set(sys, set, 0, cursor).cycles);
  }
  // Exactly one member displaced; its reload refills the freed way, so
  // the miss does not cascade through the rest of the set.
  double one_miss = std::numeric_limits<double>::infinity();
  for (unsigned i = 0; i < samples; ++i) {
    const PhysAddr victim = set.addresses[i % set.addresses.size()];
    cursor += sys.cpu_cycles_to_ps(sys.cache.cpu_flush(victim, cursor).cycles);
    one_miss = std::min(one_miss, probe_set(sys, set, 0, cursor).cycles);
  }
  sys.cache.cpu_flush(target, cursor);
  probe_set(sys, set, 0, cursor);
  if (!(one_miss > all_hit)) {
    fail(ErrorKind::kInsufficientSample,
         "probe latencies with and without an eviction overlap");
  }
  return 0.5 * (all_hit + one_miss);
}

LatencyThresholds latency_thresholds(const System& sys) {
  const auto& lat = sys.cache.config().latency;
  LatencyThresholds t;
  t.cached = 0.5 * (lat.llc.max() + dram_min_cycles(sys));
  t.fpga_cache = 0.5 * (dram_max_cycles(sys) + lat.fpga_cache.min());
  t.flush_fpga =
      0.5 * (lat.flush_base.max() + lat.flush_base.min() + lat.flush_fpga_penalty.min());
  return t;
}

FlushProbeResult flush_probe(System& sys, PhysAddr addr, Picoseconds& cursor) {
  const LatencyThresholds thr = latency_thresholds(sys);
  FlushProbeResult r;
  r.reload_cycles = cpu_read(sys, addr, false, cursor);
  const FlushResult f = sys.cache.cpu_flush(addr, cursor);
  r.flush_cycles = f.cycles;
  cursor += sys.cpu_cycles_to_ps(f.cycles);
  r.was_fpga_cached = r.flush_cycles > thr.flush_fpga || r.reload_cycles > thr.fpga_cache;
  r.was_cached = r.was_fpga_cached || r.reload_cycles < thr.cached;
  return r;
}

// ---------------------------------------------------------------------------

void ChannelDecodeConfig::validate() const {
  if (redundancy == 0 || probes_per_bit != 2 * redundancy) {
    fail(ErrorKind::kConfig, "probes_per_bit must equal 2 x redundancy");
  }
  if (min_hits == 0 || min_hits > probes_per_bit) {
    fail(ErrorKind::kConfig, "min_hits must lie in [1, probes_per_bit]");
  }
}

CovertReceiveResult covert_receive(System& sys, const EvictionSet& set,
                                   PhysAddr target,
                                   const ChannelDecodeConfig& cfg,
                                   Picoseconds start_ps,
                                   Picoseconds bit_period_ps,
                                   std::size_t nbits) {
  cfg.validate();
  if (bit_period_ps == 0) fail(ErrorKind::kConfig, "bit period must be > 0");
  CovertReceiveResult out;
  Picoseconds cursor = sys.sim.now();
  out.threshold = cfg.probe_threshold_cycles;
  if (out.threshold <= 0) {
    out.threshold = calibrate_probe_threshold(sys, set, target, 32, cursor);
  }
  probe_set(sys, set, out.threshold, cursor);  // prime
  if (cursor > start_ps) {
    fail(ErrorKind::kContract, "receiver set-up overran the first bit period");
  }
  const unsigned ppb = cfg.probes_per_bit;
  double total_cycles = 0;
  std::size_t probes = 0;
  for (std::size_t j = 0; j < nbits; ++j) {
    unsigned hits = 0;
    for (unsigned i = 0; i < ppb; ++i) {
      Picoseconds t = start_ps + static_cast<Picoseconds>(
          (static_cast<u128>(j * ppb + i) * bit_period_ps) / ppb);
      if (t < cursor) {
        // The previous probe ran past this slot.
        ++out.integrity_warnings;
        t = cursor;
      }
      sys.sim.run_until(t);
      cursor = t;
      const ProbeResult r = probe_set(sys, set, out.threshold, cursor);
      total_cycles += r.cycles;
      ++probes;
      if (r.hit) ++hits;
    }
    out.hits_per_bit.push_back(hits);
    out.bits.push_back(hits >= cfg.min_hits);
  }
  out.mean_probe_cycles = probes == 0 ? 0 : total_cycles / static_cast<double>(probes);
  sys.sim.run_until(cursor);
  return out;
}

double covert_receiver_bound_bps(double cpu_hz, double probe_cycles) {
  if (!(probe_cycles > 0)) fail(ErrorKind::kConfig, "probe cycles must be > 0");
  return cpu_hz / probe_cycles;
}

// ---------------------------------------------------------------------------

CpuHammerResult cpu_hammer_stream(System& sys, std::span<const PhysAddr> targets,
                                  std::uint64_t count, bool uncachable,
                                  Picoseconds start_ps) {
  CpuHammerResult res;
  if (count == 0) return res;
  if (targets.empty()) fail(ErrorKind::kContract, "cpu hammer without targets");
  const auto& timing = sys.dram.config().timing;
  const auto& lat = sys.cache.config().latency;
  const auto& cpu = sys.config().cpu;

  std::vector<DramLocation> locs;
  std::map<std::uint32_t, std::vector<DramLocation>> banks;
  for (PhysAddr a : targets) {
    locs.push_back(sys.dram.locate(a));
    banks[locs.back().bank].push_back(locs.back());
  }
  const double nt = static_cast<double>(targets.size());
  // Row-buffer class of each read: depends on how long a bank sits idle
  // between two of its accesses relative to the row-close timeout.
  auto class_of = [&](std::uint32_t bank, double iter_cycles) {
    const auto& rows = banks[bank];
    const double gap_cycles = iter_cycles * nt / static_cast<double>(rows.size());
    const bool closes = timing.row_close_ps != 0 &&
                        sys.cpu_cycles_to_ps(gap_cycles) > timing.row_close_ps;
    if (closes) return &timing.row_miss_cycles;
    bool distinct = false;
    for (const auto& l : rows) distinct = distinct || l.row != rows.front().row;
    return distinct ? &timing.row_conflict_cycles : &timing.row_hit_cycles;
  };
  const double extra_mean = (uncachable ? 0.0 : lat.flush_base.mean()) + cpu.loop_overhead.mean();
  const double extra_var = (uncachable ? 0.0 : lat.flush_base.variance()) + cpu.loop_overhead.variance();
  double iter = timing.row_miss_cycles.mean() + extra_mean;
  double read_mean = 0;
  double read_var = 0;
  std::vector<const Distribution*> cls;
  for (int pass = 0; pass < 2; ++pass) {
    read_mean = 0;
    read_var = 0;
    cls.clear();
    for (const auto& l : locs) {
      cls.push_back(class_of(l.bank, iter));
      read_mean += cls.back()->mean() / nt;
      read_var += cls.back()->variance() / nt;
    }
    iter = read_mean + extra_mean;
  }
  SeededRng rng(sys.seed(), hash_combine(hash_name("cpu-hammer"), start_ps));
  double total = 0;
  if (count <= 256) {
    for (std::uint64_t k = 0; k < count; ++k) {
      total += rng.sample(*cls[k % cls.size()]) + rng.sample(cpu.loop_overhead);
      if (!uncachable) total += rng.sample(lat.flush_base);
    }
  } else {
    const double n = static_cast<double>(count);
    total = n * iter + std::sqrt(n * (read_var + extra_var)) * rng.normal();
  }
  res.cycles = total;
  res.seconds = total / static_cast<double>(sys.cpu_clock().frequency_hz);
  res.mean_iteration_cycles = total / static_cast<double>(count);
  res.requests = count;

  const Picoseconds t2 = start_ps + sys.cpu_cycles_to_ps(total);
  for (auto& [bank, rows] : banks) {
    const std::uint64_t n = static_cast<std::uint64_t>(
        std::llround(static_cast<double>(count) * static_cast<double>(rows.size()) / nt));
    sys.dram.hammer_batch(rows, n, start_ps, t2);
  }
  return res;
}

}  // namespace hammerlab
