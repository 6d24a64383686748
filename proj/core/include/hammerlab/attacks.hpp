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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hammerlab/platform.hpp"

namespace hammerlab {

// ---------------------------------------------------------------------------
// Bank grouping by row-buffer conflicts.

struct RowGroup {
  std::uint32_t id = 0;
  std::vector<PhysAddr> addresses;  // ascending; one per DRAM row
};

struct GroupingOptions {
  unsigned repeats = 3;
};

// Splits the buffer into row-sized chunks and groups them by timing the
// second of two back-to-back uncached reads.
std::vector<RowGroup> group_by_bank(System& sys, const SharedBuffer& buffer,
                                    GroupingOptions opts = {});

// Latency of reading `b` right after `a` with all rows closed beforehand.
double time_pair(System& sys, PhysAddr a, PhysAddr b, Picoseconds& cursor);

// ---------------------------------------------------------------------------
// Eviction sets.

struct EvictionSet {
  std::vector<PhysAddr> addresses;
  std::uint32_t target_set = 0;
  std::uint32_t target_slice = 0;
};

using EvictionTest = std::function<bool(std::span<const PhysAddr>)>;

// Group-testing reduction: shrinks `candidates` (which must evict) to
// exactly `ways` addresses that still evict. Throws kConstructionFailed.
std::vector<PhysAddr> reduce_eviction_set(std::vector<PhysAddr> candidates,
                                          std::size_t ways,
                                          const EvictionTest& evicts);

// Addresses of `buffer` sharing the set-index bits of `target`.
std::vector<PhysAddr> congruent_candidates(const SharedBuffer& buffer,
                                           PhysAddr target,
                                           const CacheGeometry& geom,
                                           std::size_t limit = 0);

// Test 1: load target, traverse the set, reload target; true if slow.
bool llc_test1(System& sys, PhysAddr target, std::span<const PhysAddr> set,
               Picoseconds& cursor);
// Same over the FPGA cache, timed from the AFU with RdLine_S over UPI.
bool fpga_test1(System& sys, PhysAddr target, std::span<const PhysAddr> set);

EvictionSet build_eviction_set(System& sys, PhysAddr target,
                               std::span<const PhysAddr> candidates);
EvictionSet build_fpga_eviction_set(System& sys, PhysAddr target,
                                    std::span<const PhysAddr> candidates);

// ---------------------------------------------------------------------------
// Probing primitives.

struct ProbeResult {
  double cycles = 0;
  bool hit = false;
};

// Loads every member once; the caller's cursor advances by the probe time.
ProbeResult probe_set(System& sys, const EvictionSet& set, double threshold,
                      Picoseconds& cursor);

// Midpoint between the slowest all-hit probe and the fastest probe after
// one member was flushed. `target` is flushed afterwards.
double calibrate_probe_threshold(System& sys, const EvictionSet& set,
                                 PhysAddr target, unsigned samples,
                                 Picoseconds& cursor);

struct LatencyThresholds {
  double cached = 0;      // reload below: private or LLC
  double fpga_cache = 0;  // reload above: FPGA cache
  double flush_fpga = 0;  // flush above: line was in the FPGA cache
};

LatencyThresholds latency_thresholds(const System& sys);

struct FlushProbeResult {
  bool was_fpga_cached = false;
  bool was_cached = false;
  double reload_cycles = 0;
  double flush_cycles = 0;
};

// Reload (F+R) then flush (F+F); leaves the line uncached.
FlushProbeResult flush_probe(System& sys, PhysAddr addr, Picoseconds& cursor);

// ---------------------------------------------------------------------------
// Covert channel receiver.

struct ChannelDecodeConfig {
  unsigned probes_per_bit = 6;
  unsigned redundancy = 3;
  unsigned min_hits = 2;
  double probe_threshold_cycles = 0;  // 0 = calibrate at startup

  void validate() const;
};

struct CovertReceiveResult {
  std::vector<bool> bits;
  std::vector<unsigned> hits_per_bit;
  double threshold = 0;
  double mean_probe_cycles = 0;
  std::uint64_t integrity_warnings = 0;
};

// Probes at start + (j * probes_per_bit + i) * period / probes_per_bit while
// advancing the shared timeline, so sender events interleave.
CovertReceiveResult covert_receive(System& sys, const EvictionSet& set,
                                   PhysAddr target,
                                   const ChannelDecodeConfig& cfg,
                                   Picoseconds start_ps,
                                   Picoseconds bit_period_ps,
                                   std::size_t nbits);

double covert_receiver_bound_bps(double cpu_hz, double probe_cycles);

// ---------------------------------------------------------------------------
// CPU hammer loop (read + clflush per iteration, or uncached reads).

struct CpuHammerResult {
  double cycles = 0;
  double seconds = 0;
  double mean_iteration_cycles = 0;
  std::uint64_t requests = 0;
};

CpuHammerResult cpu_hammer_stream(System& sys, std::span<const PhysAddr> targets,
                                  std::uint64_t count, bool uncachable,
                                  Picoseconds start_ps);

}  // namespace hammerlab
