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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hammerlab/dram.hpp"
#include "hammerlab/simcore.hpp"

namespace hammerlab {

enum class Coherence { kInvalid, kShared, kExclusive, kModified };
enum class Tier { kPrivate, kLlc, kFpgaCache, kDram };
enum class CachingHint { kRdLineI, kRdLineS, kWrLineI, kWrLineM, kWrPushI };
enum class Channel { kPcieA, kPcieB, kUpi, kAuto };
enum class MemOp { kRead, kWrite };

std::string_view to_string(Coherence c);
std::string_view to_string(Tier t);
std::string_view to_string(CachingHint h);
std::string_view to_string(Channel c);
CachingHint parse_hint(std::string_view s);
Channel parse_channel(std::string_view s);

struct CacheGeometry {
  std::uint32_t line_bytes = 64;
  std::uint32_t sets = 2048;
  std::uint32_t ways = 20;
  // Any positive count; non-power-of-two counts reduce a 16-bit hash mod n.
  std::uint32_t slices = 12;
  bool inclusive = true;

  std::uint64_t capacity_bytes() const {
    return std::uint64_t{line_bytes} * sets * ways * slices;
  }
  void validate() const;
};

struct FpgaCacheGeometry {
  bool present = false;
  std::uint32_t capacity_bytes = 131072;
  std::uint32_t line_bytes = 64;

  std::uint32_t lines() const { return capacity_bytes / line_bytes; }
  void validate() const;
};

struct DdioConfig {
  std::uint64_t allowed_way_mask = 0b11;

  void validate(std::uint32_t ways) const;
  bool allows(std::uint32_t way) const { return (allowed_way_mask >> way) & 1U; }
};

// CPU-cycle latency per tier. DRAM-tier reads take the row-buffer class
// latency from the attached Dram when one is present, `dram` otherwise.
struct CpuLatencyConfig {
  Distribution private_tier = Distribution::tnormal(12, 1.5, 8, 16);
  Distribution llc = Distribution::tnormal(90, 2, 84, 96);
  Distribution fpga_cache = Distribution::tnormal(235, 4, 225, 245);
  Distribution dram = Distribution::uniform(168, 178);
  Distribution flush_base = Distribution::tnormal(130, 4, 120, 140);
  Distribution flush_fpga_penalty = Distribution::tnormal(500, 15, 460, 540);

  // Throws kConfig unless private < LLC < DRAM < FPGA-cache have gaps.
  void validate() const;
};

struct CacheConfig {
  CacheGeometry llc;
  CacheGeometry private_tier{64, 512, 8, 1, false};
  FpgaCacheGeometry fpga;
  DdioConfig ddio;
  CpuLatencyConfig latency;
  // Bit masks over the physical address; slice bit i (or hash bit i for
  // non-power-of-two slice counts) is the parity of addr & slice_masks[i].
  std::vector<std::uint64_t> slice_masks;

  void validate() const;
};

std::vector<std::uint64_t> default_slice_masks();

struct CacheEvent {
  Picoseconds time = 0;
  std::string actor;
  std::string op;
  PhysAddr addr = 0;
  Tier tier = Tier::kDram;
  int way = -1;  // LLC way touched by an install, -1 otherwise
};

struct AccessResult {
  double cycles = 0;
  Tier tier = Tier::kDram;
};

struct FlushResult {
  double cycles = 0;
  bool was_fpga_cached = false;
  bool was_cached = false;
};

struct IoLookup {
  Tier tier = Tier::kDram;
  std::optional<LatencyClass> dram_class;
  bool downgraded_hint = false;
};

struct LineView {
  Coherence state = Coherence::kInvalid;
  int way = -1;
};

class CacheHierarchy {
 public:
  // `dram` may be null; DRAM-tier requests then only sample latency.
  CacheHierarchy(CacheConfig config, Dram* dram, std::uint64_t seed);

  const CacheConfig& config() const { return config_; }

  std::uint32_t slice_of(PhysAddr addr) const;
  std::uint32_t set_of(PhysAddr addr) const;
  std::uint32_t fpga_index_of(PhysAddr addr) const;
  bool congruent(PhysAddr a, PhysAddr b) const {
    return set_of(a) == set_of(b) && slice_of(a) == slice_of(b);
  }

  AccessResult cpu_access(PhysAddr addr, MemOp kind, bool uncachable,
                          Picoseconds when);
  FlushResult cpu_flush(PhysAddr addr, Picoseconds when);
  void io_write_allocate(PhysAddr addr, CachingHint hint, bool over_upi,
                         Picoseconds when);
  IoLookup io_read_lookup(PhysAddr addr, CachingHint hint, bool over_upi,
                          Picoseconds when);

  LineView llc_line(PhysAddr addr) const;
  Coherence private_state(PhysAddr addr) const;
  Coherence fpga_state(PhysAddr addr) const;
  bool in_llc(PhysAddr addr) const { return llc_line(addr).way >= 0; }
  // Order-independent digest of LLC residency and states.
  std::uint64_t llc_digest() const;
  // Same over residency only; coherence states are ignored.
  std::uint64_t llc_residency_digest() const;

  // Returns human-readable violations of single-Modified and inclusivity.
  std::vector<std::string> audit() const;

  void set_trace(bool on) { trace_on_ = on; }
  const std::vector<CacheEvent>& trace() const { return trace_; }
  std::string render_trace() const;
  std::uint64_t warnings() const { return warnings_; }

  double sample(const Distribution& d) { return rng_.sample(d); }

 private:
  struct Line {
    std::uint64_t tag = 0;  // line address (addr / line_bytes)
    Coherence state = Coherence::kInvalid;
    std::uint64_t lru = 0;
  };
  struct Array {
    std::uint32_t sets = 0;
    std::uint32_t ways = 0;
    std::vector<Line> lines;

    Line* find(std::uint64_t set, std::uint64_t tag);
    const Line* find(std::uint64_t set, std::uint64_t tag) const;
    Line& at(std::uint64_t set, std::uint32_t way) {
      return lines[set * ways + way];
    }
    // LRU (invalid first) among ways allowed by `mask`.
    std::uint32_t victim(std::uint64_t set, std::uint64_t mask) const;
  };

  std::uint64_t tag_of(PhysAddr a) const { return a / config_.llc.line_bytes; }
  std::uint64_t llc_set_index(PhysAddr a) const;
  std::uint64_t private_set_index(PhysAddr a) const;
  void record(Picoseconds t, std::string_view actor, std::string_view op,
              PhysAddr addr, Tier tier, int way = -1);
  double dram_cycles(PhysAddr addr, MemOp kind, Picoseconds when);
  void dram_touch(PhysAddr addr, MemOp kind, Picoseconds when);

  // Installs into the LLC within `mask`; returns the way.
  std::uint32_t llc_install(PhysAddr addr, Coherence st, std::uint64_t mask,
                            Picoseconds when);
  void private_install(PhysAddr addr, Coherence st, Picoseconds when);
  void private_invalidate(PhysAddr addr);
  void fpga_install(PhysAddr addr, Coherence st, Picoseconds when);
  void fpga_invalidate(PhysAddr addr);

  CacheConfig config_;
  Dram* dram_;
  SeededRng rng_;
  Array llc_;
  Array priv_;
  std::vector<Line> fpga_;
  std::uint64_t tick_ = 0;
  bool trace_on_ = false;
  std::vector<CacheEvent> trace_;
  std::uint64_t warnings_ = 0;
};

}  // namespace hammerlab
