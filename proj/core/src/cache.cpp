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

#include "hammerlab/cache.hpp"

#include <algorithm>
#include <bit>
#include <sstream>

#include <fmt/format.h>

namespace hammerlab {

namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

unsigned parity(std::uint64_t v) {
  return static_cast<unsigned>(std::popcount(v) & 1);
}

}  // namespace

std::string_view to_string(Coherence c) {
  switch (c) {
    case Coherence::kInvalid: return "I";
    case Coherence::kShared: return "S";
    case Coherence::kExclusive: return "E";
    case Coherence::kModified: return "M";
  }
  return "?";
}

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::kPrivate: return "private";
    case Tier::kLlc: return "llc";
    case Tier::kFpgaCache: return "fpga-cache";
    case Tier::kDram: return "dram";
  }
  return "?";
}

std::string_view to_string(CachingHint h) {
  switch (h) {
    case CachingHint::kRdLineI: return "RdLine_I";
    case CachingHint::kRdLineS: return "RdLine_S";
    case CachingHint::kWrLineI: return "WrLine_I";
    case CachingHint::kWrLineM: return "WrLine_M";
    case CachingHint::kWrPushI: return "WrPush_I";
  }
  return "?";
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kPcieA: return "pcie-a";
    case Channel::kPcieB: return "pcie-b";
    case Channel::kUpi: return "upi";
    case Channel::kAuto: return "auto";
  }
  return "?";
}

CachingHint parse_hint(std::string_view s) {
  for (auto h : {CachingHint::kRdLineI, CachingHint::kRdLineS,
                 CachingHint::kWrLineI, CachingHint::kWrLineM,
                 CachingHint::kWrPushI}) {
    if (to_string(h) == s) return h;
  }
  fail(ErrorKind::kProtocol, fmt::format("unknown caching hint '{}'", s));
}

Channel parse_channel(std::string_view s) {
  for (auto c : {Channel::kPcieA, Channel::kPcieB, Channel::kUpi, Channel::kAuto}) {
    if (to_string(c) == s) return c;
  }
  fail(ErrorKind::kConfig, fmt::format("unknown channel '{}'", s));
}

void CacheGeometry::validate() const {
  if (!is_pow2(line_bytes) || !is_pow2(sets)) {
    fail(ErrorKind::kConfig, "cache line size and set count must be powers of two");
  }
  if (ways == 0 || ways > 64 || slices == 0) {
    fail(ErrorKind::kConfig, "cache ways must be in [1,64] and slices >= 1");
  }
}

void FpgaCacheGeometry::validate() const {
  if (!is_pow2(line_bytes) || capacity_bytes % line_bytes != 0 ||
      !is_pow2(lines())) {
    fail(ErrorKind::kConfig, "fpga cache must hold a power-of-two line count");
  }
}

void DdioConfig::validate(std::uint32_t ways) const {
  const std::uint64_t all = ways >= 64 ? ~0ULL : ((1ULL << ways) - 1);
  if (allowed_way_mask == 0 || (allowed_way_mask & ~all) != 0) {
    fail(ErrorKind::kConfig, "ddio way mask must be a non-empty subset of LLC ways");
  }
}

void CpuLatencyConfig::validate() const {
  if (!(private_tier.max() < llc.min() && llc.max() < dram.min() &&
        dram.max() < fpga_cache.min())) {
    fail(ErrorKind::kConfig,
         "cpu latency tiers must be ordered private < llc < dram < fpga-cache "
         "with disjoint supports");
  }
  if (flush_base.max() >= flush_base.min() + flush_fpga_penalty.min()) {
    fail(ErrorKind::kConfig, "flush penalty does not separate from flush base");
  }
}

std::vector<std::uint64_t> default_slice_masks() {
  // Pseudo-random masks over address bits [6, 38).
  std::vector<std::uint64_t> masks;
  const std::uint64_t field = ((1ULL << 38) - 1) & ~((1ULL << 6) - 1);
  for (std::uint64_t i = 0; i < 16; ++i) {
    masks.push_back(mix64(0x51ce0000ULL + i) & field);
  }
  return masks;
}

void CacheConfig::validate() const {
  llc.validate();
  private_tier.validate();
  if (private_tier.line_bytes != llc.line_bytes) {
    fail(ErrorKind::kConfig, "private and LLC line sizes differ");
  }
  fpga.validate();
  ddio.validate(llc.ways);
  latency.validate();
  if (llc.slices > 1) {
    const std::size_t need =
        is_pow2(llc.slices) ? std::bit_width(llc.slices) - 1 : 16;
    if (slice_masks.size() < need) {
      fail(ErrorKind::kConfig,
           fmt::format("{} slices need {} slice masks", llc.slices, need));
    }
  }
}

// ---------------------------------------------------------------------------

CacheHierarchy::Line* CacheHierarchy::Array::find(std::uint64_t set,
                                                  std::uint64_t tag) {
  for (std::uint32_t w = 0; w < ways; ++w) {
    Line& l = lines[set * ways + w];
    if (l.state != Coherence::kInvalid && l.tag == tag) return &l;
  }
  return nullptr;
}

const CacheHierarchy::Line* CacheHierarchy::Array::find(
    std::uint64_t set, std::uint64_t tag) const {
  return const_cast<Array*>(this)->find(set, tag);
}

std::uint32_t CacheHierarchy::Array::victim(std::uint64_t set,
                                            std::uint64_t mask) const {
  std::uint32_t best = ways;
  for (std::uint32_t w = 0; w < ways; ++w) {
    if (!((mask >> w) & 1U)) continue;
    const Line& l = lines[set * ways + w];
    if (l.state == Coherence::kInvalid) return w;
    if (best == ways || l.lru < lines[set * ways + best].lru) best = w;
  }
  return best;
}

CacheHierarchy::CacheHierarchy(CacheConfig config, Dram* dram,
                               std::uint64_t seed)
    : config_(std::move(config)),
      dram_(dram),
      rng_(seed, hash_name("cache")) {
  if (config_.slice_masks.empty()) config_.slice_masks = default_slice_masks();
  config_.validate();
  if (dram_ != nullptr) {
    const auto& t = dram_->config().timing;
    if (!(t.row_hit_cycles.min() > config_.latency.llc.max() &&
          t.row_conflict_cycles.max() < config_.latency.fpga_cache.min())) {
      fail(ErrorKind::kConfig,
           "dram row-buffer latencies overlap the llc or fpga-cache tier");
    }
  }
  llc_.sets = config_.llc.sets * config_.llc.slices;
  llc_.ways = config_.llc.ways;
  llc_.lines.resize(std::size_t{llc_.sets} * llc_.ways);
  priv_.sets = config_.private_tier.sets;
  priv_.ways = config_.private_tier.ways;
  priv_.lines.resize(std::size_t{priv_.sets} * priv_.ways);
  if (config_.fpga.present) fpga_.resize(config_.fpga.lines());
}

std::uint32_t CacheHierarchy::slice_of(PhysAddr addr) const {
  const std::uint32_t n = config_.llc.slices;
  if (n == 1) return 0;
  if (is_pow2(n)) {
    std::uint32_t s = 0;
    for (unsigned i = 0; (1U << i) < n; ++i) {
      s |= parity(addr & config_.slice_masks[i]) << i;
    }
    return s;
  }
  std::uint32_t h = 0;
  for (unsigned i = 0; i < 16; ++i) {
    h |= parity(addr & config_.slice_masks[i]) << i;
  }
  return h % n;
}

std::uint32_t CacheHierarchy::set_of(PhysAddr addr) const {
  return static_cast<std::uint32_t>((addr / config_.llc.line_bytes) &
                                    (config_.llc.sets - 1));
}

std::uint32_t CacheHierarchy::fpga_index_of(PhysAddr addr) const {
  return static_cast<std::uint32_t>((addr / config_.fpga.line_bytes) &
                                    (config_.fpga.lines() - 1));
}

std::uint64_t CacheHierarchy::llc_set_index(PhysAddr a) const {
  return std::uint64_t{slice_of(a)} * config_.llc.sets + set_of(a);
}

std::uint64_t CacheHierarchy::private_set_index(PhysAddr a) const {
  return (a / config_.private_tier.line_bytes) & (config_.private_tier.sets - 1);
}

void CacheHierarchy::record(Picoseconds t, std::string_view actor,
                            std::string_view op, PhysAddr addr, Tier tier,
                            int way) {
  if (!trace_on_) return;
  trace_.push_back(CacheEvent{t, std::string(actor), std::string(op), addr,
                              tier, way});
}

void CacheHierarchy::dram_touch(PhysAddr addr, MemOp kind, Picoseconds when) {
  if (dram_ == nullptr) return;
  const auto loc = dram_->locate(addr);
  dram_->access(loc.bank, loc.row, when,
                kind == MemOp::kRead ? AccessKind::kRead : AccessKind::kWrite);
}

double CacheHierarchy::dram_cycles(PhysAddr addr, MemOp kind,
                                   Picoseconds when) {
  if (dram_ == nullptr) return rng_.sample(config_.latency.dram);
  const auto loc = dram_->locate(addr);
  const LatencyClass cls = dram_->access(
      loc.bank, loc.row, when,
      kind == MemOp::kRead ? AccessKind::kRead : AccessKind::kWrite);
  return dram_->sample_class_cycles(cls, rng_);
}

void CacheHierarchy::private_invalidate(PhysAddr addr) {
  Line* l = priv_.find(private_set_index(addr), tag_of(addr));
  if (l != nullptr) *l = Line{};
}

void CacheHierarchy::private_install(PhysAddr addr, Coherence st,
                                     Picoseconds when) {
  const auto set = private_set_index(addr);
  const auto tag = tag_of(addr);
  Line* hit = priv_.find(set, tag);
  if (hit == nullptr) {
    const std::uint32_t w = priv_.victim(set, ~0ULL);
    Line& v = priv_.at(set, w);
    if (v.state == Coherence::kModified) {
      // Write back into the LLC copy, or to memory when non-inclusive.
      const PhysAddr vaddr = v.tag * config_.llc.line_bytes;
      Line* ll = llc_.find(llc_set_index(vaddr), v.tag);
      if (ll != nullptr) {
        ll->state = Coherence::kModified;
      } else {
        dram_touch(vaddr, MemOp::kWrite, when);
      }
    }
    v = Line{tag, st, 0};
    hit = &v;
  } else {
    hit->state = st;
  }
  hit->lru = ++tick_;
}

std::uint32_t CacheHierarchy::llc_install(PhysAddr addr, Coherence st,
                                          std::uint64_t mask,
                                          Picoseconds when) {
  const auto set = llc_set_index(addr);
  const std::uint32_t w = llc_.victim(set, mask);
  Line& v = llc_.at(set, w);
  if (v.state != Coherence::kInvalid) {
    const PhysAddr vaddr = v.tag * config_.llc.line_bytes;
    bool dirty = v.state == Coherence::kModified;
    if (config_.llc.inclusive) {
      Line* p = priv_.find(private_set_index(vaddr), v.tag);
      if (p != nullptr) {
        dirty = dirty || p->state == Coherence::kModified;
        *p = Line{};
      }
    }
    if (dirty) dram_touch(vaddr, MemOp::kWrite, when);
    record(when, "llc", "evict", vaddr, Tier::kLlc, static_cast<int>(w));
  }
  v = Line{tag_of(addr), st, ++tick_};
  return w;
}

void CacheHierarchy::fpga_invalidate(PhysAddr addr) {
  if (fpga_.empty()) return;
  Line& l = fpga_[fpga_index_of(addr)];
  if (l.state != Coherence::kInvalid && l.tag == tag_of(addr)) l = Line{};
}

void CacheHierarchy::fpga_install(PhysAddr addr, Coherence st,
                                  Picoseconds when) {
  if (fpga_.empty()) return;
  Line& l = fpga_[fpga_index_of(addr)];
  if (l.state == Coherence::kModified && l.tag != tag_of(addr)) {
    const PhysAddr vaddr = l.tag * config_.fpga.line_bytes;
    Line* ll = llc_.find(llc_set_index(vaddr), l.tag);
    if (ll != nullptr) {
      ll->state = Coherence::kModified;
    } else {
      dram_touch(vaddr, MemOp::kWrite, when);
    }
  }
  l = Line{tag_of(addr), st, ++tick_};
}

AccessResult CacheHierarchy::cpu_access(PhysAddr addr, MemOp kind,
                                        bool uncachable, Picoseconds when) {
  const auto& lat = config_.latency;
  if (uncachable) {
    AccessResult r{dram_cycles(addr, kind, when), Tier::kDram};
    record(when, "cpu", kind == MemOp::kRead ? "read-uc" : "write-uc", addr,
           r.tier);
    return r;
  }
  const auto tag = tag_of(addr);
  const Coherence fill_write = Coherence::kModified;
  AccessResult r;

  if (Line* p = priv_.find(private_set_index(addr), tag); p != nullptr) {
    r = {rng_.sample(lat.private_tier), Tier::kPrivate};
    p->lru = ++tick_;
    if (kind == MemOp::kWrite && p->state != Coherence::kModified) {
      fpga_invalidate(addr);
      p->state = Coherence::kModified;
      if (Line* l = llc_.find(llc_set_index(addr), tag); l != nullptr) {
        l->state = Coherence::kExclusive;
      }
    }
  } else if (Line* l = llc_.find(llc_set_index(addr), tag);
             l != nullptr && fpga_state(addr) != Coherence::kModified) {
    r = {rng_.sample(lat.llc), Tier::kLlc};
    l->lru = ++tick_;
    Coherence pst = l->state == Coherence::kShared ? Coherence::kShared
                                                   : Coherence::kExclusive;
    if (kind == MemOp::kWrite) {
      fpga_invalidate(addr);
      pst = fill_write;
      l->state = Coherence::kExclusive;
    } else if (l->state == Coherence::kModified) {
      pst = Coherence::kShared;
    }
    private_install(addr, pst, when);
  } else if (fpga_state(addr) != Coherence::kInvalid) {
    r = {rng_.sample(lat.fpga_cache), Tier::kFpgaCache};
    Line& f = fpga_[fpga_index_of(addr)];
    if (f.state == Coherence::kModified) dram_touch(addr, MemOp::kWrite, when);
    Line* tracked = llc_.find(llc_set_index(addr), tag);
    if (kind == MemOp::kWrite) {
      f = Line{};
      if (tracked != nullptr) {
        tracked->state = Coherence::kExclusive;
        tracked->lru = ++tick_;
      } else {
        llc_install(addr, Coherence::kExclusive, ~0ULL, when);
      }
      private_install(addr, fill_write, when);
    } else {
      // A Modified FPGA line is written back and downgraded on a CPU read.
      f.state = Coherence::kShared;
      if (tracked != nullptr) {
        tracked->state = Coherence::kShared;
        tracked->lru = ++tick_;
      } else {
        llc_install(addr, Coherence::kShared, ~0ULL, when);
      }
      private_install(addr, Coherence::kShared, when);
    }
  } else {
    r = {dram_cycles(addr, kind, when), Tier::kDram};
    llc_install(addr, Coherence::kExclusive, ~0ULL, when);
    private_install(addr,
                    kind == MemOp::kWrite ? fill_write : Coherence::kExclusive,
                    when);
  }
  record(when, "cpu", kind == MemOp::kRead ? "read" : "write", addr, r.tier);
  return r;
}

FlushResult CacheHierarchy::cpu_flush(PhysAddr addr, Picoseconds when) {
  const auto& lat = config_.latency;
  const auto tag = tag_of(addr);
  FlushResult r;
  bool dirty = false;
  if (Line* p = priv_.find(private_set_index(addr), tag); p != nullptr) {
    dirty = dirty || p->state == Coherence::kModified;
    *p = Line{};
    r.was_cached = true;
  }
  if (Line* l = llc_.find(llc_set_index(addr), tag); l != nullptr) {
    dirty = dirty || l->state == Coherence::kModified;
    *l = Line{};
    r.was_cached = true;
  }
  if (fpga_state(addr) != Coherence::kInvalid) {
    Line& f = fpga_[fpga_index_of(addr)];
    dirty = dirty || f.state == Coherence::kModified;
    f = Line{};
    r.was_cached = true;
    r.was_fpga_cached = true;
  }
  if (dirty) dram_touch(addr, MemOp::kWrite, when);
  r.cycles = rng_.sample(lat.flush_base);
  if (r.was_fpga_cached) r.cycles += rng_.sample(lat.flush_fpga_penalty);
  record(when, "cpu", "flush", addr,
         r.was_fpga_cached ? Tier::kFpgaCache : (r.was_cached ? Tier::kLlc : Tier::kDram));
  return r;
}

void CacheHierarchy::io_write_allocate(PhysAddr addr, CachingHint hint,
                                       bool over_upi, Picoseconds when) {
  if (hint != CachingHint::kWrLineI && hint != CachingHint::kWrLineM &&
      hint != CachingHint::kWrPushI) {
    fail(ErrorKind::kProtocol,
         fmt::format("{} is not a write hint", to_string(hint)));
  }
  const auto tag = tag_of(addr);
  private_invalidate(addr);
  const bool fpga_owns =
      over_upi && hint == CachingHint::kWrLineM && !fpga_.empty();
  // The FPGA cache keeps the Modified copy; the LLC holds a tracking copy.
  const Coherence llc_state = fpga_owns ? Coherence::kShared : Coherence::kModified;
  if (fpga_owns) {
    fpga_install(addr, Coherence::kModified, when);
  } else {
    fpga_invalidate(addr);
  }
  if (Line* l = llc_.find(llc_set_index(addr), tag); l != nullptr) {
    l->state = llc_state;
    l->lru = ++tick_;
    const auto idx = static_cast<int>(l - &llc_.lines[llc_set_index(addr) * llc_.ways]);
    record(when, "io", "write-update", addr, Tier::kLlc, idx);
  } else {
    const std::uint32_t w =
        llc_install(addr, llc_state, config_.ddio.allowed_way_mask, when);
    record(when, "io", "write-install", addr, Tier::kLlc, static_cast<int>(w));
  }
}

IoLookup CacheHierarchy::io_read_lookup(PhysAddr addr, CachingHint hint,
                                        bool over_upi, Picoseconds when) {
  if (hint != CachingHint::kRdLineI && hint != CachingHint::kRdLineS) {
    fail(ErrorKind::kProtocol,
         fmt::format("{} is not a read hint", to_string(hint)));
  }
  IoLookup r;
  if (hint == CachingHint::kRdLineS && (!over_upi || fpga_.empty())) {
    hint = CachingHint::kRdLineI;
    r.downgraded_hint = true;
    ++warnings_;
    record(when, "io", "warn-rdline-s-downgraded", addr, Tier::kDram);
  }
  const auto tag = tag_of(addr);
  if (over_upi && fpga_state(addr) != Coherence::kInvalid) {
    r.tier = Tier::kFpgaCache;
  } else if (Line* p = priv_.find(private_set_index(addr), tag);
             p != nullptr && p->state == Coherence::kModified) {
    r.tier = Tier::kLlc;  // snooped from the core, served at LLC distance
  } else if (llc_.find(llc_set_index(addr), tag) != nullptr) {
    r.tier = Tier::kLlc;
  } else {
    r.tier = Tier::kDram;
    if (dram_ != nullptr) {
      const auto loc = dram_->locate(addr);
      r.dram_class = dram_->access(loc.bank, loc.row, when, AccessKind::kRead);
    }
  }
  if (hint == CachingHint::kRdLineS && r.tier != Tier::kFpgaCache) {
    // A shared copy may not coexist with a modified one: the core keeps S
    // and its dirty data moves to the LLC.
    if (Line* p = priv_.find(private_set_index(addr), tag);
        p != nullptr && p->state == Coherence::kModified) {
      p->state = Coherence::kShared;
      if (Line* l = llc_.find(llc_set_index(addr), tag); l != nullptr) {
        l->state = Coherence::kModified;
      }
    }
    fpga_install(addr, Coherence::kShared, when);
  }
  record(when, "io", fmt::format("read-{}", to_string(hint)), addr, r.tier);
  return r;
}

LineView CacheHierarchy::llc_line(PhysAddr addr) const {
  const auto set = llc_set_index(addr);
  const auto tag = tag_of(addr);
  for (std::uint32_t w = 0; w < llc_.ways; ++w) {
    const Line& l = llc_.lines[set * llc_.ways + w];
    if (l.state != Coherence::kInvalid && l.tag == tag) {
      return {l.state, static_cast<int>(w)};
    }
  }
  return {};
}

Coherence CacheHierarchy::private_state(PhysAddr addr) const {
  const Line* l = priv_.find(private_set_index(addr), tag_of(addr));
  return l == nullptr ? Coherence::kInvalid : l->state;
}

Coherence CacheHierarchy::fpga_state(PhysAddr addr) const {
  if (fpga_.empty()) return Coherence::kInvalid;
  const Line& l = fpga_[fpga_index_of(addr)];
  return l.tag == tag_of(addr) ? l.state : Coherence::kInvalid;
}

std::uint64_t CacheHierarchy::llc_digest() const {
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < llc_.lines.size(); ++i) {
    const Line& l = llc_.lines[i];
    if (l.state == Coherence::kInvalid) continue;
    h += hash_combine(hash_combine(i, l.tag), static_cast<std::uint64_t>(l.state));
  }
  return h;
}

std::uint64_t CacheHierarchy::llc_residency_digest() const {
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < llc_.lines.size(); ++i) {
    const Line& l = llc_.lines[i];
    if (l.state != Coherence::kInvalid) h += hash_combine(i, l.tag);
  }
  return h;
}

std::vector<std::string> CacheHierarchy::audit() const {
  std::vector<std::string> out;
  const auto lb = config_.llc.line_bytes;
  for (const Line& p : priv_.lines) {
    if (p.state == Coherence::kInvalid) continue;
    const PhysAddr a = p.tag * lb;
    const Line* l = llc_.find(llc_set_index(a), p.tag);
    if (config_.llc.inclusive && l == nullptr) {
      out.push_back(fmt::format("inclusivity: {:#x} private but not in LLC", a));
    }
    int modified = p.state == Coherence::kModified;
    if (l != nullptr && l->state == Coherence::kModified) ++modified;
    if (fpga_state(a) == Coherence::kModified) ++modified;
    if (modified > 1) out.push_back(fmt::format("single-modified: {:#x}", a));
    const Coherence f = fpga_state(a);
    if (f != Coherence::kInvalid &&
        (p.state == Coherence::kModified || f == Coherence::kModified)) {
      out.push_back(fmt::format("owner: {:#x} modified while core and FPGA both hold it", a));
    }
  }
  for (const Line& l : llc_.lines) {
    if (l.state != Coherence::kModified) continue;
    const PhysAddr a = l.tag * lb;
    if (fpga_state(a) == Coherence::kModified) {
      out.push_back(fmt::format("single-modified: {:#x} in LLC and FPGA", a));
    }
  }
  return out;
}

std::string CacheHierarchy::render_trace() const {
  std::string out;
  for (const auto& e : trace_) {
    out += fmt::format("{} {} {} {:#x} {}", e.time, e.actor, e.op, e.addr,
                       to_string(e.tier));
    if (e.way >= 0) out += fmt::format(" way={}", e.way);
    out += '\n';
  }
  return out;
}

}  // namespace hammerlab
