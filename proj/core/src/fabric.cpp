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

#include "hammerlab/fabric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace hammerlab {

namespace {

constexpr std::uint64_t kPage = 4096;
constexpr std::uint64_t kHuge2M = 2ULL << 20;
constexpr std::uint64_t kHuge1G = 1ULL << 30;

std::uint64_t round_up(std::uint64_t v, std::uint64_t to) {
  return (v + to - 1) / to * to;
}

}  // namespace

std::string_view to_string(ChannelPolicy p) {
  switch (p) {
    case ChannelPolicy::kAuto: return "auto";
    case ChannelPolicy::kAlternatePcie: return "alternate-pcie";
    case ChannelPolicy::kUpi: return "upi";
  }
  return "?";
}

ChannelPolicy parse_channel_policy(std::string_view s) {
  for (auto p : {ChannelPolicy::kAuto, ChannelPolicy::kAlternatePcie,
                 ChannelPolicy::kUpi}) {
    if (to_string(p) == s) return p;
  }
  fail(ErrorKind::kConfig, fmt::format("unknown channel policy '{}'", s));
}

void FabricConfig::validate() const {
  fpga.validate();
  if (channels.empty()) fail(ErrorKind::kConfig, "platform has no channels");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    if (channels[i] == Channel::kAuto) {
      fail(ErrorKind::kConfig, "auto is not a physical channel");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (channels[i] == channels[j]) {
        fail(ErrorKind::kConfig, "duplicate channel");
      }
    }
  }
  if (tx_capacity == 0) fail(ErrorKind::kConfig, "tx_capacity must be > 0");
  for (const auto* c : {&pcie, &upi}) {
    if (!(c->pipelining >= 1.0) || c->pipelining > tx_capacity) {
      fail(ErrorKind::kConfig, "pipelining must lie in [1, tx_capacity]");
    }
  }
  if (page_skip_probability < 0.0 || page_skip_probability >= 1.0) {
    fail(ErrorKind::kConfig, "page_skip_probability must be in [0,1)");
  }
}

Fabric::Fabric(FabricConfig config, Simulation& sim, CacheHierarchy& cache,
               Dram& dram)
    : config_(std::move(config)),
      sim_(sim),
      cache_(cache),
      dram_(dram),
      rng_(sim.rngs().stream("fabric")),
      alloc_rng_(sim.rngs().stream("opae-alloc")) {
  config_.validate();
  for (auto c : config_.channels) channels_[c] = ChannelState{};
}

bool Fabric::channel_available(Channel c) const {
  return std::find(config_.channels.begin(), config_.channels.end(), c) !=
         config_.channels.end();
}

// ---------------------------------------------------------------------------
// Buffer allocation. Physical addresses are disclosed to the caller.

SharedBuffer Fabric::alloc_buffer(std::uint64_t size) {
  const std::uint64_t cap = dram_.geometry().capacity_bytes();
  if (size == 0 || size > cap) {
    fail(ErrorKind::kAllocation, fmt::format("cannot allocate {} bytes", size));
  }
  auto is_free = [&](PhysAddr b, std::uint64_t len) {
    if (b + len > cap) return false;
    auto it = allocations_.lower_bound(b);
    if (it != allocations_.end() && it->first < b + len) return false;
    if (it != allocations_.begin()) {
      --it;
      if (it->first + it->second > b) return false;
    }
    return true;
  };
  auto place = [&](std::uint64_t len, std::uint64_t align) -> PhysAddr {
    const std::uint64_t slots = cap / align;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const PhysAddr b =
          static_cast<PhysAddr>(alloc_rng_.uniform_int(0, static_cast<std::int64_t>(slots) - 1)) *
          align;
      if (is_free(b, len)) return b;
    }
    for (std::uint64_t s = 0; s < slots; ++s) {
      if (is_free(s * align, len)) return s * align;
    }
    fail(ErrorKind::kAllocation,
         fmt::format("no free {}-byte region for {} bytes", align, size));
  };

  SharedBuffer buf;
  buf.size = size;
  if (size <= kPage) {
    // Pages come from a randomly placed 2 MiB chunk in ascending order with
    // occasional gaps, so sorted pages expose long contiguous runs.
    for (;;) {
      while (page_cursor_ < page_chunk_end_ &&
             alloc_rng_.bernoulli(config_.page_skip_probability)) {
        page_cursor_ += kPage;
      }
      if (page_cursor_ < page_chunk_end_ && is_free(page_cursor_, kPage)) break;
      if (page_cursor_ < page_chunk_end_) {
        page_cursor_ += kPage;
        continue;
      }
      page_cursor_ = place(kHuge2M, kHuge2M);
      page_chunk_end_ = page_cursor_ + kHuge2M;
    }
    buf.base_phys = page_cursor_;
    allocations_[page_cursor_] = kPage;
    page_cursor_ += kPage;
    return buf;
  }
  const std::uint64_t align = size <= kHuge1G ? kHuge2M : kHuge1G;
  const std::uint64_t len = round_up(size, align);
  buf.base_phys = place(len, align);
  allocations_[buf.base_phys] = len;
  return buf;
}

// ---------------------------------------------------------------------------
// MMIO

std::uint64_t Fabric::mmio_read(std::uint32_t offset, unsigned width) {
  if (width != 32 && width != 64) {
    fail(ErrorKind::kRange, fmt::format("mmio width {} unsupported", width));
  }
  if (offset >= kMmioWords || (width == 64 && (offset % 2 != 0 ||
                                               offset + 1 >= kMmioWords))) {
    fail(ErrorKind::kRange, fmt::format("mmio offset {:#x} invalid for {}-bit "
                                        "access", offset, width));
  }
  std::optional<std::uint64_t> v;
  if (device_ != nullptr) v = device_->mmio_read(offset, width);
  if (!v) {
    sim_.clock().advance(config_.fpga, config_.mmio_timeout_cycles);
    fail(ErrorKind::kTimeout,
         fmt::format("mmio read of {:#x} timed out after {} cycles", offset,
                     config_.mmio_timeout_cycles));
  }
  return width == 32 ? (*v & 0xffffffffULL) : *v;
}

void Fabric::mmio_write(std::uint32_t offset, unsigned width,
                        std::uint64_t value) {
  if (width != 32 && width != 64) {
    fail(ErrorKind::kRange, fmt::format("mmio width {} unsupported", width));
  }
  if (offset >= kMmioWords || (width == 64 && (offset % 2 != 0 ||
                                               offset + 1 >= kMmioWords))) {
    fail(ErrorKind::kRange, fmt::format("mmio offset {:#x} invalid for {}-bit "
                                        "access", offset, width));
  }
  if (width == 32) value &= 0xffffffffULL;
  if (device_ != nullptr) device_->mmio_write(offset, width, value);
}

// ---------------------------------------------------------------------------
// DMA

Channel Fabric::resolve(Channel requested) {
  if (requested == Channel::kAuto) {
    const Channel c = config_.channels[rr_ % config_.channels.size()];
    ++rr_;
    return c;
  }
  if (!channel_available(requested)) {
    fail(ErrorKind::kProtocol,
         fmt::format("channel {} not available on platform {}",
                     to_string(requested), config_.platform));
  }
  return requested;
}

const Distribution& Fabric::tier_latency(Channel c, Tier t) const {
  const ChannelConfig& cc = channel_config(c);
  switch (t) {
    case Tier::kDram: return cc.dram;
    case Tier::kFpgaCache: return cc.fpga_cache;
    default: return cc.llc;
  }
}

std::size_t Fabric::occupancy(std::uint64_t at_cycle) {
  while (!in_flight_.empty() && in_flight_.front() <= at_cycle) {
    in_flight_.pop_front();
  }
  return in_flight_.size();
}

DmaCompletion Fabric::dma_submit(const DmaRequest& req) {
  if (req.addr % 64 != 0) {
    fail(ErrorKind::kAddress,
         fmt::format("dma address {:#x} not line aligned", req.addr));
  }
  const Channel ch = resolve(req.channel);
  ChannelState& st = channels_[ch];
  // The issue cursor keeps its fraction so the mean spacing is exact.
  double base = std::max(static_cast<double>(req.issue_cycle), st.next_issue);
  std::uint64_t issue = static_cast<std::uint64_t>(std::ceil(base));
  if (occupancy(issue) >= config_.tx_capacity) {
    // Stall until the oldest transaction drains.
    issue = in_flight_.front();
    base = static_cast<double>(issue);
    occupancy(issue);
  }
  const bool upi = ch == Channel::kUpi;
  const Picoseconds when = cycles_to_ps(config_.fpga, issue);
  if (when > sim_.now()) sim_.clock().advance_to(when);

  DmaCompletion out;
  out.issue_cycle = issue;
  out.channel = ch;
  if (req.op == MemOp::kRead) {
    out.tier = cache_.io_read_lookup(req.addr, req.hint, upi, when).tier;
  } else {
    cache_.io_write_allocate(req.addr, req.hint, upi, when);
    out.tier = Tier::kLlc;
  }
  const double latency = rng_.sample(tier_latency(ch, out.tier));
  out.completion_cycle = issue + static_cast<std::uint64_t>(std::llround(latency));
  if (!in_flight_.empty()) {
    out.completion_cycle = std::max(out.completion_cycle, in_flight_.back());
  }
  in_flight_.push_back(out.completion_cycle);
  peak_occupancy_ = std::max(peak_occupancy_, in_flight_.size());
  st.next_issue = base + latency / channel_config(ch).pipelining;
  return out;
}

std::vector<Channel> Fabric::policy_channels(ChannelPolicy p) const {
  std::vector<Channel> out;
  switch (p) {
    case ChannelPolicy::kAuto:
      out = config_.channels;
      break;
    case ChannelPolicy::kAlternatePcie:
      out = {Channel::kPcieA, Channel::kPcieB};
      break;
    case ChannelPolicy::kUpi:
      out = {Channel::kUpi};
      break;
  }
  for (auto c : out) {
    if (!channel_available(c)) {
      fail(ErrorKind::kProtocol,
           fmt::format("channel policy {} needs {} which platform {} lacks",
                       to_string(p), to_string(c), config_.platform));
    }
  }
  return out;
}

StreamResult Fabric::dma_read_stream(std::span<const PhysAddr> targets,
                                     std::uint64_t count, CachingHint hint,
                                     ChannelPolicy policy, double start_cycle) {
  StreamResult res;
  res.first_issue_cycle = start_cycle;
  res.last_issue_cycle = start_cycle;
  if (count == 0) return res;
  if (targets.empty()) fail(ErrorKind::kContract, "dma stream without targets");
  const auto chans = policy_channels(policy);
  for (auto c : chans) {
    start_cycle = std::max(start_cycle, channels_[c].next_issue);
  }
  res.first_issue_cycle = start_cycle;
  const Picoseconds t1 = cycles_to_ps(config_.fpga, start_cycle);

  // Serving tier per (channel, target); the first request performs the real
  // lookup, later ones repeat it.
  const std::size_t nt = targets.size();
  const std::size_t nc = chans.size();
  std::vector<Tier> tiers(nt * nc, Tier::kDram);
  std::uint64_t lookups = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    const bool upi = chans[c] == Channel::kUpi;
    for (std::size_t t = 0; t < nt; ++t) {
      if (targets[t] % 64 != 0) {
        fail(ErrorKind::kAddress, "dma address not line aligned");
      }
      Tier tier = cache_.io_read_lookup(targets[t], hint, upi, t1).tier;
      if (tier == Tier::kDram) ++lookups;
      if (hint == CachingHint::kRdLineS && upi) tier = Tier::kFpgaCache;
      tiers[c * nt + t] = tier;
    }
  }

  // Request k goes to target k % nt on channel k % nc.
  auto share = [count](std::uint64_t i, std::uint64_t n) {
    return count / n + (i < count % n ? 1 : 0);
  };
  double elapsed = 0;
  std::map<std::uint32_t, std::vector<std::pair<DramLocation, std::uint64_t>>> banks;
  for (std::size_t c = 0; c < nc; ++c) {
    double mean = 0;
    double var = 0;
    std::uint64_t n_c = 0;
    for (std::size_t t = 0; t < nt; ++t) {
      // Number of k < count with k % nt == t and k % nc == c.
      std::uint64_t n = 0;
      const std::uint64_t period = std::lcm<std::uint64_t>(nt, nc);
      for (std::uint64_t r = 0; r < period; ++r) {
        if (r % nt == t && r % nc == c) n += share(r, period);
      }
      if (n == 0) continue;
      n_c += n;
      const Distribution& d = tier_latency(chans[c], tiers[c * nt + t]);
      mean += static_cast<double>(n) * d.mean();
      var += static_cast<double>(n) * d.variance();
      if (tiers[c * nt + t] == Tier::kDram) {
        res.dram_requests += n;
        const auto loc = dram_.locate(targets[t]);
        banks[loc.bank].push_back({loc, n});
      }
    }
    double total;
    if (n_c <= 256) {
      total = 0;
      for (std::uint64_t k = c; k < count; k += nc) {
        total += rng_.sample(tier_latency(chans[c], tiers[c * nt + k % nt]));
      }
    } else {
      total = mean + std::sqrt(var) * rng_.normal();
    }
    const double busy = total / channel_config(chans[c]).pipelining;
    channels_[chans[c]].next_issue = start_cycle + busy;
    elapsed = std::max(elapsed, busy);
  }
  res.requests = count;
  res.last_issue_cycle =
      start_cycle + elapsed * static_cast<double>(count - 1) / static_cast<double>(count);
  peak_occupancy_ = std::max<std::size_t>(
      peak_occupancy_,
      static_cast<std::size_t>(std::ceil(std::min<double>(
          config_.pcie.pipelining, config_.tx_capacity))));

  const Picoseconds t2 = cycles_to_ps(config_.fpga, res.last_issue_cycle);
  for (auto& [bank, entries] : banks) {
    std::vector<DramLocation> aggressors;
    std::uint64_t n = 0;
    for (auto& [loc, k] : entries) {
      aggressors.push_back(loc);
      n += k;
    }
    const std::uint64_t already = std::min<std::uint64_t>(lookups, entries.size());
    dram_.hammer_batch(aggressors, n > already ? n - already : 0, t1, t2);
  }
  return res;
}

}  // namespace hammerlab
