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
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hammerlab/cache.hpp"
#include "hammerlab/dram.hpp"
#include "hammerlab/simcore.hpp"

namespace hammerlab {

inline constexpr std::uint32_t kMmioWords = 1U << 16;

// Register-level device behind the MMIO window. Returning nullopt from a
// read means the device never answers.
class MmioDevice {
 public:
  virtual ~MmioDevice() = default;
  virtual std::optional<std::uint64_t> mmio_read(std::uint32_t offset,
                                                 unsigned width) = 0;
  virtual void mmio_write(std::uint32_t offset, unsigned width,
                          std::uint64_t value) = 0;
};

// FPGA-cycle latency of one channel by serving tier.
struct ChannelConfig {
  Distribution llc = Distribution::uniform(139, 145);
  Distribution dram = Distribution::uniform(148, 158);
  Distribution fpga_cache = Distribution::uniform(20, 28);
  // Requests in flight per channel at saturation; sustained issue interval
  // is latency / pipelining.
  double pipelining = 14.8184;
};

struct FabricConfig {
  std::string platform = "pac";
  ClockDomain fpga{"fpga", 200'000'000};
  std::vector<Channel> channels{Channel::kPcieA};
  ChannelConfig pcie;
  ChannelConfig upi{Distribution::uniform(90, 100),
                    Distribution::uniform(130, 150),
                    Distribution::uniform(20, 28), 14.8184};
  std::uint32_t tx_capacity = 64;
  std::uint64_t mmio_timeout_cycles = 65536;
  // Probability that the page allocator skips a page between consecutive
  // 4 KiB allocations.
  double page_skip_probability = 0.05;

  void validate() const;
};

struct SharedBuffer {
  std::uint64_t size = 0;
  PhysAddr base_phys = 0;
  bool contiguous = true;
};

struct DmaRequest {
  MemOp op = MemOp::kRead;
  PhysAddr addr = 0;
  CachingHint hint = CachingHint::kRdLineI;
  Channel channel = Channel::kAuto;
  std::uint64_t issue_cycle = 0;
};

struct DmaCompletion {
  std::uint64_t issue_cycle = 0;
  std::uint64_t completion_cycle = 0;
  Channel channel = Channel::kPcieA;
  Tier tier = Tier::kDram;
};

enum class ChannelPolicy { kAuto, kAlternatePcie, kUpi };

std::string_view to_string(ChannelPolicy p);
ChannelPolicy parse_channel_policy(std::string_view s);

struct StreamResult {
  double first_issue_cycle = 0;
  double last_issue_cycle = 0;
  std::uint64_t requests = 0;
  std::uint64_t dram_requests = 0;
};

class Fabric {
 public:
  Fabric(FabricConfig config, Simulation& sim, CacheHierarchy& cache,
         Dram& dram);

  const FabricConfig& config() const { return config_; }
  const ClockDomain& fpga_domain() const { return config_.fpga; }

  SharedBuffer alloc_buffer(std::uint64_t size);

  void attach(MmioDevice* device) { device_ = device; }
  std::uint64_t mmio_read(std::uint32_t offset, unsigned width);
  void mmio_write(std::uint32_t offset, unsigned width, std::uint64_t value);

  DmaCompletion dma_submit(const DmaRequest& req);

  // `count` reads round-robin over `targets`, issued back to back from
  // `start_cycle` as fast as the channels drain. DRAM-served reads are
  // handed to the DRAM as one aggregated batch.
  StreamResult dma_read_stream(std::span<const PhysAddr> targets,
                               std::uint64_t count, CachingHint hint,
                               ChannelPolicy policy, double start_cycle);

  std::uint64_t hw_timer_read() const {
    return sim_.clock().cycles(config_.fpga);
  }

  std::size_t occupancy(std::uint64_t at_cycle);
  std::size_t peak_occupancy() const { return peak_occupancy_; }
  bool channel_available(Channel c) const;

 private:
  struct ChannelState {
    double next_issue = 0;
  };

  Channel resolve(Channel requested);
  const ChannelConfig& channel_config(Channel c) const {
    return c == Channel::kUpi ? config_.upi : config_.pcie;
  }
  const Distribution& tier_latency(Channel c, Tier t) const;
  std::vector<Channel> policy_channels(ChannelPolicy p) const;

  FabricConfig config_;
  Simulation& sim_;
  CacheHierarchy& cache_;
  Dram& dram_;
  SeededRng rng_;
  SeededRng alloc_rng_;
  MmioDevice* device_ = nullptr;
  std::map<Channel, ChannelState> channels_;
  std::size_t rr_ = 0;
  std::deque<std::uint64_t> in_flight_;  // completion cycles, ascending
  std::size_t peak_occupancy_ = 0;
  std::map<PhysAddr, std::uint64_t> allocations_;  // base -> length
  PhysAddr page_cursor_ = 0;
  PhysAddr page_chunk_end_ = 0;
};

}  // namespace hammerlab
