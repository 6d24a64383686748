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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hammerlab/fabric.hpp"

namespace hammerlab {

// MMIO word offsets of the hammering AFU.
namespace hammer_reg {
inline constexpr std::uint32_t kTargetA = 0x00;
inline constexpr std::uint32_t kTargetB = 0x02;
inline constexpr std::uint32_t kTotal = 0x04;
inline constexpr std::uint32_t kControl = 0x06;  // bit0 = start
inline constexpr std::uint32_t kStatus = 0x07;   // bit0 busy, bit1 done, bit2 error
inline constexpr std::uint32_t kRemaining = 0x08;
inline constexpr std::uint32_t kSendCycles = 0x0A;
inline constexpr std::uint32_t kChannelPolicy = 0x0C;  // 0 auto, 1 alt-pcie, 2 upi
inline constexpr std::uint32_t kErrorCode = 0x0D;
}  // namespace hammer_reg

// MMIO word offsets of the covert-channel sender AFU.
namespace covert_reg {
inline constexpr std::uint32_t kTargetLine = 0x10;
inline constexpr std::uint32_t kBitPeriod = 0x12;
inline constexpr std::uint32_t kPayloadBits = 0x14;
inline constexpr std::uint32_t kControl = 0x15;  // bit0 = start
inline constexpr std::uint32_t kStatus = 0x16;   // bit0 busy, bit1 done, bit2 error
inline constexpr std::uint32_t kWritesPerOne = 0x17;
inline constexpr std::uint32_t kPhase = 0x18;  // 64-bit, all-ones = default
inline constexpr std::uint32_t kPayload = 0x20;  // 32 payload bits per word, LSB first
inline constexpr std::uint32_t kMaxPayloadBits = (kMmioWords - kPayload) * 32;
}  // namespace covert_reg

inline constexpr std::uint32_t kStatusBusy = 1U << 0;
inline constexpr std::uint32_t kStatusDone = 1U << 1;
inline constexpr std::uint32_t kStatusError = 1U << 2;

struct HammerConfig {
  PhysAddr target_a = 0;
  PhysAddr target_b = 0;  // 0 selects single-sided hammering
  std::uint64_t total_accesses = 0;
  ChannelPolicy channel_policy = ChannelPolicy::kAuto;
};

struct HammerStatus {
  std::uint64_t remaining = 0;
  std::uint64_t total_send_cycles = 0;
  bool done = false;
  bool error = false;
};

struct CovertSendConfig {
  PhysAddr target_line = 0;
  std::uint64_t bit_period_cycles = 0;
  std::uint32_t writes_per_one = 3;
  // Offset of the first write inside a bit period; negative selects
  // period / (4 * writes_per_one).
  std::int64_t phase_cycles = -1;
  std::vector<bool> payload;
};

// Minimum FPGA cycles between two writes that keeps the transaction
// buffer from filling.
inline constexpr std::uint64_t kMinWriteSpacingCycles = 10;

// Upper bound of the sender for an all-ones payload with one write per bit.
double covert_sender_bound_bps(std::uint64_t fpga_hz,
                               std::uint64_t spacing_cycles = kMinWriteSpacingCycles);

class Afu : public MmioDevice {
 public:
  Afu(Simulation& sim, Fabric& fabric);

  std::optional<std::uint64_t> mmio_read(std::uint32_t offset,
                                         unsigned width) override;
  void mmio_write(std::uint32_t offset, unsigned width,
                  std::uint64_t value) override;

  // Hammering engine. Requests are issued in chunks so that MMIO polls can
  // interleave with a running job.
  void set_chunk(std::uint64_t requests) { chunk_ = requests == 0 ? 1 : requests; }
  std::uint64_t writes_issued() const { return writes_issued_; }

 private:
  std::uint64_t reg64(std::uint32_t offset) const;
  void set64(std::uint32_t offset, std::uint64_t v);
  void start_hammer();
  void hammer_step();
  void start_covert();
  void covert_write(PhysAddr line, std::uint64_t cycle);

  Simulation& sim_;
  Fabric& fabric_;
  std::vector<std::uint32_t> regs_;
  std::uint64_t chunk_ = 1ULL << 22;
  double cursor_ = 0;
  double first_issue_ = -1;
  std::uint64_t writes_issued_ = 0;
};

// Programs the AFU through MMIO, starts it and runs the timeline until the
// job completes.
HammerStatus hammer_run(Simulation& sim, Fabric& fabric, const HammerConfig& cfg);
// Reads the hammer status registers.
HammerStatus hammer_status(Fabric& fabric);

// Programs and starts the sender; writes are scheduled on the timeline from
// the current time. Returns the cycle at which bit 0 starts.
std::uint64_t covert_send(Simulation& sim, Fabric& fabric,
                          const CovertSendConfig& cfg);

}  // namespace hammerlab
