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

#include "hammerlab/afu.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hammerlab {

double covert_sender_bound_bps(std::uint64_t fpga_hz,
                               std::uint64_t spacing_cycles) {
  if (spacing_cycles == 0) fail(ErrorKind::kConfig, "zero write spacing");
  return static_cast<double>(fpga_hz) / static_cast<double>(spacing_cycles);
}

namespace {

bool is_mapped(std::uint32_t offset) {
  if (offset <= hammer_reg::kErrorCode) return true;
  if (offset >= covert_reg::kTargetLine && offset <= covert_reg::kPhase + 1) {
    return true;
  }
  return offset >= covert_reg::kPayload;
}

}  // namespace

Afu::Afu(Simulation& sim, Fabric& fabric)
    : sim_(sim), fabric_(fabric), regs_(kMmioWords, 0) {
  regs_[covert_reg::kWritesPerOne] = 3;
  set64(covert_reg::kPhase, ~0ULL);
}

std::uint64_t Afu::reg64(std::uint32_t offset) const {
  return std::uint64_t{regs_[offset]} | (std::uint64_t{regs_[offset + 1]} << 32);
}

void Afu::set64(std::uint32_t offset, std::uint64_t v) {
  regs_[offset] = static_cast<std::uint32_t>(v);
  regs_[offset + 1] = static_cast<std::uint32_t>(v >> 32);
}

std::optional<std::uint64_t> Afu::mmio_read(std::uint32_t offset,
                                            unsigned width) {
  if (!is_mapped(offset)) return std::nullopt;
  if (width == 64) return reg64(offset);
  return regs_[offset];
}

void Afu::mmio_write(std::uint32_t offset, unsigned width, std::uint64_t value) {
  if (!is_mapped(offset)) return;
  const bool read_only = offset == hammer_reg::kStatus ||
                         (offset >= hammer_reg::kRemaining &&
                          offset < hammer_reg::kChannelPolicy) ||
                         offset == hammer_reg::kErrorCode ||
                         offset == covert_reg::kStatus;
  if (read_only) return;
  if (width == 64) {
    set64(offset, value);
  } else {
    regs_[offset] = static_cast<std::uint32_t>(value);
  }
  if (offset == hammer_reg::kControl && (value & 1U)) start_hammer();
  if (offset == covert_reg::kControl && (value & 1U)) start_covert();
}

void Afu::start_hammer() {
  regs_[hammer_reg::kControl] = 0;
  const PhysAddr a = reg64(hammer_reg::kTargetA);
  const PhysAddr b = reg64(hammer_reg::kTargetB);
  const std::uint32_t policy = regs_[hammer_reg::kChannelPolicy];
  std::uint32_t err = 0;
  if (a == 0) err = 1;
  else if (a % 64 != 0 || b % 64 != 0) err = 2;
  else if (policy > 2) err = 3;
  if (err != 0) {
    regs_[hammer_reg::kStatus] = kStatusError;
    regs_[hammer_reg::kErrorCode] = err;
    return;
  }
  regs_[hammer_reg::kErrorCode] = 0;
  const std::uint64_t total = reg64(hammer_reg::kTotal);
  set64(hammer_reg::kRemaining, total);
  set64(hammer_reg::kSendCycles, 0);
  if (total == 0) {
    regs_[hammer_reg::kStatus] = kStatusDone;
    return;
  }
  regs_[hammer_reg::kStatus] = kStatusBusy;
  cursor_ = static_cast<double>(sim_.clock().cycles(fabric_.fpga_domain()));
  first_issue_ = -1;
  sim_.schedule(sim_.now(), "afu", [this] { hammer_step(); });
}

void Afu::hammer_step() {
  const PhysAddr a = reg64(hammer_reg::kTargetA);
  const PhysAddr b = reg64(hammer_reg::kTargetB);
  std::vector<PhysAddr> targets{a};
  if (b != 0) targets.push_back(b);
  const auto policy = static_cast<ChannelPolicy>(regs_[hammer_reg::kChannelPolicy]);
  std::uint64_t remaining = reg64(hammer_reg::kRemaining);
  const std::uint64_t n = std::min(remaining, chunk_);
  const StreamResult res = fabric_.dma_read_stream(
      targets, n, CachingHint::kRdLineI, policy, cursor_);
  if (first_issue_ < 0) first_issue_ = res.first_issue_cycle;
  remaining -= n;
  set64(hammer_reg::kRemaining, remaining);
  cursor_ = res.last_issue_cycle;
  if (remaining == 0) {
    set64(hammer_reg::kSendCycles,
          static_cast<std::uint64_t>(std::llround(res.last_issue_cycle - first_issue_)));
    regs_[hammer_reg::kStatus] = kStatusDone;
    return;
  }
  const Picoseconds next =
      std::max(sim_.now(), cycles_to_ps(fabric_.fpga_domain(), res.last_issue_cycle));
  sim_.schedule(next, "afu", [this] { hammer_step(); });
}

void Afu::start_covert() {
  regs_[covert_reg::kControl] = 0;
  const PhysAddr line = reg64(covert_reg::kTargetLine);
  const std::uint64_t period = reg64(covert_reg::kBitPeriod);
  const std::uint32_t nbits = regs_[covert_reg::kPayloadBits];
  const std::uint32_t w = regs_[covert_reg::kWritesPerOne];
  if (period == 0 || w == 0 || line % 64 != 0 || nbits > covert_reg::kMaxPayloadBits ||
      period < std::uint64_t{w} * kMinWriteSpacingCycles) {
    regs_[covert_reg::kStatus] = kStatusError;
    return;
  }
  std::uint64_t phase = reg64(covert_reg::kPhase);
  if (phase == ~0ULL) phase = period / (4ULL * w);
  const auto& fpga = fabric_.fpga_domain();
  const std::uint64_t base = sim_.clock().cycles(fpga) + 1;
  regs_[covert_reg::kStatus] = kStatusBusy;
  for (std::uint32_t j = 0; j < nbits; ++j) {
    const bool one = (regs_[covert_reg::kPayload + j / 32] >> (j % 32)) & 1U;
    if (!one) continue;
    for (std::uint32_t r = 0; r < w; ++r) {
      const std::uint64_t cycle = base + j * period + phase + r * period / w;
      sim_.schedule(cycles_to_ps(fpga, cycle), "afu",
                    [this, line, cycle] { covert_write(line, cycle); });
    }
  }
  sim_.schedule(cycles_to_ps(fpga, base + nbits * period), "afu",
                [this] { regs_[covert_reg::kStatus] = kStatusDone; });
  set64(covert_reg::kPhase, ~0ULL);
}

void Afu::covert_write(PhysAddr line, std::uint64_t cycle) {
  DmaRequest req;
  req.op = MemOp::kWrite;
  req.addr = line;
  req.hint = CachingHint::kWrPushI;
  req.channel = Channel::kAuto;
  req.issue_cycle = cycle;
  fabric_.dma_submit(req);
  ++writes_issued_;
}

// ---------------------------------------------------------------------------

HammerStatus hammer_status(Fabric& fabric) {
  HammerStatus st;
  const auto status = fabric.mmio_read(hammer_reg::kStatus, 32);
  st.remaining = fabric.mmio_read(hammer_reg::kRemaining, 64);
  st.total_send_cycles = fabric.mmio_read(hammer_reg::kSendCycles, 64);
  st.done = status & kStatusDone;
  st.error = status & kStatusError;
  return st;
}

HammerStatus hammer_run(Simulation& sim, Fabric& fabric,
                        const HammerConfig& cfg) {
  fabric.mmio_write(hammer_reg::kTargetA, 64, cfg.target_a);
  fabric.mmio_write(hammer_reg::kTargetB, 64, cfg.target_b);
  fabric.mmio_write(hammer_reg::kTotal, 64, cfg.total_accesses);
  fabric.mmio_write(hammer_reg::kChannelPolicy, 32,
                    static_cast<std::uint32_t>(cfg.channel_policy));
  fabric.mmio_write(hammer_reg::kControl, 32, 1);
  HammerStatus st = hammer_status(fabric);
  if (st.error) {
    fail(ErrorKind::kConfig,
         fmt::format("hammer AFU rejected its configuration (code {})",
                     fabric.mmio_read(hammer_reg::kErrorCode, 32)));
  }
  sim.run();
  return hammer_status(fabric);
}

std::uint64_t covert_send(Simulation& sim, Fabric& fabric,
                          const CovertSendConfig& cfg) {
  if (cfg.bit_period_cycles == 0) {
    fail(ErrorKind::kConfig, "covert bit period must be > 0");
  }
  if (cfg.payload.size() > covert_reg::kMaxPayloadBits) {
    fail(ErrorKind::kConfig, "covert payload too long");
  }
  fabric.mmio_write(covert_reg::kTargetLine, 64, cfg.target_line);
  fabric.mmio_write(covert_reg::kBitPeriod, 64, cfg.bit_period_cycles);
  fabric.mmio_write(covert_reg::kWritesPerOne, 32, cfg.writes_per_one);
  fabric.mmio_write(covert_reg::kPhase, 64,
                    cfg.phase_cycles < 0 ? ~0ULL
                                         : static_cast<std::uint64_t>(cfg.phase_cycles));
  fabric.mmio_write(covert_reg::kPayloadBits, 32,
                    static_cast<std::uint32_t>(cfg.payload.size()));
  for (std::size_t w = 0; w * 32 < cfg.payload.size(); ++w) {
    std::uint32_t word = 0;
    for (std::size_t i = 0; i < 32 && w * 32 + i < cfg.payload.size(); ++i) {
      if (cfg.payload[w * 32 + i]) word |= 1U << i;
    }
    fabric.mmio_write(covert_reg::kPayload + static_cast<std::uint32_t>(w), 32, word);
  }
  const std::uint64_t base = sim.clock().cycles(fabric.fpga_domain()) + 1;
  fabric.mmio_write(covert_reg::kControl, 32, 1);
  if (fabric.mmio_read(covert_reg::kStatus, 32) & kStatusError) {
    fail(ErrorKind::kConfig, "covert sender rejected its configuration");
  }
  return base;
}

}  // namespace hammerlab
