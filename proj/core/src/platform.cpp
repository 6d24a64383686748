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

#include "hammerlab/platform.hpp"

#include <fmt/format.h>

namespace hammerlab {

PlatformConfig platform_preset(const std::string& name) {
  PlatformConfig p;
  p.name = name;
  p.cache.slice_masks = default_slice_masks();
  if (name == "pac") return p;
  if (name == "pac-r720") {
    // Xeon E5-2670 v2 pinned at 2.5 GHz with DDR3-1600.
    p.cpu.clock = {"cpu", 2'500'000'000ULL};
    p.cpu.loop_overhead = Distribution::point(7.4);
    p.dram.timing.row_hit_cycles = Distribution::uniform(110, 116);
    p.dram.timing.row_miss_cycles = Distribution::uniform(145, 155);
    p.dram.timing.row_conflict_cycles = Distribution::uniform(165, 175);
    p.cache.latency.dram = Distribution::uniform(145, 155);
    p.cache.latency.flush_base = Distribution::tnormal(296, 6, 280, 312);
    return p;
  }
  if (name == "integrated") {
    p.cache.fpga.present = true;
    p.fabric.platform = "integrated";
    p.fabric.fpga = {"fpga", 400'000'000ULL};
    p.fabric.channels = {Channel::kUpi, Channel::kPcieA, Channel::kPcieB};
    p.fabric.pcie.llc = Distribution::uniform(278, 290);
    p.fabric.pcie.dram = Distribution::uniform(296, 316);
    p.fabric.pcie.pipelining = 4.94;
    p.fabric.upi.fpga_cache = Distribution::uniform(20, 28);
    p.fabric.upi.llc = Distribution::uniform(90, 100);
    p.fabric.upi.dram = Distribution::uniform(130, 150);
    p.fabric.upi.pipelining = 2.26;
    return p;
  }
  fail(ErrorKind::kConfig, fmt::format("unknown platform '{}'", name));
}

System::System(const PlatformConfig& config, std::uint64_t seed)
    : sim(seed),
      dram(config.dram, hash_combine(seed, hash_name("dram"))),
      cache(config.cache, &dram, hash_combine(seed, hash_name("cache"))),
      fabric(config.fabric, sim, cache, dram),
      afu(sim, fabric),
      config_(config),
      seed_(seed) {
  config_.cpu.clock.validate();
  fabric.attach(&afu);
}

}  // namespace hammerlab
