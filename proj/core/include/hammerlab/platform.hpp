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

#include <memory>
#include <string>

#include "hammerlab/afu.hpp"
#include "hammerlab/cache.hpp"
#include "hammerlab/dram.hpp"
#include "hammerlab/fabric.hpp"
#include "hammerlab/simcore.hpp"

namespace hammerlab {

struct CpuConfig {
  ClockDomain clock{"cpu", 3'400'000'000ULL};
  // Per-iteration bookkeeping of the CPU hammer loop besides read and flush.
  Distribution loop_overhead = Distribution::point(8.8);
  // Fixed cost of one prime+probe pass besides the member loads.
  Distribution probe_overhead = Distribution::point(55);
};

struct PlatformConfig {
  std::string name = "pac";
  DramConfig dram;
  CacheConfig cache;
  FabricConfig fabric;
  CpuConfig cpu;
};

// Known names: pac, pac-r720, integrated.
PlatformConfig platform_preset(const std::string& name);

// One simulated machine: timeline, DRAM, caches, fabric and the AFU.
class System {
 public:
  System(const PlatformConfig& config, std::uint64_t seed);
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  const PlatformConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const ClockDomain& cpu_clock() const { return config_.cpu.clock; }
  Picoseconds cpu_cycles_to_ps(double cycles) const {
    return cycles_to_ps(config_.cpu.clock, cycles);
  }

  Simulation sim;
  Dram dram;
  CacheHierarchy cache;
  Fabric fabric;
  Afu afu;

 private:
  PlatformConfig config_;
  std::uint64_t seed_;
};

}  // namespace hammerlab
