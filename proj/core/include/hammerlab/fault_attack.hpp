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
#include <string_view>
#include <vector>

#include "hammerlab/platform.hpp"
#include "hammerlab/rsa.hpp"

namespace hammerlab {

enum class Attacker { kCpu, kFpga };

std::string_view to_string(Attacker a);
Attacker parse_attacker(std::string_view s);

struct FaultAttackConfig {
  double eviction_interval_ms = 96;
  std::uint32_t max_signatures = 1000;
  Attacker attacker = Attacker::kFpga;
  // Victim rows to draw from; empty means a random vulnerable row per trial.
  std::vector<DramLocation> target_rows;
  std::uint32_t offsets = 64;
  std::uint32_t offset_bits = 1024;
  // Time between two signatures of the victim loop.
  double signature_period_ms = 2.2094;
  bool verify_countermeasure = false;
  bool blinding = true;
  // Log-normal spread of the attacker's activation rate, redrawn for every
  // stretch between two victim reloads (calibration, per attacker).
  double cpu_rate_jitter = 0.1927;
  double fpga_rate_jitter = 0.2168;

  double rate_jitter() const {
    return attacker == Attacker::kCpu ? cpu_rate_jitter : fpga_rate_jitter;
  }

  void validate(const DramGeometry& geom) const;
};

struct FaultAttackRecord {
  std::optional<std::uint32_t> signatures_to_fault;
  bool recovered = false;
  bool fault_withheld = false;
  DramLocation victim;
  std::uint32_t offset = 0;
};

// Key plus the fixed message the victim signs and its correct signature.
struct VictimKey {
  RsaKey key;
  BigInt message;
  BigInt reference;
};

VictimKey make_victim_key(unsigned bits, SeededRng& rng);

// Runs fault-attack trials on one machine. Trials are laid out on disjoint
// time slots so that trial i of two runners differing only in the eviction
// interval sees the same victim placement and flush phase.
class FaultAttackRunner {
 public:
  FaultAttackRunner(System& sys, FaultAttackConfig cfg);

  const FaultAttackConfig& config() const { return cfg_; }
  // Attacker activations per second on a same-bank aggressor pair.
  double hammer_rate() const { return rate_; }
  Picoseconds slot_ps() const { return slot_ps_; }

  FaultAttackRecord run(const VictimKey& key, std::uint64_t trial);

 private:
  DramLocation pick_victim(SeededRng& rng);

  System& sys_;
  FaultAttackConfig cfg_;
  double rate_ = 0;
  Picoseconds origin_ps_ = 0;
  Picoseconds slot_ps_ = 0;
};

// One trial against a freshly built machine.
FaultAttackRecord fault_attack_run(const FaultAttackConfig& cfg,
                                   const VictimKey& key,
                                   const PlatformConfig& platform,
                                   std::uint64_t seed);

struct FaultSweepCell {
  double interval_ms = 0;
  Attacker attacker = Attacker::kFpga;
  std::uint32_t trials = 0;
  std::uint32_t successes = 0;
  std::uint32_t faults = 0;
  double mean_signatures = 0;  // over successful trials; NaN if none
  double success_rate = 0;
  double hammer_rate = 0;
};

struct FaultSweepConfig {
  std::vector<double> intervals_ms{16, 32, 48, 64, 96, 128, 256};
  std::vector<Attacker> attackers{Attacker::kCpu, Attacker::kFpga};
  std::uint32_t trials = 1000;
  std::uint32_t key_pool = 8;
  unsigned key_bits = 2048;
  FaultAttackConfig base;
};

std::vector<FaultSweepCell> fault_sweep(const FaultSweepConfig& cfg,
                                        const PlatformConfig& platform,
                                        std::uint64_t seed);

}  // namespace hammerlab
