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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hammerlab/attacks.hpp"
#include "hammerlab/fault_attack.hpp"
#include "hammerlab/platform.hpp"

namespace hammerlab {

// Knobs of the individual experiments (section "exp.").
struct ExperimentParams {
  std::uint64_t hammer_count = 2'000'000'000;
  std::uint32_t runs = 20;
  std::uint32_t flip_rows = 32;
  std::vector<std::uint64_t> hammer_counts{1'000'000,   10'000'000,  50'000'000,
                                           100'000'000, 250'000'000, 500'000'000,
                                           1'000'000'000, 2'000'000'000};
  std::uint32_t covert_messages = 10;
  std::uint32_t covert_bytes = 1024;
  std::uint64_t covert_bit_period_cycles = 4211;
  std::uint64_t evset_buffer_bytes = 64ULL << 20;
  std::uint32_t evset_targets = 100;
  std::uint64_t latency_samples = 100'000;
  std::uint32_t bellcore_keys = 4;
  std::uint32_t bellcore_bits = 512;
  ChannelDecodeConfig decode;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 1;
  PlatformConfig platform = platform_preset("pac");
  FaultSweepConfig sweep;
  ExperimentParams exp;

  // Every key with its resolved value, sorted, one "key=value" per line.
  std::string resolved() const;
  // FNV-1a 64 of resolved().
  std::uint64_t hash() const;
};

// Parses "key=value" lines ('#' starts a comment). `platform` selects the
// preset that the remaining keys modify; overrides apply after the file.
// Throws kConfig on unknown keys or malformed values.
ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides = {});

std::vector<std::string> config_keys();

std::uint64_t fnv1a64(std::string_view data);

}  // namespace hammerlab
