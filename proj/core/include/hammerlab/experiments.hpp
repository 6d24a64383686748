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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hammerlab/config.hpp"

namespace hammerlab {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentOutput {
  CsvTable table;
  // Human-readable result lines for the run log.
  std::vector<std::string> summary;
};

const std::vector<std::string>& experiment_names();
// Documented CSV header of an experiment; throws kConfig for unknown names.
std::vector<std::string> experiment_columns(std::string_view name);

// Runs cfg.experiment on fresh machines. Throws kConfig for unknown names.
ExperimentOutput run_experiment(const ExperimentConfig& cfg);

// Deterministic rendering: header line, comma separated, '\n' terminated.
std::string render_csv(const CsvTable& table);
void emit_csv(const CsvTable& table, const std::filesystem::path& path);

// Fixed formatting of CSV cells.
std::string csv_number(double v);

// ---------------------------------------------------------------------------
// Latency samplers. Each sample first puts a fresh line into the requested
// state, then times one access through the model.

enum class SampleKind {
  kCpuPrivate,
  kCpuLlc,
  kCpuDram,
  kCpuFpgaCache,
  kFlushPlain,
  kFlushFpga,
  kFpgaLlc,
  kFpgaDram,
  kFpgaFpgaCache,
};

std::string_view to_string(SampleKind k);

struct LatencySample {
  double cycles = 0;
  Tier tier = Tier::kDram;  // tier that served the timed access
};

class LatencySampler {
 public:
  LatencySampler(System& sys, std::uint64_t pool_bytes = 256ULL << 20);

  // FPGA-side kinds use `channel` (kAuto picks the platform default).
  std::vector<LatencySample> sample(SampleKind kind, std::size_t n,
                                    Channel channel = Channel::kAuto);

 private:
  PhysAddr next_line();
  LatencySample fpga_read(PhysAddr a, CachingHint hint, Channel ch);

  System& sys_;
  SharedBuffer pool_;
  std::uint64_t next_ = 0;
  Picoseconds cursor_ = 0;
};

}  // namespace hammerlab
