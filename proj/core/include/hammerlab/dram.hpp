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

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "hammerlab/simcore.hpp"

namespace hammerlab {

using PhysAddr = std::uint64_t;

struct DramGeometry {
  std::uint32_t banks = 16;
  std::uint32_t rows_per_bank = 65536;
  std::uint32_t row_bytes = 8192;

  std::uint64_t capacity_bytes() const {
    return std::uint64_t{banks} * rows_per_bank * row_bytes;
  }
  std::uint64_t total_rows() const {
    return std::uint64_t{banks} * rows_per_bank;
  }
  void validate() const;
};

struct DramLocation {
  std::uint32_t bank = 0;
  std::uint32_t row = 0;
  std::uint32_t column = 0;

  auto operator<=>(const DramLocation&) const = default;
};

struct BitSpan {
  unsigned lo = 0;
  unsigned width = 0;
};

// Physical address -> (bank, row, column). Column bits are the lowest
// log2(row_bytes) bits, the bank field sits directly above them and the row
// field above that. Bank bit i is the parity of (addr & bank_xor_masks[i]);
// each mask must contain bank-field bit i and may otherwise only touch row
// bits, which keeps the map a bijection.
class AddressMap {
 public:
  AddressMap(const DramGeometry& geom, std::vector<std::uint64_t> masks);

  // Plain bit slicing, no XOR folding.
  static AddressMap linear(const DramGeometry& geom);
  // Bank bit i additionally folds in row bit i (DRAMA-style functions).
  static AddressMap xor_default(const DramGeometry& geom);

  const std::vector<std::uint64_t>& bank_xor_masks() const { return masks_; }
  BitSpan column_bits() const { return column_; }
  BitSpan bank_bits() const { return bank_; }
  BitSpan row_bits() const { return row_; }

  DramLocation map(PhysAddr addr) const;
  PhysAddr unmap(const DramLocation& loc) const;

 private:
  DramGeometry geom_;
  std::vector<std::uint64_t> masks_;
  BitSpan column_;
  BitSpan bank_;
  BitSpan row_;
};

DramLocation map_address(PhysAddr addr, const AddressMap& map,
                         const DramGeometry& geom);

// Disturbance model. Values marked "calibration" in the shipped config are
// fitted to attack-level results, not derived from device physics.
struct FlipModel {
  double vulnerable_row_fraction = 0.05;
  Distribution cells_per_vulnerable_row =
      Distribution::tnormal(96, 12, 60, 140);
  // Weighted activations of neighbouring rows within one window.
  Distribution per_cell_threshold = Distribution::lognormal(13.2242, 0.0628);
  // Minimum disturbed time inside one window, in milliseconds.
  Distribution per_cell_exposure_ms = Distribution::lognormal(4.005, 0.14);
  // Log-scale sd of the per-window multiplicative jitter, truncated at 3 sd.
  double threshold_jitter = 0.0105;
  double secondary_coupling = 0.02;

  void validate() const;
  // No cell can flip in a window with fewer weighted activations than this.
  double min_activation_threshold() const;
};

struct RefreshPolicy {
  Picoseconds period_ps = 64 * kPsPerMs;
  // Per-row phase offsets spread evenly over the period instead of one
  // all-rows tick.
  bool staggered = false;
  Picoseconds phase_ps = 0;

  void validate() const;
};

enum class LatencyClass { kRowHit, kRowMiss, kRowConflict };
enum class AccessKind { kRead, kWrite };

std::string_view to_string(LatencyClass c);

struct DramTiming {
  // Idle time after which an open row is precharged; 0 keeps rows open.
  Picoseconds row_close_ps = 40'000;
  // CPU-cycle cost of each latency class as seen by a timing probe.
  Distribution row_hit_cycles = Distribution::uniform(150, 158);
  Distribution row_miss_cycles = Distribution::uniform(168, 178);
  Distribution row_conflict_cycles = Distribution::uniform(196, 210);
};

struct DramConfig {
  DramGeometry geometry;
  std::optional<std::vector<std::uint64_t>> bank_xor_masks;
  FlipModel flip;
  RefreshPolicy refresh;
  DramTiming timing;
};

struct VulnerableCell {
  std::uint32_t byte_offset = 0;
  std::uint8_t bit = 0;
  // Stored value that can be disturbed into its complement.
  std::uint8_t charged_value = 1;
  double threshold = 0;
  Picoseconds exposure_ps = 0;
};

struct BitFlip {
  std::uint32_t byte_offset = 0;
  std::uint8_t bit = 0;
  std::uint8_t from = 1;
  std::uint8_t to = 0;
  Picoseconds when = 0;
};

struct RowState {
  Picoseconds window_start_ps = 0;
  // Weighted activations of the row above / below within the window.
  double upper = 0.0;
  double lower = 0.0;
  std::map<std::uint64_t, BitFlip> flipped_bits;  // key: byte*8 + bit

  double disturbance() const { return upper + lower; }
};

class Dram {
 public:
  Dram(DramConfig config, std::uint64_t seed);

  const DramGeometry& geometry() const { return config_.geometry; }
  const AddressMap& address_map() const { return map_; }
  const DramConfig& config() const { return config_; }

  DramLocation locate(PhysAddr addr) const;
  PhysAddr address_of(const DramLocation& loc) const { return map_.unmap(loc); }

  // Single activation-level access.
  LatencyClass access(std::uint32_t bank, std::uint32_t row, Picoseconds when,
                      AccessKind kind);

  // `count` accesses spread evenly over [t1, t2], round-robin over
  // `aggressors` (all in one bank). Flips are evaluated per refresh window
  // from activation counts. Returns activations performed.
  std::uint64_t hammer_batch(std::span<const DramLocation> aggressors,
                             std::uint64_t count, Picoseconds t1,
                             Picoseconds t2);

  // Applies every refresh due up to `when`; returns rows refreshed.
  std::uint64_t refresh_tick(Picoseconds when);

  std::vector<std::uint8_t> read_bits(PhysAddr addr, std::size_t len,
                                      Picoseconds when);
  void write_bits(PhysAddr addr, std::span<const std::uint8_t> data,
                  Picoseconds when);

  // Ground truth for oracles and reporting.
  const std::vector<VulnerableCell>& cells_of(std::uint32_t bank,
                                              std::uint32_t row);
  bool is_vulnerable(std::uint32_t bank, std::uint32_t row);
  const RowState* row_state(std::uint32_t bank, std::uint32_t row) const;
  std::size_t flips_in_row(std::uint32_t bank, std::uint32_t row) const;
  std::uint64_t total_flips() const;
  std::uint64_t total_activations() const { return activations_; }
  std::optional<std::uint32_t> open_row(std::uint32_t bank) const;

  double sample_class_cycles(LatencyClass c, SeededRng& rng) const;

 private:
  struct BankState {
    std::optional<std::uint32_t> open_row;
    Picoseconds last_access_ps = 0;
  };
  struct CellSet {
    bool vulnerable = false;
    std::vector<VulnerableCell> cells;
  };

  std::uint64_t key(std::uint32_t bank, std::uint32_t row) const {
    return std::uint64_t{bank} * config_.geometry.rows_per_bank + row;
  }
  void check_location(std::uint32_t bank, std::uint32_t row) const;
  void check_range(PhysAddr addr, std::size_t len) const;
  Picoseconds last_refresh_at_or_before(std::uint64_t row_key,
                                        Picoseconds t) const;
  Picoseconds refresh_phase(std::uint64_t row_key) const;
  RowState& sync_row(std::uint32_t bank, std::uint32_t row, Picoseconds t);
  void restart_window(RowState& rs, Picoseconds t);
  double jitter(std::uint64_t row_key, std::size_t cell,
                Picoseconds window_start) const;
  std::uint8_t stored_bit(std::uint64_t row_key, std::uint32_t byte,
                          std::uint8_t bit) const;
  void evaluate_flips(std::uint32_t bank, std::uint32_t row, RowState& rs,
                      Picoseconds t);
  void evaluate_linear(std::uint32_t bank, std::uint32_t row, RowState& rs,
                       double rate_per_ps, Picoseconds a, Picoseconds b);
  void disturb(std::uint32_t bank, std::uint32_t aggressor, Picoseconds when);
  LatencyClass touch_row_buffer(std::uint32_t bank, std::uint32_t row,
                                Picoseconds when);

  DramConfig config_;
  AddressMap map_;
  std::uint64_t seed_;
  std::vector<BankState> banks_;
  std::unordered_map<std::uint64_t, RowState> rows_;
  std::unordered_map<std::uint64_t, CellSet> cells_;
  std::unordered_map<std::uint64_t, std::vector<std::uint8_t>> data_;
  Picoseconds last_tick_ps_ = 0;
  std::uint64_t activations_ = 0;
};

}  // namespace hammerlab
