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

#include "hammerlab/dram.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include <fmt/format.h>

namespace hammerlab {

namespace {

bool is_pow2(std::uint64_t v) { return v != 0 && (v & (v - 1)) == 0; }

unsigned log2u(std::uint64_t v) {
  return static_cast<unsigned>(std::countr_zero(v));
}

std::uint64_t mask_of(BitSpan s) {
  if (s.width == 0) return 0;
  return ((s.width >= 64) ? ~0ULL : ((1ULL << s.width) - 1)) << s.lo;
}

unsigned parity(std::uint64_t v) {
  return static_cast<unsigned>(std::popcount(v) & 1);
}

}  // namespace

std::string_view to_string(LatencyClass c) {
  switch (c) {
    case LatencyClass::kRowHit: return "row-hit";
    case LatencyClass::kRowMiss: return "row-miss";
    case LatencyClass::kRowConflict: return "row-conflict";
  }
  return "?";
}

void DramGeometry::validate() const {
  if (!is_pow2(banks) || !is_pow2(rows_per_bank)) {
    fail(ErrorKind::kConfig, "banks and rows_per_bank must be powers of two");
  }
  if (!is_pow2(row_bytes) || row_bytes % 64 != 0) {
    fail(ErrorKind::kConfig,
         "row_bytes must be a power of two and a multiple of 64");
  }
}

AddressMap::AddressMap(const DramGeometry& geom,
                       std::vector<std::uint64_t> masks)
    : geom_(geom), masks_(std::move(masks)) {
  geom_.validate();
  column_ = {0, log2u(geom_.row_bytes)};
  bank_ = {column_.width, log2u(geom_.banks)};
  row_ = {column_.width + bank_.width, log2u(geom_.rows_per_bank)};
  if (masks_.size() != bank_.width) {
    fail(ErrorKind::kConfig,
         fmt::format("expected {} bank masks, got {}", bank_.width,
                     masks_.size()));
  }
  const std::uint64_t bank_field = mask_of(bank_);
  const std::uint64_t row_field = mask_of(row_);
  for (unsigned i = 0; i < masks_.size(); ++i) {
    const std::uint64_t m = masks_[i];
    if ((m & bank_field) != (1ULL << (bank_.lo + i))) {
      fail(ErrorKind::kConfig,
           fmt::format("bank mask {} must select exactly bank bit {}", i, i));
    }
    if ((m & ~(bank_field | row_field)) != 0) {
      fail(ErrorKind::kConfig,
           fmt::format("bank mask {:#x} touches column or out-of-range bits",
                       m));
    }
  }
}

AddressMap AddressMap::linear(const DramGeometry& geom) {
  geom.validate();
  const unsigned c = log2u(geom.row_bytes);
  std::vector<std::uint64_t> masks;
  for (unsigned i = 0; i < log2u(geom.banks); ++i) {
    masks.push_back(1ULL << (c + i));
  }
  return AddressMap(geom, std::move(masks));
}

AddressMap AddressMap::xor_default(const DramGeometry& geom) {
  geom.validate();
  const unsigned c = log2u(geom.row_bytes);
  const unsigned b = log2u(geom.banks);
  const unsigned r = log2u(geom.rows_per_bank);
  std::vector<std::uint64_t> masks;
  for (unsigned i = 0; i < b; ++i) {
    std::uint64_t m = 1ULL << (c + i);
    if (i < r) m |= 1ULL << (c + b + i);
    masks.push_back(m);
  }
  return AddressMap(geom, std::move(masks));
}

DramLocation AddressMap::map(PhysAddr addr) const {
  if (addr >= geom_.capacity_bytes()) {
    fail(ErrorKind::kAddress,
         fmt::format("address {:#x} beyond capacity {:#x}", addr,
                     geom_.capacity_bytes()));
  }
  DramLocation loc;
  loc.column = static_cast<std::uint32_t>(addr & mask_of(column_));
  loc.row = static_cast<std::uint32_t>((addr & mask_of(row_)) >> row_.lo);
  std::uint32_t bank = 0;
  for (unsigned i = 0; i < masks_.size(); ++i) {
    bank |= parity(addr & masks_[i]) << i;
  }
  loc.bank = bank;
  return loc;
}

PhysAddr AddressMap::unmap(const DramLocation& loc) const {
  if (loc.bank >= geom_.banks || loc.row >= geom_.rows_per_bank ||
      loc.column >= geom_.row_bytes) {
    fail(ErrorKind::kAddress, "dram location out of range");
  }
  PhysAddr base = loc.column | (PhysAddr{loc.row} << row_.lo);
  PhysAddr bank_field = 0;
  for (unsigned i = 0; i < masks_.size(); ++i) {
    const unsigned want = (loc.bank >> i) & 1U;
    const unsigned folded = parity(base & masks_[i]);
    bank_field |= PhysAddr{want ^ folded} << (bank_.lo + i);
  }
  return base | bank_field;
}

DramLocation map_address(PhysAddr addr, const AddressMap& map,
                         const DramGeometry& geom) {
  if (addr >= geom.capacity_bytes()) {
    fail(ErrorKind::kAddress, "address out of range");
  }
  return map.map(addr);
}

void FlipModel::validate() const {
  if (vulnerable_row_fraction < 0.0 || vulnerable_row_fraction > 1.0) {
    fail(ErrorKind::kConfig, "vulnerable_row_fraction must be in [0,1]");
  }
  if (per_cell_threshold.min() < 0.0) {
    fail(ErrorKind::kConfig, "per-cell thresholds must be non-negative");
  }
  if (per_cell_exposure_ms.min() < 0.0 || cells_per_vulnerable_row.min() < 0.0) {
    fail(ErrorKind::kConfig, "negative exposure or cell count support");
  }
  if (threshold_jitter < 0.0 || secondary_coupling < 0.0 ||
      secondary_coupling > 1.0) {
    fail(ErrorKind::kConfig, "bad jitter or secondary coupling");
  }
}

double FlipModel::min_activation_threshold() const {
  return per_cell_threshold.min() * std::exp(-3.0 * threshold_jitter);
}

void RefreshPolicy::validate() const {
  if (period_ps == 0) fail(ErrorKind::kConfig, "refresh period must be > 0");
}

// ---------------------------------------------------------------------------

Dram::Dram(DramConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      map_(config_.bank_xor_masks
               ? AddressMap(config_.geometry, *config_.bank_xor_masks)
               : AddressMap::xor_default(config_.geometry)),
      seed_(seed),
      banks_(config_.geometry.banks) {
  config_.flip.validate();
  config_.refresh.validate();
}

DramLocation Dram::locate(PhysAddr addr) const { return map_.map(addr); }

void Dram::check_location(std::uint32_t bank, std::uint32_t row) const {
  if (bank >= config_.geometry.banks || row >= config_.geometry.rows_per_bank) {
    fail(ErrorKind::kAddress,
         fmt::format("invalid bank/row ({}, {})", bank, row));
  }
}

void Dram::check_range(PhysAddr addr, std::size_t len) const {
  const auto cap = config_.geometry.capacity_bytes();
  if (addr >= cap || len > cap - addr) {
    fail(ErrorKind::kRange,
         fmt::format("range [{:#x}, +{}) outside dram", addr, len));
  }
}

Picoseconds Dram::refresh_phase(std::uint64_t row_key) const {
  const auto& r = config_.refresh;
  Picoseconds phase = r.phase_ps % r.period_ps;
  if (r.staggered) {
    const auto total = config_.geometry.total_rows();
    phase += static_cast<Picoseconds>(
        (static_cast<u128>(row_key) * r.period_ps) / total);
    phase %= r.period_ps;
  }
  return phase;
}

Picoseconds Dram::last_refresh_at_or_before(std::uint64_t row_key,
                                            Picoseconds t) const {
  const Picoseconds period = config_.refresh.period_ps;
  const Picoseconds ph = refresh_phase(row_key);
  if (t < ph) return 0;
  return ph + ((t - ph) / period) * period;
}

void Dram::restart_window(RowState& rs, Picoseconds t) {
  rs.window_start_ps = t;
  rs.upper = 0.0;
  rs.lower = 0.0;
}

RowState& Dram::sync_row(std::uint32_t bank, std::uint32_t row,
                         Picoseconds t) {
  const auto k = key(bank, row);
  auto [it, inserted] = rows_.try_emplace(k);
  RowState& rs = it->second;
  const Picoseconds lr = last_refresh_at_or_before(k, t);
  if (inserted) {
    rs.window_start_ps = lr;
  } else if (rs.window_start_ps < lr) {
    // Close the window that ended at the refresh before resetting.
    if (rs.disturbance() > 0.0) {
      const Picoseconds period = config_.refresh.period_ps;
      Picoseconds end = last_refresh_at_or_before(k, rs.window_start_ps) + period;
      evaluate_flips(bank, row, rs, std::min(end, lr));
    }
    restart_window(rs, lr);
  }
  return rs;
}

double Dram::jitter(std::uint64_t row_key, std::size_t cell,
                    Picoseconds window_start) const {
  const double sigma = config_.flip.threshold_jitter;
  if (sigma == 0.0) return 1.0;
  const std::uint64_t h = hash_combine(
      hash_combine(hash_combine(seed_, row_key), cell), window_start);
  const double z = std::clamp(normal_from_hash(h), -3.0, 3.0);
  return std::exp(sigma * z);
}

std::uint8_t Dram::stored_bit(std::uint64_t row_key, std::uint32_t byte,
                              std::uint8_t bit) const {
  auto it = data_.find(row_key);
  if (it == data_.end()) return 0;
  return static_cast<std::uint8_t>((it->second[byte] >> bit) & 1U);
}

const std::vector<VulnerableCell>& Dram::cells_of(std::uint32_t bank,
                                                  std::uint32_t row) {
  check_location(bank, row);
  const auto k = key(bank, row);
  auto [it, inserted] = cells_.try_emplace(k);
  if (!inserted) return it->second.cells;

  CellSet& set = it->second;
  SeededRng rng(seed_, hash_combine(k, hash_name("dram.cells")));
  const auto& fm = config_.flip;
  set.vulnerable = rng.uniform01() < fm.vulnerable_row_fraction;
  if (!set.vulnerable) return set.cells;

  const auto n = static_cast<std::size_t>(
      std::max(0LL, std::llround(rng.sample(fm.cells_per_vulnerable_row))));
  const std::size_t bits_per_row = std::size_t{config_.geometry.row_bytes} * 8;
  std::set<std::uint64_t> used;
  while (set.cells.size() < std::min(n, bits_per_row)) {
    VulnerableCell c;
    c.byte_offset = static_cast<std::uint32_t>(
        rng.uniform_int(0, config_.geometry.row_bytes - 1));
    c.bit = static_cast<std::uint8_t>(rng.uniform_int(0, 7));
    c.charged_value = rng.bernoulli(0.5) ? 1 : 0;
    c.threshold = rng.sample(fm.per_cell_threshold);
    c.exposure_ps = ms_to_ps(rng.sample(fm.per_cell_exposure_ms));
    if (used.insert(std::uint64_t{c.byte_offset} * 8 + c.bit).second) {
      set.cells.push_back(c);
    }
  }
  return set.cells;
}

bool Dram::is_vulnerable(std::uint32_t bank, std::uint32_t row) {
  cells_of(bank, row);
  return cells_.at(key(bank, row)).vulnerable;
}

void Dram::evaluate_flips(std::uint32_t bank, std::uint32_t row, RowState& rs,
                          Picoseconds t) {
  const auto& cells = cells_of(bank, row);
  if (cells.empty()) return;
  const auto k = key(bank, row);
  const double d = rs.disturbance();
  const Picoseconds elapsed = t - rs.window_start_ps;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const std::uint64_t pos = std::uint64_t{c.byte_offset} * 8 + c.bit;
    if (rs.flipped_bits.contains(pos)) continue;
    if (stored_bit(k, c.byte_offset, c.bit) != c.charged_value) continue;
    const double f = jitter(k, i, rs.window_start_ps);
    if (d < c.threshold * f) continue;
    const auto need = static_cast<Picoseconds>(
        static_cast<double>(c.exposure_ps) * f);
    if (elapsed < need) continue;
    rs.flipped_bits.emplace(
        pos, BitFlip{c.byte_offset, c.bit, c.charged_value,
                     static_cast<std::uint8_t>(c.charged_value ^ 1U),
                     std::max(t - (elapsed - need), rs.window_start_ps)});
  }
}

void Dram::evaluate_linear(std::uint32_t bank, std::uint32_t row, RowState& rs,
                           double rate_per_ps, Picoseconds a, Picoseconds b) {
  const auto& cells = cells_of(bank, row);
  if (cells.empty() || rate_per_ps <= 0.0) return;
  const auto k = key(bank, row);
  const double d0 = rs.disturbance();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const std::uint64_t pos = std::uint64_t{c.byte_offset} * 8 + c.bit;
    if (rs.flipped_bits.contains(pos)) continue;
    if (stored_bit(k, c.byte_offset, c.bit) != c.charged_value) continue;
    const double f = jitter(k, i, rs.window_start_ps);
    const double need_act = c.threshold * f;
    double t_act = static_cast<double>(a);
    if (d0 < need_act) t_act += (need_act - d0) / rate_per_ps;
    const double t_exp = static_cast<double>(rs.window_start_ps) +
                         static_cast<double>(c.exposure_ps) * f;
    const double t_flip = std::max(t_act, t_exp);
    if (t_flip <= static_cast<double>(b)) {
      rs.flipped_bits.emplace(
          pos, BitFlip{c.byte_offset, c.bit, c.charged_value,
                       static_cast<std::uint8_t>(c.charged_value ^ 1U),
                       static_cast<Picoseconds>(t_flip)});
    }
  }
}

LatencyClass Dram::touch_row_buffer(std::uint32_t bank, std::uint32_t row,
                                    Picoseconds when) {
  BankState& bs = banks_[bank];
  const Picoseconds close = config_.timing.row_close_ps;
  const bool timed_out =
      close != 0 && when > bs.last_access_ps && when - bs.last_access_ps > close;
  LatencyClass cls;
  if (!bs.open_row || timed_out) {
    cls = LatencyClass::kRowMiss;
  } else if (*bs.open_row == row) {
    cls = LatencyClass::kRowHit;
  } else {
    cls = LatencyClass::kRowConflict;
  }
  bs.open_row = row;
  bs.last_access_ps = std::max(bs.last_access_ps, when);
  return cls;
}

void Dram::disturb(std::uint32_t bank, std::uint32_t aggressor,
                   Picoseconds when) {
  const auto rows = config_.geometry.rows_per_bank;
  const double w2 = config_.flip.secondary_coupling;
  auto hit = [&](std::int64_t victim, double weight, bool from_below) {
    if (victim < 0 || victim >= static_cast<std::int64_t>(rows) || weight == 0.0)
      return;
    const auto v = static_cast<std::uint32_t>(victim);
    RowState& rs = sync_row(bank, v, when);
    (from_below ? rs.lower : rs.upper) += weight;
    evaluate_flips(bank, v, rs, when);
  };
  const auto a = static_cast<std::int64_t>(aggressor);
  hit(a + 1, 1.0, true);
  hit(a - 1, 1.0, false);
  hit(a + 2, w2, true);
  hit(a - 2, w2, false);
}

LatencyClass Dram::access(std::uint32_t bank, std::uint32_t row,
                          Picoseconds when, AccessKind /*kind*/) {
  check_location(bank, row);
  const LatencyClass cls = touch_row_buffer(bank, row, when);
  if (cls == LatencyClass::kRowHit) return cls;
  ++activations_;
  RowState& self = sync_row(bank, row, when);
  evaluate_flips(bank, row, self, when);
  restart_window(self, when);
  disturb(bank, row, when);
  return cls;
}

std::uint64_t Dram::hammer_batch(std::span<const DramLocation> aggressors,
                                 std::uint64_t count, Picoseconds t1,
                                 Picoseconds t2) {
  if (aggressors.empty() || count == 0) return 0;
  if (t2 < t1) fail(ErrorKind::kContract, "hammer batch ends before it starts");
  const std::uint32_t bank = aggressors.front().bank;
  std::vector<std::uint32_t> rows;
  for (const auto& a : aggressors) {
    check_location(a.bank, a.row);
    if (a.bank != bank) {
      fail(ErrorKind::kContract, "hammer batch aggressors span banks");
    }
    rows.push_back(a.row);
  }
  std::vector<std::uint32_t> distinct = rows;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  const Picoseconds span = std::max<Picoseconds>(t2 - t1, 1);
  // Per-aggressor activation counts.
  std::map<std::uint32_t, double> acts;
  std::uint64_t total = 0;
  if (distinct.size() >= 2) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::uint64_t n =
          count / rows.size() + (i < count % rows.size() ? 1 : 0);
      acts[rows[i]] += static_cast<double>(n);
      total += n;
    }
  } else {
    const Picoseconds close = config_.timing.row_close_ps;
    const double spacing = static_cast<double>(span) / static_cast<double>(count);
    const bool each_activates = close != 0 && spacing > static_cast<double>(close);
    std::uint64_t n = each_activates ? count : 0;
    if (!each_activates) {
      const auto& bs = banks_[bank];
      if (!bs.open_row || *bs.open_row != distinct.front()) n = 1;
    }
    acts[distinct.front()] = static_cast<double>(n);
    total = n;
  }
  activations_ += total;

  // Disturbance rates (weighted activations per ps) per victim row and side.
  struct Rates {
    double upper = 0.0;
    double lower = 0.0;
  };
  std::map<std::uint32_t, Rates> victims;
  const auto nrows = static_cast<std::int64_t>(config_.geometry.rows_per_bank);
  const double w2 = config_.flip.secondary_coupling;
  for (const auto& [row, n] : acts) {
    const double r = n / static_cast<double>(span);
    const auto a = static_cast<std::int64_t>(row);
    auto add = [&](std::int64_t v, double w, bool from_below) {
      if (v < 0 || v >= nrows || w == 0.0) return;
      auto& rr = victims[static_cast<std::uint32_t>(v)];
      (from_below ? rr.lower : rr.upper) += r * w;
    };
    add(a + 1, 1.0, true);
    add(a - 1, 1.0, false);
    add(a + 2, w2, true);
    add(a - 2, w2, false);
  }
  for (auto row : distinct) victims.erase(row);

  const Picoseconds period = config_.refresh.period_ps;
  for (const auto& [row, rate] : victims) {
    RowState& rs = sync_row(bank, row, t1);
    const auto k = key(bank, row);
    Picoseconds a = t1;
    while (a < t2) {
      const Picoseconds next_refresh = last_refresh_at_or_before(k, a) + period;
      const Picoseconds b = std::min(t2, next_refresh);
      evaluate_linear(bank, row, rs, rate.upper + rate.lower, a, b);
      rs.upper += rate.upper * static_cast<double>(b - a);
      rs.lower += rate.lower * static_cast<double>(b - a);
      if (b == next_refresh) restart_window(rs, b);
      a = b;
    }
  }
  for (auto row : distinct) {
    if (acts[row] == 0.0) continue;
    RowState& rs = sync_row(bank, row, t2);
    restart_window(rs, t2);
  }
  auto& bs = banks_[bank];
  bs.open_row = rows.back();
  bs.last_access_ps = std::max(bs.last_access_ps, t2);
  return total;
}

std::uint64_t Dram::refresh_tick(Picoseconds when) {
  if (when < last_tick_ps_) {
    fail(ErrorKind::kContract, "refresh_tick moved backwards");
  }
  std::uint64_t refreshed = 0;
  const auto& geom = config_.geometry;
  const Picoseconds period = config_.refresh.period_ps;
  auto ticks_in = [&](std::uint64_t k) -> std::uint64_t {
    const Picoseconds ph = refresh_phase(k);
    auto upto = [&](Picoseconds t) -> std::uint64_t {
      return t < ph ? 0 : (t - ph) / period + 1;
    };
    // Instants in (last_tick, when]; time zero is power-on, not a refresh.
    const std::uint64_t lo = last_tick_ps_ == 0 && ph == 0 ? 1 : upto(last_tick_ps_);
    const std::uint64_t hi = upto(when);
    return hi > lo ? hi - lo : 0;
  };
  if (config_.refresh.staggered) {
    for (std::uint64_t k = 0; k < geom.total_rows(); ++k) refreshed += ticks_in(k);
  } else {
    refreshed = ticks_in(0) * geom.total_rows();
  }
  for (auto& [k, rs] : rows_) {
    (void)rs;
    sync_row(static_cast<std::uint32_t>(k / geom.rows_per_bank),
             static_cast<std::uint32_t>(k % geom.rows_per_bank), when);
  }
  last_tick_ps_ = when;
  return refreshed;
}

std::vector<std::uint8_t> Dram::read_bits(PhysAddr addr, std::size_t len,
                                          Picoseconds when) {
  check_range(addr, len);
  std::vector<std::uint8_t> out;
  out.reserve(len);
  PhysAddr cur = addr;
  std::size_t left = len;
  while (left > 0) {
    const DramLocation loc = locate(cur);
    const std::size_t seg =
        std::min<std::size_t>(left, config_.geometry.row_bytes - loc.column);
    access(loc.bank, loc.row, when, AccessKind::kRead);
    const auto k = key(loc.bank, loc.row);
    auto dit = data_.find(k);
    const RowState* rs = row_state(loc.bank, loc.row);
    for (std::size_t i = 0; i < seg; ++i) {
      const std::uint32_t col = loc.column + static_cast<std::uint32_t>(i);
      std::uint8_t byte = dit == data_.end() ? 0 : dit->second[col];
      if (rs != nullptr && !rs->flipped_bits.empty()) {
        auto fit = rs->flipped_bits.lower_bound(std::uint64_t{col} * 8);
        for (; fit != rs->flipped_bits.end() && fit->first < (std::uint64_t{col} + 1) * 8;
             ++fit) {
          const auto& f = fit->second;
          byte = static_cast<std::uint8_t>((byte & ~(1U << f.bit)) | (f.to << f.bit));
        }
      }
      out.push_back(byte);
    }
    cur += seg;
    left -= seg;
  }
  return out;
}

void Dram::write_bits(PhysAddr addr, std::span<const std::uint8_t> data,
                      Picoseconds when) {
  check_range(addr, data.size());
  PhysAddr cur = addr;
  std::size_t done = 0;
  while (done < data.size()) {
    const DramLocation loc = locate(cur);
    const std::size_t seg = std::min<std::size_t>(
        data.size() - done, config_.geometry.row_bytes - loc.column);
    access(loc.bank, loc.row, when, AccessKind::kWrite);
    const auto k = key(loc.bank, loc.row);
    auto& bytes = data_[k];
    if (bytes.empty()) bytes.assign(config_.geometry.row_bytes, 0);
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(done), seg,
                bytes.begin() + loc.column);
    auto rit = rows_.find(k);
    if (rit != rows_.end()) {
      auto& flips = rit->second.flipped_bits;
      flips.erase(flips.lower_bound(std::uint64_t{loc.column} * 8),
                  flips.lower_bound((std::uint64_t{loc.column} + seg) * 8));
    }
    cur += seg;
    done += seg;
  }
}

const RowState* Dram::row_state(std::uint32_t bank, std::uint32_t row) const {
  auto it = rows_.find(key(bank, row));
  return it == rows_.end() ? nullptr : &it->second;
}

std::size_t Dram::flips_in_row(std::uint32_t bank, std::uint32_t row) const {
  const RowState* rs = row_state(bank, row);
  return rs == nullptr ? 0 : rs->flipped_bits.size();
}

std::uint64_t Dram::total_flips() const {
  std::uint64_t n = 0;
  for (const auto& [k, rs] : rows_) n += rs.flipped_bits.size();
  return n;
}

std::optional<std::uint32_t> Dram::open_row(std::uint32_t bank) const {
  return banks_.at(bank).open_row;
}

double Dram::sample_class_cycles(LatencyClass c, SeededRng& rng) const {
  switch (c) {
    case LatencyClass::kRowHit: return rng.sample(config_.timing.row_hit_cycles);
    case LatencyClass::kRowMiss: return rng.sample(config_.timing.row_miss_cycles);
    case LatencyClass::kRowConflict:
      return rng.sample(config_.timing.row_conflict_cycles);
  }
  return 0.0;
}

}  // namespace hammerlab
