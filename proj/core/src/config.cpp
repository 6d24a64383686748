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

#include "hammerlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

namespace hammerlab {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (!s.empty()) {
    const auto c = s.find(',');
    out.push_back(trim(s.substr(0, c)));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view v,
                            std::string_view want) {
  fail(ErrorKind::kConfig, fmt::format("{}: '{}' is not {}", key, v, want));
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x)) {
    bad_value(key, v, "a number");
  }
  return x;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  int base = 10;
  std::string_view digits = v;
  if (v.starts_with("0x") || v.starts_with("0X")) {
    base = 16;
    digits.remove_prefix(2);
  } else if (v.starts_with("0b")) {
    base = 2;
    digits.remove_prefix(2);
  }
  const auto r = std::from_chars(digits.data(), digits.data() + digits.size(), x, base);
  if (r.ec == std::errc() && r.ptr == digits.data() + digits.size() && !digits.empty()) {
    return x;
  }
  // Accept integral scientific notation such as 2e9.
  const double d = to_double(key, v);
  if (d < 0 || d != std::floor(d) || d > 1.8e19) bad_value(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

std::uint32_t to_u32(std::string_view key, std::string_view v) {
  const std::uint64_t x = to_u64(key, v);
  if (x > 0xffffffffULL) bad_value(key, v, "a 32-bit integer");
  return static_cast<std::uint32_t>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

Distribution to_dist(std::string_view key, std::string_view v) {
  try {
    return Distribution::parse(v);
  } catch (const Error&) {
    bad_value(key, v, "a distribution spec");
  }
}

std::string hex(std::uint64_t v) { return fmt::format("{:#x}", v); }

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != 0) out += ',';
    out += f(v[i]);
  }
  return out;
}

struct Key {
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

using Table = std::map<std::string, Key, std::less<>>;

template <class F>
void add(Table& t, std::string name, F field, std::string_view kind) {
  using Ref = decltype(field(std::declval<ExperimentConfig&>()));
  using T = std::remove_cvref_t<Ref>;
  Key k;
  const std::string n = name;
  if constexpr (std::is_same_v<T, double>) {
    k.set = [=](ExperimentConfig& c, std::string_view v) { field(c) = to_double(n, v); };
    k.get = [=](const ExperimentConfig& c) {
      return fmt::format("{}", field(const_cast<ExperimentConfig&>(c)));
    };
  } else if constexpr (std::is_same_v<T, bool>) {
    k.set = [=](ExperimentConfig& c, std::string_view v) { field(c) = to_bool(n, v); };
    k.get = [=](const ExperimentConfig& c) {
      return std::string(field(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
    };
  } else if constexpr (std::is_same_v<T, std::uint32_t> || std::is_same_v<T, unsigned>) {
    k.set = [=](ExperimentConfig& c, std::string_view v) { field(c) = to_u32(n, v); };
    k.get = [=](const ExperimentConfig& c) {
      return fmt::format("{}", field(const_cast<ExperimentConfig&>(c)));
    };
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (kind == "hex") {
      k.set = [=](ExperimentConfig& c, std::string_view v) { field(c) = to_u64(n, v); };
      k.get = [=](const ExperimentConfig& c) {
        return hex(field(const_cast<ExperimentConfig&>(c)));
      };
    } else {
      k.set = [=](ExperimentConfig& c, std::string_view v) { field(c) = to_u64(n, v); };
      k.get = [=](const ExperimentConfig& c) {
        return fmt::format("{}", field(const_cast<ExperimentConfig&>(c)));
      };
    }
  } else if constexpr (std::is_same_v<T, Distribution>) {
    k.set = [=](ExperimentConfig& c, std::string_view v) { field(c) = to_dist(n, v); };
    k.get = [=](const ExperimentConfig& c) {
      return field(const_cast<ExperimentConfig&>(c)).to_string();
    };
  } else {
    static_assert(sizeof(T) == 0, "unsupported config field type");
  }
  t.emplace(std::move(name), std::move(k));
}

#define FIELD(expr) [](ExperimentConfig & c) -> auto& { return expr; }

const Table& table() {
  static const Table t = [] {
    Table t;
    // DRAM geometry, timing and refresh.
    add(t, "dram.banks", FIELD(c.platform.dram.geometry.banks), "");
    add(t, "dram.rows_per_bank", FIELD(c.platform.dram.geometry.rows_per_bank), "");
    add(t, "dram.row_bytes", FIELD(c.platform.dram.geometry.row_bytes), "");
    add(t, "dram.row_close_ps", FIELD(c.platform.dram.timing.row_close_ps), "");
    add(t, "dram.row_hit_cycles", FIELD(c.platform.dram.timing.row_hit_cycles), "");
    add(t, "dram.row_miss_cycles", FIELD(c.platform.dram.timing.row_miss_cycles), "");
    add(t, "dram.row_conflict_cycles", FIELD(c.platform.dram.timing.row_conflict_cycles), "");
    add(t, "dram.refresh_period_ps", FIELD(c.platform.dram.refresh.period_ps), "");
    add(t, "dram.refresh_phase_ps", FIELD(c.platform.dram.refresh.phase_ps), "");
    add(t, "dram.refresh_staggered", FIELD(c.platform.dram.refresh.staggered), "");
    // Flip model (calibrated, see configs/).
    add(t, "flip.vulnerable_row_fraction", FIELD(c.platform.dram.flip.vulnerable_row_fraction), "");
    add(t, "flip.cells_per_vulnerable_row", FIELD(c.platform.dram.flip.cells_per_vulnerable_row), "");
    add(t, "flip.per_cell_threshold", FIELD(c.platform.dram.flip.per_cell_threshold), "");
    add(t, "flip.per_cell_exposure_ms", FIELD(c.platform.dram.flip.per_cell_exposure_ms), "");
    add(t, "flip.threshold_jitter", FIELD(c.platform.dram.flip.threshold_jitter), "");
    add(t, "flip.secondary_coupling", FIELD(c.platform.dram.flip.secondary_coupling), "");
    // Caches.
    add(t, "cache.llc_sets", FIELD(c.platform.cache.llc.sets), "");
    add(t, "cache.llc_ways", FIELD(c.platform.cache.llc.ways), "");
    add(t, "cache.llc_slices", FIELD(c.platform.cache.llc.slices), "");
    add(t, "cache.llc_inclusive", FIELD(c.platform.cache.llc.inclusive), "");
    add(t, "cache.private_sets", FIELD(c.platform.cache.private_tier.sets), "");
    add(t, "cache.private_ways", FIELD(c.platform.cache.private_tier.ways), "");
    add(t, "cache.fpga_cache", FIELD(c.platform.cache.fpga.present), "");
    add(t, "cache.fpga_cache_bytes", FIELD(c.platform.cache.fpga.capacity_bytes), "");
    add(t, "cache.ddio_way_mask", FIELD(c.platform.cache.ddio.allowed_way_mask), "hex");
    add(t, "cache.lat_private", FIELD(c.platform.cache.latency.private_tier), "");
    add(t, "cache.lat_llc", FIELD(c.platform.cache.latency.llc), "");
    add(t, "cache.lat_fpga_cache", FIELD(c.platform.cache.latency.fpga_cache), "");
    add(t, "cache.lat_dram", FIELD(c.platform.cache.latency.dram), "");
    add(t, "cache.lat_flush_base", FIELD(c.platform.cache.latency.flush_base), "");
    add(t, "cache.lat_flush_fpga_penalty", FIELD(c.platform.cache.latency.flush_fpga_penalty), "");
    // Fabric.
    add(t, "fabric.fpga_hz", FIELD(c.platform.fabric.fpga.frequency_hz), "");
    add(t, "fabric.pcie_llc", FIELD(c.platform.fabric.pcie.llc), "");
    add(t, "fabric.pcie_dram", FIELD(c.platform.fabric.pcie.dram), "");
    add(t, "fabric.pcie_fpga_cache", FIELD(c.platform.fabric.pcie.fpga_cache), "");
    add(t, "fabric.pcie_pipelining", FIELD(c.platform.fabric.pcie.pipelining), "");
    add(t, "fabric.upi_llc", FIELD(c.platform.fabric.upi.llc), "");
    add(t, "fabric.upi_dram", FIELD(c.platform.fabric.upi.dram), "");
    add(t, "fabric.upi_fpga_cache", FIELD(c.platform.fabric.upi.fpga_cache), "");
    add(t, "fabric.upi_pipelining", FIELD(c.platform.fabric.upi.pipelining), "");
    add(t, "fabric.tx_capacity", FIELD(c.platform.fabric.tx_capacity), "");
    add(t, "fabric.mmio_timeout_cycles", FIELD(c.platform.fabric.mmio_timeout_cycles), "");
    add(t, "fabric.page_skip_probability", FIELD(c.platform.fabric.page_skip_probability), "");
    // Host CPU.
    add(t, "cpu.hz", FIELD(c.platform.cpu.clock.frequency_hz), "");
    add(t, "cpu.loop_overhead", FIELD(c.platform.cpu.loop_overhead), "");
    add(t, "cpu.probe_overhead", FIELD(c.platform.cpu.probe_overhead), "");
    // Fault attack and sweep.
    add(t, "attack.max_signatures", FIELD(c.sweep.base.max_signatures), "");
    add(t, "attack.offsets", FIELD(c.sweep.base.offsets), "");
    add(t, "attack.offset_bits", FIELD(c.sweep.base.offset_bits), "");
    add(t, "attack.signature_period_ms", FIELD(c.sweep.base.signature_period_ms), "");
    add(t, "attack.verify_countermeasure", FIELD(c.sweep.base.verify_countermeasure), "");
    add(t, "attack.blinding", FIELD(c.sweep.base.blinding), "");
    add(t, "attack.cpu_rate_jitter", FIELD(c.sweep.base.cpu_rate_jitter), "");
    add(t, "attack.fpga_rate_jitter", FIELD(c.sweep.base.fpga_rate_jitter), "");
    add(t, "sweep.trials", FIELD(c.sweep.trials), "");
    add(t, "sweep.key_pool", FIELD(c.sweep.key_pool), "");
    add(t, "sweep.key_bits", FIELD(c.sweep.key_bits), "");
    // Experiments.
    add(t, "exp.hammer_count", FIELD(c.exp.hammer_count), "");
    add(t, "exp.runs", FIELD(c.exp.runs), "");
    add(t, "exp.flip_rows", FIELD(c.exp.flip_rows), "");
    add(t, "exp.covert_messages", FIELD(c.exp.covert_messages), "");
    add(t, "exp.covert_bytes", FIELD(c.exp.covert_bytes), "");
    add(t, "exp.covert_bit_period_cycles", FIELD(c.exp.covert_bit_period_cycles), "");
    add(t, "exp.evset_buffer_bytes", FIELD(c.exp.evset_buffer_bytes), "");
    add(t, "exp.evset_targets", FIELD(c.exp.evset_targets), "");
    add(t, "exp.latency_samples", FIELD(c.exp.latency_samples), "");
    add(t, "exp.bellcore_keys", FIELD(c.exp.bellcore_keys), "");
    add(t, "exp.bellcore_bits", FIELD(c.exp.bellcore_bits), "");
    add(t, "exp.probes_per_bit", FIELD(c.exp.decode.probes_per_bit), "");
    add(t, "exp.redundancy", FIELD(c.exp.decode.redundancy), "");
    add(t, "exp.min_hits", FIELD(c.exp.decode.min_hits), "");
    add(t, "exp.probe_threshold_cycles", FIELD(c.exp.decode.probe_threshold_cycles), "");

    // List-valued keys.
    t.emplace("dram.bank_xor_masks", Key{
        [](ExperimentConfig& c, std::string_view v) {
          if (v == "default") {
            c.platform.dram.bank_xor_masks.reset();
            return;
          }
          std::vector<std::uint64_t> m;
          for (auto s : split_list(v)) m.push_back(to_u64("dram.bank_xor_masks", s));
          c.platform.dram.bank_xor_masks = m;
        },
        [](const ExperimentConfig& c) {
          if (!c.platform.dram.bank_xor_masks) return std::string("default");
          return join<std::uint64_t>(*c.platform.dram.bank_xor_masks, hex);
        }});
    t.emplace("fabric.channels", Key{
        [](ExperimentConfig& c, std::string_view v) {
          std::vector<Channel> ch;
          for (auto s : split_list(v)) {
            try {
              ch.push_back(parse_channel(s));
            } catch (const Error&) {
              bad_value("fabric.channels", s, "a channel name");
            }
            if (ch.back() == Channel::kAuto) bad_value("fabric.channels", s, "a physical channel");
          }
          c.platform.fabric.channels = ch;
        },
        [](const ExperimentConfig& c) {
          return join<Channel>(c.platform.fabric.channels,
                               [](const Channel& x) { return std::string(to_string(x)); });
        }});
    t.emplace("sweep.intervals_ms", Key{
        [](ExperimentConfig& c, std::string_view v) {
          std::vector<double> iv;
          for (auto s : split_list(v)) iv.push_back(to_double("sweep.intervals_ms", s));
          c.sweep.intervals_ms = iv;
        },
        [](const ExperimentConfig& c) {
          return join<double>(c.sweep.intervals_ms,
                              [](const double& x) { return fmt::format("{}", x); });
        }});
    t.emplace("sweep.attackers", Key{
        [](ExperimentConfig& c, std::string_view v) {
          std::vector<Attacker> a;
          for (auto s : split_list(v)) a.push_back(parse_attacker(s));
          c.sweep.attackers = a;
        },
        [](const ExperimentConfig& c) {
          return join<Attacker>(c.sweep.attackers,
                                [](const Attacker& x) { return std::string(to_string(x)); });
        }});
    t.emplace("exp.hammer_counts", Key{
        [](ExperimentConfig& c, std::string_view v) {
          std::vector<std::uint64_t> n;
          for (auto s : split_list(v)) n.push_back(to_u64("exp.hammer_counts", s));
          c.exp.hammer_counts = n;
        },
        [](const ExperimentConfig& c) {
          return join<std::uint64_t>(c.exp.hammer_counts,
                                     [](const std::uint64_t& x) { return fmt::format("{}", x); });
        }});
    return t;
  }();
  return t;
}

#undef FIELD

struct Entry {
  std::string key;
  std::string value;
  std::string origin;
};

Entry split_entry(std::string_view line, const std::string& origin) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    fail(ErrorKind::kConfig, fmt::format("{}: expected key=value", origin));
  }
  Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), origin};
  if (e.key.empty()) fail(ErrorKind::kConfig, fmt::format("{}: empty key", origin));
  return e;
}

void validate(const ExperimentConfig& c) {
  const auto& p = c.platform;
  p.dram.geometry.validate();
  p.dram.flip.validate();
  p.dram.refresh.validate();
  p.cache.validate();
  p.fabric.validate();
  p.cpu.clock.validate();
  c.sweep.base.validate(p.dram.geometry);
  for (double iv : c.sweep.intervals_ms) {
    if (!(iv > 0)) fail(ErrorKind::kConfig, "sweep intervals must be > 0");
  }
  if (c.sweep.trials == 0 || c.sweep.key_pool == 0) {
    fail(ErrorKind::kConfig, "sweep.trials and sweep.key_pool must be > 0");
  }
  if (c.sweep.key_bits < 64) fail(ErrorKind::kConfig, "sweep.key_bits must be >= 64");
  if (c.exp.bellcore_bits < 16) fail(ErrorKind::kConfig, "exp.bellcore_bits must be >= 16");
  if (c.exp.covert_bit_period_cycles == 0) {
    fail(ErrorKind::kConfig, "exp.covert_bit_period_cycles must be > 0");
  }
  c.exp.decode.validate();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> k{"platform"};
  for (const auto& [name, key] : table()) k.push_back(name);
  return k;
}

std::string ExperimentConfig::resolved() const {
  std::string out = fmt::format("platform={}\n", platform.name);
  for (const auto& [name, key] : table()) {
    out += fmt::format("{}={}\n", name, key.get(*this));
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a64(resolved()); }

ExperimentConfig parse_config(std::string_view text,
                              const std::vector<std::string>& overrides) {
  std::vector<Entry> entries;
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    entries.push_back(split_entry(line, fmt::format("line {}", lineno)));
  }
  for (const auto& o : overrides) {
    entries.push_back(split_entry(o, fmt::format("override '{}'", o)));
  }

  std::string platform = "pac";
  for (const auto& e : entries) {
    if (e.key == "platform") platform = e.value;
  }
  ExperimentConfig cfg;
  cfg.platform = platform_preset(platform);
  for (const auto& e : entries) {
    if (e.key == "platform") continue;
    const auto it = table().find(e.key);
    if (it == table().end()) {
      fail(ErrorKind::kConfig, fmt::format("{}: unknown key '{}'", e.origin, e.key));
    }
    it->second.set(cfg, e.value);
  }
  try {
    validate(cfg);
  } catch (const Error& err) {
    if (err.kind() == ErrorKind::kConfig) throw;
    fail(ErrorKind::kConfig, err.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kConfig, fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace hammerlab
