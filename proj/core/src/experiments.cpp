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

#include "hammerlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

namespace hammerlab {

namespace {

struct Schema {
  const char* name;
  std::vector<std::string> columns;
};

const std::vector<Schema>& schemas() {
  static const std::vector<Schema> s{
      {"hammer-rate", {"run", "attacker", "requests", "sim_seconds", "rate_per_s"}},
      {"flip-rate",
       {"row_index", "attacker", "bank", "row", "vulnerable", "hammers", "sim_seconds",
        "flips", "flips_per_s"}},
      {"flips-vs-hammers",
       {"attacker", "hammers", "rows", "victim_flips", "distance2_flips", "flips_per_row"}},
      {"fault-sweep",
       {"interval_ms", "attacker", "trials", "successes", "mean_sigs", "success_rate",
        "hammer_rate_per_s"}},
      {"covert",
       {"message", "bits", "ones", "bit_errors", "bit_period_cycles", "bandwidth_bps",
        "mean_probe_cycles", "threshold_cycles", "receiver_bound_bps", "sender_bound_bps",
        "integrity_warnings"}},
      {"evset",
       {"target_index", "cache", "target", "size", "all_congruent", "sufficient",
        "minimal"}},
      {"bellcore-demo",
       {"case", "key_bits", "N", "S", "S_faulty", "p", "q", "recovered"}},
      {"latency-hist", {"side", "kind", "cycles", "count"}},
      {"uncached-compare",
       {"mode", "requests", "sim_seconds", "rate_per_s", "speedup_vs_cached"}},
  };
  return s;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

class Rows {
 public:
  Rows(const ExperimentConfig& cfg, CsvTable& t) : t_(t) {
    t_.header = {"seed", "config_hash"};
    for (auto& c : experiment_columns(cfg.experiment)) t_.header.push_back(c);
    prefix_ = {fmt::format("{}", cfg.seed), hex64(cfg.hash())};
  }
  void add(std::vector<std::string> cells) {
    std::vector<std::string> row = prefix_;
    for (auto& c : cells) row.push_back(std::move(c));
    if (row.size() != t_.header.size()) {
      fail(ErrorKind::kContract, "csv row does not match its header");
    }
    t_.rows.push_back(std::move(row));
  }

 private:
  CsvTable& t_;
  std::vector<std::string> prefix_;
};

std::string num(double v) { return csv_number(v); }
std::string num(std::uint64_t v) { return fmt::format("{}", v); }
std::string boolean(bool b) { return b ? "1" : "0"; }

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Aggressors {
  DramLocation victim;
  std::vector<PhysAddr> addrs;
};

Aggressors pick_pair(System& sys, SeededRng& rng, bool vulnerable_only) {
  const DramGeometry& g = sys.dram.geometry();
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const auto bank = static_cast<std::uint32_t>(rng.uniform_int(0, g.banks - 1));
    const auto row = static_cast<std::uint32_t>(rng.uniform_int(2, g.rows_per_bank - 3));
    if (vulnerable_only && !sys.dram.is_vulnerable(bank, row)) continue;
    return {{bank, row, 0},
            {sys.dram.address_of({bank, row - 1, 0}), sys.dram.address_of({bank, row + 1, 0})}};
  }
  fail(ErrorKind::kConfig, "no vulnerable row found");
}

double fpga_hammer(System& sys, const Aggressors& a, std::uint64_t count) {
  HammerConfig hc;
  hc.target_a = a.addrs[0];
  hc.target_b = a.addrs[1];
  hc.total_accesses = count;
  const HammerStatus st = hammer_run(sys.sim, sys.fabric, hc);
  if (!st.done || st.error) fail(ErrorKind::kProtocol, "hammer job did not complete");
  return static_cast<double>(st.total_send_cycles) /
         static_cast<double>(sys.fabric.fpga_domain().frequency_hz);
}

double cpu_hammer(System& sys, const Aggressors& a, std::uint64_t count, bool uncachable) {
  const Picoseconds start = sys.sim.now();
  const CpuHammerResult r = cpu_hammer_stream(sys, a.addrs, count, uncachable, start);
  sys.sim.run_until(start + sys.cpu_cycles_to_ps(r.cycles));
  return r.seconds;
}

// ---------------------------------------------------------------------------

ExperimentOutput hammer_rate(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  std::map<std::string, std::vector<double>> rates;
  for (std::uint32_t run = 0; run < cfg.exp.runs; ++run) {
    for (Attacker att : {Attacker::kFpga, Attacker::kCpu}) {
      const std::uint64_t seed = hash_combine(cfg.seed, run);
      System sys(cfg.platform, seed);
      SeededRng rng(seed, hash_name("hammer-rate"));
      const Aggressors a = pick_pair(sys, rng, false);
      const double secs = att == Attacker::kFpga ? fpga_hammer(sys, a, cfg.exp.hammer_count)
                                                 : cpu_hammer(sys, a, cfg.exp.hammer_count, false);
      const double rate = static_cast<double>(cfg.exp.hammer_count) / secs;
      rates[std::string(to_string(att))].push_back(secs);
      rows.add({num(std::uint64_t{run}), std::string(to_string(att)), num(cfg.exp.hammer_count),
                num(secs), num(rate)});
    }
  }
  for (auto& [att, secs] : rates) {
    const double med = median(secs);
    out.summary.push_back(fmt::format("{}: median {:.2f} s for {} requests ({:.4g} req/s)", att,
                                      med, cfg.exp.hammer_count,
                                      static_cast<double>(cfg.exp.hammer_count) / med));
  }
  return out;
}

ExperimentOutput flip_rate(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  for (Attacker att : {Attacker::kFpga, Attacker::kCpu}) {
    System sys(cfg.platform, cfg.seed);
    SeededRng rng(cfg.seed, hash_name("flip-rate"));
    std::uint64_t total = 0;
    double secs_total = 0;
    for (std::uint32_t i = 0; i < cfg.exp.flip_rows; ++i) {
      const Aggressors a = pick_pair(sys, rng, false);
      const std::size_t before = sys.dram.flips_in_row(a.victim.bank, a.victim.row);
      const double secs = att == Attacker::kFpga ? fpga_hammer(sys, a, cfg.exp.hammer_count)
                                                 : cpu_hammer(sys, a, cfg.exp.hammer_count, false);
      const std::size_t flips = sys.dram.flips_in_row(a.victim.bank, a.victim.row) - before;
      total += flips;
      secs_total += secs;
      rows.add({num(std::uint64_t{i}), std::string(to_string(att)),
                num(std::uint64_t{a.victim.bank}), num(std::uint64_t{a.victim.row}),
                boolean(sys.dram.is_vulnerable(a.victim.bank, a.victim.row)),
                num(cfg.exp.hammer_count), num(secs), num(std::uint64_t{flips}),
                num(static_cast<double>(flips) / secs)});
    }
    out.summary.push_back(fmt::format("{}: {} flips over {} rows ({:.3f} flips/s)",
                                      to_string(att), total, cfg.exp.flip_rows,
                                      static_cast<double>(total) / secs_total));
  }
  return out;
}

ExperimentOutput flips_vs_hammers(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  for (std::uint64_t count : cfg.exp.hammer_counts) {
    System sys(cfg.platform, cfg.seed);
    SeededRng rng(cfg.seed, hash_name("flips-vs-hammers"));
    std::uint64_t victim = 0;
    std::uint64_t dist2 = 0;
    for (std::uint32_t i = 0; i < cfg.exp.flip_rows; ++i) {
      const Aggressors a = pick_pair(sys, rng, true);
      fpga_hammer(sys, a, count);
      const auto& v = a.victim;
      victim += sys.dram.flips_in_row(v.bank, v.row);
      if (v.row >= 2) dist2 += sys.dram.flips_in_row(v.bank, v.row - 2);
      if (v.row + 2 < sys.dram.geometry().rows_per_bank) {
        dist2 += sys.dram.flips_in_row(v.bank, v.row + 2);
      }
    }
    rows.add({"fpga", num(count), num(std::uint64_t{cfg.exp.flip_rows}), num(victim), num(dist2),
              num(static_cast<double>(victim) / cfg.exp.flip_rows)});
    out.summary.push_back(fmt::format("{} hammers: {} victim flips, {} at distance two", count,
                                      victim, dist2));
  }
  return out;
}

ExperimentOutput fault_sweep_exp(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  const auto cells = fault_sweep(cfg.sweep, cfg.platform, cfg.seed);
  for (const auto& c : cells) {
    rows.add({num(c.interval_ms), std::string(to_string(c.attacker)),
              num(std::uint64_t{c.trials}), num(std::uint64_t{c.successes}),
              num(c.mean_signatures), num(c.success_rate), num(c.hammer_rate)});
    out.summary.push_back(fmt::format("{} {} ms: mean {:.1f} signatures, success {:.1f}%",
                                      to_string(c.attacker), c.interval_ms, c.mean_signatures,
                                      100 * c.success_rate));
  }
  return out;
}

ExperimentOutput covert(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  System sys(cfg.platform, cfg.seed);
  SeededRng rng(cfg.seed, hash_name("covert"));
  const auto& fpga = sys.fabric.fpga_domain();

  const SharedBuffer buffer = sys.fabric.alloc_buffer(cfg.exp.evset_buffer_bytes);
  const SharedBuffer page = sys.fabric.alloc_buffer(4096);
  const PhysAddr target = page.base_phys + 64 * static_cast<PhysAddr>(rng.uniform_int(0, 63));
  const auto candidates = congruent_candidates(buffer, target, sys.cache.config().llc);
  const EvictionSet set = build_eviction_set(sys, target, candidates);

  ChannelDecodeConfig dcfg = cfg.exp.decode;
  if (dcfg.probe_threshold_cycles <= 0) {
    Picoseconds cursor = sys.sim.now();
    dcfg.probe_threshold_cycles = calibrate_probe_threshold(sys, set, target, 64, cursor);
    sys.sim.run_until(cursor);
  }
  const std::uint64_t period = cfg.exp.covert_bit_period_cycles;
  const double bandwidth = static_cast<double>(fpga.frequency_hz) / static_cast<double>(period);
  const double sender_bound = covert_sender_bound_bps(fpga.frequency_hz);
  std::uint64_t errors_total = 0;
  double probe_sum = 0;

  for (std::uint32_t msg = 0; msg < cfg.exp.covert_messages; ++msg) {
    CovertSendConfig sc;
    sc.target_line = target;
    sc.bit_period_cycles = period;
    sc.writes_per_one = dcfg.redundancy;
    for (std::uint32_t b = 0; b < cfg.exp.covert_bytes; ++b) {
      const auto byte = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
      for (int k = 0; k < 8; ++k) sc.payload.push_back((byte >> k) & 1U);
    }
    // The sender starts a little later; both sides agree on its start cycle.
    const Picoseconds kick = sys.sim.now() + 20'000'000;
    const std::uint64_t base = VirtualClock(kick).cycles(fpga) + 1;
    std::uint64_t sent_base = 0;
    sys.sim.schedule(kick, "host", [&] { sent_base = covert_send(sys.sim, sys.fabric, sc); });
    const CovertReceiveResult rx =
        covert_receive(sys, set, target, dcfg, cycles_to_ps(fpga, base),
                       cycles_to_ps(fpga, period), sc.payload.size());
    sys.sim.run();
    if (sent_base != base) fail(ErrorKind::kContract, "sender started off schedule");
    std::uint64_t errors = 0;
    std::uint64_t ones = 0;
    for (std::size_t i = 0; i < sc.payload.size(); ++i) {
      errors += rx.bits[i] != sc.payload[i];
      ones += sc.payload[i];
    }
    errors_total += errors;
    probe_sum += rx.mean_probe_cycles;
    rows.add({num(std::uint64_t{msg}), num(std::uint64_t{sc.payload.size()}), num(ones),
              num(errors), num(period), num(bandwidth), num(rx.mean_probe_cycles),
              num(rx.threshold),
              num(covert_receiver_bound_bps(static_cast<double>(sys.cpu_clock().frequency_hz),
                                            rx.mean_probe_cycles)),
              num(sender_bound), num(rx.integrity_warnings)});
  }
  out.summary.push_back(fmt::format("{} messages, {} bit errors at {:.2f} kbit/s", cfg.exp.covert_messages,
                                    errors_total, bandwidth / 1e3));
  if (cfg.exp.covert_messages > 0) {
    out.summary.push_back(fmt::format("mean probe {:.1f} cycles",
                                      probe_sum / cfg.exp.covert_messages));
  }
  return out;
}

ExperimentOutput evset(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  System sys(cfg.platform, cfg.seed);
  SeededRng rng(cfg.seed, hash_name("evset"));
  const SharedBuffer buffer = sys.fabric.alloc_buffer(cfg.exp.evset_buffer_bytes);
  const SharedBuffer targets = sys.fabric.alloc_buffer(2ULL << 20);
  const std::uint32_t ways = sys.cache.config().llc.ways;
  std::uint32_t good = 0;
  for (std::uint32_t i = 0; i < cfg.exp.evset_targets; ++i) {
    const PhysAddr target =
        targets.base_phys + 64 * static_cast<PhysAddr>(rng.uniform_int(0, (2 << 20) / 64 - 1));
    const auto cands = congruent_candidates(buffer, target, sys.cache.config().llc);
    const EvictionSet set = build_eviction_set(sys, target, cands);
    bool congruent = true;
    for (PhysAddr a : set.addresses) congruent = congruent && sys.cache.congruent(a, target);
    Picoseconds cursor = sys.sim.now();
    const bool sufficient = llc_test1(sys, target, set.addresses, cursor);
    bool minimal = true;
    for (std::size_t k = 0; k < set.addresses.size() && minimal; ++k) {
      std::vector<PhysAddr> less = set.addresses;
      less.erase(less.begin() + static_cast<std::ptrdiff_t>(k));
      minimal = !llc_test1(sys, target, less, cursor);
    }
    sys.sim.run_until(cursor);
    good += set.addresses.size() == ways && congruent && sufficient && minimal;
    rows.add({num(std::uint64_t{i}), "llc", fmt::format("{:#x}", target),
              num(std::uint64_t{set.addresses.size()}), boolean(congruent), boolean(sufficient),
              boolean(minimal)});
  }
  out.summary.push_back(fmt::format("llc: {}/{} sets minimal and sufficient", good,
                                    cfg.exp.evset_targets));
  if (sys.cache.config().fpga.present && sys.fabric.channel_available(Channel::kUpi)) {
    const auto& fg = sys.cache.config().fpga;
    const CacheGeometry direct{fg.line_bytes, fg.lines(), 1, 1, false};
    std::uint32_t ok = 0;
    for (std::uint32_t i = 0; i < cfg.exp.evset_targets; ++i) {
      const PhysAddr target =
          targets.base_phys + 64 * static_cast<PhysAddr>(rng.uniform_int(0, (2 << 20) / 64 - 1));
      auto cands = congruent_candidates(buffer, target, direct, 8);
      const EvictionSet set = build_fpga_eviction_set(sys, target, cands);
      const bool congruent = sys.cache.fpga_index_of(set.addresses[0]) ==
                             sys.cache.fpga_index_of(target);
      const bool sufficient = fpga_test1(sys, target, set.addresses);
      const bool minimal = !fpga_test1(sys, target, {});
      ok += set.addresses.size() == 1 && congruent && sufficient && minimal;
      rows.add({num(std::uint64_t{i}), "fpga", fmt::format("{:#x}", target),
                num(std::uint64_t{set.addresses.size()}), boolean(congruent),
                boolean(sufficient), boolean(minimal)});
    }
    out.summary.push_back(fmt::format("fpga: {}/{} single-address sets", ok,
                                      cfg.exp.evset_targets));
  }
  return out;
}

ExperimentOutput bellcore_demo(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  auto emit = [&](const std::string& name, const RsaKey& key, const BigInt& s,
                  const BigInt& sf) {
    std::string p = "-";
    std::string q = "-";
    bool ok = false;
    try {
      const auto [a, b] = bellcore_recover_pair(s, sf, key.N);
      p = a.get_str();
      q = b.get_str();
      ok = a * b == key.N;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kRecoveryFailed) throw;
    }
    rows.add({name, num(std::uint64_t{mpz_sizeinbase(key.N.get_mpz_t(), 2)}), key.N.get_str(),
              s.get_str(), sf.get_str(), p, q, boolean(ok)});
    out.summary.push_back(fmt::format("{}: recovered={} p={} q={}", name, ok, p, q));
  };

  const RsaKey toy = RsaKey::from_primes(11, 13, 7);
  const BigInt m = 2;
  FaultSpec f;
  f.branch = Branch::kP;
  f.forced_value = BigInt(9);
  emit("toy", toy, sign_crt(m, toy).value, sign_crt(m, toy, std::nullopt, &f).value);

  SeededRng rng(cfg.seed, hash_name("bellcore-demo"));
  for (std::uint32_t i = 0; i < cfg.exp.bellcore_keys; ++i) {
    const RsaKey key = keygen(cfg.exp.bellcore_bits, rng);
    const BigInt msg = random_below(key.N, rng);
    FaultSpec fault;
    fault.branch = i % 2 == 0 ? Branch::kP : Branch::kQ;
    fault.xor_mask = BigInt(1) << static_cast<unsigned>(rng.uniform_int(0, 63));
    const BigInt r1 = random_below(key.N - 2, rng) + 2;
    const BigInt r2 = random_below(key.N - 2, rng) + 2;
    emit(fmt::format("blinded-{}", i), key, sign_crt(msg, key, r1).value,
         sign_crt(msg, key, r2, &fault).value);
  }
  return out;
}

ExperimentOutput latency_hist(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  System sys(cfg.platform, cfg.seed);
  LatencySampler sampler(sys);
  const bool fpga_cache = sys.cache.config().fpga.present;
  const bool upi = sys.fabric.channel_available(Channel::kUpi);
  struct Job {
    std::string side;
    SampleKind kind;
    Channel channel;
  };
  std::vector<Job> jobs{{"cpu", SampleKind::kCpuPrivate, Channel::kAuto},
                        {"cpu", SampleKind::kCpuLlc, Channel::kAuto},
                        {"cpu", SampleKind::kCpuDram, Channel::kAuto},
                        {"flush", SampleKind::kFlushPlain, Channel::kAuto}};
  if (fpga_cache && upi) {
    jobs.push_back({"cpu", SampleKind::kCpuFpgaCache, Channel::kAuto});
    jobs.push_back({"flush", SampleKind::kFlushFpga, Channel::kAuto});
  }
  for (Channel ch : sys.fabric.config().channels) {
    const std::string side = fmt::format("fpga-{}", to_string(ch));
    jobs.push_back({side, SampleKind::kFpgaLlc, ch});
    jobs.push_back({side, SampleKind::kFpgaDram, ch});
    if (ch == Channel::kUpi && fpga_cache) jobs.push_back({side, SampleKind::kFpgaFpgaCache, ch});
  }
  for (const auto& j : jobs) {
    std::map<long, std::uint64_t> hist;
    double sum = 0;
    for (const auto& s : sampler.sample(j.kind, cfg.exp.latency_samples, j.channel)) {
      ++hist[std::lround(s.cycles)];
      sum += s.cycles;
    }
    for (const auto& [cycles, count] : hist) {
      rows.add({j.side, std::string(to_string(j.kind)), fmt::format("{}", cycles), num(count)});
    }
    out.summary.push_back(fmt::format("{} {}: mean {:.1f} cycles", j.side, to_string(j.kind),
                                      sum / static_cast<double>(cfg.exp.latency_samples)));
  }
  return out;
}

ExperimentOutput uncached_compare(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Rows rows(cfg, out.table);
  const std::uint64_t n = cfg.exp.hammer_count;
  double cached = 0;
  std::map<std::string, double> rate;
  for (const char* mode : {"cpu-cached", "cpu-uncached", "fpga"}) {
    System sys(cfg.platform, cfg.seed);
    SeededRng rng(cfg.seed, hash_name("uncached-compare"));
    const Aggressors a = pick_pair(sys, rng, false);
    const std::string m = mode;
    const double secs = m == "fpga" ? fpga_hammer(sys, a, n)
                                    : cpu_hammer(sys, a, n, m == "cpu-uncached");
    const double r = static_cast<double>(n) / secs;
    if (m == "cpu-cached") cached = r;
    rate[m] = r;
    rows.add({m, num(n), num(secs), num(r), num(r / cached)});
  }
  out.summary.push_back(fmt::format("uncached/cached = {:.3f}", rate["cpu-uncached"] / cached));
  out.summary.push_back(
      fmt::format("fpga/uncached = {:.3f}", rate["fpga"] / rate["cpu-uncached"]));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& s : schemas()) n.emplace_back(s.name);
    return n;
  }();
  return names;
}

std::vector<std::string> experiment_columns(std::string_view name) {
  for (const auto& s : schemas()) {
    if (name == s.name) return s.columns;
  }
  fail(ErrorKind::kConfig, fmt::format("unknown experiment '{}'", name));
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  const std::string& e = cfg.experiment;
  experiment_columns(e);
  if (e == "hammer-rate") return hammer_rate(cfg);
  if (e == "flip-rate") return flip_rate(cfg);
  if (e == "flips-vs-hammers") return flips_vs_hammers(cfg);
  if (e == "fault-sweep") return fault_sweep_exp(cfg);
  if (e == "covert") return covert(cfg);
  if (e == "evset") return evset(cfg);
  if (e == "bellcore-demo") return bellcore_demo(cfg);
  if (e == "latency-hist") return latency_hist(cfg);
  return uncached_compare(cfg);
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.6f}", v);
}

std::string render_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i != 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::kIo, fmt::format("cannot open '{}' for writing", path.string()));
  f << render_csv(table);
  f.flush();
  if (!f) fail(ErrorKind::kIo, fmt::format("write to '{}' failed", path.string()));
}

// ---------------------------------------------------------------------------

std::string_view to_string(SampleKind k) {
  switch (k) {
    case SampleKind::kCpuPrivate: return "private";
    case SampleKind::kCpuLlc: return "llc";
    case SampleKind::kCpuDram: return "dram";
    case SampleKind::kCpuFpgaCache: return "fpga-cache";
    case SampleKind::kFlushPlain: return "flush";
    case SampleKind::kFlushFpga: return "flush-fpga-cached";
    case SampleKind::kFpgaLlc: return "llc";
    case SampleKind::kFpgaDram: return "dram";
    case SampleKind::kFpgaFpgaCache: return "fpga-cache";
  }
  return "?";
}

LatencySampler::LatencySampler(System& sys, std::uint64_t pool_bytes)
    : sys_(sys), pool_(sys.fabric.alloc_buffer(pool_bytes)), cursor_(sys.sim.now()) {}

PhysAddr LatencySampler::next_line() {
  const std::uint64_t lines = pool_.size / 64;
  return pool_.base_phys + 64 * (next_++ % lines);
}

LatencySample LatencySampler::fpga_read(PhysAddr a, CachingHint hint, Channel ch) {
  const auto& fpga = sys_.fabric.fpga_domain();
  DmaRequest req;
  req.addr = a;
  req.hint = hint;
  req.channel = ch;
  req.issue_cycle = std::max(VirtualClock(cursor_).cycles(fpga), sys_.fabric.hw_timer_read()) + 1;
  const DmaCompletion c = sys_.fabric.dma_submit(req);
  cursor_ = std::max(cursor_, cycles_to_ps(fpga, c.completion_cycle));
  return {static_cast<double>(c.completion_cycle - c.issue_cycle), c.tier};
}

std::vector<LatencySample> LatencySampler::sample(SampleKind kind, std::size_t n,
                                                  Channel channel) {
  auto& cache = sys_.cache;
  if (channel == Channel::kAuto) channel = sys_.fabric.config().channels.front();
  const bool upi = channel == Channel::kUpi;
  auto cpu = [&](PhysAddr a) {
    const AccessResult r = cache.cpu_access(a, MemOp::kRead, false, cursor_);
    cursor_ += sys_.cpu_cycles_to_ps(r.cycles);
    return LatencySample{r.cycles, r.tier};
  };
  auto flush = [&](PhysAddr a) {
    const FlushResult r = cache.cpu_flush(a, cursor_);
    cursor_ += sys_.cpu_cycles_to_ps(r.cycles);
    return LatencySample{r.cycles, r.was_fpga_cached ? Tier::kFpgaCache : Tier::kLlc};
  };
  std::vector<LatencySample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PhysAddr a = next_line();
    flush(a);
    // Rows close between samples so DRAM classes do not depend on order.
    cursor_ += sys_.dram.config().timing.row_close_ps;
    switch (kind) {
      case SampleKind::kCpuPrivate:
        cpu(a);
        out.push_back(cpu(a));
        break;
      case SampleKind::kCpuLlc:
        cache.io_write_allocate(a, CachingHint::kWrLineI, false, cursor_);
        out.push_back(cpu(a));
        break;
      case SampleKind::kCpuDram:
        out.push_back(cpu(a));
        break;
      case SampleKind::kCpuFpgaCache:
        cache.io_write_allocate(a, CachingHint::kWrLineM, true, cursor_);
        out.push_back(cpu(a));
        break;
      case SampleKind::kFlushPlain:
        cpu(a);
        out.push_back(flush(a));
        break;
      case SampleKind::kFlushFpga:
        cache.io_read_lookup(a, CachingHint::kRdLineS, true, cursor_);
        out.push_back(flush(a));
        break;
      case SampleKind::kFpgaLlc:
        cache.io_write_allocate(a, CachingHint::kWrLineI, false, cursor_);
        out.push_back(fpga_read(a, CachingHint::kRdLineI, channel));
        break;
      case SampleKind::kFpgaDram:
        out.push_back(fpga_read(a, CachingHint::kRdLineI, channel));
        break;
      case SampleKind::kFpgaFpgaCache:
        if (!upi) fail(ErrorKind::kConfig, "FPGA-cache samples need the UPI channel");
        fpga_read(a, CachingHint::kRdLineS, channel);
        out.push_back(fpga_read(a, CachingHint::kRdLineS, channel));
        break;
    }
  }
  if (cursor_ > sys_.sim.now()) sys_.sim.run_until(cursor_);
  return out;
}

}  // namespace hammerlab
