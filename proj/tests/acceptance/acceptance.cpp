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


// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hammerlab/attacks.hpp"
#include "hammerlab/config.hpp"
#include "hammerlab/experiments.hpp"
#include "hammerlab/rsa.hpp"

using namespace hammerlab;

namespace {

const std::string kConfigs = HAMMERLAB_CONFIGS;

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(fmt::format("{}{}", ok ? "" : "!", what));
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within_rel(double got, double want, double tol) {
  return std::fabs(got - want) <= tol * std::fabs(want);
}

ExperimentOutput run_conf(const std::string& conf, const std::string& experiment,
                          std::uint64_t seed, const std::vector<std::string>& ov = {}) {
  ExperimentConfig c = load_config(kConfigs + "/" + conf, ov);
  c.experiment = experiment;
  c.seed = seed;
  return run_experiment(c);
}

std::size_t col(const CsvTable& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw Error(ErrorKind::kContract, "missing column " + name);
  return static_cast<std::size_t>(it - t.header.begin());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------------------

// Faults one branch of a CRT signature and checks both recovery paths.
struct BellcoreTally {
  std::uint64_t faulty = 0;
  std::uint64_t pair_ok = 0;
  std::uint64_t single_ok = 0;
};

void bellcore_case(const RsaKey& key, const BigInt& m, const Signature& good,
                   const FaultSpec& f, BellcoreTally& t) {
  const Signature bad = sign_crt(m, key, std::nullopt, &f);
  if (bad.value == good.value) return;
  ++t.faulty;
  try {
    const auto [p, q] = bellcore_recover_pair(good.value, bad.value, key.N);
    t.pair_ok += p * q == key.N && p != 1 && q != 1;
  } catch (const Error&) {
  }
  try {
    const auto [p, q] = bellcore_recover_single(bad.value, m, key.e, key.N);
    t.single_ok += p * q == key.N && p != 1 && q != 1;
  } catch (const Error&) {
  }
}

Verdict criterion1() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  DramConfig dc;
  dc.flip.vulnerable_row_fraction = 0;
  Dram dram(dc, 1);
  for (unsigned bits : {512U, 1024U}) {
    SeededRng rng(1000 + bits, hash_name("bellcore"));
    BellcoreTally direct;
    BellcoreTally resident;
    for (int i = 0; i < 1000; ++i) {
      const RsaKey key = keygen(bits, rng);
      const BigInt m = random_below(key.N, rng);
      const Signature good = sign_crt(m, key);
      const Branch br = rng.bernoulli(0.5) ? Branch::kP : Branch::kQ;

      FaultSpec f;
      f.branch = br;
      f.xor_mask = BigInt(1) << static_cast<unsigned>(rng.uniform_int(0, bits / 2 - 1));
      bellcore_case(key, m, good, f, direct);

      // Exponent resident in DRAM with one stored bit flipped.
      const BigInt& exp = br == Branch::kP ? key.d_p : key.d_q;
      const std::size_t len = bits / 16;
      const PhysAddr addr = 4096 * static_cast<PhysAddr>(i);
      DramResidentExponent res(dram, addr, len);
      res.store(exp, 0);
      std::vector<std::uint8_t> bytes = to_bytes(exp, len);
      const auto pos = static_cast<std::size_t>(rng.uniform_int(0, len - 1));
      bytes[pos] ^= static_cast<std::uint8_t>(1U << rng.uniform_int(0, 7));
      dram.write_bits(addr, bytes, 0);
      FaultSpec r;
      r.branch = br;
      r.mode = FaultMode::kDramResident;
      r.exponent = &res;
      bellcore_case(key, m, good, r, resident);
    }
    for (const auto& [name, t] : {std::pair{"direct", direct}, std::pair{"dram", resident}}) {
      v.check(t.faulty > 0 && t.pair_ok == t.faulty && t.single_ok == t.faulty,
              fmt::format("{}b {}: pair {}/{} single {}/{}", bits, name, t.pair_ok, t.faulty,
                          t.single_ok, t.faulty));
    }
  }
  const double s = seconds_since(t0);
  v.check(s < 60, fmt::format("{:.1f} s < 60 s", s));
  return v;
}

Verdict criterion2() {
  Verdict v;
  SeededRng rng(2, hash_name("blinded"));
  std::uint64_t faulty = 0;
  std::uint64_t ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const RsaKey key = keygen(512, rng);
    const BigInt m = random_below(key.N, rng);
    BigInt r1 = random_below(key.N - 2, rng) + 2;
    BigInt r2 = r1;
    while (r2 == r1) r2 = random_below(key.N - 2, rng) + 2;
    FaultSpec f;
    f.branch = i % 2 == 0 ? Branch::kP : Branch::kQ;
    f.xor_mask = BigInt(1) << static_cast<unsigned>(rng.uniform_int(0, 255));
    const Signature good = sign_crt(m, key, r1);
    const Signature bad = sign_crt(m, key, r2, &f);
    if (bad.value == good.value) continue;
    ++faulty;
    try {
      const auto [p, q] = bellcore_recover_pair(good.value, bad.value, key.N);
      const BigInt& expect = f.branch == Branch::kP ? key.q : key.p;
      ok += p * q == key.N && (p == expect || q == expect);
    } catch (const Error&) {
    }
  }
  v.check(faulty == 1000 && ok == faulty, fmt::format("recovered {}/{} faulty of 1000", ok, faulty));
  return v;
}

Verdict criterion3() {
  Verdict v;
  const ExperimentOutput out = run_conf("default.conf", "hammer-rate", 3, {"exp.runs=5"});
  const auto& t = out.table;
  std::map<std::string, std::vector<double>> secs;
  for (const auto& r : t.rows) {
    secs[r[col(t, "attacker")]].push_back(std::stod(r[col(t, "sim_seconds")]));
  }
  const double fpga = median(secs["fpga"]);
  const double cpu = median(secs["cpu"]);
  v.check(within_rel(fpga, 103.25, 0.03), fmt::format("fpga {:.2f} s vs 103.25 +-3%", fpga));
  v.check(within_rel(cpu, 183.41, 0.03), fmt::format("cpu {:.2f} s vs 183.41 +-3%", cpu));
  return v;
}

Verdict criterion4() {
  Verdict v;
  const ExperimentOutput out = run_conf("uncached-compare.conf", "uncached-compare", 4);
  const auto& t = out.table;
  std::map<std::string, double> rate;
  for (const auto& r : t.rows) rate[r[col(t, "mode")]] = std::stod(r[col(t, "rate_per_s")]);
  const double uncached = rate["cpu-uncached"] / rate["cpu-cached"];
  const double fpga = rate["fpga"] / rate["cpu-uncached"];
  v.check(within_rel(uncached, 2.88, 0.10), fmt::format("uncached/cached {:.3f} vs 2.88 +-10%", uncached));
  v.check(within_rel(fpga - 1, 0.22, 0.10),
          fmt::format("fpga over uncached {:.1f}% vs 22% +-10%", 100 * (fpga - 1)));
  return v;
}

Verdict criterion5() {
  Verdict v;
  // interval -> {cpu mean, cpu success, fpga mean, fpga success}
  const std::map<double, std::array<double, 4>> table{
      {16, {280, 0.004, 186, 0.002}}, {32, {627, 0.002, 219, 0.008}},
      {48, {273, 0.14, 124, 0.19}},   {64, {81, 0.17, 76, 0.26}},
      {96, {74, 0.46, 58, 0.49}},     {128, {73, 0.52, 70, 0.50}},
      {256, {106, 0.57, 115, 0.55}}};
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentOutput out = run_conf("fault-sweep.conf", "fault-sweep", 1);
  const double secs = seconds_since(t0);
  const auto& t = out.table;
  std::map<std::string, std::vector<std::pair<double, std::uint64_t>>> successes;
  for (const auto& r : t.rows) {
    const double iv = std::stod(r[col(t, "interval_ms")]);
    const std::string att = r[col(t, "attacker")];
    const double mean = std::stod(r[col(t, "mean_sigs")]);
    const double rate = std::stod(r[col(t, "success_rate")]);
    successes[att].push_back({iv, std::stoull(r[col(t, "successes")])});
    const auto& ref = table.at(iv);
    const std::size_t k = att == "cpu" ? 0 : 2;
    if (iv < 48) {
      v.check(rate < 0.01, fmt::format("{} {}ms success {:.1f}% < 1%", att, iv, 100 * rate));
    } else {
      v.check(within_rel(mean, ref[k], 0.25),
              fmt::format("{} {}ms mean {:.1f} vs {}", att, iv, mean, ref[k]));
      v.check(within_rel(rate, ref[k + 1], 0.25),
              fmt::format("{} {}ms success {:.1f}% vs {:.1f}%", att, iv, 100 * rate, 100 * ref[k + 1]));
    }
  }
  // Trials share victim placement across intervals, so counts are paired.
  for (auto& [att, s] : successes) {
    std::sort(s.begin(), s.end());
    bool mono = true;
    for (std::size_t i = 1; i < s.size(); ++i) mono = mono && s[i].second >= s[i - 1].second;
    v.check(mono, fmt::format("{} success non-decreasing in interval", att));
  }
  v.check(secs < 300, fmt::format("{:.1f} s < 300 s", secs));
  return v;
}

Verdict criterion6() {
  Verdict v;
  const std::size_t n = 100'000;
  auto accuracy = [](const std::vector<LatencySample>& s, const std::function<bool(double)>& ok) {
    std::size_t good = 0;
    for (const auto& x : s) good += ok(x.cycles);
    return static_cast<double>(good) / static_cast<double>(s.size());
  };

  {
    System sys(platform_preset("pac"), 6);
    LatencySampler sampler(sys, 64ULL << 20);
    const double cut = (145.0 + 148.0) / 2;
    const double llc = accuracy(sampler.sample(SampleKind::kFpgaLlc, n), [&](double c) { return c < cut; });
    const double dram = accuracy(sampler.sample(SampleKind::kFpgaDram, n), [&](double c) { return c >= cut; });
    v.check(std::min(llc, dram) >= 0.99,
            fmt::format("fpga-side llc {:.4f} dram {:.4f}", llc, dram));
  }
  {
    System sys(platform_preset("integrated"), 6);
    LatencySampler sampler(sys, 64ULL << 20);
    const auto& l = sys.cache.config().latency;
    const std::vector<std::pair<SampleKind, const Distribution*>> tiers{
        {SampleKind::kCpuPrivate, &l.private_tier},
        {SampleKind::kCpuLlc, &l.llc},
        {SampleKind::kCpuDram, &l.dram},
        {SampleKind::kCpuFpgaCache, &l.fpga_cache}};
    std::vector<double> cuts;
    for (std::size_t i = 0; i + 1 < tiers.size(); ++i) {
      cuts.push_back((tiers[i].second->max() + tiers[i + 1].second->min()) / 2);
    }
    std::string detail;
    double worst = 1;
    for (std::size_t k = 0; k < tiers.size(); ++k) {
      const double acc = accuracy(sampler.sample(tiers[k].first, n), [&](double c) {
        return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), c) - cuts.begin()) == k;
      });
      worst = std::min(worst, acc);
      detail += fmt::format(" {} {:.4f}", to_string(tiers[k].first), acc);
    }
    v.check(worst >= 0.99, "cpu-side" + detail);

    const double cut = latency_thresholds(sys).flush_fpga;
    const double plain = accuracy(sampler.sample(SampleKind::kFlushPlain, n), [&](double c) { return c < cut; });
    const double fpga = accuracy(sampler.sample(SampleKind::kFlushFpga, n), [&](double c) { return c >= cut; });
    v.check(std::min(plain, fpga) >= 0.99,
            fmt::format("flush residency plain {:.4f} fpga-cached {:.4f}", plain, fpga));
  }
  return v;
}

Verdict criterion7() {
  Verdict v;
  const ExperimentOutput out = run_conf("integrated.conf", "covert", 7,
                                        {"exp.covert_messages=10", "exp.covert_bytes=1024"});
  const auto& t = out.table;
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
  double bandwidth = 0;
  for (const auto& r : t.rows) {
    errors += std::stoull(r[col(t, "bit_errors")]);
    bits += std::stoull(r[col(t, "bits")]);
    bandwidth = std::stod(r[col(t, "bandwidth_bps")]);
  }
  v.check(t.rows.size() == 10 && bits == 10 * 8192 && errors == 0,
          fmt::format("{} messages, {} bits, {} errors", t.rows.size(), bits, errors));
  v.check(std::fabs(bandwidth - 94'980) < 10, fmt::format("bit rate {:.1f} bit/s", bandwidth));
  for (double hz : {2.8e9, 3.4e9}) {
    const double bound = covert_receiver_bound_bps(hz, 1855);
    v.check(bound >= 1.5e6 && bound <= 1.8e6,
            fmt::format("receiver bound at {:.1f} GHz = {:.4f} Mbit/s in [1.5, 1.8]", hz / 1e9,
                        bound / 1e6));
  }
  const double sender = covert_sender_bound_bps(400'000'000);
  v.check(sender == 40e6, fmt::format("sender bound {:.0f} bit/s", sender));
  return v;
}

Verdict criterion8() {
  Verdict v;
  const ExperimentOutput out = run_conf("integrated.conf", "evset", 8, {"exp.evset_targets=100"});
  const auto& t = out.table;
  std::map<std::string, std::pair<int, int>> tally;
  for (const auto& r : t.rows) {
    const std::string cache = r[col(t, "cache")];
    const auto size = std::stoul(r[col(t, "size")]);
    const bool good = size == (cache == "llc" ? 20UL : 1UL) && r[col(t, "all_congruent")] == "1" &&
                      r[col(t, "sufficient")] == "1" && r[col(t, "minimal")] == "1";
    tally[cache].first += good;
    tally[cache].second += 1;
  }
  for (const char* cache : {"llc", "fpga"}) {
    const auto [good, total] = tally[cache];
    v.check(total == 100 && good == total, fmt::format("{} {}/{} sets", cache, good, total));
  }
  return v;
}

Verdict criterion9() {
  Verdict v;
  {
    // Single-Modified, inclusivity and DDIO confinement over a full trace.
    System sys(platform_preset("integrated"), 9);
    CacheHierarchy& c = sys.cache;
    c.set_trace(true);
    SeededRng rng(9, hash_name("trace"));
    const auto buf = sys.fabric.alloc_buffer(8ULL << 20);
    std::uint64_t violations = 0;
    std::uint64_t digest_changes = 0;
    for (Picoseconds t = 0; t < 25'000; ++t) {
      const PhysAddr a = buf.base_phys + 64 * static_cast<PhysAddr>(rng.uniform_int(0, 4095));
      const bool upi = rng.bernoulli(0.5);
      switch (rng.uniform_int(0, 6)) {
        case 0: c.cpu_access(a, MemOp::kRead, false, t); break;
        case 1: c.cpu_access(a, MemOp::kWrite, false, t); break;
        case 2: c.cpu_flush(a, t); break;
        case 3: c.io_write_allocate(a, CachingHint::kWrPushI, upi, t); break;
        case 4: c.io_write_allocate(a, CachingHint::kWrLineM, upi, t); break;
        default: {
          const auto before = c.llc_residency_digest();
          c.io_read_lookup(a, rng.bernoulli(0.5) ? CachingHint::kRdLineI : CachingHint::kRdLineS,
                           upi, t);
          digest_changes += c.llc_residency_digest() != before;
        }
      }
      violations += c.audit().size();
    }
    std::uint64_t outside = 0;
    for (const auto& e : c.trace()) {
      if (e.op == "write-install") outside += !c.config().ddio.allows(static_cast<std::uint32_t>(e.way));
    }
    v.check(violations == 0, fmt::format("coherence audits: {} violations", violations));
    v.check(outside == 0, fmt::format("ddio installs outside mask: {}", outside));
    v.check(digest_changes == 0, fmt::format("io reads that allocated: {}", digest_changes));
  }
  {
    // DMA reads through the fabric never allocate.
    System sys(platform_preset("pac"), 9);
    const auto buf = sys.fabric.alloc_buffer(2ULL << 20);
    const auto digest = sys.cache.llc_digest();
    std::uint64_t issue = 0;
    for (PhysAddr a = buf.base_phys; a < buf.base_phys + buf.size; a += 64) {
      issue = sys.fabric.dma_submit({MemOp::kRead, a, CachingHint::kRdLineI, Channel::kAuto, issue})
                  .issue_cycle + 1;
    }
    v.check(sys.cache.llc_digest() == digest, "dma reads leave the llc unchanged");
  }
  {
    const DramGeometry g{4, 64, 4096};
    std::uint64_t bad = 0;
    for (const auto& m : {AddressMap::linear(g), AddressMap::xor_default(g)}) {
      std::vector<bool> seen(g.capacity_bytes(), false);
      for (PhysAddr a = 0; a < g.capacity_bytes(); ++a) {
        const auto loc = m.map(a);
        const std::uint64_t idx =
            (std::uint64_t{loc.bank} * g.rows_per_bank + loc.row) * g.row_bytes + loc.column;
        bad += seen[idx] || m.unmap(loc) != a;
        seen[idx] = true;
      }
    }
    v.check(bad == 0, fmt::format("address map bijection: {} failures", bad));
  }
  {
    DramConfig c;
    c.geometry = DramGeometry{4, 64, 4096};
    c.flip.vulnerable_row_fraction = 1.0;
    c.flip.per_cell_threshold = Distribution::tnormal(50'000, 10'000, 20'000, 100'000);
    c.flip.per_cell_exposure_ms = Distribution::point(0);
    Dram d(c, 9);
    const double floor = c.flip.min_activation_threshold();
    SeededRng rng(9, hash_name("refresh"));
    const Picoseconds period = c.refresh.period_ps;
    for (int w = 0; w < 200; ++w) {
      const Picoseconds t0 = w * period;
      const auto bank = static_cast<std::uint32_t>(rng.uniform_int(0, 3));
      const auto row = static_cast<std::uint32_t>(rng.uniform_int(2, 61));
      const auto n = static_cast<std::uint64_t>(rng.uniform01() * (floor - 1));
      const std::vector<DramLocation> aggs{{bank, row - 1, 0}, {bank, row + 1, 0}};
      d.hammer_batch(aggs, n, t0 + 1000, t0 + period - 1000);
      d.refresh_tick(t0 + period);
    }
    v.check(d.total_flips() == 0, fmt::format("sub-threshold windows flipped {} cells", d.total_flips()));
  }
  {
    const std::vector<std::pair<std::string, std::vector<std::string>>> runs{
        {"bellcore-demo", {"exp.bellcore_keys=2", "exp.bellcore_bits=256"}},
        {"latency-hist", {"exp.latency_samples=2000"}},
        {"fault-sweep", {"sweep.trials=20", "sweep.key_bits=256", "sweep.key_pool=2"}},
        {"flips-vs-hammers", {"exp.flip_rows=4", "exp.hammer_counts=1e6,1e8"}}};
    for (const auto& [exp, ov] : runs) {
      const std::string a = render_csv(run_conf("default.conf", exp, 5, ov).table);
      const std::string b = render_csv(run_conf("default.conf", exp, 5, ov).table);
      v.check(a == b, exp + " replay byte-identical");
    }
  }
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"bellcore exactness", criterion1},
      {"blinded bellcore", criterion2},
      {"hammer timing", criterion3},
      {"uncached comparison", criterion4},
      {"fault-sweep calibration", criterion5},
      {"latency classification", criterion6},
      {"covert channel", criterion7},
      {"eviction sets", criterion8},
      {"property suites", criterion9}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : v.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s criterion %zu (%s) [%.1f s]: %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), seconds_since(t0), detail.c_str());
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
