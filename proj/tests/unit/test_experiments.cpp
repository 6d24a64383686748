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


#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hammerlab/experiments.hpp"

using namespace hammerlab;

namespace {

// Small settings so that every experiment runs in well under a second.
const std::map<std::string, std::vector<std::string>>& small_overrides() {
  static const std::map<std::string, std::vector<std::string>> m{
      {"hammer-rate", {"exp.runs=2", "exp.hammer_count=200000"}},
      {"flip-rate", {"exp.flip_rows=3", "exp.hammer_count=200000"}},
      {"flips-vs-hammers", {"exp.flip_rows=2", "exp.hammer_counts=1000,200000"}},
      {"fault-sweep", {"sweep.trials=4", "sweep.key_bits=256", "sweep.key_pool=1"}},
      {"covert", {"platform=integrated", "exp.covert_messages=1", "exp.covert_bytes=4"}},
      {"evset", {"exp.evset_targets=1"}},
      {"bellcore-demo", {"exp.bellcore_keys=2", "exp.bellcore_bits=256"}},
      {"latency-hist", {"exp.latency_samples=200"}},
      {"uncached-compare", {"exp.hammer_count=100000"}},
  };
  return m;
}

ExperimentConfig small(const std::string& name, std::vector<std::string> extra = {}) {
  std::vector<std::string> ov = small_overrides().at(name);
  for (auto& e : extra) ov.push_back(std::move(e));
  ExperimentConfig c = parse_config("", ov);
  c.experiment = name;
  c.seed = 7;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("every experiment has small settings") {
  CHECK(experiment_names().size() == small_overrides().size());
  for (const auto& n : experiment_names()) CHECK(small_overrides().count(n) == 1);
}

TEST_CASE("tables carry seed and config hash before the documented columns") {
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    const ExperimentConfig c = small(name);
    const ExperimentOutput out = run_experiment(c);
    std::vector<std::string> want{"seed", "config_hash"};
    for (const auto& col : experiment_columns(name)) want.push_back(col);
    CHECK(out.table.header == want);
    CHECK(!out.table.rows.empty());
    CHECK(!out.summary.empty());
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(c.hash()));
    for (const auto& r : out.table.rows) {
      REQUIRE(r.size() == want.size());
      CHECK(r[0] == "7");
      CHECK(r[1] == hash);
    }
  }
}

TEST_CASE("runs are byte-identical for the same seed and config") {
  for (const auto& name : experiment_names()) {
    CAPTURE(name);
    const ExperimentConfig c = small(name);
    CHECK(render_csv(run_experiment(c).table) == render_csv(run_experiment(c).table));
  }
}

TEST_CASE("a different seed changes the sampled rows") {
  ExperimentConfig a = small("latency-hist");
  ExperimentConfig b = a;
  b.seed = 8;
  const auto ra = run_experiment(a).table.rows;
  const auto rb = run_experiment(b).table.rows;
  bool differ = ra.size() != rb.size();
  for (std::size_t i = 0; !differ && i < ra.size(); ++i) {
    differ = std::vector(ra[i].begin() + 2, ra[i].end()) !=
             std::vector(rb[i].begin() + 2, rb[i].end());
  }
  CHECK(differ);
}

TEST_CASE("fault sweep emits one row per interval and attacker") {
  const ExperimentOutput out = run_experiment(small("fault-sweep"));
  CHECK(out.table.rows.size() == 14);
  const ExperimentOutput two = run_experiment(
      small("fault-sweep", {"sweep.intervals_ms=48,96", "sweep.attackers=cpu"}));
  CHECK(two.table.rows.size() == 2);
}

TEST_CASE("bellcore demo opens with the toy key") {
  const ExperimentOutput out = run_experiment(small("bellcore-demo"));
  REQUIRE(out.table.rows.size() == 3);
  const auto& toy = out.table.rows[0];
  // case,key_bits,N,S,S_faulty,p,q,recovered after the two prefix columns
  CHECK(toy[2] == "toy");
  CHECK(toy[3] == "8");
  CHECK(toy[4] == "143");
  CHECK(toy[5] == "63");
  CHECK(toy[6] == "141");
  CHECK(toy[7] == "11");
  CHECK(toy[8] == "13");
  CHECK(toy[9] == "1");
  for (const auto& r : out.table.rows) CHECK(r.back() == "1");
}

TEST_CASE("uncached compare is normalised to the cached rate") {
  const ExperimentOutput out = run_experiment(small("uncached-compare"));
  REQUIRE(out.table.rows.size() == 3);
  CHECK(out.table.rows[0][2] == "cpu-cached");
  CHECK(out.table.rows[0].back() == "1.000000");
  CHECK(std::stod(out.table.rows[1].back()) > 1.0);
}

TEST_CASE("unknown experiments are config errors") {
  ExperimentConfig c = parse_config("");
  c.experiment = "warp-drive";
  try {
    run_experiment(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  CHECK_THROWS_AS(experiment_columns("warp-drive"), Error);
}

TEST_CASE("csv rendering") {
  CsvTable t;
  t.header = {"a", "b"};
  CHECK(render_csv(t) == "a,b\n");
  t.rows = {{"1", "2"}, {"3", "4"}};
  CHECK(render_csv(t) == "a,b\n1,2\n3,4\n");
  CHECK(csv_number(1.5) == "1.500000");
  CHECK(csv_number(-0.0000004) == "-0.000000");
  CHECK(csv_number(1e9) == "1000000000.000000");
  CHECK(csv_number(std::nan("")) == "nan");
}

TEST_CASE("emit_csv writes the rendering and reports io errors") {
  CsvTable t;
  t.header = {"x"};
  t.rows = {{"1"}};
  const auto dir = std::filesystem::temp_directory_path() / "hammerlab_test_emit";
  std::filesystem::create_directories(dir);
  emit_csv(t, dir / "t.csv");
  CHECK(slurp(dir / "t.csv") == "x\n1\n");
  try {
    emit_csv(t, dir / "missing" / "t.csv");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("latency sampler puts accesses in the requested tier") {
  System sys(platform_preset("integrated"), 3);
  LatencySampler s(sys, 64ULL << 20);
  const std::vector<std::pair<SampleKind, Tier>> cases{
      {SampleKind::kCpuPrivate, Tier::kPrivate},
      {SampleKind::kCpuLlc, Tier::kLlc},
      {SampleKind::kCpuDram, Tier::kDram},
      {SampleKind::kCpuFpgaCache, Tier::kFpgaCache},
      {SampleKind::kFpgaLlc, Tier::kLlc},
      {SampleKind::kFpgaDram, Tier::kDram},
      {SampleKind::kFpgaFpgaCache, Tier::kFpgaCache}};
  for (auto [kind, tier] : cases) {
    CAPTURE(to_string(kind));
    const Channel ch = kind == SampleKind::kFpgaFpgaCache ? Channel::kUpi : Channel::kAuto;
    for (const auto& x : s.sample(kind, 50, ch)) CHECK(x.tier == tier);
  }
  double plain = 0;
  double fpga = 0;
  for (const auto& x : s.sample(SampleKind::kFlushPlain, 50)) plain += x.cycles;
  for (const auto& x : s.sample(SampleKind::kFlushFpga, 50)) fpga += x.cycles;
  CHECK(fpga > plain);
}

}  // TEST_SUITE
