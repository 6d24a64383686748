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

#include <algorithm>
#include <string>
#include <vector>

#include "hammerlab/config.hpp"

using namespace hammerlab;

namespace {

ErrorKind kind_of(const std::string& text, const std::vector<std::string>& ov = {}) {
  try {
    parse_config(text, ov);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kContract;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto nl = s.find('\n', pos);
    out.push_back(s.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty text gives the pac preset") {
  const ExperimentConfig c = parse_config("");
  CHECK(c.platform.name == "pac");
  CHECK(c.platform.cpu.clock.frequency_hz == 3'400'000'000ULL);
}

TEST_CASE("comments and blank lines are ignored") {
  const ExperimentConfig c = parse_config("# header\n\n  exp.runs = 7  # trailing\n");
  CHECK(c.exp.runs == 7);
}

TEST_CASE("platform key selects the preset") {
  const ExperimentConfig c = parse_config("platform=integrated\n");
  CHECK(c.platform.name == "integrated");
  CHECK(c.platform.cache.fpga.present);
  CHECK(kind_of("platform=mainframe\n") == ErrorKind::kConfig);
}

TEST_CASE("unknown keys and malformed values are config errors") {
  CHECK(kind_of("exp.nope=1\n") == ErrorKind::kConfig);
  CHECK(kind_of("seed=3\n") == ErrorKind::kConfig);
  CHECK(kind_of("experiment=covert\n") == ErrorKind::kConfig);
  CHECK(kind_of("exp.runs=abc\n") == ErrorKind::kConfig);
  CHECK(kind_of("exp.runs=-1\n") == ErrorKind::kConfig);
  CHECK(kind_of("exp.runs\n") == ErrorKind::kConfig);
  CHECK(kind_of("flip.per_cell_threshold=gamma(1,2)\n") == ErrorKind::kConfig);
  CHECK(kind_of("", {"exp.missing=1"}) == ErrorKind::kConfig);
}

TEST_CASE("validation failures surface as config errors") {
  CHECK(kind_of("sweep.trials=0\n") == ErrorKind::kConfig);
  CHECK(kind_of("sweep.intervals_ms=16,0\n") == ErrorKind::kConfig);
  CHECK(kind_of("flip.per_cell_threshold=uniform(5,4)\n") == ErrorKind::kConfig);
  CHECK(kind_of("exp.covert_bit_period_cycles=0\n") == ErrorKind::kConfig);
}

TEST_CASE("integers accept hex, binary and integral scientific notation") {
  CHECK(parse_config("exp.hammer_count=0x10\n").exp.hammer_count == 16);
  CHECK(parse_config("exp.hammer_count=0b101\n").exp.hammer_count == 5);
  CHECK(parse_config("exp.hammer_count=2e9\n").exp.hammer_count == 2'000'000'000ULL);
  CHECK(kind_of("exp.hammer_count=2.5\n") == ErrorKind::kConfig);
  CHECK(kind_of("exp.runs=0x1ffffffff\n") == ErrorKind::kConfig);
}

TEST_CASE("lists and distributions parse") {
  const ExperimentConfig c = parse_config(
      "sweep.intervals_ms=48,96\n"
      "sweep.attackers=fpga\n"
      "flip.per_cell_threshold=tnormal(100,5,90,110)\n");
  CHECK(c.sweep.intervals_ms == std::vector<double>{48, 96});
  CHECK(c.sweep.attackers == std::vector<Attacker>{Attacker::kFpga});
  CHECK(c.platform.dram.flip.per_cell_threshold.to_string() ==
        Distribution::tnormal(100, 5, 90, 110).to_string());
}

TEST_CASE("overrides apply after the file") {
  const ExperimentConfig c = parse_config("exp.runs=3\n", {"exp.runs=9"});
  CHECK(c.exp.runs == 9);
  const ExperimentConfig p = parse_config("platform=pac\n", {"platform=pac-r720"});
  CHECK(p.platform.name == "pac-r720");
  CHECK(p.platform.cpu.clock.frequency_hz == 2'500'000'000ULL);
}

TEST_CASE("later file lines win over earlier ones") {
  CHECK(parse_config("exp.runs=3\nexp.runs=4\n").exp.runs == 4);
}

TEST_CASE("resolved lists every key once, platform first") {
  const ExperimentConfig c = parse_config("");
  const auto ls = lines(c.resolved());
  REQUIRE(!ls.empty());
  CHECK(ls.front() == "platform=pac");
  std::vector<std::string> keys;
  for (const auto& l : ls) {
    const auto eq = l.find('=');
    REQUIRE(eq != std::string::npos);
    keys.push_back(l.substr(0, eq));
  }
  CHECK(keys == config_keys());
  CHECK(std::is_sorted(keys.begin() + 1, keys.end()));
  CHECK(std::adjacent_find(keys.begin(), keys.end()) == keys.end());
}

TEST_CASE("resolved output parses back to the same config") {
  const ExperimentConfig a = parse_config("platform=integrated\nexp.runs=5\ncache.ddio_way_mask=0x3\n");
  const ExperimentConfig b = parse_config(a.resolved());
  CHECK(a.resolved() == b.resolved());
  CHECK(a.hash() == b.hash());
}

TEST_CASE("hash is FNV-1a of resolved and tracks changes") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  const ExperimentConfig a = parse_config("");
  CHECK(a.hash() == fnv1a64(a.resolved()));
  CHECK(a.hash() == parse_config("").hash());
  CHECK(a.hash() != parse_config("", {"exp.runs=21"}).hash());
}

TEST_CASE("missing file is a config error") {
  try {
    load_config("/nonexistent/hammerlab.conf");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
  }
}

}  // TEST_SUITE
