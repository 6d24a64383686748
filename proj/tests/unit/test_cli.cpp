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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = HAMMERLAB_CLI;
const std::string kConfigs = HAMMERLAB_CONFIGS;

int run(const std::string& args) {
  const std::string cmd = "\"" + kCli + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("hammerlab_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string base(const fs::path& out) {
  return "bellcore-demo --config " + kConfigs + "/default.conf --seed 3 --out " +
         out.string() + " --override exp.bellcore_keys=1 --override exp.bellcore_bits=128";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("successful run writes resolved config, csv and log") {
  TempDir t;
  CHECK(run(base(t.path / "a")) == 0);
  CHECK(fs::exists(t.path / "a" / "config.resolved"));
  CHECK(fs::exists(t.path / "a" / "bellcore-demo.csv"));
  const std::string log = slurp(t.path / "a" / "run.log");
  CHECK(log.find("experiment=bellcore-demo") != std::string::npos);
  CHECK(log.find("seed=3") != std::string::npos);
  const std::string resolved = slurp(t.path / "a" / "config.resolved");
  CHECK(resolved.rfind("platform=pac\n", 0) == 0);
  CHECK(resolved.find("exp.bellcore_keys=1\n") != std::string::npos);
}

TEST_CASE("csv output is byte-identical across runs") {
  TempDir t;
  REQUIRE(run(base(t.path / "a")) == 0);
  REQUIRE(run(base(t.path / "b")) == 0);
  const std::string a = slurp(t.path / "a" / "bellcore-demo.csv");
  CHECK(!a.empty());
  CHECK(a == slurp(t.path / "b" / "bellcore-demo.csv"));
  CHECK(slurp(t.path / "a" / "config.resolved") == slurp(t.path / "b" / "config.resolved"));
}

TEST_CASE("configuration problems exit with 2") {
  TempDir t;
  CHECK(run(base(t.path / "a") + " --override exp.nope=1") == 2);
  CHECK(run(base(t.path / "a") + " --override exp.bellcore_bits=abc") == 2);
  CHECK(run("warp-drive --config " + kConfigs + "/default.conf --seed 1 --out " +
            (t.path / "w").string()) == 2);
  CHECK(run("covert --config /nonexistent.conf --seed 1 --out " + (t.path / "m").string()) == 2);
  CHECK(run("covert --seed 1") == 2);
  CHECK(run("covert --config " + kConfigs + "/default.conf --seed x --out " +
            (t.path / "s").string()) == 2);
}

TEST_CASE("runtime failures exit with 3") {
  TempDir t;
  { std::ofstream(t.path / "file") << "x"; }
  CHECK(run(base(t.path / "file" / "out")) == 3);
}

TEST_CASE("shipped configs load") {
  TempDir t;
  for (const char* name : {"default", "integrated", "uncached-compare", "fault-sweep"}) {
    CAPTURE(name);
    CHECK(run(std::string("bellcore-demo --config ") + kConfigs + "/" + name +
              ".conf --seed 1 --out " + (t.path / name).string() +
              " --override exp.bellcore_keys=0") == 0);
  }
}

}  // TEST_SUITE
