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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hammerlab/config.hpp"
#include "hammerlab/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    throw hammerlab::Error(hammerlab::ErrorKind::kIo,
                           fmt::format("cannot write '{}'", path.string()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace hammerlab;
  CLI::App app{"hammerlab: FPGA/CPU shared-memory attack simulator"};
  std::string experiment;
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string names;
  for (const auto& n : experiment_names()) names += (names.empty() ? "" : ", ") + n;

  app.add_option("experiment", experiment, "One of: " + names)->required();
  app.add_option("--config", config_path, "key=value config file")->required();
  app.add_option("--seed", seed, "Master seed")->required();
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--override", overrides, "Extra key=value applied after the file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    experiment_columns(experiment);
    cfg = load_config(config_path, overrides);
    cfg.experiment = experiment;
    cfg.seed = seed;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    const std::string resolved = cfg.resolved();
    write_text(out / "config.resolved", resolved);
    std::cerr << resolved;

    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentOutput result = run_experiment(cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit_csv(result.table, out / (experiment + ".csv"));
    std::string log = fmt::format("experiment={}\nseed={}\nconfig_hash={:016x}\nrows={}\nwall_runtime_s={:.3f}\n",
                                  experiment, seed, cfg.hash(), result.table.rows.size(), wall);
    for (const auto& line : result.summary) log += line + "\n";
    write_text(out / "run.log", log);
    std::cout << log;
  } catch (const Error& e) {
    std::cerr << "experiment failed (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kConfig ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "experiment failed: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}
