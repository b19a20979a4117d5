// Copyright 2026 The iontrans Authors
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

// iontrans <mode> --config <path> [--seed S] [--workers W] [--out DIR]

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "iontrans/harness/config.hpp"
#include "iontrans/harness/output.hpp"
#include "iontrans/harness/sweep.hpp"
#include "iontrans/validation/oracle_suite.hpp"

namespace {

using namespace iontrans;

int run_oracles(const harness::RunConfig& cfg) {
  const auto results = validation::run_oracle_suite();
  const std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "oracles.csv", std::ios::binary | std::ios::trunc);
  out << "name,value,reference,error,tolerance,pass\n";
  int failed = 0;
  for (const auto& r : results) {
    out << r.name << ',' << harness::format_number(r.value) << ',' << harness::format_number(r.reference) << ','
        << harness::format_number(r.error) << ',' << harness::format_number(r.tolerance) << ','
        << (r.pass ? 1 : 0) << '\n';
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << "  error " << r.error << " (tolerance " << r.tolerance
              << ")\n";
    if (!r.pass) {
      ++failed;
      std::cerr << "oracle failed: " << r.name << '\n';
    }
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ion-chain to cavity-photon transfer simulations"};
  std::string mode;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;

  std::string modes;
  for (const auto& [name, _] : harness::mode_names()) modes += (modes.empty() ? "" : ", ") + name;
  app.add_option("mode", mode, "One of: " + modes)->required();
  app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Base seed (overrides the config)");
  app.add_option("--workers", workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  CLI11_PARSE(app, argc, argv);

  harness::RunConfig cfg;
  try {
    cfg = harness::load_config(config_path);
    cfg.mode = harness::parse_mode(mode);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
    if (out_dir) cfg.out_dir = *out_dir;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (cfg.mode == harness::Mode::oracle_suite) return run_oracles(cfg);

    const auto t0 = std::chrono::steady_clock::now();
    const auto result = harness::run_sweep(cfg);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto paths = harness::OutputPaths::in(cfg.out_dir);
    harness::write_outputs(result, cfg, paths);
    harness::write_run_log(result, cfg, paths.log, elapsed);

    for (const auto& a : result.aggregate)
      std::cout << "N=" << a.n_ions << "  mean " << harness::format_number(a.mean) << "  stderr "
                << harness::format_number(a.stderr_) << "  R=" << a.count << '\n';
    const auto failures = result.failures();
    for (const auto* f : failures)
      std::cerr << "failed: N=" << f->n_ions << " realization=" << f->realization << " seed=" << f->seed << ": "
                << f->error << '\n';
    return failures.empty() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
