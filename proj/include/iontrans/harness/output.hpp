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

// Sweep output files. Everything except run.log is a pure function of the
// resolved configuration.
//
//   raw.csv          N,realization,seed,fidelity,leakage,duration_phys
//   aggregate.csv    N,mean,stderr,R
//   plot.dat         whitespace columns N mean stderr, '#' comments
//   diagnostics.csv  per-row conservation diagnostics and errors
//   config.json      resolved configuration

#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iontrans/harness/config.hpp"
#include "iontrans/harness/sweep.hpp"

namespace iontrans::harness {

/// 17 significant digits, '.' separator.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

inline std::string csv_escape(const std::string& s) {
  std::string r = "\"";
  for (char c : s) {
    if (c == '"') r += '"';
    r += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return r + "\"";
}

}  // namespace detail

struct OutputPaths {
  std::filesystem::path raw;
  std::filesystem::path aggregate;
  std::filesystem::path plot;
  std::filesystem::path diagnostics;
  std::filesystem::path config;
  std::filesystem::path log;

  static OutputPaths in(const std::filesystem::path& dir) {
    return {dir / "raw.csv",         dir / "aggregate.csv", dir / "plot.dat",
            dir / "diagnostics.csv", dir / "config.json",   dir / "run.log"};
  }
};

inline void write_outputs(const SweepResult& result, const RunConfig& cfg, const OutputPaths& paths) {
  for (const auto* p : {&paths.raw, &paths.aggregate, &paths.plot, &paths.diagnostics, &paths.config})
    if (p->has_parent_path()) std::filesystem::create_directories(p->parent_path());

  auto raw = detail::open_out(paths.raw);
  raw << "N,realization,seed,fidelity,leakage,duration_phys\n";
  for (const auto& r : result.rows)
    raw << r.n_ions << ',' << r.realization << ',' << r.seed << ',' << format_number(r.fidelity) << ','
        << format_number(r.leakage) << ',' << format_number(r.duration) << '\n';
  detail::finish(raw, paths.raw);

  auto agg = detail::open_out(paths.aggregate);
  agg << "N,mean,stderr,R\n";
  for (const auto& a : result.aggregate)
    agg << a.n_ions << ',' << format_number(a.mean) << ',' << format_number(a.stderr_) << ',' << a.count << '\n';
  detail::finish(agg, paths.aggregate);

  auto plot = detail::open_out(paths.plot);
  plot << "# mode " << mode_name(cfg.mode) << ", seed " << cfg.seed << ", " << cfg.realizations
       << " realizations per N\n";
  plot << "# N mean stderr\n";
  for (const auto& a : result.aggregate)
    plot << a.n_ions << ' ' << format_number(a.mean) << ' ' << format_number(a.stderr_) << '\n';
  detail::finish(plot, paths.plot);

  auto diag = detail::open_out(paths.diagnostics);
  diag << "N,realization,ok,f0,f1,f2,max_norm_drift,max_trace_drift,min_eigenvalue,hermiticity_defect,error\n";
  for (const auto& r : result.rows)
    diag << r.n_ions << ',' << r.realization << ',' << (r.ok ? 1 : 0) << ',' << format_number(r.f0) << ','
         << format_number(r.f1) << ',' << format_number(r.f2) << ',' << format_number(r.max_norm_drift) << ','
         << format_number(r.max_trace_drift) << ',' << format_number(r.min_eigenvalue) << ','
         << format_number(r.hermiticity_defect) << ',' << detail::csv_escape(r.error) << '\n';
  detail::finish(diag, paths.diagnostics);

  auto conf = detail::open_out(paths.config);
  conf << to_json(cfg).dump(2) << '\n';
  detail::finish(conf, paths.config);
}

/// Plain-text log with wall-clock information; the only non-reproducible output.
inline void write_run_log(const SweepResult& result, const RunConfig& cfg, const std::filesystem::path& path,
                          double elapsed_seconds) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto log = detail::open_out(path);
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[64];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  log << "finished " << stamp << '\n';
  log << "mode " << mode_name(cfg.mode) << '\n';
  log << "points " << result.rows.size() << ", failures " << result.failures().size() << '\n';
  log << "workers " << cfg.workers << '\n';
  log << "elapsed_seconds " << format_number(elapsed_seconds) << '\n';
  for (const auto* f : result.failures())
    log << "failed N=" << f->n_ions << " realization=" << f->realization << ": " << f->error << '\n';
  detail::finish(log, path);
}

struct RawRow {
  int n_ions = 0;
  int realization = 0;
  std::uint64_t seed = 0;
  double fidelity = 0.0;
  double leakage = 0.0;
  double duration = 0.0;
};

/// Reads a raw.csv back.
inline std::vector<RawRow> read_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "N,realization,seed,fidelity,leakage,duration_phys") throw Error("unexpected raw.csv header");
  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw Error("malformed raw.csv row: " + line);
    rows.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoull(f[2]), std::stod(f[3]), std::stod(f[4]),
                    std::stod(f[5])});
  }
  return rows;
}

}  // namespace iontrans::harness
