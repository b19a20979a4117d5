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

// Run configuration: a flat JSON object, every key optional, unknown keys
// rejected. See docs/config.md for the schema.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "iontrans/common.hpp"
#include "iontrans/protocol/params.hpp"

namespace iontrans::harness {

using Json = nlohmann::json;

enum class Mode { step1_sweep, step2_sweep, step3, joint, two_photon, gate, oracle_suite };

inline const std::vector<std::pair<std::string, Mode>>& mode_names() {
  static const std::vector<std::pair<std::string, Mode>> names{
      {"step1-sweep", Mode::step1_sweep}, {"step2-sweep", Mode::step2_sweep}, {"step3", Mode::step3},
      {"joint", Mode::joint},             {"two-photon", Mode::two_photon},   {"gate", Mode::gate},
      {"oracle-suite", Mode::oracle_suite}};
  return names;
}

inline Mode parse_mode(const std::string& s) {
  for (const auto& [name, m] : mode_names())
    if (name == s) return m;
  throw ValidationError("mode", "unknown mode '" + s + "'");
}

inline std::string mode_name(Mode m) {
  for (const auto& [name, v] : mode_names())
    if (v == m) return name;
  return "?";
}

struct RunConfig {
  Mode mode = Mode::joint;
  protocol::ProtocolParams params;
  std::vector<int> n_ions{18};
  int realizations = 1;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out_dir = "out";
  /// Photon-number amplitudes for the gate mode.
  std::array<double, 3> alpha{1.0 / 1.7320508075688772, 1.0 / 1.7320508075688772, 1.0 / 1.7320508075688772};

  void validate() const {
    params.validate();
    if (n_ions.empty()) throw ValidationError("N", "needs at least one chain size");
    for (int n : n_ions)
      if (n < 1) throw ValidationError("N", "chain sizes must be >= 1");
    if (realizations < 1) throw ValidationError("realizations", "must be >= 1");
    if (workers < 1) throw ValidationError("workers", "must be >= 1");
    if (out_dir.empty()) throw ValidationError("out", "must not be empty");
  }
};

namespace detail {

using Setter = std::function<void(RunConfig&, const Json&)>;

inline double as_number(const Json& v, const std::string& key) {
  if (!v.is_number()) throw ValidationError(key, "expected a number");
  return v.get<double>();
}

inline long long as_integer(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ValidationError(key, "expected an integer");
  return v.get<long long>();
}

inline const std::map<std::string, Setter>& setters() {
  using P = protocol::ProtocolParams;
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto real = [&t](const std::string& key, double P::*field) {
      t[key] = [key, field](RunConfig& c, const Json& v) { c.params.*field = as_number(v, key); };
    };
    auto integer = [&t](const std::string& key, int P::*field) {
      t[key] = [key, field](RunConfig& c, const Json& v) { c.params.*field = static_cast<int>(as_integer(v, key)); };
    };
    real("omega_max", &P::omega_max);
    real("eta", &P::eta);
    real("eta_spurious", &P::eta_spurious);
    real("spurious_frequency", &P::spurious_frequency);
    real("chirp_half_width", &P::chirp_half_width);
    real("chirp_duration", &P::chirp_duration);
    real("gaussian_width_fraction", &P::gaussian_width_fraction);
    real("window_extension", &P::window_extension);
    real("nbar_spurious", &P::nbar_spurious);
    real("rabi1", &P::rabi1);
    real("gamma", &P::gamma);
    real("g0", &P::g0);
    real("delta_stirap", &P::delta_stirap);
    real("step1_ramp", &P::step1_ramp);
    real("step1_residual", &P::step1_residual);
    real("step1_max_time", &P::step1_max_time);
    real("stark_bracket", &P::stark_bracket);
    integer("stark_grid", &P::stark_grid);
    integer("addressed_ion", &P::addressed_ion);
    real("weak_coupling_threshold", &P::weak_coupling_threshold);
    real("wavelength_over_ell", &P::wavelength_over_ell);
    real("cavity_phase", &P::cavity_phase);
    real("pattern_phase", &P::pattern_phase);
    integer("max_ion_excitations", &P::max_ion_excitations);
    integer("total_cap", &P::total_cap);
    integer("bus_cutoff", &P::bus_cutoff);
    integer("spurious_cutoff", &P::spurious_cutoff);
    integer("collective_depth", &P::collective_depth);
    real("tol", &P::tol);
    real("lindblad_tol", &P::lindblad_tol);
    real("omega_over_2pi_hz", &P::omega_over_2pi_hz);
    real("kappa_over_omega", &P::kappa_over_omega);

    t["rwa"] = [](RunConfig& c, const Json& v) {
      if (!v.is_boolean()) throw ValidationError("rwa", "expected true or false");
      c.params.rwa = v.get<bool>();
    };
    t["max_dimension"] = [](RunConfig& c, const Json& v) {
      const auto n = as_integer(v, "max_dimension");
      if (n < 1) throw ValidationError("max_dimension", "must be positive");
      c.params.max_dimension = static_cast<std::size_t>(n);
    };
    t["phase_mode"] = [](RunConfig& c, const Json& v) {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "sampled") c.params.phase_mode = protocol::PhaseMode::sampled;
      else if (s == "physical") c.params.phase_mode = protocol::PhaseMode::physical;
      else if (s == "antinode") c.params.phase_mode = protocol::PhaseMode::antinode;
      else throw ValidationError("phase_mode", "expected \"sampled\", \"physical\" or \"antinode\"");
    };
    t["basis"] = [](RunConfig& c, const Json& v) {
      const std::string s = v.is_string() ? v.get<std::string>() : "";
      if (s == "compressed") c.params.basis = protocol::BasisKind::compressed;
      else if (s == "full") c.params.basis = protocol::BasisKind::full;
      else throw ValidationError("basis", "expected \"compressed\" or \"full\"");
    };

    t["mode"] = [](RunConfig& c, const Json& v) {
      if (!v.is_string()) throw ValidationError("mode", "expected a string");
      c.mode = parse_mode(v.get<std::string>());
    };
    t["N"] = [](RunConfig& c, const Json& v) {
      c.n_ions.clear();
      if (v.is_number_integer()) {
        c.n_ions.push_back(static_cast<int>(v.get<long long>()));
        return;
      }
      if (!v.is_array()) throw ValidationError("N", "expected an integer or a list of integers");
      for (const auto& x : v) c.n_ions.push_back(static_cast<int>(as_integer(x, "N")));
    };
    t["realizations"] = [](RunConfig& c, const Json& v) {
      c.realizations = static_cast<int>(as_integer(v, "realizations"));
    };
    t["seed"] = [](RunConfig& c, const Json& v) {
      if (!v.is_number_unsigned()) throw ValidationError("seed", "expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    };
    t["workers"] = [](RunConfig& c, const Json& v) { c.workers = static_cast<int>(as_integer(v, "workers")); };
    t["out"] = [](RunConfig& c, const Json& v) {
      if (!v.is_string()) throw ValidationError("out", "expected a path");
      c.out_dir = v.get<std::string>();
    };
    t["alpha"] = [](RunConfig& c, const Json& v) {
      if (!v.is_array() || v.size() != 3) throw ValidationError("alpha", "expected three amplitudes");
      for (int i = 0; i < 3; ++i) c.alpha[i] = as_number(v[i], "alpha");
    };
    return t;
  }();
  return table;
}

inline int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

}  // namespace detail

/// Sorted list of accepted keys.
inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::setters()) keys.push_back(k);
  return keys;
}

inline RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte is 1-based and points just past the offending character.
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ValidationError("config", "parse error at line " + std::to_string(detail::line_of(text, at)) + ": " +
                                        e.what());
  }
  if (!doc.is_object()) throw ValidationError("config", "top level must be a JSON object");
  RunConfig cfg;
  const auto& table = detail::setters();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw ValidationError(key, "unknown configuration key");
    it->second(cfg, value);
  }
  cfg.validate();
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Fully resolved configuration, every key present.
inline Json to_json(const RunConfig& c) {
  const auto& p = c.params;
  Json j;
  j["mode"] = mode_name(c.mode);
  j["N"] = c.n_ions;
  j["realizations"] = c.realizations;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["out"] = c.out_dir;
  j["alpha"] = c.alpha;
  j["omega_max"] = p.omega_max;
  j["eta"] = p.eta;
  j["eta_spurious"] = p.eta_spurious;
  j["spurious_frequency"] = p.spurious_frequency;
  j["chirp_half_width"] = p.chirp_half_width;
  j["chirp_duration"] = p.chirp_duration;
  j["gaussian_width_fraction"] = p.gaussian_width_fraction;
  j["window_extension"] = p.window_extension;
  j["nbar_spurious"] = p.nbar_spurious;
  j["rwa"] = p.rwa;
  j["rabi1"] = p.rabi1;
  j["gamma"] = p.gamma;
  j["g0"] = p.g0;
  j["delta_stirap"] = p.delta_stirap;
  j["step1_ramp"] = p.step1_ramp;
  j["step1_residual"] = p.step1_residual;
  j["step1_max_time"] = p.step1_max_time;
  j["stark_bracket"] = p.stark_bracket;
  j["stark_grid"] = p.stark_grid;
  j["addressed_ion"] = p.addressed_ion;
  j["weak_coupling_threshold"] = p.weak_coupling_threshold;
  j["phase_mode"] = p.phase_mode == protocol::PhaseMode::sampled    ? "sampled"
                    : p.phase_mode == protocol::PhaseMode::physical ? "physical"
                                                                    : "antinode";
  j["wavelength_over_ell"] = p.wavelength_over_ell;
  j["cavity_phase"] = p.cavity_phase;
  j["pattern_phase"] = p.pattern_phase;
  j["basis"] = p.basis == protocol::BasisKind::compressed ? "compressed" : "full";
  j["max_ion_excitations"] = p.max_ion_excitations;
  j["total_cap"] = p.total_cap;
  j["bus_cutoff"] = p.bus_cutoff;
  j["spurious_cutoff"] = p.spurious_cutoff;
  j["collective_depth"] = p.collective_depth;
  j["max_dimension"] = p.max_dimension;
  j["tol"] = p.tol;
  j["lindblad_tol"] = p.lindblad_tol;
  j["omega_over_2pi_hz"] = p.omega_over_2pi_hz;
  j["kappa_over_omega"] = p.kappa_over_omega;
  return j;
}

}  // namespace iontrans::harness
