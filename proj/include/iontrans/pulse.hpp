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

#pragma once

#include <cmath>
#include <map>
#include <string>
#include <variant>

#include "iontrans/common.hpp"

namespace iontrans::dyn {

struct Gaussian {
  double peak = 0.0;
  double center = 0.0;
  double width = 1.0;  // standard deviation
};

/// Zero before `start`, sin^2 rise to `peak` at `stop`, then constant.
struct SinSquaredRamp {
  double peak = 0.0;
  double start = 0.0;
  double stop = 1.0;
};

struct Constant {
  double value = 0.0;
};

/// Linear in time from `start_value` at t=0 to `end_value` at the schedule end.
struct LinearChirp {
  double start_value = 0.0;
  double end_value = 0.0;
};

using Shape = std::variant<Gaussian, SinSquaredRamp, Constant, LinearChirp>;

inline double shape_value(const Shape& shape, double t, double duration) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Gaussian>) {
          const double x = (t - s.center) / s.width;
          return s.peak * std::exp(-0.5 * x * x);
        } else if constexpr (std::is_same_v<T, SinSquaredRamp>) {
          if (t <= s.start) return 0.0;
          if (t >= s.stop) return s.peak;
          const double r = std::sin(0.5 * kPi * (t - s.start) / (s.stop - s.start));
          return s.peak * r * r;
        } else if constexpr (std::is_same_v<T, Constant>) {
          return s.value;
        } else {
          return s.start_value + (s.end_value - s.start_value) * (t / duration);
        }
      },
      shape);
}

/// Named time-dependent controls (e.g. "rabi", "drive", "detuning") over [0, duration].
struct PulseSchedule {
  double duration = 0.0;
  std::map<std::string, Shape> controls;
  /// Controls that are laser amplitudes and therefore must stay non-negative.
  std::map<std::string, bool> is_amplitude;

  void set(const std::string& name, Shape s, bool amplitude) {
    controls[name] = s;
    is_amplitude[name] = amplitude;
  }

  void validate() const {
    if (!(duration > 0) || !std::isfinite(duration)) throw ValidationError("duration", "must be positive and finite");
    for (const auto& [name, shape] : controls) {
      const bool amplitude = is_amplitude.count(name) ? is_amplitude.at(name) : false;
      std::visit(
          [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Gaussian>) {
              if (!(s.width > 0)) throw ValidationError(name, "gaussian width must be positive");
              if (amplitude && s.peak < 0) throw ValidationError(name, "amplitude must be non-negative");
            } else if constexpr (std::is_same_v<T, SinSquaredRamp>) {
              if (!(s.stop > s.start)) throw ValidationError(name, "ramp stop must follow start");
              if (amplitude && s.peak < 0) throw ValidationError(name, "amplitude must be non-negative");
            } else if constexpr (std::is_same_v<T, Constant>) {
              if (!std::isfinite(s.value)) throw ValidationError(name, "value must be finite");
              if (amplitude && s.value < 0) throw ValidationError(name, "amplitude must be non-negative");
            } else {
              if (!std::isfinite(s.start_value) || !std::isfinite(s.end_value))
                throw ValidationError(name, "chirp endpoints must be finite");
              if (amplitude && (s.start_value < 0 || s.end_value < 0))
                throw ValidationError(name, "amplitude must be non-negative");
            }
          },
          shape);
    }
  }

  double value(const std::string& name, double t) const {
    auto it = controls.find(name);
    if (it == controls.end()) throw ValidationError(name, "no such control");
    return shape_value(it->second, t, duration);
  }
};

/// All control values at time t; throws for t outside [0, duration].
inline std::map<std::string, double> pulse_value(const PulseSchedule& sched, double t) {
  if (t < 0.0 || t > sched.duration) throw ValidationError("t", "outside the schedule [0, T]");
  std::map<std::string, double> out;
  for (const auto& [name, shape] : sched.controls) out[name] = shape_value(shape, t, sched.duration);
  return out;
}

}  // namespace iontrans::dyn
