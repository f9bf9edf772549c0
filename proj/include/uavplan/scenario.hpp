// Copyright 2026 The uavplan Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UAVPLAN_SCENARIO_HPP
#define UAVPLAN_SCENARIO_HPP

#include <string>
#include <vector>

#include "uavplan/common.hpp"

namespace uavplan {

/// Immutable problem instance. Radio quantities are stored in linear units
/// (the reference SNR and peak power enter as dB / dBm but are converted once
/// at load time).
struct Scenario {
  std::vector<Vec2> gn_positions;  // w_k, meters
  double altitude = 100.0;         // H, m
  double period = 60.0;            // T, s
  int slots = 30;                  // N
  double ref_snr = 1e8;            // linear
  double peak_power = 0.01;        // W
  double prop_limit = 150.0;       // W, cap on average propulsion power
  double bandwidth = 1e6;          // Hz
  double v_min = 3.0;              // m/s
  double v_max = 100.0;            // m/s
  double a_max = 5.0;              // m/s^2
  double c1 = 9.26e-4;
  double c2 = 2250.0;
  double gravity = 9.8;            // m/s^2

  int num_gn() const { return static_cast<int>(gn_positions.size()); }
  double slot_len() const { return period / slots; }

  /// Speed minimizing level-flight propulsion power, (c2/(3 c1))^(1/4).
  double min_power_speed() const { return std::pow(c2 / (3.0 * c1), 0.25); }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
      throw ScenarioError("scenario field '" + field + "': " + why);
    };
    if (gn_positions.empty()) fail("gn_positions", "at least one ground node required");
    if (!(altitude > 0)) fail("altitude_m", "must be positive");
    if (!(period > 0)) fail("period_s", "must be positive");
    if (slots < 4) fail("slots", "must be at least 4");
    if (!(ref_snr > 0)) fail("ref_snr_db", "reference SNR must be positive");
    if (!(peak_power > 0)) fail("peak_power_dbm", "peak power must be positive");
    if (!(prop_limit > 0)) fail("prop_limit_w", "must be positive");
    if (!(bandwidth > 0)) fail("bandwidth_hz", "must be positive");
    if (!(v_min > 0)) fail("v_min", "must be positive (fixed-wing model)");
    if (!(v_min < v_max)) fail("v_max", "must exceed v_min");
    if (!(a_max > 0)) fail("a_max", "must be positive");
    if (!(c1 > 0)) fail("c1", "must be positive");
    if (!(c2 > 0)) fail("c2", "must be positive");
    for (const auto& w : gn_positions)
      if (!w.allFinite()) fail("gn_positions", "coordinates must be finite");
  }
};

/// Places K ground nodes uniformly in a square of the given side centered at
/// the origin. Deterministic for a given seed on any platform.
inline std::vector<Vec2> generate_gn_layout(int k, double side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec2> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double x = uniform_in(rng, -side / 2, side / 2);
    const double y = uniform_in(rng, -side / 2, side / 2);
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace uavplan

#endif  // UAVPLAN_SCENARIO_HPP
