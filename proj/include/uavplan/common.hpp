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

#ifndef UAVPLAN_COMMON_HPP
#define UAVPLAN_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>

namespace uavplan {

using Vec2 = Eigen::Vector2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kLog2E = 1.4426950408889634074;  // 1/ln(2)

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// log verbosity from UAVPLAN_LOG: 0 quiet (default warn), 1 info, 2 debug.
inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("UAVPLAN_LOG");
    if (!env) return 0;
    return std::atoi(env);
  }();
  return level;
}

inline void log_msg(int level, const char* fmt, ...) {
  if (level > log_level()) return;
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stderr, fmt, args);
  std::fprintf(stderr, "\n");
  va_end(args);
}

#define UAVPLAN_INFO(...) ::uavplan::log_msg(1, __VA_ARGS__)
#define UAVPLAN_DEBUG(...) ::uavplan::log_msg(2, __VA_ARGS__)

/// Deterministic uniform double in [0,1). The explicit 53-bit mapping keeps
/// streams identical across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace uavplan

#endif  // UAVPLAN_COMMON_HPP
