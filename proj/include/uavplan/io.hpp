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

#ifndef UAVPLAN_IO_HPP
#define UAVPLAN_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "uavplan/circular.hpp"
#include "uavplan/model.hpp"
#include "uavplan/oracle.hpp"
#include "uavplan/planners.hpp"

namespace uavplan {
namespace io {

using nlohmann::json;

/// Full-precision decimal form (17 significant digits round-trips a double).
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Scenario files.
// ---------------------------------------------------------------------------
inline Scenario scenario_from_json(const json& j) {
  Scenario sc;
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key))
      throw ScenarioError(std::string("missing scenario field '") + key + "'");
    return j.at(key);
  };
  const auto& gn = require("gn_positions");
  if (!gn.is_array() || gn.empty())
    throw ScenarioError("scenario field 'gn_positions': must be a non-empty array");
  sc.gn_positions.clear();
  for (const auto& w : gn) {
    if (!w.is_array() || w.size() != 2)
      throw ScenarioError("scenario field 'gn_positions': entries must be [x, y]");
    sc.gn_positions.emplace_back(w[0].get<double>(), w[1].get<double>());
  }
  sc.altitude = require("altitude_m").get<double>();
  sc.period = require("period_s").get<double>();
  sc.slots = require("slots").get<int>();
  sc.ref_snr = db_to_linear(require("ref_snr_db").get<double>());
  sc.peak_power = dbm_to_watts(require("peak_power_dbm").get<double>());
  sc.prop_limit = require("prop_limit_w").get<double>();
  sc.bandwidth = require("bandwidth_hz").get<double>();
  sc.v_min = require("v_min").get<double>();
  sc.v_max = require("v_max").get<double>();
  sc.a_max = require("a_max").get<double>();
  sc.c1 = j.value("c1", 9.26e-4);
  sc.c2 = j.value("c2", 2250.0);
  sc.validate();
  return sc;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError("scenario parse error in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Result files: trajectory CSV, powers CSV, metrics JSON, objective trace.
// ---------------------------------------------------------------------------
inline json residuals_json(const model::FeasibilityReport& r) {
  json j;
  for (const auto& [name, value] : r.named()) j[name] = value;
  return j;
}

inline json metrics_json(const Scenario& sc, const planners::PlanResult& result) {
  const auto& rep = result.report;
  json j;
  j["status"] = model::to_string(rep.status);
  j["iterations"] = rep.iterations;
  j["wall_time_s"] = rep.wall_time_s;
  j["min_avg_rate_bps_hz"] = rep.min_avg_rate;
  j["avg_prop_power_w"] = rep.avg_prop_power;
  j["total_prop_energy_j"] = rep.total_prop_energy;
  j["ee_bits_per_joule"] = rep.ee;
  j["avg_rate_per_gn"] = std::vector<double>(
      rep.avg_rate_per_gn.data(), rep.avg_rate_per_gn.data() + rep.avg_rate_per_gn.size());
  j["objective_trace"] = rep.objective_trace;
  if (!rep.lambda_trace.empty()) j["lambda_trace"] = rep.lambda_trace;
  if (!rep.f_trace.empty()) j["f_trace"] = rep.f_trace;
  j["residuals"] = residuals_json(rep.residuals);
  j["slots"] = sc.slots;
  j["num_gn"] = sc.num_gn();
  return j;
}

/// Writes traj.csv, powers.csv, metrics.json and trace.csv into outdir.
/// Row n of traj.csv holds slot boundary n (0..N); transmit powers for slot 0
/// mirror slot N per periodicity.
inline void dump_results(const Scenario& sc, const planners::PlanResult& result,
                         const std::string& outdir) {
  namespace fs = std::filesystem;
  fs::create_directories(outdir);
  const auto& tr = result.traj;
  const MatX& p = result.plan.p;
  const int n_slots = tr.slots();
  const int k_gn = sc.num_gn();
  const double dt = sc.period / n_slots;

  {
    std::ofstream f(fs::path(outdir) / "traj.csv");
    if (!f) throw std::runtime_error("cannot write to " + outdir);
    f << "n,t,qx,qy,vx,vy,ax,ay,speed,p_prop_w";
    for (int k = 1; k <= k_gn; ++k) f << ",p_" << k;
    f << "\n";
    for (int n = 0; n <= n_slots; ++n) {
      const double pw = model::propulsion_power(sc, tr.v[n], tr.a[n]);
      f << n << ',' << fmt17(n * dt) << ',' << fmt17(tr.q[n][0]) << ','
        << fmt17(tr.q[n][1]) << ',' << fmt17(tr.v[n][0]) << ',' << fmt17(tr.v[n][1])
        << ',' << fmt17(tr.a[n][0]) << ',' << fmt17(tr.a[n][1]) << ','
        << fmt17(tr.v[n].norm()) << ',' << fmt17(pw);
      const int col = (n == 0) ? n_slots - 1 : n - 1;
      for (int k = 0; k < k_gn; ++k) f << ',' << fmt17(p(k, col));
      f << "\n";
    }
  }
  {
    std::ofstream f(fs::path(outdir) / "powers.csv");
    f << "n";
    for (int k = 1; k <= k_gn; ++k) f << ",p_" << k;
    f << "\n";
    for (int n = 1; n <= n_slots; ++n) {
      f << n;
      for (int k = 0; k < k_gn; ++k) f << ',' << fmt17(p(k, n - 1));
      f << "\n";
    }
  }
  {
    std::ofstream f(fs::path(outdir) / "trace.csv");
    f << "iter,objective\n";
    for (size_t i = 0; i < result.report.objective_trace.size(); ++i)
      f << i << ',' << fmt17(result.report.objective_trace[i]) << "\n";
  }
  {
    std::ofstream f(fs::path(outdir) / "metrics.json");
    f << metrics_json(sc, result).dump(2) << "\n";
  }
}

// ---------------------------------------------------------------------------
// Plan/powers readers for `eval`.
// ---------------------------------------------------------------------------
inline std::vector<std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline model::Trajectory load_plan_csv(const std::string& path) {
  const auto rows = read_csv(path);
  model::Trajectory tr;
  tr.q.resize(rows.size());
  tr.v.resize(rows.size());
  tr.a.resize(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() < 8) throw std::runtime_error("plan CSV row too short: " + path);
    tr.q[i] = Vec2(rows[i][2], rows[i][3]);
    tr.v[i] = Vec2(rows[i][4], rows[i][5]);
    tr.a[i] = Vec2(rows[i][6], rows[i][7]);
  }
  return tr;
}

inline MatX load_powers_csv(const std::string& path, int k_gn) {
  const auto rows = read_csv(path);
  MatX p(k_gn, rows.size());
  for (size_t n = 0; n < rows.size(); ++n) {
    if (static_cast<int>(rows[n].size()) < k_gn + 1)
      throw std::runtime_error("powers CSV row too short: " + path);
    for (int k = 0; k < k_gn; ++k) p(k, n) = rows[n][k + 1];
  }
  return p;
}

}  // namespace io
}  // namespace uavplan

#endif  // UAVPLAN_IO_HPP
