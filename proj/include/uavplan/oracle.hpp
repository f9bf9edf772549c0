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

#ifndef UAVPLAN_ORACLE_HPP
#define UAVPLAN_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "uavplan/model.hpp"
#include "uavplan/scenario.hpp"

// Independent verification utilities. The metric and audit routines here
// deliberately re-derive every physical quantity from scratch; they must not
// call the evaluators in model.hpp that the planners use.

namespace uavplan {
namespace oracle {

struct OracleReport {
  std::string quantity;
  double reference = 0.0;
  double candidate = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  static OracleReport compare(const std::string& name, double reference,
                              double candidate, double tol,
                              bool relative = true) {
    OracleReport r;
    r.quantity = name;
    r.reference = reference;
    r.candidate = candidate;
    r.abs_err = std::abs(reference - candidate);
    r.rel_err = r.abs_err / std::max(1e-300, std::abs(reference));
    r.tolerance = tol;
    r.passed = relative ? (r.rel_err <= tol || r.abs_err <= tol * 1e-6)
                        : (r.abs_err <= tol);
    return r;
  }
};

struct GradientEstimate {
  VecX gradient;
  bool all_finite = true;
};

/// Central-difference gradient with per-coordinate step h (1e-5 (1+|x_i|) when
/// h <= 0). Non-finite function samples are flagged.
inline GradientEstimate finite_diff_gradient(const std::function<double(const VecX&)>& f,
                                             const VecX& x, double h = 0.0) {
  const int d = static_cast<int>(x.size());
  GradientEstimate est;
  est.gradient.resize(d);
  for (int i = 0; i < d; ++i) {
    const double step = h > 0.0 ? h : 1e-5 * (1.0 + std::abs(x[i]));
    VecX xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    const double fp = f(xp);
    const double fm = f(xm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) est.all_finite = false;
    est.gradient[i] = (fp - fm) / (2.0 * step);
  }
  return est;
}

/// Independent re-evaluation of the plan metrics. Rates, propulsion power and
/// energy are recomputed from first principles (no shared code with model.hpp).
struct MetricsSummary {
  MatX rates;               // K x N
  VecX avg_rate_per_gn;     // bits/s/Hz
  double min_avg_rate = 0;  // bits/s/Hz
  double avg_speed = 0;     // m/s
  double avg_accel = 0;     // m/s^2
  double avg_power = 0;     // W
  double energy = 0;        // J
  double min_bits = 0;      // bits
  double ee = 0;            // bits/J
};

inline MetricsSummary recompute_metrics(const Scenario& sc, const model::Trajectory& tr,
                                        const MatX& powers) {
  const int n_slots = tr.slots();
  const int k_gn = sc.num_gn();
  const double dt = sc.period / n_slots;
  const double hsq = sc.altitude * sc.altitude;

  MetricsSummary m;
  m.rates.resize(k_gn, n_slots);
  for (int n = 1; n <= n_slots; ++n) {
    std::vector<double> received(k_gn);
    for (int k = 0; k < k_gn; ++k) {
      const double dx = tr.q[n][0] - sc.gn_positions[k][0];
      const double dy = tr.q[n][1] - sc.gn_positions[k][1];
      const double gain = sc.ref_snr / (dx * dx + dy * dy + hsq);
      received[k] = powers(k, n - 1) * gain;
    }
    double total = 0.0;
    for (int k = 0; k < k_gn; ++k) total += received[k];
    for (int k = 0; k < k_gn; ++k) {
      const double sinr = received[k] / (1.0 + total - received[k]);
      m.rates(k, n - 1) = std::log(1.0 + sinr) / std::log(2.0);
    }
  }
  m.avg_rate_per_gn = m.rates.rowwise().sum() / n_slots;
  m.min_avg_rate = m.avg_rate_per_gn.minCoeff();

  double power_sum = 0.0, speed_sum = 0.0, accel_sum = 0.0;
  for (int n = 1; n <= n_slots; ++n) {
    const double vx = tr.v[n][0], vy = tr.v[n][1];
    const double ax = tr.a[n][0], ay = tr.a[n][1];
    const double speed = std::sqrt(vx * vx + vy * vy);
    const double asq = ax * ax + ay * ay;
    speed_sum += speed;
    accel_sum += std::sqrt(asq);
    power_sum += sc.c1 * speed * speed * speed +
                 sc.c2 / speed * (1.0 + asq / (sc.gravity * sc.gravity));
  }
  m.avg_speed = speed_sum / n_slots;
  m.avg_accel = accel_sum / n_slots;
  m.avg_power = power_sum / n_slots;
  m.energy = dt * power_sum;
  m.min_bits = sc.bandwidth * dt * (m.rates.rowwise().sum()).minCoeff();
  m.ee = m.min_bits / m.energy;
  return m;
}

/// Independent feasibility audit (same residual naming as model::audit but a
/// separate implementation used as the acceptance-side check).
inline model::FeasibilityReport audit_plan(const Scenario& sc, const model::Trajectory& tr,
                                           const MatX& powers) {
  model::FeasibilityReport r;
  const int n_slots = tr.slots();
  const double dt = sc.period / n_slots;
  for (int n = 1; n <= n_slots; ++n) {
    const double rvx = tr.v[n][0] - tr.v[n - 1][0] - tr.a[n - 1][0] * dt;
    const double rvy = tr.v[n][1] - tr.v[n - 1][1] - tr.a[n - 1][1] * dt;
    const double rqx =
        tr.q[n][0] - tr.q[n - 1][0] - tr.v[n - 1][0] * dt - 0.5 * tr.a[n - 1][0] * dt * dt;
    const double rqy =
        tr.q[n][1] - tr.q[n - 1][1] - tr.v[n - 1][1] * dt - 0.5 * tr.a[n - 1][1] * dt * dt;
    r.kinematics_vel = std::max(r.kinematics_vel, std::hypot(rvx, rvy));
    r.kinematics_pos_m = std::max(r.kinematics_pos_m, std::hypot(rqx, rqy));
  }
  r.periodicity_pos_m = std::hypot(tr.q[0][0] - tr.q[n_slots][0], tr.q[0][1] - tr.q[n_slots][1]);
  r.periodicity_vel = std::hypot(tr.v[0][0] - tr.v[n_slots][0], tr.v[0][1] - tr.v[n_slots][1]);
  r.periodicity_acc = std::hypot(tr.a[0][0] - tr.a[n_slots][0], tr.a[0][1] - tr.a[n_slots][1]);
  double power_sum = 0.0;
  for (int n = 0; n <= n_slots; ++n) {
    const double speed = std::hypot(tr.v[n][0], tr.v[n][1]);
    const double amag = std::hypot(tr.a[n][0], tr.a[n][1]);
    r.speed_low = std::max(r.speed_low, sc.v_min - speed);
    r.speed_high = std::max(r.speed_high, speed - sc.v_max);
    r.accel = std::max(r.accel, amag - sc.a_max);
    if (n >= 1)
      power_sum += sc.c1 * speed * speed * speed +
                   (sc.c2 / speed) * (1.0 + amag * amag / (sc.gravity * sc.gravity));
  }
  r.avg_power_w = std::max(0.0, power_sum / n_slots - sc.prop_limit);
  for (int k = 0; k < powers.rows(); ++k)
    for (int n = 0; n < powers.cols(); ++n) {
      r.power_box_w = std::max(r.power_box_w, -powers(k, n));
      r.power_box_w = std::max(r.power_box_w, powers(k, n) - sc.peak_power);
    }
  return r;
}

// ---------------------------------------------------------------------------
// Circular brute force: exhaustive scan over radius and constant angular
// velocity with full-power uplink. Period closure pins omega to 2 pi / T, so
// the omega axis is a feasibility scan; only cells with |omega T - 2 pi|
// within half a grid step can close the loop.
// ---------------------------------------------------------------------------
struct CircularGridResult {
  bool feasible = false;
  double best_r = 0.0;
  double best_omega = 0.0;
  double best_min_rate = -std::numeric_limits<double>::infinity();
  double r_step = 0.0;      // multiplicative step of the log-spaced r grid
  double neighbor_gap = 0;  // |objective(best) - objective(adjacent r cells)|
};

/// Min average rate of a constant-omega circle of radius r centered at the GN
/// centroid, full transmit power, N slots.
inline double circular_min_rate_full_power(const Scenario& sc, double r) {
  const int n_slots = sc.slots;
  const int k_gn = sc.num_gn();
  Vec2 c = Vec2::Zero();
  for (const auto& w : sc.gn_positions) c += w;
  c /= k_gn;
  const double hsq = sc.altitude * sc.altitude;
  std::vector<double> rate_sum(k_gn, 0.0);
  for (int n = 1; n <= n_slots; ++n) {
    const double th = 2.0 * M_PI * n / n_slots;
    const double qx = c[0] + r * std::cos(th);
    const double qy = c[1] + r * std::sin(th);
    double total = 0.0;
    std::vector<double> received(k_gn);
    for (int k = 0; k < k_gn; ++k) {
      const double dx = qx - sc.gn_positions[k][0];
      const double dy = qy - sc.gn_positions[k][1];
      received[k] = sc.peak_power * sc.ref_snr / (dx * dx + dy * dy + hsq);
      total += received[k];
    }
    for (int k = 0; k < k_gn; ++k)
      rate_sum[k] += std::log2(1.0 + received[k] / (1.0 + total - received[k]));
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_gn; ++k) worst = std::min(worst, rate_sum[k] / n_slots);
  return worst;
}

/// Continuous-model feasibility of a constant-omega circle: speed and
/// centripetal acceleration limits plus the average propulsion power cap.
inline bool circular_cell_feasible(const Scenario& sc, double r, double omega) {
  const double speed = r * omega;
  if (speed < sc.v_min || speed > sc.v_max) return false;
  if (r * omega * omega > sc.a_max) return false;
  const double power = sc.c1 * speed * speed * speed + sc.c2 / speed +
                       sc.c2 * r * omega * omega * omega / (sc.gravity * sc.gravity);
  return power <= sc.prop_limit;
}

inline CircularGridResult brute_force_circular(const Scenario& sc, int r_points = 64,
                                               int omega_points = 32) {
  CircularGridResult res;
  const double omega0 = 2.0 * M_PI / sc.period;
  const double r_lo = sc.v_min * sc.period / (2.0 * M_PI);
  const double r_hi = sc.v_max * sc.period / (2.0 * M_PI);
  res.r_step = std::pow(r_hi / r_lo, 1.0 / (r_points - 1));
  const double omega_lo = omega0 * 0.25, omega_hi = omega0 * 4.0;
  const double omega_step = std::pow(omega_hi / omega_lo, 1.0 / (omega_points - 1));
  const double omega_tol = omega0 * (omega_step - 1.0);

  std::vector<double> objective_by_ri(r_points, std::numeric_limits<double>::quiet_NaN());
  int best_ri = -1;
  for (int ri = 0; ri < r_points; ++ri) {
    const double r = r_lo * std::pow(res.r_step, ri);
    for (int wi = 0; wi < omega_points; ++wi) {
      const double omega = omega_lo * std::pow(omega_step, wi);
      if (std::abs(omega * sc.period - 2.0 * M_PI) > omega_tol * sc.period) continue;
      if (!circular_cell_feasible(sc, r, omega)) continue;
      const double obj = circular_min_rate_full_power(sc, r);
      objective_by_ri[ri] = obj;
      if (obj > res.best_min_rate) {
        res.best_min_rate = obj;
        res.best_r = r;
        res.best_omega = omega;
        res.feasible = true;
        best_ri = ri;
      }
    }
  }
  if (best_ri >= 0) {
    double gap = 0.0;
    if (best_ri > 0 && std::isfinite(objective_by_ri[best_ri - 1]))
      gap = std::max(gap, res.best_min_rate - objective_by_ri[best_ri - 1]);
    if (best_ri + 1 < r_points && std::isfinite(objective_by_ri[best_ri + 1]))
      gap = std::max(gap, res.best_min_rate - objective_by_ri[best_ri + 1]);
    res.neighbor_gap = gap;
  }
  return res;
}

/// Scans radii at constant omega0 in steps of `step` meters and returns the
/// feasible interval (continuous kinematic/power model, no rate evaluation).
inline std::pair<double, double> scan_radius_feasible(const Scenario& sc, double omega0,
                                                      double step = 0.1) {
  double lo = std::numeric_limits<double>::quiet_NaN();
  double hi = std::numeric_limits<double>::quiet_NaN();
  const double r_end = sc.v_max * sc.period / (2.0 * M_PI) * 1.5 + 10.0;
  for (double r = step; r <= r_end; r += step) {
    const bool ok = circular_cell_feasible(sc, r, omega0);
    if (ok && !std::isfinite(lo)) lo = r;
    if (ok) hi = r;
  }
  return {lo, hi};
}

}  // namespace oracle
}  // namespace uavplan

#endif  // UAVPLAN_ORACLE_HPP
