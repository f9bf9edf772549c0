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

#ifndef UAVPLAN_MODEL_HPP
#define UAVPLAN_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavplan/scenario.hpp"

namespace uavplan {
namespace model {

/// Discretized flight plan. Slot boundaries are indexed 0..N; a periodic plan
/// has q[0]=q[N], v[0]=v[N], a[0]=a[N].
struct Trajectory {
  std::vector<Vec2> q;  // m
  std::vector<Vec2> v;  // m/s
  std::vector<Vec2> a;  // m/s^2

  int slots() const { return static_cast<int>(q.size()) - 1; }
};

/// Per-slot per-GN link variables. Column n-1 of each matrix holds slot n
/// (rates and powers are accumulated over slots 1..N).
struct LinkPlan {
  MatX G;    // K x N, received SNR-scaled powers, G_k[n] = p_k[n] h_k[n]
  MatX p;    // K x N, transmit powers, W
  VecX V1;   // N, speed slack
  double tau = 0.0;  // min average rate, bits/s/Hz
  double eta = 0.0;  // min delivered bits, bits
};

/// Named maximum constraint violations. A plan is feasible at eps iff every
/// residual is <= eps (relative residuals for the box/limit entries).
struct FeasibilityReport {
  double kinematics_pos_m = 0.0;   // max ||q[n]-q[n-1]-v[n-1]dt-0.5 a[n-1]dt^2||
  double kinematics_vel = 0.0;     // max ||v[n]-v[n-1]-a[n-1]dt||, m/s
  double periodicity_pos_m = 0.0;  // ||q[0]-q[N]||
  double periodicity_vel = 0.0;    // ||v[0]-v[N]||
  double periodicity_acc = 0.0;    // ||a[0]-a[N]||
  double speed_low = 0.0;          // max(0, V_min - ||v[n]||), m/s
  double speed_high = 0.0;         // max(0, ||v[n]|| - V_max), m/s
  double accel = 0.0;              // max(0, ||a[n]|| - a_max), m/s^2
  double power_box_w = 0.0;        // max violation of 0 <= p <= P_peak, W
  double avg_power_w = 0.0;        // max(0, avg P_prop - P_lim), W
  double link_consistency = 0.0;   // max |G - p h| / max(1, |G|), when G given

  double speed_low_rel(const Scenario& sc) const { return speed_low / sc.v_min; }
  double speed_high_rel(const Scenario& sc) const { return speed_high / sc.v_max; }
  double accel_rel(const Scenario& sc) const { return accel / sc.a_max; }
  double power_box_rel(const Scenario& sc) const { return power_box_w / sc.peak_power; }
  double avg_power_rel(const Scenario& sc) const { return avg_power_w / sc.prop_limit; }

  /// Worst residual with box/limit entries divided by their natural scales.
  double max_relative(const Scenario& sc) const {
    double m = std::max({kinematics_pos_m, kinematics_vel, periodicity_pos_m,
                         periodicity_vel, periodicity_acc, link_consistency});
    m = std::max(m, speed_low_rel(sc));
    m = std::max(m, speed_high_rel(sc));
    m = std::max(m, accel_rel(sc));
    m = std::max(m, power_box_rel(sc));
    m = std::max(m, avg_power_rel(sc));
    return m;
  }

  bool feasible(const Scenario& sc, double eps) const { return max_relative(sc) <= eps; }

  std::map<std::string, double> named() const {
    return {{"kinematics_pos_m", kinematics_pos_m},
            {"kinematics_vel", kinematics_vel},
            {"periodicity_pos_m", periodicity_pos_m},
            {"periodicity_vel", periodicity_vel},
            {"periodicity_acc", periodicity_acc},
            {"speed_low", speed_low},
            {"speed_high", speed_high},
            {"accel", accel},
            {"power_box_w", power_box_w},
            {"avg_power_w", avg_power_w},
            {"link_consistency", link_consistency}};
  }
};

enum class PlanStatus { kConverged, kMaxIterations, kInfeasible };

inline const char* to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::kConverged: return "converged";
    case PlanStatus::kMaxIterations: return "max-iterations";
    case PlanStatus::kInfeasible: return "infeasible";
  }
  return "unknown";
}

/// Outcome of a planning run: objective history, audited metrics and
/// convergence metadata.
struct PlanReport {
  std::vector<double> objective_trace;
  std::vector<double> lambda_trace;  // Dinkelbach multiplier per outer round
  std::vector<double> f_trace;       // F(lambda_m) per outer round
  MatX rates;                        // K x N, bits/s/Hz
  VecX avg_rate_per_gn;              // K
  double min_avg_rate = 0.0;         // bits/s/Hz
  double avg_prop_power = 0.0;       // W
  double total_prop_energy = 0.0;    // J
  double ee = 0.0;                   // bits/J
  FeasibilityReport residuals;
  int iterations = 0;
  double wall_time_s = 0.0;
  PlanStatus status = PlanStatus::kConverged;
};

/// Free-space LoS channel gain from GN k to the UAV at position q_n.
inline double channel_gain(const Scenario& sc, const Vec2& q_n, int k) {
  const Vec2 d = q_n - sc.gn_positions[k];
  return sc.ref_snr / (d.squaredNorm() + sc.altitude * sc.altitude);
}

/// Uplink rate of GN k with all other GNs treated as interference.
inline double instantaneous_rate(const Scenario& sc, const VecX& gains,
                                 const VecX& powers, int k) {
  (void)sc;
  double interference = 0.0;
  for (int j = 0; j < gains.size(); ++j)
    if (j != k) interference += powers[j] * gains[j];
  return std::log2(1.0 + powers[k] * gains[k] / (1.0 + interference));
}

/// Rate of GN k expressed through received powers G_j = p_j h_j:
/// log2(1 + sum_m G_m) - log2(1 + sum_{j != k} G_j).
inline double rate_from_received(const VecX& g_col, int k) {
  double total = 0.0, interference = 0.0;
  for (int j = 0; j < g_col.size(); ++j) {
    total += g_col[j];
    if (j != k) interference += g_col[j];
  }
  return std::log2(1.0 + total) - std::log2(1.0 + interference);
}

/// Fixed-wing propulsion power c1 ||v||^3 + c2/||v|| (1 + ||a||^2/g^2).
/// The model is singular at zero speed; valid plans keep ||v|| >= V_min > 0.
inline double propulsion_power(const Scenario& sc, const Vec2& v_n, const Vec2& a_n) {
  const double speed = v_n.norm();
  if (speed <= 0.0) throw std::domain_error("propulsion_power: zero speed");
  const double asq = a_n.squaredNorm();
  return sc.c1 * speed * speed * speed +
         (sc.c2 / speed) * (1.0 + asq / (sc.gravity * sc.gravity));
}

/// Integrates the discrete kinematics from (q0, v0) under the N accelerations.
/// Periodicity is not enforced here; audit() checks it.
inline Trajectory propagate(const Scenario& sc, const Vec2& q0, const Vec2& v0,
                            const std::vector<Vec2>& accels) {
  const int n = static_cast<int>(accels.size());
  const double dt = sc.period / n;
  Trajectory tr;
  tr.q.resize(n + 1);
  tr.v.resize(n + 1);
  tr.a.resize(n + 1);
  tr.q[0] = q0;
  tr.v[0] = v0;
  for (int i = 0; i < n; ++i) {
    tr.a[i] = accels[i];
    tr.v[i + 1] = tr.v[i] + accels[i] * dt;
    tr.q[i + 1] = tr.q[i] + tr.v[i] * dt + 0.5 * dt * dt * accels[i];
  }
  tr.a[n] = accels[0];
  return tr;
}

/// Feasibility audit of a complete plan against the kinematic recurrences,
/// periodicity, speed/acceleration limits, the power box and the average
/// propulsion-power limit.
inline FeasibilityReport audit(const Scenario& sc, const Trajectory& tr,
                               const LinkPlan& plan) {
  FeasibilityReport r;
  const int n_slots = tr.slots();
  const double dt = sc.period / n_slots;

  for (int n = 1; n <= n_slots; ++n) {
    // Evaluation order mirrors propagate(), so a propagated plan has residual
    // exactly zero.
    const Vec2 vres = tr.v[n] - (tr.v[n - 1] + tr.a[n - 1] * dt);
    const Vec2 qres =
        tr.q[n] - (tr.q[n - 1] + tr.v[n - 1] * dt + 0.5 * dt * dt * tr.a[n - 1]);
    r.kinematics_vel = std::max(r.kinematics_vel, vres.norm());
    r.kinematics_pos_m = std::max(r.kinematics_pos_m, qres.norm());
  }
  r.periodicity_pos_m = (tr.q[0] - tr.q[n_slots]).norm();
  r.periodicity_vel = (tr.v[0] - tr.v[n_slots]).norm();
  r.periodicity_acc = (tr.a[0] - tr.a[n_slots]).norm();

  for (int n = 0; n <= n_slots; ++n) {
    const double speed = tr.v[n].norm();
    r.speed_low = std::max(r.speed_low, sc.v_min - speed);
    r.speed_high = std::max(r.speed_high, speed - sc.v_max);
    r.accel = std::max(r.accel, tr.a[n].norm() - sc.a_max);
  }

  double power_sum = 0.0;
  for (int n = 1; n <= n_slots; ++n)
    power_sum += propulsion_power(sc, tr.v[n], tr.a[n]);
  r.avg_power_w = std::max(0.0, power_sum / n_slots - sc.prop_limit);

  if (plan.p.size() > 0) {
    for (int k = 0; k < plan.p.rows(); ++k)
      for (int n = 0; n < plan.p.cols(); ++n) {
        r.power_box_w = std::max(r.power_box_w, -plan.p(k, n));
        r.power_box_w = std::max(r.power_box_w, plan.p(k, n) - sc.peak_power);
      }
  }
  if (plan.G.size() > 0 && plan.p.size() > 0) {
    for (int k = 0; k < plan.G.rows(); ++k)
      for (int n = 1; n <= static_cast<int>(plan.G.cols()); ++n) {
        const double h = channel_gain(sc, tr.q[n], k);
        const double err = std::abs(plan.G(k, n - 1) - plan.p(k, n - 1) * h);
        r.link_consistency =
            std::max(r.link_consistency, err / std::max(1.0, std::abs(plan.G(k, n - 1))));
      }
  }
  return r;
}

/// Per-slot rates of every GN from transmit powers (K x N, slots 1..N).
inline MatX rate_matrix(const Scenario& sc, const Trajectory& tr, const MatX& powers) {
  const int k_gn = sc.num_gn();
  const int n_slots = tr.slots();
  MatX rates(k_gn, n_slots);
  VecX gains(k_gn), p(k_gn);
  for (int n = 1; n <= n_slots; ++n) {
    for (int k = 0; k < k_gn; ++k) {
      gains[k] = channel_gain(sc, tr.q[n], k);
      p[k] = powers(k, n - 1);
    }
    for (int k = 0; k < k_gn; ++k) rates(k, n - 1) = instantaneous_rate(sc, gains, p, k);
  }
  return rates;
}

/// Minimum over GNs of the per-GN average rate, computed from received powers.
inline double min_avg_rate_from_received(const MatX& g) {
  const int k_gn = static_cast<int>(g.rows());
  const int n_slots = static_cast<int>(g.cols());
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_gn; ++k) {
    double sum = 0.0;
    for (int n = 0; n < n_slots; ++n) sum += rate_from_received(g.col(n), k);
    worst = std::min(worst, sum / n_slots);
  }
  return worst;
}

/// Fills the metric fields of a PlanReport from a finished plan.
inline void fill_metrics(const Scenario& sc, const Trajectory& tr, const MatX& powers,
                         PlanReport& rep) {
  const int n_slots = tr.slots();
  const double dt = sc.period / n_slots;
  rep.rates = rate_matrix(sc, tr, powers);
  rep.avg_rate_per_gn = rep.rates.rowwise().sum() / n_slots;
  rep.min_avg_rate = rep.avg_rate_per_gn.minCoeff();
  double power_sum = 0.0;
  for (int n = 1; n <= n_slots; ++n) power_sum += propulsion_power(sc, tr.v[n], tr.a[n]);
  rep.avg_prop_power = power_sum / n_slots;
  rep.total_prop_energy = dt * power_sum;
  const double min_bits = sc.bandwidth * dt * rep.rates.rowwise().sum().minCoeff();
  rep.ee = min_bits / rep.total_prop_energy;
}

}  // namespace model
}  // namespace uavplan

#endif  // UAVPLAN_MODEL_HPP
