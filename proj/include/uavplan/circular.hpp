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

#ifndef UAVPLAN_CIRCULAR_HPP
#define UAVPLAN_CIRCULAR_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "uavplan/planners.hpp"

namespace uavplan {
namespace circular {

/// Polar description of a circular plan about the GN centroid.
struct CircularState {
  Vec2 center = Vec2::Zero();
  double r = 0.0;
  VecX theta;   // N+1, theta[N] = theta[0] + 2 pi
  VecX omega;   // N+1, omega[N] = omega[0]
  VecX alpha;   // N+1, alpha[N] = alpha[0]
  VecX zeta;    // K, GN distance from center
  VecX varphi;  // K, GN angle
  MatX S;       // K x N received powers, slots 1..N

  int slots() const { return static_cast<int>(theta.size()) - 1; }
};

/// Exact polar squared distance between the UAV at (r, theta) and GN k.
inline double polar_dist_sq(const Scenario& sc, const CircularState& st, int k,
                            double theta) {
  const double delta = theta - st.varphi[k];
  const double dr = st.r - st.zeta[k] * std::cos(delta);
  const double sn = st.zeta[k] * std::sin(delta);
  return dr * dr + sn * sn + sc.altitude * sc.altitude;
}

inline double peak_received(const Scenario& sc, const CircularState& st, int k,
                            double theta) {
  return sc.peak_power * sc.ref_snr / polar_dist_sq(sc, st, k, theta);
}

/// Circular propulsion power, tangential plus centripetal load:
/// c1 r^3 w^3 + c2/(r w) + c2 r w^3 / g^2 + c2 r alpha^2 / (g^2 w).
inline double circ_power(const Scenario& sc, double r, double omega, double alpha) {
  const double g2 = sc.gravity * sc.gravity;
  return sc.c1 * r * r * r * omega * omega * omega + sc.c2 / (r * omega) +
         sc.c2 * r * omega * omega * omega / g2 +
         sc.c2 * r * alpha * alpha / (g2 * omega);
}

inline double circ_power_sum(const Scenario& sc, const CircularState& st) {
  double sum = 0.0;
  for (int n = 1; n <= st.slots(); ++n)
    sum += circ_power(sc, st.r, st.omega[n], st.alpha[n]);
  return sum;
}

/// Paper radius box for the initializer: V_min T / 2 pi <= r and
/// r <= min(V_max T / 2 pi, a_max / w0^2).
inline std::pair<double, double> radius_interval(const Scenario& sc) {
  const double omega0 = 2.0 * M_PI / sc.period;
  const double lo = sc.v_min * sc.period / (2.0 * M_PI);
  const double hi = std::min(sc.v_max * sc.period / (2.0 * M_PI),
                             sc.a_max / (omega0 * omega0));
  return {lo, hi};
}

/// Initializer power feasibility at constant omega0 and zero angular
/// acceleration: c1 r^3 w0^3 + c2/(r w0) + c2 r w0^3/g^2 <= P_lim.
inline double init_power(const Scenario& sc, double r) {
  const double omega0 = 2.0 * M_PI / sc.period;
  return circ_power(sc, r, omega0, 0.0);
}

/// Cartesian reconstruction q = c + r e(theta), v = r w Je(theta),
/// a = r alpha Je(theta) - r w^2 e(theta). Exact speeds/accelerations; the
/// discrete position recurrence holds to O(dt^2).
inline model::Trajectory to_trajectory(const CircularState& st) {
  const int n_slots = st.slots();
  model::Trajectory tr;
  tr.q.resize(n_slots + 1);
  tr.v.resize(n_slots + 1);
  tr.a.resize(n_slots + 1);
  for (int n = 0; n <= n_slots; ++n) {
    const double c = std::cos(st.theta[n]);
    const double s = std::sin(st.theta[n]);
    tr.q[n] = st.center + st.r * Vec2(c, s);
    tr.v[n] = st.r * st.omega[n] * Vec2(-s, c);
    tr.a[n] = st.r * st.alpha[n] * Vec2(-s, c) -
              st.r * st.omega[n] * st.omega[n] * Vec2(c, s);
  }
  // exact closure of the trig evaluation
  tr.q[n_slots] = tr.q[0];
  tr.v[n_slots] = tr.v[0];
  tr.a[n_slots] = tr.a[0];
  return tr;
}

/// Residuals of the angular model: recurrences, closure, speed/acceleration
/// boxes, power limit and the received-power box.
struct CircularAudit {
  double kinematics_omega = 0.0;
  double kinematics_theta = 0.0;
  double closure = 0.0;
  double speed_low = 0.0, speed_high = 0.0;
  double accel = 0.0;
  double avg_power_w = 0.0;
  double s_box = 0.0;  // relative violation of 0 <= S <= S_max

  double max_relative(const Scenario& sc) const {
    return std::max({kinematics_omega, kinematics_theta, closure,
                     speed_low / sc.v_min, speed_high / sc.v_max, accel / sc.a_max,
                     avg_power_w / sc.prop_limit, s_box});
  }
};

inline CircularAudit audit_circular(const Scenario& sc, const CircularState& st,
                                    bool enforce_power_limit) {
  CircularAudit a;
  const int n_slots = st.slots();
  const double dt = sc.period / n_slots;
  for (int n = 1; n <= n_slots; ++n) {
    a.kinematics_omega = std::max(
        a.kinematics_omega, std::abs(st.omega[n] - st.omega[n - 1] - st.alpha[n - 1] * dt));
    a.kinematics_theta =
        std::max(a.kinematics_theta,
                 std::abs(st.theta[n] - st.theta[n - 1] - st.omega[n - 1] * dt -
                          0.5 * st.alpha[n - 1] * dt * dt));
  }
  a.closure = std::max({std::abs(st.theta[n_slots] - st.theta[0] - 2.0 * M_PI),
                        std::abs(st.omega[0] - st.omega[n_slots]),
                        std::abs(st.alpha[0] - st.alpha[n_slots])});
  double psum = 0.0;
  for (int n = 0; n <= n_slots; ++n) {
    const double speed = st.r * st.omega[n];
    a.speed_low = std::max(a.speed_low, sc.v_min - speed);
    a.speed_high = std::max(a.speed_high, speed - sc.v_max);
    const double am = st.r * std::sqrt(st.alpha[n] * st.alpha[n] +
                                       std::pow(st.omega[n], 4.0));
    a.accel = std::max(a.accel, am - sc.a_max);
    if (n >= 1) psum += circ_power(sc, st.r, st.omega[n], st.alpha[n]);
  }
  if (enforce_power_limit)
    a.avg_power_w = std::max(0.0, psum / n_slots - sc.prop_limit);
  for (int k = 0; k < st.S.rows(); ++k)
    for (int n = 1; n <= n_slots; ++n) {
      const double cap = peak_received(sc, st, k, st.theta[n]);
      const double s = st.S(k, n - 1);
      a.s_box = std::max(a.s_box, std::max(-s, s - cap) / std::max(1.0, cap));
    }
  return a;
}

// ---------------------------------------------------------------------------
// Initializer (shared by the Cartesian planners and the circular baselines).
// ---------------------------------------------------------------------------
enum class InitMode { kMinRate, kEnergyEfficiency };

struct InitPlan {
  model::Trajectory traj;
  model::LinkPlan plan;
  CircularState circ;
  double r0 = 0.0;
  double objective = 0.0;  // search objective at r0
};

namespace detail {

/// Velocity scale of the discrete-exact circle: with v[n] tangential of
/// magnitude r * (2/dt) tan(pi/N), the trapezoidal position update
/// q[n+1]-q[n] = dt (v[n]+v[n+1])/2 reproduces the circle exactly, so the
/// kinematic recurrences hold to machine precision with a[n] = dv/dt.
inline double discrete_speed_scale(int n_slots, double dt) {
  return 2.0 / dt * std::tan(M_PI / n_slots);
}

struct DiscreteCircleGeometry {
  double speed = 0.0;
  double accel = 0.0;
  double power = 0.0;  // per-slot propulsion power of the discrete circle
};

inline DiscreteCircleGeometry discrete_geometry(const Scenario& sc, double r) {
  DiscreteCircleGeometry g;
  const double dt = sc.slot_len();
  const double lam = discrete_speed_scale(sc.slots, dt);
  g.speed = r * lam;
  g.accel = g.speed * 2.0 * std::sin(M_PI / sc.slots) / dt;
  g.power = sc.c1 * std::pow(g.speed, 3.0) +
            sc.c2 / g.speed * (1.0 + g.accel * g.accel / (sc.gravity * sc.gravity));
  return g;
}

/// Kinematic radius bounds satisfied by both the angular model (speed r w0)
/// and the discrete-exact Cartesian circle (speed r lam > r w0).
inline std::pair<double, double> searchable_interval(const Scenario& sc) {
  const auto paper = radius_interval(sc);
  const double dt = sc.slot_len();
  const double lam = discrete_speed_scale(sc.slots, dt);
  const double accel_per_r = lam * 2.0 * std::sin(M_PI / sc.slots) / dt;
  double lo = std::max(paper.first, sc.v_min / lam);
  double hi = std::min({paper.second, sc.v_max / lam, sc.a_max / accel_per_r});
  return {lo, hi};
}

/// Min average full-power rate on the uniform circle of radius r (slots 1..N).
inline double circle_min_rate(const Scenario& sc, const Vec2& center, double r) {
  const int n_slots = sc.slots;
  const int k_gn = sc.num_gn();
  const double hsq = sc.altitude * sc.altitude;
  VecX rate_sum = VecX::Zero(k_gn);
  VecX received(k_gn);
  for (int n = 1; n <= n_slots; ++n) {
    const double th = 2.0 * M_PI * n / n_slots;
    const Vec2 q = center + r * Vec2(std::cos(th), std::sin(th));
    double total = 0.0;
    for (int k = 0; k < k_gn; ++k) {
      received[k] = sc.peak_power * sc.ref_snr /
                    ((q - sc.gn_positions[k]).squaredNorm() + hsq);
      total += received[k];
    }
    for (int k = 0; k < k_gn; ++k)
      rate_sum[k] += std::log2(1.0 + received[k] / (1.0 + total - received[k]));
  }
  return rate_sum.minCoeff() / n_slots;
}

}  // namespace detail

/// Constant-speed circular plan about the GN centroid. The radius maximizes
/// the full-power min rate under the kinematic and propulsion-power windows
/// (min-rate mode) or the full-power energy efficiency under the kinematic
/// window alone (EE mode); 200 log-spaced candidates refined by golden
/// section to 0.1 m.
inline InitPlan init_plan(const Scenario& sc, InitMode mode) {
  const int n_slots = sc.slots;
  const int k_gn = sc.num_gn();
  const double dt = sc.slot_len();

  Vec2 center = Vec2::Zero();
  for (const auto& w : sc.gn_positions) center += w;
  center /= k_gn;

  const auto [r_lo, r_hi] = detail::searchable_interval(sc);
  if (!(r_lo < r_hi))
    throw InfeasibleError("empty radius interval: V_min T / 2 pi = " +
                          std::to_string(sc.v_min * sc.period / (2 * M_PI)) +
                          " exceeds the speed/acceleration radius cap");

  const bool enforce_power = (mode == InitMode::kMinRate) &&
                             sc.prop_limit < subsolver::kNoPowerLimit;
  auto power_ok = [&](double r) {
    if (!enforce_power) return true;
    return detail::discrete_geometry(sc, r).power <= sc.prop_limit &&
           init_power(sc, r) <= sc.prop_limit;
  };
  auto objective = [&](double r) -> double {
    const double rate = detail::circle_min_rate(sc, center, r);
    if (mode == InitMode::kMinRate) return rate;
    const double power = detail::discrete_geometry(sc, r).power;
    return sc.bandwidth * rate / power;  // bits/J at constant per-slot power
  };

  double best_r = -1.0, best_obj = -std::numeric_limits<double>::infinity();
  const int kCandidates = 200;
  for (int i = 0; i < kCandidates; ++i) {
    const double r = r_lo * std::pow(r_hi / r_lo, i / double(kCandidates - 1));
    if (!power_ok(r)) continue;
    const double obj = objective(r);
    if (obj > best_obj) {
      best_obj = obj;
      best_r = r;
    }
  }
  if (best_r < 0)
    throw InfeasibleError(
        "propulsion limit " + std::to_string(sc.prop_limit) +
        " W infeasible for every radius in [" + std::to_string(r_lo) + ", " +
        std::to_string(r_hi) + "] m");

  {  // golden-section refinement to 0.1 m within the feasible neighborhood
    const double step = std::pow(r_hi / r_lo, 1.0 / (kCandidates - 1));
    double a = std::max(r_lo, best_r / step);
    double b = std::min(r_hi, best_r * step);
    for (int it = 0; it < 60 && !power_ok(a); ++it) a = 0.5 * (a + best_r);
    for (int it = 0; it < 60 && !power_ok(b); ++it) b = 0.5 * (b + best_r);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    while (b - a > 0.1) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = objective(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = objective(x1);
      }
    }
    const double r_ref = 0.5 * (a + b);
    if (power_ok(r_ref) && objective(r_ref) >= best_obj) best_r = r_ref;
  }

  InitPlan out;
  out.r0 = best_r;
  out.objective = objective(best_r);

  // Discrete-exact Cartesian circle.
  const double lam = detail::discrete_speed_scale(n_slots, dt);
  out.traj.q.resize(n_slots + 1);
  out.traj.v.resize(n_slots + 1);
  out.traj.a.resize(n_slots + 1);
  for (int n = 0; n <= n_slots; ++n) {
    const double th = 2.0 * M_PI * n / n_slots;
    const Vec2 e(std::cos(th), std::sin(th));
    out.traj.q[n] = center + best_r * e;
    out.traj.v[n] = best_r * lam * Vec2(-e[1], e[0]);
  }
  out.traj.q[n_slots] = out.traj.q[0];
  out.traj.v[n_slots] = out.traj.v[0];
  for (int n = 0; n < n_slots; ++n)
    out.traj.a[n] = (out.traj.v[n + 1] - out.traj.v[n]) / dt;
  out.traj.a[n_slots] = out.traj.a[0];

  out.plan.G.resize(k_gn, n_slots);
  out.plan.p = MatX::Constant(k_gn, n_slots, sc.peak_power);
  out.plan.V1.resize(n_slots);
  for (int n = 1; n <= n_slots; ++n) {
    out.plan.V1[n - 1] = out.traj.v[n].norm();
    for (int k = 0; k < k_gn; ++k)
      out.plan.G(k, n - 1) = sc.peak_power * model::channel_gain(sc, out.traj.q[n], k);
  }
  out.plan.tau = model::min_avg_rate_from_received(out.plan.G);
  out.plan.eta = sc.bandwidth * dt * out.plan.tau * n_slots;

  // Angular representation (exact under the angular recurrences).
  out.circ.center = center;
  out.circ.r = best_r;
  out.circ.theta.resize(n_slots + 1);
  out.circ.omega = VecX::Constant(n_slots + 1, 2.0 * M_PI / sc.period);
  out.circ.alpha = VecX::Zero(n_slots + 1);
  for (int n = 0; n <= n_slots; ++n) out.circ.theta[n] = 2.0 * M_PI * n / n_slots;
  out.circ.zeta.resize(k_gn);
  out.circ.varphi.resize(k_gn);
  for (int k = 0; k < k_gn; ++k) {
    const Vec2 d = sc.gn_positions[k] - center;
    out.circ.zeta[k] = d.norm();
    out.circ.varphi[k] = (d.norm() > 1e-12) ? std::atan2(d[1], d[0]) : 0.0;
  }
  out.circ.S.resize(k_gn, n_slots);
  for (int n = 1; n <= n_slots; ++n)
    for (int k = 0; k < k_gn; ++k)
      out.circ.S(k, n - 1) = peak_received(sc, out.circ, k, out.circ.theta[n]);
  return out;
}

// ---------------------------------------------------------------------------
// Radius stage (P3.1) and angle stage (P3.2) subproblems.
// ---------------------------------------------------------------------------
namespace detail {

inline std::vector<subsolver::RateEpigraphFunc::Slot> s_rate_slots(
    const CircularState& st, int s_offset, int k) {
  const int n_slots = st.slots();
  const int k_gn = static_cast<int>(st.S.rows());
  std::vector<subsolver::RateEpigraphFunc::Slot> slots(n_slots);
  for (int n = 1; n <= n_slots; ++n) {
    auto& s = slots[n - 1];
    s.g_idx.resize(k_gn);
    for (int m = 0; m < k_gn; ++m) s.g_idx[m] = s_offset + (n - 1) * k_gn + m;
    s.own = k;
    double interf = 0.0;
    for (int m = 0; m < k_gn; ++m)
      if (m != k) interf += st.S(m, n - 1);
    s.slope = kLog2E / (1.0 + interf);
    s.constant = std::log2(1.0 + interf) - s.slope * interf;
  }
  return slots;
}

inline void add_s_box(const Scenario& sc, const CircularState& st, int s_offset,
                      subsolver::SubProblem& sp,
                      const std::function<void(int k, int n, int s_idx)>& add_upper) {
  const double g_scale = sc.peak_power * sc.ref_snr / (sc.altitude * sc.altitude);
  const int k_gn = static_cast<int>(st.S.rows());
  for (int n = 1; n <= st.slots(); ++n)
    for (int k = 0; k < k_gn; ++k) {
      const int s_idx = s_offset + (n - 1) * k_gn + k;
      sp.constraints.push_back(std::make_shared<subsolver::LinearFunc>(
          "S_nonneg[k=" + std::to_string(k) + ",n=" + std::to_string(n) + "]",
          std::vector<int>{s_idx}, std::vector<double>{-1.0 / g_scale}, 0.0));
      add_upper(k, n, s_idx);
    }
}

inline MatX restored_s(const Scenario& sc, const CircularState& st,
                       const std::function<double(int k, int n)>& cap) {
  MatX s = st.S;
  for (int n = 1; n <= st.slots(); ++n)
    for (int k = 0; k < s.rows(); ++k) {
      const double c = cap(k, n);
      s(k, n - 1) = std::min(s(k, n - 1), c * (1.0 - 1e-6));
      s(k, n - 1) = std::max(s(k, n - 1), c * 1e-12);
    }
  return s;
}

inline double min_avg_rate_of(const MatX& s) {
  return model::min_avg_rate_from_received(s);
}

}  // namespace detail

/// One radius-stage solve: variables (r, S, epigraph), angular profile fixed.
/// In min-rate mode the objective is the epigraph and the average-power cap
/// applies; with lambda >= 0 it is the Dinkelbach objective without the cap.
inline subsolver::SubProblem build_p31(const Scenario& sc, const CircularState& st,
                                       bool minrate_mode, double lambda_hat) {
  using namespace subsolver;
  const int n_slots = st.slots();
  const int k_gn = static_cast<int>(st.S.rows());

  SubProblem sp;
  const int ir = sp.layout.add("r", 1);
  const int is0 = sp.layout.add("S", k_gn * n_slots);
  const int iepi = sp.layout.add(minrate_mode ? "tau" : "eta", 1);

  const double coef = minrate_mode ? 1.0 / n_slots : 1.0;
  const double escale = minrate_mode ? 1.0 : 1.0 / n_slots;
  for (int k = 0; k < k_gn; ++k)
    sp.constraints.push_back(std::make_shared<RateEpigraphFunc>(
        "rate[k=" + std::to_string(k) + "]", iepi, detail::s_rate_slots(st, is0, k),
        coef, escale));

  const double pg = sc.peak_power * sc.ref_snr;
  const double g_scale = pg / (sc.altitude * sc.altitude);
  detail::add_s_box(sc, st, is0, sp, [&](int k, int n, int s_idx) {
    const auto sur =
        surrogates::SmaxRadiusSurrogate::make(sc, st.zeta[k], st.varphi[k],
                                              st.theta[n], st.r);
    sp.constraints.push_back(std::make_shared<PeakPowerScalarFunc>(
        "S_peak[k=" + std::to_string(k) + ",n=" + std::to_string(n) + "]", s_idx, ir,
        0.0, sur.b, pg / (sur.A * sur.A), pg * sur.kernel.b_coef * sur.kernel.u_expand[0],
        pg * sur.kernel.c_coef, 1.0 / g_scale));
  });

  // Radius window: paper box plus per-slot speed and acceleration limits at
  // the fixed angular profile.
  double omega_min = std::numeric_limits<double>::infinity(), omega_max = 0.0;
  double worst_accel = 0.0;
  std::vector<double> omega(n_slots), alpha(n_slots);
  for (int n = 1; n <= n_slots; ++n) {
    omega[n - 1] = st.omega[n];
    alpha[n - 1] = st.alpha[n];
    omega_min = std::min(omega_min, st.omega[n]);
    omega_max = std::max(omega_max, st.omega[n]);
    worst_accel = std::max(worst_accel,
                           std::sqrt(std::pow(st.omega[n], 4.0) +
                                     st.alpha[n] * st.alpha[n]));
  }
  const double r_min = sc.v_min * sc.period / (2.0 * M_PI);
  const double r_max = std::min(sc.v_max * sc.period / (2.0 * M_PI),
                                sc.a_max / worst_accel);
  const double lo = std::max(r_min, sc.v_min / omega_min);
  const double hi = std::min(r_max, sc.v_max / omega_max);
  sp.constraints.push_back(std::make_shared<LinearFunc>(
      "r_min", std::vector<int>{ir}, std::vector<double>{-1.0 / lo}, 1.0));
  sp.constraints.push_back(std::make_shared<LinearFunc>(
      "r_max", std::vector<int>{ir}, std::vector<double>{1.0 / hi}, -1.0));

  if (minrate_mode) {
    if (sc.prop_limit < kNoPowerLimit)
      sp.constraints.push_back(std::make_shared<RadiusPowerFunc>(
          "avg_power", sc, ir, omega, alpha, sc.prop_limit, 1.0 / sc.prop_limit));
    sp.objective = std::make_shared<LinearFunc>("tau", std::vector<int>{iepi},
                                                std::vector<double>{1.0}, 0.0);
  } else {
    auto avg_power = std::make_shared<RadiusPowerFunc>("avg_power_expr", sc, ir, omega,
                                                       alpha, 0.0, 1.0);
    sp.objective = std::make_shared<CircularDinkelbachObjective>(
        "ee_objective", iepi, lambda_hat, n_slots, avg_power);
  }

  // Warm start.
  const MatX s_warm = detail::restored_s(sc, st, [&](int k, int n) {
    return peak_received(sc, st, k, st.theta[n]);
  });
  VecX x0(sp.num_vars());
  x0[ir] = std::min(std::max(st.r, lo * (1.0 + 1e-9)), hi * (1.0 - 1e-9));
  for (int n = 1; n <= n_slots; ++n)
    for (int k = 0; k < k_gn; ++k) x0[is0 + (n - 1) * k_gn + k] = s_warm(k, n - 1);
  const double worst = minrate_mode ? detail::min_avg_rate_of(s_warm)
                                    : detail::min_avg_rate_of(s_warm) * n_slots;
  x0[iepi] = worst - 1e-8 * (1.0 + std::abs(worst)) / escale;
  sp.warm_start = x0;
  return sp;
}

/// One angle-stage solve: variables (theta, omega, alpha, S, epigraph) at
/// fixed radius, with the angular recurrences and the 2 pi closure as
/// equalities.
inline subsolver::SubProblem build_p32(const Scenario& sc, const CircularState& st,
                                       bool minrate_mode, double lambda_hat) {
  using namespace subsolver;
  const int n_slots = st.slots();
  const int k_gn = static_cast<int>(st.S.rows());
  const double dt = sc.slot_len();
  const double r = st.r;

  SubProblem sp;
  const int ith = sp.layout.add("theta", n_slots + 1);
  const int iom = sp.layout.add("omega", n_slots + 1);
  const int ial = sp.layout.add("alpha", n_slots + 1);
  const int is0 = sp.layout.add("S", k_gn * n_slots);
  const int iepi = sp.layout.add(minrate_mode ? "tau" : "eta", 1);

  {
    std::vector<Eigen::Triplet<double>> trip;
    VecX b = VecX::Zero(2 * n_slots + 3);
    int row = 0;
    for (int n = 1; n <= n_slots; ++n) {
      trip.emplace_back(row, iom + n, 1.0);
      trip.emplace_back(row, iom + (n - 1), -1.0);
      trip.emplace_back(row, ial + (n - 1), -dt);
      ++row;
      trip.emplace_back(row, ith + n, 1.0);
      trip.emplace_back(row, ith + (n - 1), -1.0);
      trip.emplace_back(row, iom + (n - 1), -dt);
      trip.emplace_back(row, ial + (n - 1), -0.5 * dt * dt);
      ++row;
    }
    trip.emplace_back(row, ith + n_slots, 1.0);
    trip.emplace_back(row, ith + 0, -1.0);
    b[row] = 2.0 * M_PI;
    ++row;
    trip.emplace_back(row, iom + n_slots, 1.0);
    trip.emplace_back(row, iom + 0, -1.0);
    ++row;
    trip.emplace_back(row, ial + n_slots, 1.0);
    trip.emplace_back(row, ial + 0, -1.0);
    ++row;
    sp.eq_matrix.resize(row, sp.layout.num_vars());
    sp.eq_matrix.setFromTriplets(trip.begin(), trip.end());
    sp.eq_rhs = b;
  }

  const double coef = minrate_mode ? 1.0 / n_slots : 1.0;
  const double escale = minrate_mode ? 1.0 : 1.0 / n_slots;
  for (int k = 0; k < k_gn; ++k)
    sp.constraints.push_back(std::make_shared<RateEpigraphFunc>(
        "rate[k=" + std::to_string(k) + "]", iepi, detail::s_rate_slots(st, is0, k),
        coef, escale));

  const double pg = sc.peak_power * sc.ref_snr;
  const double g_scale = pg / (sc.altitude * sc.altitude);
  detail::add_s_box(sc, st, is0, sp, [&](int k, int n, int s_idx) {
    const auto sur = surrogates::SmaxAngleSurrogate::make(sc, st.zeta[k],
                                                          st.varphi[k], r, st.theta[n]);
    sp.constraints.push_back(std::make_shared<PeakPowerScalarFunc>(
        "S_peak[k=" + std::to_string(k) + ",n=" + std::to_string(n) + "]", s_idx,
        ith + n, 0.0, sur.b, pg * sur.rho / (sur.A * sur.A),
        pg * sur.kernel.b_coef * sur.kernel.u_expand[0], pg * sur.kernel.c_coef,
        1.0 / g_scale));
  });

  const double omega_lo = sc.v_min / r, omega_hi = sc.v_max / r;
  for (int n = 0; n < n_slots; ++n) {
    sp.constraints.push_back(std::make_shared<LinearFunc>(
        "omega_min[n=" + std::to_string(n) + "]", std::vector<int>{iom + n},
        std::vector<double>{-1.0 / omega_lo}, 1.0));
    sp.constraints.push_back(std::make_shared<LinearFunc>(
        "omega_max[n=" + std::to_string(n) + "]", std::vector<int>{iom + n},
        std::vector<double>{1.0 / omega_hi}, -1.0));
    sp.constraints.push_back(std::make_shared<CircularAccelFunc>(
        "accel[n=" + std::to_string(n) + "]", iom + n, ial + n, r, sc.a_max,
        1.0 / (sc.a_max * sc.a_max)));
  }

  std::vector<AngleSlot> aslots(n_slots);
  for (int n = 1; n <= n_slots; ++n) aslots[n - 1] = {iom + n, ial + n};
  if (minrate_mode) {
    if (sc.prop_limit < kNoPowerLimit)
      sp.constraints.push_back(std::make_shared<AnglePowerFunc>(
          "avg_power", sc, aslots, r, sc.prop_limit, 1.0 / sc.prop_limit));
    sp.objective = std::make_shared<LinearFunc>("tau", std::vector<int>{iepi},
                                                std::vector<double>{1.0}, 0.0);
  } else {
    auto avg_power =
        std::make_shared<AnglePowerFunc>("avg_power_expr", sc, aslots, r, 0.0, 1.0);
    sp.objective = std::make_shared<CircularDinkelbachObjective>(
        "ee_objective", iepi, lambda_hat, n_slots, avg_power);
  }

  const MatX s_warm = detail::restored_s(sc, st, [&](int k, int n) {
    return peak_received(sc, st, k, st.theta[n]);
  });
  VecX x0(sp.num_vars());
  for (int n = 0; n <= n_slots; ++n) {
    x0[ith + n] = st.theta[n];
    x0[iom + n] = std::min(std::max(st.omega[n], omega_lo * (1.0 + 1e-9)),
                           omega_hi * (1.0 - 1e-9));
    x0[ial + n] = st.alpha[n];
  }
  for (int n = 1; n <= n_slots; ++n)
    for (int k = 0; k < k_gn; ++k) x0[is0 + (n - 1) * k_gn + k] = s_warm(k, n - 1);
  const double worst = minrate_mode ? detail::min_avg_rate_of(s_warm)
                                    : detail::min_avg_rate_of(s_warm) * n_slots;
  x0[iepi] = worst - 1e-8 * (1.0 + std::abs(worst)) / escale;
  sp.warm_start = x0;
  return sp;
}

/// Applies one radius-stage solution to the state.
inline void apply_p31(const subsolver::SubProblem& sp, const VecX& x, CircularState& st) {
  st.r = sp.block_of(x, "r")[0];
  const VecX s = sp.block_of(x, "S");
  const int k_gn = static_cast<int>(st.S.rows());
  for (int n = 1; n <= st.slots(); ++n)
    for (int k = 0; k < k_gn; ++k) st.S(k, n - 1) = s[(n - 1) * k_gn + k];
}

inline void apply_p32(const subsolver::SubProblem& sp, const VecX& x, CircularState& st) {
  const VecX th = sp.block_of(x, "theta");
  const VecX om = sp.block_of(x, "omega");
  const VecX al = sp.block_of(x, "alpha");
  const int n_slots = st.slots();
  for (int n = 0; n <= n_slots; ++n) {
    st.theta[n] = th[n];
    st.omega[n] = om[n];
    st.alpha[n] = al[n];
  }
  const VecX s = sp.block_of(x, "S");
  const int k_gn = static_cast<int>(st.S.rows());
  for (int n = 1; n <= n_slots; ++n)
    for (int k = 0; k < k_gn; ++k) st.S(k, n - 1) = s[(n - 1) * k_gn + k];
}

/// Single subproblem solves (SCA steps). Kept as entry points for tests.
inline void solve_p31(const Scenario& sc, CircularState& st, double subsolver_tol = 1e-6) {
  auto sp = build_p31(sc, st, true, 0.0);
  subsolver::SolverOptions opt;
  opt.tol = subsolver_tol;
  const auto res = subsolver::solve(sp, opt);
  apply_p31(sp, res.x, st);
}

inline void solve_p32(const Scenario& sc, CircularState& st, double subsolver_tol = 1e-6) {
  auto sp = build_p32(sc, st, true, 0.0);
  subsolver::SolverOptions opt;
  opt.tol = subsolver_tol;
  const auto res = subsolver::solve(sp, opt);
  apply_p32(sp, res.x, st);
}

namespace detail {

enum class Stage { kRadius, kAngle };

/// Runs one SCA loop (radius or angle stage) to convergence of the true
/// stage objective; returns the objective at the final state.
inline double run_stage(const Scenario& sc, CircularState& st, Stage stage,
                        bool minrate_mode, double lambda_hat,
                        const planners::ScaConfig& cfg) {
  auto stage_objective = [&]() {
    const double rate = model::min_avg_rate_from_received(st.S);
    if (minrate_mode) return rate;
    return rate * st.slots() - lambda_hat * circ_power_sum(sc, st);
  };
  double obj = stage_objective();
  for (int l = 0; l < cfg.max_outer_iters; ++l) {
    auto sp = (stage == Stage::kRadius) ? build_p31(sc, st, minrate_mode, lambda_hat)
                                        : build_p32(sc, st, minrate_mode, lambda_hat);
    const auto res = subsolver::solve(sp, cfg.solver_options());
    if (res.status == subsolver::SolveStatus::kBreakdown) break;
    CircularState trial = st;
    if (stage == Stage::kRadius)
      apply_p31(sp, res.x, trial);
    else
      apply_p32(sp, res.x, trial);
    const double cand = [&] {
      const double rate = model::min_avg_rate_from_received(trial.S);
      return minrate_mode ? rate
                          : rate * trial.slots() - lambda_hat * circ_power_sum(sc, trial);
    }();
    if (cand < obj - 1e-9 * (1.0 + std::abs(obj))) break;
    st = trial;
    const double delta = std::abs(cand - obj);
    obj = cand;
    if (delta <= cfg.rel_obj_tol * std::max(1e-12, std::abs(cand))) break;
  }
  return obj;
}

inline planners::PlanResult package_circular(const Scenario& sc, const CircularState& st,
                                             bool enforce_power_limit) {
  planners::PlanResult out;
  out.traj = to_trajectory(st);
  const int k_gn = static_cast<int>(st.S.rows());
  const int n_slots = st.slots();
  out.plan.G = st.S;
  out.plan.V1.resize(n_slots);
  for (int n = 1; n <= n_slots; ++n) out.plan.V1[n - 1] = st.r * st.omega[n];
  out.plan.p.resize(k_gn, n_slots);
  for (int n = 1; n <= n_slots; ++n)
    for (int k = 0; k < k_gn; ++k) {
      const double h = sc.ref_snr / polar_dist_sq(sc, st, k, st.theta[n]);
      out.plan.p(k, n - 1) = std::min(sc.peak_power, std::max(0.0, st.S(k, n - 1) / h));
    }
  Scenario sc_audit = sc;
  if (!enforce_power_limit) sc_audit.prop_limit = subsolver::kNoPowerLimit * 10;
  model::fill_metrics(sc_audit, out.traj, out.plan.p, out.report);
  out.report.residuals = model::audit(sc_audit, out.traj, out.plan);
  return out;
}

}  // namespace detail

/// Circular min-rate baseline: alternates the radius and angle stages until
/// the objective converges.
inline planners::PlanResult solve_p3(const Scenario& sc, const planners::ScaConfig& cfg = {},
                                     int max_rounds = 30) {
  const auto t0 = std::chrono::steady_clock::now();
  InitPlan init = init_plan(sc, InitMode::kMinRate);
  CircularState st = init.circ;

  std::vector<double> trace{model::min_avg_rate_from_received(st.S)};
  bool converged = false;
  for (int round = 0; round < max_rounds; ++round) {
    detail::run_stage(sc, st, detail::Stage::kRadius, true, 0.0, cfg);
    detail::run_stage(sc, st, detail::Stage::kAngle, true, 0.0, cfg);
    const double obj = model::min_avg_rate_from_received(st.S);
    const double prev = trace.back();
    trace.push_back(obj);
    if (std::abs(obj - prev) <= cfg.rel_obj_tol * std::max(1e-12, std::abs(obj))) {
      converged = true;
      break;
    }
  }

  auto out = detail::package_circular(sc, st, true);
  out.plan.tau = trace.back();
  out.report.objective_trace = trace;
  out.report.iterations = static_cast<int>(trace.size()) - 1;
  out.report.status =
      converged ? model::PlanStatus::kConverged : model::PlanStatus::kMaxIterations;
  out.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Circular EE baseline: Dinkelbach outer loop around the alternating stages.
inline planners::PlanResult solve_p4(const Scenario& sc, const planners::ScaConfig& cfg = {},
                                     int max_rounds = 30) {
  const auto t0 = std::chrono::steady_clock::now();
  InitPlan init = init_plan(sc, InitMode::kEnergyEfficiency);
  CircularState st = init.circ;
  const int n_slots = st.slots();

  double lambda_hat = 0.0;
  std::vector<double> trace;
  std::vector<double> lambda_trace{0.0};
  std::vector<double> f_trace;
  auto achieved_ee = [&]() {
    return sc.bandwidth * model::min_avg_rate_from_received(st.S) * n_slots /
           circ_power_sum(sc, st);
  };
  trace.push_back(achieved_ee());
  bool converged = false;

  for (int m = 0; m < cfg.max_dinkelbach; ++m) {
    double f_inner = -std::numeric_limits<double>::infinity();
    for (int round = 0; round < max_rounds; ++round) {
      detail::run_stage(sc, st, detail::Stage::kRadius, false, lambda_hat, cfg);
      const double obj =
          detail::run_stage(sc, st, detail::Stage::kAngle, false, lambda_hat, cfg);
      trace.push_back(achieved_ee());
      if (std::isfinite(f_inner) &&
          std::abs(obj - f_inner) <= cfg.rel_obj_tol * std::max(1e-12, std::abs(obj)))
        break;
      f_inner = obj;
    }
    const double eta = model::min_avg_rate_from_received(st.S) * n_slots;
    const double mu = circ_power_sum(sc, st);
    const double f_phys = sc.bandwidth * (eta - lambda_hat * mu);
    const double lambda_phys = sc.bandwidth * lambda_hat;
    f_trace.push_back(f_phys);
    if (std::abs(f_phys) <= cfg.dinkelbach_tol * std::max(1.0, lambda_phys * mu)) {
      converged = true;
      break;
    }
    lambda_hat = eta / mu;
    lambda_trace.push_back(sc.bandwidth * lambda_hat);
  }

  auto out = detail::package_circular(sc, st, false);
  out.plan.eta = sc.bandwidth * sc.slot_len() *
                 model::min_avg_rate_from_received(st.S) * n_slots;
  out.report.objective_trace = trace;
  out.report.lambda_trace = lambda_trace;
  out.report.f_trace = f_trace;
  out.report.iterations = static_cast<int>(trace.size()) - 1;
  out.report.status =
      converged ? model::PlanStatus::kConverged : model::PlanStatus::kMaxIterations;
  out.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace circular
}  // namespace uavplan

#endif  // UAVPLAN_CIRCULAR_HPP
