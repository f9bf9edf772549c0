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

#ifndef UAVPLAN_PROBLEMS_HPP
#define UAVPLAN_PROBLEMS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "uavplan/funcs.hpp"
#include "uavplan/model.hpp"
#include "uavplan/surrogates.hpp"

namespace uavplan {
namespace subsolver {

/// Any propulsion limit at or above this is treated as absent.
inline constexpr double kNoPowerLimit = 1e11;

/// Variable indexing for the Cartesian subproblems: q, v, a over slot
/// boundaries 0..N (blocks of 2(N+1)), received powers G and the speed slack
/// V1 over slots 1..N, one epigraph scalar. Periodicity is enforced by
/// equality rows tying slot N to slot 0.
struct CartesianVars {
  int n_slots = 0;
  int k_gn = 0;
  BlockLayout layout;

  static CartesianVars make(int n_slots, int k_gn, const std::string& epi_name) {
    CartesianVars v;
    v.n_slots = n_slots;
    v.k_gn = k_gn;
    v.layout.add("q", 2 * (n_slots + 1));
    v.layout.add("v", 2 * (n_slots + 1));
    v.layout.add("a", 2 * (n_slots + 1));
    v.layout.add("G", k_gn * n_slots);
    v.layout.add("V1", n_slots);
    v.layout.add(epi_name, 1);
    return v;
  }

  int iq(int n, int d) const { return 2 * n + d; }
  int iv(int n, int d) const { return 2 * (n_slots + 1) + 2 * n + d; }
  int ia(int n, int d) const { return 4 * (n_slots + 1) + 2 * n + d; }
  int iG(int k, int n) const { return 6 * (n_slots + 1) + (n - 1) * k_gn + k; }
  int iV1(int n) const { return 6 * (n_slots + 1) + k_gn * n_slots + (n - 1); }
  int iepi() const { return 6 * (n_slots + 1) + k_gn * n_slots + n_slots; }
  int num_vars() const { return iepi() + 1; }

  VecX pack(const model::Trajectory& tr, const model::LinkPlan& plan, double epi) const {
    VecX x(num_vars());
    for (int n = 0; n <= n_slots; ++n)
      for (int d = 0; d < 2; ++d) {
        x[iq(n, d)] = tr.q[n][d];
        x[iv(n, d)] = tr.v[n][d];
        x[ia(n, d)] = tr.a[n][d];
      }
    for (int n = 1; n <= n_slots; ++n) {
      for (int k = 0; k < k_gn; ++k) x[iG(k, n)] = plan.G(k, n - 1);
      x[iV1(n)] = plan.V1[n - 1];
    }
    x[iepi()] = epi;
    return x;
  }

  void unpack(const VecX& x, model::Trajectory& tr, model::LinkPlan& plan) const {
    tr.q.assign(n_slots + 1, Vec2::Zero());
    tr.v.assign(n_slots + 1, Vec2::Zero());
    tr.a.assign(n_slots + 1, Vec2::Zero());
    for (int n = 0; n <= n_slots; ++n)
      for (int d = 0; d < 2; ++d) {
        tr.q[n][d] = x[iq(n, d)];
        tr.v[n][d] = x[iv(n, d)];
        tr.a[n][d] = x[ia(n, d)];
      }
    plan.G.resize(k_gn, n_slots);
    plan.V1.resize(n_slots);
    for (int n = 1; n <= n_slots; ++n) {
      for (int k = 0; k < k_gn; ++k) plan.G(k, n - 1) = x[iG(k, n)];
      plan.V1[n - 1] = x[iV1(n)];
    }
  }
};

/// Discrete kinematic recurrences (4N rows) plus periodicity ties (6 rows).
inline void kinematic_equalities(const CartesianVars& vars, double dt,
                                 Eigen::SparseMatrix<double>& a_mat, VecX& b) {
  const int n_slots = vars.n_slots;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(16 * n_slots + 12);
  int row = 0;
  for (int n = 1; n <= n_slots; ++n) {
    for (int d = 0; d < 2; ++d) {
      trip.emplace_back(row, vars.iv(n, d), 1.0);
      trip.emplace_back(row, vars.iv(n - 1, d), -1.0);
      trip.emplace_back(row, vars.ia(n - 1, d), -dt);
      ++row;
      trip.emplace_back(row, vars.iq(n, d), 1.0);
      trip.emplace_back(row, vars.iq(n - 1, d), -1.0);
      trip.emplace_back(row, vars.iv(n - 1, d), -dt);
      trip.emplace_back(row, vars.ia(n - 1, d), -0.5 * dt * dt);
      ++row;
    }
  }
  for (int d = 0; d < 2; ++d) {
    trip.emplace_back(row, vars.iq(n_slots, d), 1.0);
    trip.emplace_back(row, vars.iq(0, d), -1.0);
    ++row;
    trip.emplace_back(row, vars.iv(n_slots, d), 1.0);
    trip.emplace_back(row, vars.iv(0, d), -1.0);
    ++row;
    trip.emplace_back(row, vars.ia(n_slots, d), 1.0);
    trip.emplace_back(row, vars.ia(0, d), -1.0);
    ++row;
  }
  a_mat.resize(row, vars.num_vars());
  a_mat.setFromTriplets(trip.begin(), trip.end());
  b = VecX::Zero(row);
}

struct CartesianExpansion {
  model::Trajectory traj;
  model::LinkPlan plan;
};

namespace detail {

/// Shared constraint set of (P1.2) and (P2.3): peak-power box via the position
/// minorant, speed slack coupling, speed/acceleration caps.
inline void add_common_constraints(const Scenario& sc, const CartesianVars& vars,
                                   const CartesianExpansion& exp, SubProblem& sp) {
  const int n_slots = vars.n_slots;
  const int k_gn = vars.k_gn;
  const double g_scale = sc.peak_power * sc.ref_snr / (sc.altitude * sc.altitude);

  for (int n = 1; n <= n_slots; ++n) {
    for (int k = 0; k < k_gn; ++k) {
      sp.constraints.push_back(std::make_shared<LinearFunc>(
          "G_nonneg[k=" + std::to_string(k) + ",n=" + std::to_string(n) + "]",
          std::vector<int>{vars.iG(k, n)}, std::vector<double>{-1.0 / g_scale}, 0.0));
      const auto sur = surrogates::gmax_surrogate(sc, k, exp.traj.q[n]);
      const double pg = sc.peak_power * sc.ref_snr;
      const double h4 = std::pow(sc.altitude, 4.0);
      const Vec2 ul(sur.u_expand[0], sur.u_expand[1]);
      sp.constraints.push_back(std::make_shared<PeakPowerPositionFunc>(
          "G_peak[k=" + std::to_string(k) + ",n=" + std::to_string(n) + "]",
          vars.iG(k, n), vars.iq(n, 0), vars.iq(n, 1), sc.gn_positions[k], pg / h4,
          Vec2(pg * sur.b_coef * ul), pg * sur.c_coef, 1.0 / g_scale));
    }
    sp.constraints.push_back(std::make_shared<LinearFunc>(
        "V1_min[n=" + std::to_string(n) + "]", std::vector<int>{vars.iV1(n)},
        std::vector<double>{-1.0 / sc.v_min}, 1.0));
    // V1^2 <= concave minorant of ||v[n]||^2, i.e. the ball
    // V1^2 + ||v - 2 v_l||^2 <= 2 ||v_l||^2
    const Vec2 vl = exp.traj.v[n];
    VecX center(3);
    center << 0.0, 2.0 * vl[0], 2.0 * vl[1];
    sp.constraints.push_back(std::make_shared<BallFunc>(
        "speed_slack[n=" + std::to_string(n) + "]",
        std::vector<int>{vars.iV1(n), vars.iv(n, 0), vars.iv(n, 1)}, center,
        2.0 * vl.squaredNorm(), 1.0 / (sc.v_max * sc.v_max)));
  }
  for (int n = 0; n < n_slots; ++n) {
    sp.constraints.push_back(std::make_shared<BallFunc>(
        "speed_max[n=" + std::to_string(n) + "]",
        std::vector<int>{vars.iv(n, 0), vars.iv(n, 1)}, VecX::Zero(2),
        sc.v_max * sc.v_max, 1.0 / (sc.v_max * sc.v_max)));
    sp.constraints.push_back(std::make_shared<BallFunc>(
        "accel_max[n=" + std::to_string(n) + "]",
        std::vector<int>{vars.ia(n, 0), vars.ia(n, 1)}, VecX::Zero(2),
        sc.a_max * sc.a_max, 1.0 / (sc.a_max * sc.a_max)));
  }
}

inline std::vector<RateEpigraphFunc::Slot> rate_slots(const CartesianVars& vars,
                                                      const MatX& g_prev, int k) {
  std::vector<RateEpigraphFunc::Slot> slots(vars.n_slots);
  for (int n = 1; n <= vars.n_slots; ++n) {
    auto& s = slots[n - 1];
    s.g_idx.resize(vars.k_gn);
    for (int m = 0; m < vars.k_gn; ++m) s.g_idx[m] = vars.iG(m, n);
    s.own = k;
    double interf = 0.0;
    for (int m = 0; m < vars.k_gn; ++m)
      if (m != k) interf += g_prev(m, n - 1);
    s.slope = kLog2E / (1.0 + interf);
    s.constant = std::log2(1.0 + interf) - s.slope * interf;
  }
  return slots;
}

inline std::vector<PowerSlot> power_slots(const CartesianVars& vars) {
  std::vector<PowerSlot> slots(vars.n_slots);
  for (int n = 1; n <= vars.n_slots; ++n)
    slots[n - 1] = {vars.iv(n, 0), vars.iv(n, 1), vars.ia(n, 0), vars.ia(n, 1),
                    vars.iV1(n)};
  return slots;
}

/// Pulls the warm start strictly inside the box-like constraints: received
/// powers down, speed slack into (V_min, ||v||), epigraph below the surrogate
/// rate. Remaining boundary contact (power and kinematic caps) is absorbed by
/// the solver's interior padding.
inline VecX restored_warm_start(const Scenario& sc, const CartesianVars& vars,
                                const CartesianExpansion& exp, double coef,
                                double epi_scale) {
  model::LinkPlan plan = exp.plan;
  const int n_slots = vars.n_slots;
  if (plan.V1.size() != n_slots) plan.V1 = VecX::Zero(n_slots);
  for (int n = 1; n <= n_slots; ++n) {
    const double speed = exp.traj.v[n].norm();
    double v1 = exp.plan.V1.size() == n_slots ? exp.plan.V1[n - 1] : speed;
    v1 = std::min(v1, speed * (1.0 - 1e-9));
    v1 = std::max(v1, sc.v_min * (1.0 + 1e-9));
    plan.V1[n - 1] = v1;
    for (int k = 0; k < vars.k_gn; ++k) {
      const double cap = surrogates::gmax_true(sc, k, exp.traj.q[n]);
      double g = plan.G(k, n - 1);
      g = std::min(g, cap * (1.0 - 1e-6));
      g = std::max(g, cap * 1e-12);
      plan.G(k, n - 1) = g;
    }
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < vars.k_gn; ++k) {
    double sum = 0.0;
    for (int n = 1; n <= n_slots; ++n)
      sum += model::rate_from_received(plan.G.col(n - 1), k);
    worst = std::min(worst, sum * coef);
  }
  const double epi = worst - 1e-8 * (1.0 + std::abs(worst)) / epi_scale;
  return vars.pack(exp.traj, plan, epi);
}

}  // namespace detail

/// Convex subproblem of one min-rate SCA iteration: maximize the epigraph of
/// the surrogate min average rate subject to kinematics, the propulsion-power
/// limit and the restricted link/speed sets.
inline SubProblem build_p12(const Scenario& sc, const CartesianExpansion& exp,
                            double p_lim) {
  const int n_slots = sc.slots;
  const int k_gn = sc.num_gn();
  const CartesianVars vars = CartesianVars::make(n_slots, k_gn, "tau");

  SubProblem sp;
  sp.layout = vars.layout;
  kinematic_equalities(vars, sc.slot_len(), sp.eq_matrix, sp.eq_rhs);

  for (int k = 0; k < k_gn; ++k)
    sp.constraints.push_back(std::make_shared<RateEpigraphFunc>(
        "rate[k=" + std::to_string(k) + "]", vars.iepi(),
        detail::rate_slots(vars, exp.plan.G, k), 1.0 / n_slots, 1.0));
  detail::add_common_constraints(sc, vars, exp, sp);
  if (p_lim < kNoPowerLimit)
    sp.constraints.push_back(std::make_shared<PowerLimitFunc>(
        "avg_power", sc, detail::power_slots(vars), p_lim, 1.0 / p_lim));

  sp.objective = std::make_shared<LinearFunc>("tau", std::vector<int>{vars.iepi()},
                                              std::vector<double>{1.0}, 0.0);
  sp.warm_start = detail::restored_warm_start(sc, vars, exp, 1.0 / n_slots, 1.0);
  return sp;
}

/// Convex subproblem of one Dinkelbach-parameterized EE SCA iteration:
/// maximize eta - lambda * sum_n P_prop[n] (power written through the speed
/// slack), subject to the same restricted sets but no propulsion cap. eta is
/// in rate-slot units (sum over slots of bits/s/Hz); lambda is bits/J divided
/// by the bandwidth.
inline SubProblem build_p23(const Scenario& sc, const CartesianExpansion& exp,
                            double lambda_hat) {
  const int n_slots = sc.slots;
  const int k_gn = sc.num_gn();
  const CartesianVars vars = CartesianVars::make(n_slots, k_gn, "eta");

  SubProblem sp;
  sp.layout = vars.layout;
  kinematic_equalities(vars, sc.slot_len(), sp.eq_matrix, sp.eq_rhs);

  for (int k = 0; k < k_gn; ++k)
    sp.constraints.push_back(std::make_shared<RateEpigraphFunc>(
        "bits[k=" + std::to_string(k) + "]", vars.iepi(),
        detail::rate_slots(vars, exp.plan.G, k), 1.0, 1.0 / n_slots));
  detail::add_common_constraints(sc, vars, exp, sp);

  sp.objective = std::make_shared<DinkelbachObjectiveFunc>(
      "ee_objective", sc, vars.iepi(), lambda_hat, detail::power_slots(vars));
  sp.warm_start = detail::restored_warm_start(sc, vars, exp, 1.0, 1.0 / n_slots);
  return sp;
}

}  // namespace subsolver
}  // namespace uavplan

#endif  // UAVPLAN_PROBLEMS_HPP
