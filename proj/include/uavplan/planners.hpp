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

#ifndef UAVPLAN_PLANNERS_HPP
#define UAVPLAN_PLANNERS_HPP

#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "uavplan/model.hpp"
#include "uavplan/problems.hpp"

namespace uavplan {
namespace planners {

struct ScaConfig {
  int max_outer_iters = 50;       // SCA iterations per loop
  double rel_obj_tol = 1e-4;      // SCA stopping threshold
  double dinkelbach_tol = 1e-3;   // on |F(lambda)| relative to max(1, lambda mu)
  int max_dinkelbach = 20;        // outer fractional rounds
  int max_total_sca = 400;        // safety cap across all inner loops
  double subsolver_tol = 1e-6;
  std::uint64_t seed = 0;

  subsolver::SolverOptions solver_options() const {
    subsolver::SolverOptions o;
    o.tol = subsolver_tol;
    return o;
  }
};

struct DinkelbachState {
  double lambda = 0.0;  // bits/J
  double f_value = 0.0; // eta - lambda mu at the round's solution
  int round = 0;
};

struct PlanResult {
  model::Trajectory traj;
  model::LinkPlan plan;
  model::PlanReport report;
};

struct PowerRecovery {
  MatX p;
  double max_exceed_rel = 0.0;  // worst (p - P_peak)/P_peak before clipping
  bool clipped = false;
};

/// p_k[n] = G_k[n] / h_k[n]; flags recovered powers that exceed the peak by
/// more than the surrogate slack tolerance before clipping into the box.
inline PowerRecovery recover_power(const Scenario& sc, const model::Trajectory& tr,
                                   const MatX& g) {
  PowerRecovery rec;
  const int k_gn = static_cast<int>(g.rows());
  const int n_slots = static_cast<int>(g.cols());
  rec.p.resize(k_gn, n_slots);
  for (int n = 1; n <= n_slots; ++n)
    for (int k = 0; k < k_gn; ++k) {
      const double h = model::channel_gain(sc, tr.q[n], k);
      double p = g(k, n - 1) / h;
      rec.max_exceed_rel =
          std::max(rec.max_exceed_rel, (p - sc.peak_power) / sc.peak_power);
      if (p > sc.peak_power) {
        p = sc.peak_power;
        rec.clipped = true;
      }
      rec.p(k, n - 1) = std::max(0.0, p);
    }
  return rec;
}

namespace detail {

inline double min_sum_rate(const MatX& g) {
  const int k_gn = static_cast<int>(g.rows());
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_gn; ++k) {
    double sum = 0.0;
    for (int n = 0; n < g.cols(); ++n) sum += model::rate_from_received(g.col(n), k);
    worst = std::min(worst, sum);
  }
  return worst;
}

inline double propulsion_sum(const Scenario& sc, const model::Trajectory& tr) {
  double sum = 0.0;
  for (int n = 1; n <= tr.slots(); ++n)
    sum += model::propulsion_power(sc, tr.v[n], tr.a[n]);
  return sum;
}

inline void finalize_report(const Scenario& sc, const subsolver::CartesianExpansion& exp,
                            const PowerRecovery& rec, model::PlanReport& rep) {
  model::LinkPlan audited = exp.plan;
  audited.p = rec.p;
  rep.residuals = model::audit(sc, exp.traj, audited);
  model::fill_metrics(sc, exp.traj, rec.p, rep);
  if (rec.max_exceed_rel > 1e-8)
    UAVPLAN_INFO("recovered power exceeded peak by %.3e relative (clipped)",
                 rec.max_exceed_rel);
}

}  // namespace detail

/// Minimum-average-rate SCA loop: repeatedly solves the convex restriction at
/// the current iterate. The objective trace holds the true (not surrogate)
/// min average rate at every iterate and is non-decreasing up to solver
/// tolerance.
inline PlanResult solve_min_rate(const Scenario& sc,
                                 const subsolver::CartesianExpansion& init,
                                 const ScaConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto audit0 = model::audit(sc, init.traj, init.plan);
  if (!audit0.feasible(sc, 1e-3))
    throw InfeasibleError("initial plan infeasible (worst relative residual " +
                          std::to_string(audit0.max_relative(sc)) + ")");

  subsolver::CartesianExpansion exp = init;
  const int n_slots = sc.slots;
  std::vector<double> trace{detail::min_sum_rate(exp.plan.G) / n_slots};
  bool converged = false;
  std::string note;

  for (int l = 0; l < cfg.max_outer_iters; ++l) {
    auto sp = subsolver::build_p12(sc, exp, sc.prop_limit);
    const auto res = subsolver::solve(sp, cfg.solver_options());
    if (res.status == subsolver::SolveStatus::kBreakdown) {
      note = "subsolver breakdown at iteration " + std::to_string(l) + ": " + res.message;
      break;
    }
    subsolver::CartesianExpansion next;
    subsolver::CartesianVars vars = subsolver::CartesianVars::make(n_slots, sc.num_gn(), "tau");
    vars.unpack(res.x, next.traj, next.plan);
    const double tau_new = detail::min_sum_rate(next.plan.G) / n_slots;
    if (tau_new < trace.back() - 1e-9 * (1.0 + std::abs(trace.back()))) {
      note = "ascent stalled at iteration " + std::to_string(l);
      converged = true;  // keep the previous (better) iterate
      break;
    }
    exp = next;
    const double prev = trace.back();
    trace.push_back(tau_new);
    if (std::abs(tau_new - prev) <= cfg.rel_obj_tol * std::max(1e-12, std::abs(tau_new))) {
      converged = true;
      break;
    }
  }

  PlanResult out;
  out.traj = exp.traj;
  out.plan = exp.plan;
  const auto rec = recover_power(sc, exp.traj, exp.plan.G);
  out.plan.p = rec.p;
  out.plan.tau = trace.back();
  out.report.objective_trace = trace;
  out.report.iterations = static_cast<int>(trace.size()) - 1;
  out.report.status =
      converged ? model::PlanStatus::kConverged : model::PlanStatus::kMaxIterations;
  detail::finalize_report(sc, exp, rec, out.report);
  out.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!note.empty()) UAVPLAN_INFO("min-rate: %s", note.c_str());
  return out;
}

/// Fairness energy-efficiency planner: Dinkelbach outer loop on
/// lambda = eta / mu around an inner SCA at fixed lambda. Each round restarts
/// the SCA from the latest iterate; lambda_0 = 0.
inline PlanResult solve_ee(const Scenario& sc_in,
                           const subsolver::CartesianExpansion& init,
                           const ScaConfig& cfg = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc = sc_in;
  sc.prop_limit = subsolver::kNoPowerLimit * 10;  // EE problem has no power cap

  const auto audit0 = model::audit(sc, init.traj, init.plan);
  if (!audit0.feasible(sc, 1e-3))
    throw InfeasibleError("initial plan infeasible (worst relative residual " +
                          std::to_string(audit0.max_relative(sc)) + ")");

  subsolver::CartesianExpansion exp = init;
  const int n_slots = sc.slots;
  const subsolver::CartesianVars vars =
      subsolver::CartesianVars::make(n_slots, sc.num_gn(), "eta");

  double lambda_hat = 0.0;  // lambda / W
  std::vector<double> trace;       // achieved EE per SCA iterate, bits/J
  std::vector<double> lambda_trace{0.0};
  std::vector<double> f_trace;
  bool converged = false;
  int total_sca = 0;
  std::string note;

  auto achieved_ee = [&](const subsolver::CartesianExpansion& e) {
    return sc.bandwidth * detail::min_sum_rate(e.plan.G) /
           detail::propulsion_sum(sc, e.traj);
  };
  trace.push_back(achieved_ee(exp));

  for (int m = 0; m < cfg.max_dinkelbach && total_sca < cfg.max_total_sca; ++m) {
    // inner SCA at fixed lambda
    double f_prev = detail::min_sum_rate(exp.plan.G) -
                    lambda_hat * detail::propulsion_sum(sc, exp.traj);
    bool inner_break = false;
    for (int l = 0; l < cfg.max_outer_iters && total_sca < cfg.max_total_sca; ++l) {
      ++total_sca;
      auto sp = subsolver::build_p23(sc, exp, lambda_hat);
      const auto res = subsolver::solve(sp, cfg.solver_options());
      if (res.status == subsolver::SolveStatus::kBreakdown) {
        note = "subsolver breakdown in round " + std::to_string(m) + ": " + res.message;
        inner_break = true;
        break;
      }
      subsolver::CartesianExpansion next;
      vars.unpack(res.x, next.traj, next.plan);
      const double f_new = detail::min_sum_rate(next.plan.G) -
                           lambda_hat * detail::propulsion_sum(sc, next.traj);
      if (f_new < f_prev - 1e-9 * (1.0 + std::abs(f_prev))) break;
      exp = next;
      trace.push_back(achieved_ee(exp));
      const double delta = std::abs(f_new - f_prev);
      f_prev = f_new;
      if (delta <= cfg.rel_obj_tol * std::max(1e-12, std::abs(f_new))) break;
    }
    if (inner_break) break;

    const double eta = detail::min_sum_rate(exp.plan.G);       // rate-slot units
    const double mu = detail::propulsion_sum(sc, exp.traj);    // W-slot units
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

  PlanResult out;
  out.traj = exp.traj;
  out.plan = exp.plan;
  const auto rec = recover_power(sc, exp.traj, exp.plan.G);
  out.plan.p = rec.p;
  out.plan.eta = sc.bandwidth * sc.slot_len() * detail::min_sum_rate(exp.plan.G);
  out.report.objective_trace = trace;
  out.report.lambda_trace = lambda_trace;
  out.report.f_trace = f_trace;
  out.report.iterations = total_sca;
  out.report.status =
      converged ? model::PlanStatus::kConverged : model::PlanStatus::kMaxIterations;
  detail::finalize_report(sc, exp, rec, out.report);
  out.report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!note.empty()) UAVPLAN_INFO("ee: %s", note.c_str());
  return out;
}

}  // namespace planners
}  // namespace uavplan

#endif  // UAVPLAN_PLANNERS_HPP
