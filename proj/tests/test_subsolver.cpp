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

#include <doctest.h>

#include "solver_reference.hpp"
#include "uavplan/circular.hpp"
#include "uavplan/oracle.hpp"
#include "uavplan/problems.hpp"

using namespace uavplan;
using namespace uavplan::subsolver;

namespace {

/// Concave log objective for the scalar example.
class Log1pObjective : public Func {
 public:
  explicit Log1pObjective(int idx)
      : Func("log1p", FuncKind::kConvexSmooth, {idx}), idx_(idx) {}
  double value(const VecX& x) const override { return std::log2(1.0 + x[idx_]); }
  void gradient(const VecX& x, VecX& g) const override {
    g[idx_] = kLog2E / (1.0 + x[idx_]);
  }
  void hessian(const VecX& x, double w, MatX& h) const override {
    h(idx_, idx_) += -w * kLog2E / ((1.0 + x[idx_]) * (1.0 + x[idx_]));
  }

 private:
  int idx_;
};

SubProblem make_box_qp(const MatX& p, const VecX& q, const VecX& l, const VecX& u) {
  const int n = static_cast<int>(q.size());
  SubProblem sp;
  sp.layout.add("x", n);
  sp.objective = std::make_shared<testref::DenseQuadObjective>(p, q);
  for (int i = 0; i < n; ++i) {
    sp.constraints.push_back(std::make_shared<LinearFunc>(
        "ub[" + std::to_string(i) + "]", std::vector<int>{i},
        std::vector<double>{1.0}, -u[i]));
    sp.constraints.push_back(std::make_shared<LinearFunc>(
        "lb[" + std::to_string(i) + "]", std::vector<int>{i},
        std::vector<double>{-1.0}, l[i]));
  }
  sp.warm_start = 0.5 * (l + u);
  return sp;
}

Scenario tiny_scenario(int k_gn, int n_slots, std::uint64_t seed = 77) {
  Scenario sc;
  sc.gn_positions = generate_gn_layout(k_gn, 300.0, seed);
  sc.period = 60.0;
  sc.slots = n_slots;
  sc.prop_limit = 200.0;
  return sc;
}

}  // namespace

TEST_SUITE("subsolver") {

TEST_CASE("monotone objective with an active box") {
  SubProblem sp;
  sp.layout.add("x", 1);
  sp.objective = std::make_shared<Log1pObjective>(0);
  sp.constraints.push_back(std::make_shared<LinearFunc>(
      "ub", std::vector<int>{0}, std::vector<double>{1.0 / 100.0}, -1.0));
  sp.constraints.push_back(std::make_shared<LinearFunc>(
      "lb", std::vector<int>{0}, std::vector<double>{-1.0 / 100.0}, 0.0));
  sp.warm_start = VecX::Constant(1, 50.0);
  const auto res = solve(sp);
  CHECK(res.status == SolveStatus::kOptimal);
  CHECK(res.x[0] == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(res.objective == doctest::Approx(std::log2(101.0)).epsilon(1e-7));
}

TEST_CASE("projection onto the unit disk") {
  SubProblem sp;
  sp.layout.add("x", 2);
  MatX p = 2.0 * MatX::Identity(2, 2);
  VecX q(2);
  q << 4.0, 0.0;  // f0 = -||x - (2,0)||^2 up to a constant
  sp.objective = std::make_shared<testref::DenseQuadObjective>(p, q);
  sp.constraints.push_back(std::make_shared<BallFunc>(
      "disk", std::vector<int>{0, 1}, VecX::Zero(2), 1.0, 1.0));
  sp.warm_start = VecX::Zero(2);
  const auto res = solve(sp);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(res.x[1]) < 1e-6);

  SUBCASE("independent KKT verification by finite differences") {
    auto f0 = [&](const VecX& x) { return sp.objective->value(x); };
    auto f1 = [&](const VecX& x) { return sp.constraints[0]->value(x); };
    const VecX g0 = oracle::finite_diff_gradient(f0, res.x).gradient;
    const VecX g1 = oracle::finite_diff_gradient(f1, res.x).gradient;
    REQUIRE(res.ineq_dual.size() == 1);
    const VecX stat = -g0 + res.ineq_dual[0] * g1;
    CHECK(stat.cwiseAbs().maxCoeff() <=
          1e-4 * std::max(1.0, res.ineq_dual.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("matches the dense active-set reference on random box QPs") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng() % 46);  // up to 50
    MatX m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = uniform_in(rng, -1.0, 1.0);
    const MatX p = m * m.transpose() + (0.5 + uniform01(rng)) * MatX::Identity(n, n);
    VecX q(n), l(n), u(n);
    for (int i = 0; i < n; ++i) {
      q[i] = uniform_in(rng, -5.0, 5.0);
      l[i] = uniform_in(rng, -3.0, 0.0);
      u[i] = l[i] + uniform_in(rng, 0.5, 4.0);
    }
    const VecX x_ref = testref::solve_box_qp_active_set(p, q, l, u);
    const double obj_ref = -testref::box_qp_objective(p, q, x_ref);

    auto sp = make_box_qp(p, q, l, u);
    const auto res = solve(sp);
    CHECK(res.objective ==
          doctest::Approx(obj_ref).epsilon(1e-6).scale(std::max(1.0, std::abs(obj_ref))));
  }
}

TEST_CASE("determinism: identical inputs give bit-identical results") {
  std::mt19937_64 rng(5);
  const int n = 12;
  MatX m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = uniform_in(rng, -1.0, 1.0);
  const MatX p = m * m.transpose() + MatX::Identity(n, n);
  VecX q = VecX::LinSpaced(n, -1.0, 2.0), l = VecX::Constant(n, -2.0),
       u = VecX::Constant(n, 2.0);
  auto sp1 = make_box_qp(p, q, l, u);
  auto sp2 = make_box_qp(p, q, l, u);
  const auto r1 = solve(sp1);
  const auto r2 = solve(sp2);
  REQUIRE(r1.x.size() == r2.x.size());
  for (int i = 0; i < n; ++i) CHECK(r1.x[i] == r2.x[i]);
  CHECK(r1.newton_iters == r2.newton_iters);
}

TEST_CASE("ascent: solution never falls below the warm start") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 12);
    MatX m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = uniform_in(rng, -1.0, 1.0);
    const MatX p = m * m.transpose() + MatX::Identity(n, n);
    VecX q(n), l = VecX::Constant(n, -1.5), u = VecX::Constant(n, 1.5);
    for (int i = 0; i < n; ++i) q[i] = uniform_in(rng, -3.0, 3.0);
    auto sp = make_box_qp(p, q, l, u);
    const double warm_obj = sp.objective->value(sp.warm_start);
    const auto res = solve(sp);
    CHECK(res.objective >= warm_obj - 1e-6);
  }
}

TEST_CASE("infeasible warm start raises a named precondition error") {
  SubProblem sp;
  sp.layout.add("x", 1);
  sp.objective = std::make_shared<Log1pObjective>(0);
  sp.constraints.push_back(std::make_shared<LinearFunc>(
      "x_below_five", std::vector<int>{0}, std::vector<double>{1.0}, -5.0));
  sp.warm_start = VecX::Constant(1, 9.0);
  CHECK_THROWS_WITH_AS(solve(sp), doctest::Contains("x_below_five"), InfeasibleError);
}

TEST_CASE("p12 subproblem shape matches the variable map") {
  Scenario sc = tiny_scenario(1, 8);
  const auto init = circular::init_plan(sc, circular::InitMode::kMinRate);
  const auto sp = build_p12(sc, {init.traj, init.plan}, sc.prop_limit);
  const int n = sc.slots;
  CHECK(sp.layout.find("q").size == 2 * (n + 1));
  CHECK(sp.layout.find("v").size == 2 * (n + 1));
  CHECK(sp.layout.find("a").size == 2 * (n + 1));
  CHECK(sp.layout.find("G").size == n);  // K = 1
  CHECK(sp.layout.find("V1").size == n);
  CHECK(sp.layout.find("tau").size == 1);
  CHECK(sp.num_vars() == 6 * (n + 1) + n + n + 1);
}

TEST_CASE("propulsion expression value at the anchor point") {
  Scenario sc = tiny_scenario(1, 4);
  CartesianVars vars = CartesianVars::make(4, 1, "tau");
  std::vector<PowerSlot> slots = {{vars.iv(1, 0), vars.iv(1, 1), vars.ia(1, 0),
                                   vars.ia(1, 1), vars.iV1(1)}};
  PowerLimitFunc f("p", sc, slots, sc.prop_limit, 1.0 / sc.prop_limit);
  VecX x = VecX::Zero(vars.num_vars());
  x[vars.iv(1, 0)] = 30.0;
  x[vars.iV1(1)] = 30.0;
  const double lhs = (f.value(x) + 1.0) * sc.prop_limit;
  CHECK(lhs == doctest::Approx(100.002).epsilon(1e-9));
}

TEST_CASE("rate constraints are tight at the expansion point") {
  Scenario sc = tiny_scenario(2, 6);
  const auto init = circular::init_plan(sc, circular::InitMode::kMinRate);
  const CartesianExpansion exp{init.traj, init.plan};
  auto sp = build_p12(sc, exp, sc.prop_limit);
  const CartesianVars vars = CartesianVars::make(sc.slots, 2, "tau");
  const double true_min_rate = model::min_avg_rate_from_received(init.plan.G);
  const VecX x = vars.pack(init.traj, init.plan, true_min_rate);
  // With tau set to the true min rate, the binding GN's rate constraint sits
  // at zero (surrogates are exact at the expansion point).
  double worst = -1e300;
  for (const auto& c : sp.constraints)
    if (c->name().rfind("rate", 0) == 0) worst = std::max(worst, c->value(x));
  CHECK(worst == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("p12 solve improves the initial objective and keeps feasibility") {
  Scenario sc = tiny_scenario(1, 8);
  const auto init = circular::init_plan(sc, circular::InitMode::kMinRate);
  CartesianExpansion exp{init.traj, init.plan};
  const double tau0 = model::min_avg_rate_from_received(exp.plan.G);
  auto sp = build_p12(sc, exp, sc.prop_limit);
  const auto res = solve(sp);
  REQUIRE(res.status == SolveStatus::kOptimal);
  CartesianExpansion next;
  CartesianVars vars = CartesianVars::make(sc.slots, 1, "tau");
  vars.unpack(res.x, next.traj, next.plan);
  const double tau1 = model::min_avg_rate_from_received(next.plan.G);
  CHECK(tau1 >= tau0 - 1e-8);
  const auto audit = model::audit(sc, next.traj, next.plan);
  CHECK(audit.max_relative(sc) <= 1e-6);
}

TEST_CASE("p23: lambda = 0 reduces to pure min-bits maximization") {
  Scenario sc = tiny_scenario(1, 6);
  const auto init = circular::init_plan(sc, circular::InitMode::kEnergyEfficiency);
  CartesianExpansion exp{init.traj, init.plan};
  auto sp = build_p23(sc, exp, 0.0);
  VecX g = VecX::Zero(sp.num_vars());
  sp.objective->gradient(sp.warm_start, g);
  const auto& eta_block = sp.layout.find("eta");
  for (int i = 0; i < sp.num_vars(); ++i) {
    if (i == eta_block.offset)
      CHECK(g[i] == 1.0);
    else
      CHECK(g[i] == 0.0);
  }
}

TEST_CASE("p23: objective at the expansion equals the model-route value") {
  Scenario sc = tiny_scenario(2, 6);
  const auto init = circular::init_plan(sc, circular::InitMode::kEnergyEfficiency);
  CartesianExpansion exp{init.traj, init.plan};
  const double lambda_hat = 3e-3;
  auto sp = build_p23(sc, exp, lambda_hat);
  model::LinkPlan plan = exp.plan;
  for (int n = 1; n <= sc.slots; ++n) plan.V1[n - 1] = exp.traj.v[n].norm();
  double eta = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2; ++k) {
    double s = 0.0;
    for (int n = 1; n <= sc.slots; ++n)
      s += model::rate_from_received(plan.G.col(n - 1), k);
    eta = std::min(eta, s);
  }
  const CartesianVars vars = CartesianVars::make(sc.slots, 2, "eta");
  const VecX x = vars.pack(exp.traj, plan, eta);
  double mu = 0.0;
  for (int n = 1; n <= sc.slots; ++n)
    mu += model::propulsion_power(sc, exp.traj.v[n], exp.traj.a[n]);
  CHECK(sp.objective->value(x) ==
        doctest::Approx(eta - lambda_hat * mu).epsilon(1e-10));
}

TEST_CASE("p23: a large lambda drives speeds toward the power-optimal point") {
  Scenario sc = tiny_scenario(1, 8);
  const auto init = circular::init_plan(sc, circular::InitMode::kEnergyEfficiency);
  CartesianExpansion exp{init.traj, init.plan};
  const double lambda_hat = 10.0;  // heavily power-dominated objective
  CartesianVars vars = CartesianVars::make(sc.slots, 1, "eta");
  for (int it = 0; it < 8; ++it) {
    auto sp = build_p23(sc, exp, lambda_hat);
    const auto res = solve(sp);
    REQUIRE(res.status == SolveStatus::kOptimal);
    CartesianExpansion next;
    vars.unpack(res.x, next.traj, next.plan);
    exp = next;
  }
  double mean_speed = 0.0;
  for (int n = 1; n <= sc.slots; ++n) mean_speed += exp.traj.v[n].norm();
  mean_speed /= sc.slots;
  CHECK(mean_speed == doctest::Approx(sc.min_power_speed()).epsilon(0.10));
}

TEST_CASE("projected-gradient oracle agrees on a small p12 instance") {
  // kept small here; the acceptance suite runs the full 20-instance sweep
  Scenario sc = tiny_scenario(1, 6);
  const auto init = circular::init_plan(sc, circular::InitMode::kMinRate);
  auto sp = build_p12(sc, {init.traj, init.plan}, sc.prop_limit);
  const auto res = solve(sp);
  REQUIRE(res.status == SolveStatus::kOptimal);
  testref::PgOracle pg(sp);
  const auto ref = pg.run(30000);
  CHECK(ref.max_violation <= 1e-8);
  CHECK(std::abs(res.objective - ref.objective) <=
        1e-4 * std::max(1.0, std::abs(res.objective)));
}

}  // TEST_SUITE
