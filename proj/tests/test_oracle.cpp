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

#include "uavplan/oracle.hpp"
#include "uavplan/surrogates.hpp"

using namespace uavplan;

namespace {

Scenario small_scenario(int k_gn, double period, int slots) {
  Scenario sc;
  sc.gn_positions = generate_gn_layout(k_gn, 400.0, 99);
  sc.period = period;
  sc.slots = slots;
  return sc;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("finite differences: analytic gradients") {
  SUBCASE("squared norm at (3, 4)") {
    auto f = [](const VecX& x) { return x.squaredNorm(); };
    VecX x(2);
    x << 3.0, 4.0;
    const auto est = oracle::finite_diff_gradient(f, x);
    CHECK(est.all_finite);
    CHECK(est.gradient[0] == doctest::Approx(6.0).epsilon(1e-6));
    CHECK(est.gradient[1] == doctest::Approx(8.0).epsilon(1e-6));
  }
  SUBCASE("propulsion power in velocity at (30, 0)") {
    Scenario sc = small_scenario(1, 60, 30);
    auto f = [&](const VecX& v) {
      return model::propulsion_power(sc, Vec2(v[0], v[1]), Vec2(0, 0));
    };
    VecX v(2);
    v << 30.0, 0.0;
    const auto est = oracle::finite_diff_gradient(f, v);
    // d/dv [c1 s^3 + c2/s] = (3 c1 s - c2/s^2) v/s along the velocity
    const double analytic = 3.0 * sc.c1 * 30.0 * 30.0 - sc.c2 / (30.0 * 30.0);
    CHECK(est.gradient[0] == doctest::Approx(analytic).epsilon(1e-5));
    CHECK(std::abs(est.gradient[1]) < 1e-6);
  }
  SUBCASE("reciprocal-quadratic kernel gradient") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t) {
      VecX ul(2), u(2);
      ul << uniform_in(rng, -500, 500), uniform_in(rng, -500, 500);
      u << uniform_in(rng, -500, 500), uniform_in(rng, -500, 500);
      const double rho = uniform_in(rng, 0.5, 2.0);
      const double z = uniform_in(rng, 1e3, 1e5);
      const auto sur = surrogates::ReciprocalQuadSurrogate::make(ul, rho, z, 1e6);
      auto f = [&](const VecX& x) { return sur.true_value(x); };
      const auto est = oracle::finite_diff_gradient(f, u);
      const VecX analytic = sur.true_gradient(u);
      CHECK((est.gradient - analytic).norm() <=
            1e-6 * std::max(1.0, analytic.norm()));
    }
  }
  SUBCASE("error on quadratics is at the h^2 scale") {
    auto f = [](const VecX& x) { return 3.0 * x[0] * x[0] + 2.0 * x[0]; };
    VecX x(1);
    x << 1.0;
    const auto est = oracle::finite_diff_gradient(f, x, 1e-5);
    CHECK(std::abs(est.gradient[0] - 8.0) <= 1e-8);
  }
  SUBCASE("non-finite samples are flagged") {
    auto f = [](const VecX& x) { return std::log(x[0]); };
    VecX x(1);
    x << 1e-7;
    const auto est = oracle::finite_diff_gradient(f, x);
    CHECK_FALSE(est.all_finite);
  }
}

TEST_CASE("metric recomputation is self-consistent") {
  Scenario sc = small_scenario(2, 60, 30);
  // constant-speed circle with full power
  const int n = sc.slots;
  const double dt = sc.slot_len();
  const double r = 250.0;
  const double lam = 2.0 / dt * std::tan(M_PI / n);
  model::Trajectory tr;
  tr.q.resize(n + 1);
  tr.v.resize(n + 1);
  tr.a.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double th = 2.0 * M_PI * i / n;
    tr.q[i] = r * Vec2(std::cos(th), std::sin(th));
    tr.v[i] = r * lam * Vec2(-std::sin(th), std::cos(th));
  }
  for (int i = 0; i < n; ++i) tr.a[i] = (tr.v[i + 1] - tr.v[i]) / dt;
  tr.a[n] = tr.a[0];
  const MatX p = MatX::Constant(2, n, sc.peak_power);

  const auto m = oracle::recompute_metrics(sc, tr, p);
  SUBCASE("EE identity") {
    CHECK(m.ee == doctest::Approx(m.min_bits / m.energy).epsilon(1e-12));
    CHECK(m.energy == doctest::Approx(dt * m.avg_power * n).epsilon(1e-12));
  }
  SUBCASE("agrees with the model-route evaluation") {
    model::PlanReport rep;
    model::fill_metrics(sc, tr, p, rep);
    CHECK(m.min_avg_rate == doctest::Approx(rep.min_avg_rate).epsilon(1e-12));
    CHECK(m.avg_power == doctest::Approx(rep.avg_prop_power).epsilon(1e-12));
    CHECK(m.ee == doctest::Approx(rep.ee).epsilon(1e-12));
  }
  SUBCASE("summary fields populated") {
    CHECK(m.avg_speed == doctest::Approx(r * lam).epsilon(1e-9));
    CHECK(m.avg_accel > 0.0);
    CHECK(m.min_avg_rate > 0.0);
  }
}

TEST_CASE("circular brute force") {
  SUBCASE("single centered GN pushes the radius to its minimum") {
    Scenario sc = small_scenario(1, 60, 24);
    sc.gn_positions = {Vec2(0, 0)};
    sc.prop_limit = 2000.0;  // kinematics bind, not power
    const auto res = oracle::brute_force_circular(sc, 64, 32);
    REQUIRE(res.feasible);
    // smallest feasible radius at omega0: bounded below by V_min T / 2 pi
    const double r_min = sc.v_min * sc.period / (2 * M_PI);
    CHECK(res.best_r <= r_min * std::pow(res.r_step, 2.0));
    CHECK(res.best_omega == doctest::Approx(2 * M_PI / sc.period).epsilon(0.15));
  }
  SUBCASE("infeasible under a tiny power limit") {
    Scenario sc = small_scenario(1, 60, 24);
    sc.prop_limit = 50.0;  // below the level-flight minimum of ~100 W
    const auto res = oracle::brute_force_circular(sc, 32, 16);
    CHECK_FALSE(res.feasible);
  }
}

TEST_CASE("radius feasibility scan brackets the closed-form interval") {
  Scenario sc = small_scenario(1, 100, 30);
  sc.prop_limit = 1e9;  // kinematics only
  const double omega0 = 2 * M_PI / sc.period;
  const auto [lo, hi] = oracle::scan_radius_feasible(sc, omega0, 0.1);
  const double lo_formula = sc.v_min * sc.period / (2 * M_PI);
  const double hi_formula =
      std::min(sc.v_max * sc.period / (2 * M_PI), sc.a_max / (omega0 * omega0));
  CHECK(std::abs(lo - lo_formula) <= 0.1001);
  CHECK(std::abs(hi - hi_formula) <= 0.1001);
}

TEST_CASE("independent audit flags the same violations as the model audit") {
  Scenario sc = small_scenario(1, 60, 20);
  std::vector<Vec2> a(20, Vec2(0.2, -0.1));
  auto tr = model::propagate(sc, Vec2(0, 0), Vec2(25, 0), a);
  const MatX p = MatX::Constant(1, 20, sc.peak_power * 0.5);
  const auto r1 = oracle::audit_plan(sc, tr, p);
  model::LinkPlan plan;
  plan.p = p;
  const auto r2 = model::audit(sc, tr, plan);
  CHECK(r1.kinematics_pos_m == doctest::Approx(r2.kinematics_pos_m).epsilon(1e-12));
  CHECK(r1.periodicity_pos_m == doctest::Approx(r2.periodicity_pos_m).epsilon(1e-12));
  CHECK(r1.speed_low == doctest::Approx(r2.speed_low).epsilon(1e-12));
  CHECK(r1.avg_power_w == doctest::Approx(r2.avg_power_w).epsilon(1e-12));
}

}  // TEST_SUITE
