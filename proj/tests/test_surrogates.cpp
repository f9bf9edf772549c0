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

#include <Eigen/Eigenvalues>

#include "uavplan/surrogates.hpp"

using namespace uavplan;
using namespace uavplan::surrogates;

namespace {

Scenario base_scenario() {
  Scenario sc;
  sc.gn_positions = {Vec2(0, 0)};
  sc.altitude = 100.0;
  sc.ref_snr = 1e8;
  sc.peak_power = 0.01;
  return sc;
}

}  // namespace

TEST_SUITE("surrogates") {

TEST_CASE("interference upper bound (tangent of the log)") {
  SUBCASE("tight at the expansion point") {
    VecX g(3);
    g << 5.0, 20.0, 0.5;
    CHECK(rate_interference_ub(g, g) ==
          doctest::Approx(std::log2(1.0 + g.sum())).epsilon(1e-12));
  }
  SUBCASE("hand value at zero expansion") {
    VecX g_prev = VecX::Zero(1), g_new(1);
    g_new << 1.0;
    CHECK(rate_interference_ub(g_prev, g_new) == doctest::Approx(kLog2E).epsilon(1e-12));
    CHECK(rate_interference_ub(g_prev, g_new) >= std::log2(2.0));
  }
  SUBCASE("bounds the true value on random samples") {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10000; ++t) {
      const int dim = 1 + static_cast<int>(rng() % 3);
      VecX gp(dim), gn(dim);
      for (int i = 0; i < dim; ++i) {
        gp[i] = uniform_in(rng, 0.0, 100.0);
        gn[i] = uniform_in(rng, 0.0, 100.0);
      }
      CHECK(rate_interference_ub(gp, gn) >= std::log2(1.0 + gn.sum()) - 1e-9);
    }
  }
}

TEST_CASE("peak received power minorant in position") {
  Scenario sc = base_scenario();

  SUBCASE("tight above the GN") {
    // P_peak gamma0 = 1e6, H = 100: true peak received power is 100
    CHECK(gmax_lb(sc, 0, Vec2(0, 0), Vec2(0, 0)) == doctest::Approx(100.0).epsilon(1e-12));
  }
  SUBCASE("hand value 100 m away from a zero-offset expansion") {
    // B = 0 and C = 1/H^2 when q_l = w_k, so the minorant is
    // 1e6 (1e-4 - 1e4/1e8) = 0 against a true value of 50.
    const double lb = gmax_lb(sc, 0, Vec2(0, 0), Vec2(100, 0));
    CHECK(lb == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(gmax_true(sc, 0, Vec2(100, 0)) == doctest::Approx(50.0));
  }
  SUBCASE("no bound violation over random pairs") {
    std::mt19937_64 rng(22);
    double worst = -1e300;
    for (int t = 0; t < 10000; ++t) {
      const Vec2 ql(uniform_in(rng, -2000, 2000), uniform_in(rng, -2000, 2000));
      const Vec2 qn(uniform_in(rng, -2000, 2000), uniform_in(rng, -2000, 2000));
      worst = std::max(worst, gmax_lb(sc, 0, ql, qn) - gmax_true(sc, 0, qn));
    }
    CHECK(worst <= 1e-9);
  }
  SUBCASE("gap hessian is positive semi-definite (100 random points)") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 100; ++t) {
      VecX ul(2), u(2);
      ul << uniform_in(rng, -1000, 1000), uniform_in(rng, -1000, 1000);
      u << uniform_in(rng, -1000, 1000), uniform_in(rng, -1000, 1000);
      const auto sur = ReciprocalQuadSurrogate::make(
          ul, 1.0, sc.altitude * sc.altitude, sc.peak_power * sc.ref_snr);
      const MatX h = sur.gap_hessian(u);
      Eigen::SelfAdjointEigenSolver<MatX> es(h);
      CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    }
  }
}

TEST_CASE("squared-speed minorant and its exact gap") {
  SUBCASE("tight at the expansion point") {
    CHECK(speed_sq_lb(Vec2(30, 0), Vec2(30, 0)) == doctest::Approx(900.0));
  }
  SUBCASE("hand value") {
    CHECK(speed_sq_lb(Vec2(30, 0), Vec2(40, 0)) == doctest::Approx(1400.0));
  }
  SUBCASE("gap identity 2||v - v_l||^2 to 1e-12") {
    std::mt19937_64 rng(24);
    for (int t = 0; t < 10000; ++t) {
      const Vec2 vl(uniform_in(rng, -100, 100), uniform_in(rng, -100, 100));
      const Vec2 vn(uniform_in(rng, -100, 100), uniform_in(rng, -100, 100));
      const double gap = vn.squaredNorm() - speed_sq_lb(vl, vn);
      CHECK(gap == doctest::Approx(2.0 * (vn - vl).squaredNorm()).epsilon(1e-12));
    }
  }
}

TEST_CASE("cosine minorant") {
  SUBCASE("tight at the expansion point") {
    for (double phi : {0.0, 1.0, -2.5, 3.1})
      CHECK(cos_lb(phi, phi) == doctest::Approx(std::cos(phi)).epsilon(1e-12));
  }
  SUBCASE("hand value at pi/2 from zero") {
    CHECK(cos_lb(0.0, M_PI / 2) ==
          doctest::Approx(1.0 - M_PI * M_PI / 8.0).epsilon(1e-12));
    CHECK(cos_lb(0.0, M_PI / 2) <= 0.0);
  }
  SUBCASE("global bound on [-4pi, 4pi]^2") {
    std::mt19937_64 rng(25);
    for (int t = 0; t < 10000; ++t) {
      const double pl = uniform_in(rng, -4 * M_PI, 4 * M_PI);
      const double pn = uniform_in(rng, -4 * M_PI, 4 * M_PI);
      CHECK(cos_lb(pl, pn) <= std::cos(pn) + 1e-9);
    }
  }
}

TEST_CASE("radius-direction peak power minorant") {
  Scenario sc = base_scenario();
  std::mt19937_64 rng(26);

  SUBCASE("tight at the expansion point") {
    for (int t = 0; t < 50; ++t) {
      const double zeta = uniform_in(rng, 0, 800);
      const double phi = uniform_in(rng, -M_PI, M_PI);
      const double th = uniform_in(rng, 0, 2 * M_PI);
      const double rl = uniform_in(rng, 10, 2000);
      const auto sur = SmaxRadiusSurrogate::make(sc, zeta, phi, th, rl);
      CHECK(sur.value(rl) == doctest::Approx(sur.true_value(rl)).epsilon(1e-9));
    }
  }
  SUBCASE("no violation over random radius pairs in [10, 2000]") {
    double worst = -1e300;
    for (int t = 0; t < 10000; ++t) {
      const auto sur = SmaxRadiusSurrogate::make(
          sc, uniform_in(rng, 0, 800), uniform_in(rng, -M_PI, M_PI),
          uniform_in(rng, 0, 2 * M_PI), uniform_in(rng, 10, 2000));
      const double rn = uniform_in(rng, 10, 2000);
      worst = std::max(worst, sur.value(rn) - sur.true_value(rn));
    }
    CHECK(worst <= 1e-9);
  }
  SUBCASE("derivative at the expansion point matches central differences") {
    for (int t = 0; t < 50; ++t) {
      const double rl = uniform_in(rng, 10, 2000);
      const auto sur = SmaxRadiusSurrogate::make(
          sc, uniform_in(rng, 0, 800), uniform_in(rng, -M_PI, M_PI),
          uniform_in(rng, 0, 2 * M_PI), rl);
      const double h = 1e-4;
      const double fd = (sur.true_value(rl + h) - sur.true_value(rl - h)) / (2 * h);
      CHECK(sur.derivative(rl) ==
            doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("angle-direction peak power minorant (two-step chain)") {
  Scenario sc = base_scenario();
  std::mt19937_64 rng(27);

  SUBCASE("tight at the expansion point") {
    for (int t = 0; t < 50; ++t) {
      const double zeta = uniform_in(rng, 0, 800);
      const double phi = uniform_in(rng, -M_PI, M_PI);
      const double r = uniform_in(rng, 50, 1500);
      const double tl = uniform_in(rng, 0, 2 * M_PI);
      const auto sur = SmaxAngleSurrogate::make(sc, zeta, phi, r, tl);
      CHECK(sur.value(tl) ==
            doctest::Approx(sur.true_value(sc, zeta, phi, r, tl)).epsilon(1e-9));
    }
  }
  SUBCASE("both chain links hold on random angle pairs") {
    double worst1 = -1e300, worst2 = -1e300;
    for (int t = 0; t < 10000; ++t) {
      const double zeta = uniform_in(rng, 0, 800);
      const double phi = uniform_in(rng, -M_PI, M_PI);
      const double r = uniform_in(rng, 50, 1500);
      const double tl = uniform_in(rng, 0, 2 * M_PI);
      const double tn = tl + uniform_in(rng, -2 * M_PI, 2 * M_PI);
      const auto sur = SmaxAngleSurrogate::make(sc, zeta, phi, r, tl);
      worst1 = std::max(worst1, sur.value(tn) - sur.intermediate(tn));
      worst2 = std::max(worst2,
                        sur.intermediate(tn) - sur.true_value(sc, zeta, phi, r, tn));
    }
    CHECK(worst1 <= 1e-9);
    CHECK(worst2 <= 1e-9);
  }
  SUBCASE("derivative match at the expansion point") {
    for (int t = 0; t < 50; ++t) {
      const double zeta = uniform_in(rng, 10, 800);
      const double phi = uniform_in(rng, -M_PI, M_PI);
      const double r = uniform_in(rng, 50, 1500);
      const double tl = uniform_in(rng, 0, 2 * M_PI);
      const auto sur = SmaxAngleSurrogate::make(sc, zeta, phi, r, tl);
      const double h = 1e-6;
      const double fd = (sur.true_value(sc, zeta, phi, r, tl + h) -
                         sur.true_value(sc, zeta, phi, r, tl - h)) /
                        (2 * h);
      CHECK(sur.derivative(tl) ==
            doctest::Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
    }
  }
  SUBCASE("degenerate centered GN: bound is constant in angle") {
    const auto sur = SmaxAngleSurrogate::make(sc, 0.0, 0.0, 300.0, 1.0);
    CHECK(sur.value(1.0) == doctest::Approx(sur.value(4.0)).epsilon(1e-12));
  }
}

TEST_CASE("three-condition verifier") {
  auto f = [](const VecX& x) { return -(x[0] - 1.0) * (x[0] - 1.0); };
  VecX x_l(1), lo(1), hi(1);
  x_l << 2.0;
  lo << -10.0;
  hi << 10.0;

  SUBCASE("identity surrogate passes") {
    const auto chk = verify_surrogate(f, f, x_l, lo, hi, 2000, 3);
    CHECK(chk.pass());
  }
  SUBCASE("shifted surrogate fails the global bound with gap 1") {
    auto g = [&](const VecX& x) { return f(x) + 1.0; };
    const auto chk = verify_surrogate(f, g, x_l, lo, hi, 2000, 3);
    CHECK_FALSE(chk.pass());
    CHECK(chk.max_violation == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("lemma-2 pair passes all three conditions") {
    const Vec2 vl(20.0, -7.0);
    auto fv = [](const VecX& v) { return v.squaredNorm(); };
    auto gv = [&](const VecX& v) { return speed_sq_lb(vl, Vec2(v[0], v[1])); };
    VecX x2(2), lo2(2), hi2(2);
    x2 << vl[0], vl[1];
    default_box(x2, lo2, hi2);
    const auto chk = verify_surrogate(fv, gv, x2, lo2, hi2, 10000, 5);
    CHECK(chk.pass());
  }
}

TEST_CASE("surrogate hessians are concave in the decision variable") {
  Scenario sc = base_scenario();
  std::mt19937_64 rng(28);
  // position minorant: hessian is -2 P gamma0 / H^4 I (constant, negative)
  const double curv = -2.0 * sc.peak_power * sc.ref_snr / std::pow(sc.altitude, 4);
  CHECK(curv < 0);
  // scalar kernels: quadratic coefficient is negative for any expansion
  for (int t = 0; t < 100; ++t) {
    const auto sur = SmaxRadiusSurrogate::make(
        sc, uniform_in(rng, 0, 800), uniform_in(rng, -M_PI, M_PI),
        uniform_in(rng, 0, 2 * M_PI), uniform_in(rng, 10, 2000));
    const double h = 1e-3;
    const double second =
        (sur.value(100 + h) - 2 * sur.value(100) + sur.value(100 - h)) / (h * h);
    CHECK(second <= 1e-9);
  }
}

}  // TEST_SUITE
