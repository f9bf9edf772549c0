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

#ifndef UAVPLAN_SURROGATES_HPP
#define UAVPLAN_SURROGATES_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "uavplan/scenario.hpp"

namespace uavplan {
namespace surrogates {

// ---------------------------------------------------------------------------
// Reciprocal-quadratic kernel.
//
// All "peak received power" surrogates in this library are instances of one
// kernel: for f(u) = scale / (rho ||u||^2 + z) with rho >= 0, z > 0, the
// concave minorant expanded at u_l is
//
//   g(u | u_l) = scale (-rho ||u||^2 / z^2 + B u.u_l + C),
//   B = 2 rho (1/z^2 - 1/(rho ||u_l||^2 + z)^2),
//   C = 1/(rho ||u_l||^2 + z) + 2 rho ||u_l||^2/(rho ||u_l||^2 + z)^2
//       - rho ||u_l||^2 / z^2.
//
// g matches f in value and gradient at u_l and lower-bounds it everywhere
// (the gap f - g is convex with a zero-gradient minimum at u_l).
// ---------------------------------------------------------------------------
struct ReciprocalQuadSurrogate {
  VecX u_expand;  // u_l
  double rho = 1.0;
  double z = 1.0;
  double scale = 1.0;
  double b_coef = 0.0;  // B
  double c_coef = 0.0;  // C

  static ReciprocalQuadSurrogate make(const VecX& u_l, double rho, double z,
                                      double scale) {
    ReciprocalQuadSurrogate s;
    s.u_expand = u_l;
    s.rho = rho;
    s.z = z;
    s.scale = scale;
    const double denom = rho * u_l.squaredNorm() + z;
    s.b_coef = 2.0 * rho * (1.0 / (z * z) - 1.0 / (denom * denom));
    s.c_coef = 1.0 / denom + 2.0 * rho * u_l.squaredNorm() / (denom * denom) -
               rho * u_l.squaredNorm() / (z * z);
    return s;
  }

  double true_value(const VecX& u) const {
    return scale / (rho * u.squaredNorm() + z);
  }

  VecX true_gradient(const VecX& u) const {
    const double denom = rho * u.squaredNorm() + z;
    return (-2.0 * rho * scale / (denom * denom)) * u;
  }

  double value(const VecX& u) const {
    return scale * (-rho * u.squaredNorm() / (z * z) + b_coef * u.dot(u_expand) + c_coef);
  }

  VecX gradient(const VecX& u) const {
    return scale * ((-2.0 * rho / (z * z)) * u + b_coef * u_expand);
  }

  /// Hessian of the gap (true - surrogate); positive semi-definite for any u.
  MatX gap_hessian(const VecX& u) const {
    const int d = static_cast<int>(u.size());
    const double usq = u.squaredNorm();
    const double denom = rho * usq + z;
    const double dcoef = 2.0 * rho / (z * z * denom * denom * denom);
    const double e = rho * rho * rho * usq * usq * usq +
                     3.0 * rho * rho * z * usq * usq + 2.0 * rho * z * z * usq;
    MatX h = (4.0 * rho * z * z) * (u * u.transpose());
    h.diagonal().array() += e;
    return scale * dcoef * h;
  }
};

// ---------------------------------------------------------------------------
// Interference upper bound (first-order expansion of log2(1 + sum G_j)).
// ---------------------------------------------------------------------------
struct RateInterferenceUB {
  double slope = 0.0;       // log2(e) / (1 + sum_prev)
  double sum_prev = 0.0;    // interference at the expansion point
  double value_prev = 0.0;  // log2(1 + sum_prev)

  /// g_prev holds the interfering received powers (own GN excluded).
  static RateInterferenceUB make(const VecX& g_prev) {
    RateInterferenceUB ub;
    ub.sum_prev = g_prev.sum();
    ub.slope = kLog2E / (1.0 + ub.sum_prev);
    ub.value_prev = std::log2(1.0 + ub.sum_prev);
    return ub;
  }

  double value(const VecX& g_new) const {
    return slope * (g_new.sum() - sum_prev) + value_prev;
  }

  double true_value(const VecX& g_new) const { return std::log2(1.0 + g_new.sum()); }
};

/// Affine upper bound on the interference term log2(1 + sum_{j!=k} G_j),
/// tight at the expansion point.
inline double rate_interference_ub(const VecX& g_prev, const VecX& g_new) {
  return RateInterferenceUB::make(g_prev).value(g_new);
}

/// Concave lower bound on the peak received power
/// G_max = P_peak gamma0 / (||q - w_k||^2 + H^2), expanded at q_prev.
inline ReciprocalQuadSurrogate gmax_surrogate(const Scenario& sc, int k,
                                              const Vec2& q_prev) {
  return ReciprocalQuadSurrogate::make(VecX(q_prev - sc.gn_positions[k]), 1.0,
                                       sc.altitude * sc.altitude,
                                       sc.peak_power * sc.ref_snr);
}

inline double gmax_lb(const Scenario& sc, int k, const Vec2& q_prev, const Vec2& q_new) {
  return gmax_surrogate(sc, k, q_prev).value(VecX(q_new - sc.gn_positions[k]));
}

inline double gmax_true(const Scenario& sc, int k, const Vec2& q_new) {
  return gmax_surrogate(sc, k, q_new).true_value(VecX(q_new - sc.gn_positions[k]));
}

/// Concave lower bound on ||v||^2 expanded at v_prev. The gap is exactly
/// 2 ||v_new - v_prev||^2.
inline double speed_sq_lb(const Vec2& v_prev, const Vec2& v_new) {
  return -v_new.squaredNorm() + 2.0 * v_prev.dot(2.0 * v_new - v_prev);
}

/// Concave quadratic lower bound on cos(phi) expanded at phi_prev.
inline double cos_lb(double phi_prev, double phi_new) {
  const double s = std::sin(phi_prev);
  const double t = phi_new - phi_prev + s;
  return -0.5 * t * t + std::cos(phi_prev) + 0.5 * s * s;
}

// ---------------------------------------------------------------------------
// Circular-trajectory surrogates. With the UAV on a circle of radius r about
// the GN centroid and GN k at polar position (zeta_k, varphi_k), the squared
// distance is (r - b)^2 + A with
//   b = zeta_k cos(theta[n] - varphi_k),
//   A = zeta_k^2 sin^2(theta[n] - varphi_k) + H^2,
// so the radius-direction bound is the scalar kernel with rho = 1, z = A.
// ---------------------------------------------------------------------------
struct SmaxRadiusSurrogate {
  double b = 0.0;  // center offset along the radius
  double A = 0.0;  // residual squared distance
  ReciprocalQuadSurrogate kernel;

  static SmaxRadiusSurrogate make(const Scenario& sc, double zeta, double varphi,
                                  double theta_n, double r_prev) {
    SmaxRadiusSurrogate s;
    const double delta = theta_n - varphi;
    s.b = zeta * std::cos(delta);
    const double sn = zeta * std::sin(delta);
    s.A = sn * sn + sc.altitude * sc.altitude;
    VecX u_l(1);
    u_l[0] = r_prev - s.b;
    s.kernel = ReciprocalQuadSurrogate::make(u_l, 1.0, s.A, sc.peak_power * sc.ref_snr);
    return s;
  }

  double value(double r_new) const {
    VecX u(1);
    u[0] = r_new - b;
    return kernel.value(u);
  }

  double derivative(double r_new) const {
    VecX u(1);
    u[0] = r_new - b;
    return kernel.gradient(u)[0];
  }

  double true_value(double r_new) const {
    VecX u(1);
    u[0] = r_new - b;
    return kernel.true_value(u);
  }
};

inline double smax_lb1(const Scenario& sc, double zeta, double varphi, double theta_n,
                       double r_prev, double r_new) {
  return SmaxRadiusSurrogate::make(sc, zeta, varphi, theta_n, r_prev).value(r_new);
}

/// Angle-direction bound: the cosine minorant turns the squared distance into
/// r zeta (theta - b)^2 + A, and the scalar kernel (rho = r zeta, z = A,
/// u_l = sin(theta_prev - varphi)) bounds the resulting reciprocal. Two-step
/// chain: surrogate <= intermediate reciprocal <= true peak received power.
struct SmaxAngleSurrogate {
  double b = 0.0;      // theta_prev - sin(theta_prev - varphi)
  double A = 0.0;
  double rho = 0.0;    // r zeta
  double theta_prev = 0.0;
  ReciprocalQuadSurrogate kernel;

  static SmaxAngleSurrogate make(const Scenario& sc, double zeta, double varphi,
                                 double r, double theta_prev) {
    SmaxAngleSurrogate s;
    s.theta_prev = theta_prev;
    const double delta = theta_prev - varphi;
    const double sn = std::sin(delta);
    s.b = theta_prev - sn;
    s.A = r * r + zeta * zeta + sc.altitude * sc.altitude -
          r * zeta * (2.0 * std::cos(delta) + sn * sn);
    s.rho = r * zeta;
    VecX u_l(1);
    u_l[0] = sn;  // theta_prev - b
    s.kernel = ReciprocalQuadSurrogate::make(u_l, s.rho, s.A, sc.peak_power * sc.ref_snr);
    return s;
  }

  double value(double theta_new) const {
    VecX u(1);
    u[0] = theta_new - b;
    return kernel.value(u);
  }

  double derivative(double theta_new) const {
    VecX u(1);
    u[0] = theta_new - b;
    return kernel.gradient(u)[0];
  }

  /// Middle link of the chain, P gamma0 / (r zeta (theta - b)^2 + A).
  double intermediate(double theta_new) const {
    VecX u(1);
    u[0] = theta_new - b;
    return kernel.true_value(u);
  }

  /// True peak received power at theta_new (exact polar distance).
  double true_value(const Scenario& sc, double zeta, double varphi, double r,
                    double theta_new) const {
    const double delta = theta_new - varphi;
    const double dr = r - zeta * std::cos(delta);
    const double sn = zeta * std::sin(delta);
    const double dsq = dr * dr + sn * sn + sc.altitude * sc.altitude;
    return sc.peak_power * sc.ref_snr / dsq;
  }
};

inline double smax_lb2(const Scenario& sc, double zeta, double varphi, double r,
                       double theta_prev, double theta_new) {
  return SmaxAngleSurrogate::make(sc, zeta, varphi, r, theta_prev).value(theta_new);
}

// ---------------------------------------------------------------------------
// Surrogate verifier: value match and gradient match at the expansion point,
// global bound over a sampled box, convexity of the gap where applicable.
// ---------------------------------------------------------------------------
struct SurrogateCheck {
  double value_err = 0.0;      // |f(x_l) - g(x_l)|
  double gradient_err = 0.0;   // ||grad f - grad g|| / max(1, ||grad f||) at x_l,
                               // central differences
  double max_violation = 0.0;  // max over samples of g - f (positive = violation)
  VecX worst_sample;
  int nonfinite_samples = 0;

  bool pass(double value_tol = 1e-9, double grad_tol = 1e-6,
            double bound_tol = 1e-9) const {
    return value_err <= value_tol && gradient_err <= grad_tol &&
           max_violation <= bound_tol && nonfinite_samples == 0;
  }
};

using ScalarField = std::function<double(const VecX&)>;

/// Checks the three concave-surrogate conditions for g against f: equal value
/// at x_l, equal gradient at x_l (central differences with h = 1e-5 (1+|x|)),
/// and g <= f over `samples` uniform draws from [lo, hi]^d.
inline SurrogateCheck verify_surrogate(const ScalarField& f, const ScalarField& g,
                                       const VecX& x_l, const VecX& lo, const VecX& hi,
                                       int samples = 10000, std::uint64_t seed = 7) {
  SurrogateCheck chk;
  chk.value_err = std::abs(f(x_l) - g(x_l));

  const int d = static_cast<int>(x_l.size());
  double grad_err_sq = 0.0, grad_norm_sq = 0.0;
  for (int i = 0; i < d; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(x_l[i]));
    VecX xp = x_l, xm = x_l;
    xp[i] += h;
    xm[i] -= h;
    const double df = (f(xp) - f(xm)) / (2.0 * h);
    const double dg = (g(xp) - g(xm)) / (2.0 * h);
    grad_err_sq += (df - dg) * (df - dg);
    grad_norm_sq += df * df;
  }
  chk.gradient_err = std::sqrt(grad_err_sq) / std::max(1.0, std::sqrt(grad_norm_sq));

  std::mt19937_64 rng(seed);
  chk.max_violation = -std::numeric_limits<double>::infinity();
  VecX x(d);
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < d; ++i) x[i] = uniform_in(rng, lo[i], hi[i]);
    const double fv = f(x);
    const double gv = g(x);
    if (!std::isfinite(fv) || !std::isfinite(gv)) {
      ++chk.nonfinite_samples;
      continue;
    }
    const double gap = gv - fv;
    if (gap > chk.max_violation) {
      chk.max_violation = gap;
      chk.worst_sample = x;
    }
  }
  return chk;
}

/// Default sampling box: +-10x the expansion point magnitude in every
/// coordinate (at least +-10 around small components).
inline void default_box(const VecX& x_l, VecX& lo, VecX& hi) {
  const int d = static_cast<int>(x_l.size());
  lo.resize(d);
  hi.resize(d);
  for (int i = 0; i < d; ++i) {
    const double w = 10.0 * std::max(1.0, std::abs(x_l[i]));
    lo[i] = x_l[i] - w;
    hi[i] = x_l[i] + w;
  }
}

}  // namespace surrogates
}  // namespace uavplan

#endif  // UAVPLAN_SURROGATES_HPP
