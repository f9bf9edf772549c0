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

#ifndef UAVPLAN_FUNCS_HPP
#define UAVPLAN_FUNCS_HPP

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "uavplan/scenario.hpp"
#include "uavplan/subsolver.hpp"

namespace uavplan {
namespace subsolver {

/// c0 + sum c_i x_i.
class LinearFunc : public Func {
 public:
  LinearFunc(std::string name, std::vector<int> idx, std::vector<double> coef,
             double constant)
      : Func(std::move(name), FuncKind::kAffine, idx),
        idx_(std::move(idx)),
        coef_(std::move(coef)),
        constant_(constant) {}

  double value(const VecX& x) const override {
    double v = constant_;
    for (size_t i = 0; i < idx_.size(); ++i) v += coef_[i] * x[idx_[i]];
    return v;
  }
  void gradient(const VecX&, VecX& g) const override {
    for (size_t i = 0; i < idx_.size(); ++i) g[idx_[i]] = coef_[i];
  }
  void hessian(const VecX&, double, MatX&) const override {}

 private:
  std::vector<int> idx_;
  std::vector<double> coef_;
  double constant_;
};

/// scale * (||x_S - center||^2 - radius_sq). Covers the speed/acceleration
/// caps and the squared-speed minorant, which rearranges to the ball
/// V1^2 + ||v - 2 v_l||^2 <= 2 ||v_l||^2.
class BallFunc : public Func {
 public:
  BallFunc(std::string name, std::vector<int> idx, VecX center, double radius_sq,
           double scale)
      : Func(std::move(name), FuncKind::kSecondOrderCone, idx),
        idx_(std::move(idx)),
        center_(std::move(center)),
        radius_sq_(radius_sq),
        scale_(scale) {}

  double value(const VecX& x) const override {
    double v = -radius_sq_;
    for (size_t i = 0; i < idx_.size(); ++i) {
      const double d = x[idx_[i]] - center_[i];
      v += d * d;
    }
    return scale_ * v;
  }
  void gradient(const VecX& x, VecX& g) const override {
    for (size_t i = 0; i < idx_.size(); ++i)
      g[idx_[i]] = 2.0 * scale_ * (x[idx_[i]] - center_[i]);
  }
  void hessian(const VecX&, double w, MatX& h) const override {
    for (size_t i = 0; i < idx_.size(); ++i)
      h(idx_[i], idx_[i]) += 2.0 * scale_ * w;
  }

 private:
  std::vector<int> idx_;
  VecX center_;
  double radius_sq_;
  double scale_;
};

/// Epigraph form of the per-GN average-rate constraint:
///   scale * [ epi - coef * sum_n ( log2(1 + sum_m G[m,n])
///                                  - slope_n (sum_m G[m,n] - G[k,n]) - c_n ) ]
/// where slope_n and c_n freeze the affine interference upper bound at the
/// expansion point.
class RateEpigraphFunc : public Func {
 public:
  struct Slot {
    std::vector<int> g_idx;  // indices of G[0..K-1, n]
    int own = 0;             // position of G[k,n] within g_idx
    double slope = 0.0;      // log2(e) / (1 + interference at expansion)
    double constant = 0.0;   // log2(1+S_l) - slope * S_l
  };

  RateEpigraphFunc(std::string name, int epi_idx, std::vector<Slot> slots,
                   double coef, double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth,
             make_support(epi_idx, slots)),
        epi_(epi_idx),
        slots_(std::move(slots)),
        coef_(coef),
        scale_(scale) {}

  double value(const VecX& x) const override {
    double acc = 0.0;
    for (const auto& s : slots_) {
      double total = 0.0;
      for (int gi : s.g_idx) total += x[gi];
      const double interf = total - x[s.g_idx[s.own]];
      acc += std::log2(1.0 + total) - (s.slope * interf + s.constant);
    }
    return scale_ * (x[epi_] - coef_ * acc);
  }

  void gradient(const VecX& x, VecX& g) const override {
    g[epi_] = scale_;
    const double w = -scale_ * coef_;
    for (const auto& s : slots_) {
      double total = 0.0;
      for (int gi : s.g_idx) total += x[gi];
      const double rho = kLog2E / (1.0 + total);
      for (size_t m = 0; m < s.g_idx.size(); ++m) {
        const double d = rho - (static_cast<int>(m) == s.own ? 0.0 : s.slope);
        g[s.g_idx[m]] = w * d;
      }
    }
  }

  void hessian(const VecX& x, double w, MatX& h) const override {
    const double c = w * scale_ * coef_;
    for (const auto& s : slots_) {
      double total = 0.0;
      for (int gi : s.g_idx) total += x[gi];
      const double curv = c * kLog2E / ((1.0 + total) * (1.0 + total));
      for (int a : s.g_idx)
        for (int b : s.g_idx) h(a, b) += curv;
    }
  }

 private:
  static std::vector<int> make_support(int epi, const std::vector<Slot>& slots) {
    std::vector<int> sup{epi};
    for (const auto& s : slots) sup.insert(sup.end(), s.g_idx.begin(), s.g_idx.end());
    return sup;
  }

  int epi_;
  std::vector<Slot> slots_;
  double coef_;
  double scale_;
};

/// Slot-level index triple for the propulsion terms written through the speed
/// slack: c1 ||v||^3 + c2/V1 + (c2/g^2) ||a||^2 / V1.
struct PowerSlot {
  int vx, vy, ax, ay, v1;
};

namespace detail {

inline double power_slot_value(const Scenario& sc, const VecX& x, const PowerSlot& s) {
  const double speed = std::hypot(x[s.vx], x[s.vy]);
  const double asq = x[s.ax] * x[s.ax] + x[s.ay] * x[s.ay];
  const double g2 = sc.gravity * sc.gravity;
  return sc.c1 * speed * speed * speed + sc.c2 / x[s.v1] +
         sc.c2 * asq / (g2 * x[s.v1]);
}

inline void power_slot_gradient(const Scenario& sc, const VecX& x, const PowerSlot& s,
                                double w, VecX& g) {
  const double speed = std::max(1e-12, std::hypot(x[s.vx], x[s.vy]));
  const double asq = x[s.ax] * x[s.ax] + x[s.ay] * x[s.ay];
  const double g2 = sc.gravity * sc.gravity;
  const double v1 = x[s.v1];
  g[s.vx] += w * 3.0 * sc.c1 * speed * x[s.vx];
  g[s.vy] += w * 3.0 * sc.c1 * speed * x[s.vy];
  g[s.ax] += w * 2.0 * sc.c2 * x[s.ax] / (g2 * v1);
  g[s.ay] += w * 2.0 * sc.c2 * x[s.ay] / (g2 * v1);
  g[s.v1] += w * (-sc.c2 / (v1 * v1) - sc.c2 * asq / (g2 * v1 * v1));
}

inline void power_slot_hessian(const Scenario& sc, const VecX& x, const PowerSlot& s,
                               double w, MatX& h) {
  const double speed = std::max(1e-12, std::hypot(x[s.vx], x[s.vy]));
  const double g2 = sc.gravity * sc.gravity;
  const double v1 = x[s.v1];
  const double asq = x[s.ax] * x[s.ax] + x[s.ay] * x[s.ay];
  // c1 ||v||^3: 3 c1 (||v|| I + v v^T / ||v||)
  const double c3 = 3.0 * sc.c1;
  h(s.vx, s.vx) += w * c3 * (speed + x[s.vx] * x[s.vx] / speed);
  h(s.vy, s.vy) += w * c3 * (speed + x[s.vy] * x[s.vy] / speed);
  h(s.vx, s.vy) += w * c3 * x[s.vx] * x[s.vy] / speed;
  h(s.vy, s.vx) += w * c3 * x[s.vx] * x[s.vy] / speed;
  // c2/V1 + (c2/g^2) ||a||^2 / V1 (quadratic-over-linear block)
  const double k = sc.c2 / g2;
  h(s.ax, s.ax) += w * 2.0 * k / v1;
  h(s.ay, s.ay) += w * 2.0 * k / v1;
  h(s.ax, s.v1) += w * (-2.0 * k * x[s.ax] / (v1 * v1));
  h(s.v1, s.ax) += w * (-2.0 * k * x[s.ax] / (v1 * v1));
  h(s.ay, s.v1) += w * (-2.0 * k * x[s.ay] / (v1 * v1));
  h(s.v1, s.ay) += w * (-2.0 * k * x[s.ay] / (v1 * v1));
  h(s.v1, s.v1) += w * (2.0 * sc.c2 / (v1 * v1 * v1) + 2.0 * k * asq / (v1 * v1 * v1));
}

}  // namespace detail

/// scale * [(1/N) sum_n power_slot(n) - P_lim] <= 0.
class PowerLimitFunc : public Func {
 public:
  PowerLimitFunc(std::string name, const Scenario& sc, std::vector<PowerSlot> slots,
                 double p_lim, double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth, make_support(slots)),
        sc_(sc),
        slots_(std::move(slots)),
        p_lim_(p_lim),
        scale_(scale) {}

  double value(const VecX& x) const override {
    double acc = 0.0;
    for (const auto& s : slots_) acc += detail::power_slot_value(sc_, x, s);
    return scale_ * (acc / slots_.size() - p_lim_);
  }
  void gradient(const VecX& x, VecX& g) const override {
    for (int idx : support()) g[idx] = 0.0;
    const double w = scale_ / slots_.size();
    for (const auto& s : slots_) detail::power_slot_gradient(sc_, x, s, w, g);
  }
  void hessian(const VecX& x, double w, MatX& h) const override {
    const double ws = w * scale_ / slots_.size();
    for (const auto& s : slots_) detail::power_slot_hessian(sc_, x, s, ws, h);
  }

 private:
  static std::vector<int> make_support(const std::vector<PowerSlot>& slots) {
    std::vector<int> sup;
    for (const auto& s : slots) {
      sup.push_back(s.vx);
      sup.push_back(s.vy);
      sup.push_back(s.ax);
      sup.push_back(s.ay);
      sup.push_back(s.v1);
    }
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
    return sup;
  }

  Scenario sc_;
  std::vector<PowerSlot> slots_;
  double p_lim_;
  double scale_;
};

/// Dinkelbach objective eta - lambda * sum_n power_slot(n), concave in
/// (v, a, V1) for lambda >= 0.
class DinkelbachObjectiveFunc : public Func {
 public:
  DinkelbachObjectiveFunc(std::string name, const Scenario& sc, int eta_idx,
                          double lambda, std::vector<PowerSlot> slots)
      : Func(std::move(name), FuncKind::kConvexSmooth,
             make_support(eta_idx, slots)),
        sc_(sc),
        eta_(eta_idx),
        lambda_(lambda),
        slots_(std::move(slots)) {}

  double value(const VecX& x) const override {
    double acc = 0.0;
    for (const auto& s : slots_) acc += detail::power_slot_value(sc_, x, s);
    return x[eta_] - lambda_ * acc;
  }
  void gradient(const VecX& x, VecX& g) const override {
    for (int idx : support()) g[idx] = 0.0;
    g[eta_] = 1.0;
    for (const auto& s : slots_) detail::power_slot_gradient(sc_, x, s, -lambda_, g);
  }
  void hessian(const VecX& x, double w, MatX& h) const override {
    // objective is concave; hessian contribution is -lambda * PSD
    for (const auto& s : slots_) detail::power_slot_hessian(sc_, x, s, -w * lambda_, h);
  }

 private:
  static std::vector<int> make_support(int eta, const std::vector<PowerSlot>& slots) {
    std::vector<int> sup{eta};
    for (const auto& s : slots) {
      sup.push_back(s.vx);
      sup.push_back(s.vy);
      sup.push_back(s.ax);
      sup.push_back(s.ay);
      sup.push_back(s.v1);
    }
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
    return sup;
  }

  Scenario sc_;
  int eta_;
  double lambda_;
  std::vector<PowerSlot> slots_;
};

/// Peak-received-power box via the concave minorant in position:
///   scale * [G + kq ||q - w||^2 - beta . (q - w) - c] <= 0.
class PeakPowerPositionFunc : public Func {
 public:
  PeakPowerPositionFunc(std::string name, int g_idx, int qx, int qy, const Vec2& w,
                        double kq, const Vec2& beta, double c, double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth, {g_idx, qx, qy}),
        g_idx_(g_idx),
        qx_(qx),
        qy_(qy),
        w_(w),
        kq_(kq),
        beta_(beta),
        c_(c),
        scale_(scale) {}

  double value(const VecX& x) const override {
    const Vec2 d(x[qx_] - w_[0], x[qy_] - w_[1]);
    return scale_ * (x[g_idx_] + kq_ * d.squaredNorm() - beta_.dot(d) - c_);
  }
  void gradient(const VecX& x, VecX& g) const override {
    const Vec2 d(x[qx_] - w_[0], x[qy_] - w_[1]);
    g[g_idx_] = scale_;
    g[qx_] = scale_ * (2.0 * kq_ * d[0] - beta_[0]);
    g[qy_] = scale_ * (2.0 * kq_ * d[1] - beta_[1]);
  }
  void hessian(const VecX&, double w, MatX& h) const override {
    h(qx_, qx_) += w * scale_ * 2.0 * kq_;
    h(qy_, qy_) += w * scale_ * 2.0 * kq_;
  }

 private:
  int g_idx_, qx_, qy_;
  Vec2 w_;
  double kq_;
  Vec2 beta_;
  double c_;
  double scale_;
};

/// Scalar variant for the circular stages:
///   scale * [S + kq (x + shift - b)^2 - beta (x + shift - b) - c] <= 0,
/// where x is the radius or a slot angle (shift folds in the 2 pi wrap).
class PeakPowerScalarFunc : public Func {
 public:
  PeakPowerScalarFunc(std::string name, int s_idx, int x_idx, double shift, double b,
                      double kq, double beta, double c, double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth, {s_idx, x_idx}),
        s_idx_(s_idx),
        x_idx_(x_idx),
        shift_(shift),
        b_(b),
        kq_(kq),
        beta_(beta),
        c_(c),
        scale_(scale) {}

  double value(const VecX& x) const override {
    const double u = x[x_idx_] + shift_ - b_;
    return scale_ * (x[s_idx_] + kq_ * u * u - beta_ * u - c_);
  }
  void gradient(const VecX& x, VecX& g) const override {
    const double u = x[x_idx_] + shift_ - b_;
    g[s_idx_] = scale_;
    g[x_idx_] = scale_ * (2.0 * kq_ * u - beta_);
  }
  void hessian(const VecX&, double w, MatX& h) const override {
    h(x_idx_, x_idx_) += w * scale_ * 2.0 * kq_;
  }

 private:
  int s_idx_, x_idx_;
  double shift_, b_, kq_, beta_, c_, scale_;
};

/// Circular propulsion power at fixed angular profile, as a function of the
/// radius: (1/N) sum_n [c1 w^3 r^3 + c2/(w r) + (c2/g^2) w^3 r
///                      + (c2/g^2) (alpha^2/w) r] - P_lim <= 0.
class RadiusPowerFunc : public Func {
 public:
  RadiusPowerFunc(std::string name, const Scenario& sc, int r_idx,
                  std::vector<double> omega, std::vector<double> alpha, double p_lim,
                  double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth, {r_idx}),
        r_idx_(r_idx),
        p_lim_(p_lim),
        scale_(scale) {
    const double g2 = sc.gravity * sc.gravity;
    const int n = static_cast<int>(omega.size());
    cube_ = lin_ = inv_ = 0.0;
    for (int i = 0; i < n; ++i) {
      const double w = omega[i];
      cube_ += sc.c1 * w * w * w / n;
      inv_ += sc.c2 / w / n;
      lin_ += (sc.c2 / g2) * (w * w * w + alpha[i] * alpha[i] / w) / n;
    }
  }

  double value(const VecX& x) const override {
    const double r = x[r_idx_];
    return scale_ * (cube_ * r * r * r + inv_ / r + lin_ * r - p_lim_);
  }
  void gradient(const VecX& x, VecX& g) const override {
    const double r = x[r_idx_];
    g[r_idx_] = scale_ * (3.0 * cube_ * r * r - inv_ / (r * r) + lin_);
  }
  void hessian(const VecX& x, double w, MatX& h) const override {
    const double r = x[r_idx_];
    h(r_idx_, r_idx_) += w * scale_ * (6.0 * cube_ * r + 2.0 * inv_ / (r * r * r));
  }

 private:
  int r_idx_;
  double p_lim_, scale_;
  double cube_ = 0, inv_ = 0, lin_ = 0;  // aggregated r^3, 1/r, r coefficients
};

/// Per-slot angular terms of the circular propulsion power at fixed radius.
struct AngleSlot {
  int w_idx, a_idx;  // omega[n], alpha[n]
};

class AnglePowerFunc : public Func {
 public:
  AnglePowerFunc(std::string name, const Scenario& sc, std::vector<AngleSlot> slots,
                 double r, double p_lim, double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth, make_support(slots)),
        slots_(std::move(slots)),
        p_lim_(p_lim),
        scale_(scale) {
    const double g2 = sc.gravity * sc.gravity;
    c_cube_ = sc.c1 * r * r * r + sc.c2 * r / g2;  // omega^3 coefficient
    c_inv_ = sc.c2 / r;                            // 1/omega coefficient
    c_qol_ = sc.c2 * r / g2;                       // alpha^2/omega coefficient
  }

  double value(const VecX& x) const override {
    double acc = 0.0;
    for (const auto& s : slots_) {
      const double w = x[s.w_idx], a = x[s.a_idx];
      acc += c_cube_ * w * w * w + c_inv_ / w + c_qol_ * a * a / w;
    }
    return scale_ * (acc / slots_.size() - p_lim_);
  }
  void gradient(const VecX& x, VecX& g) const override {
    const double c = scale_ / slots_.size();
    for (const auto& s : slots_) {
      const double w = x[s.w_idx], a = x[s.a_idx];
      g[s.w_idx] = c * (3.0 * c_cube_ * w * w - c_inv_ / (w * w) - c_qol_ * a * a / (w * w));
      g[s.a_idx] = c * (2.0 * c_qol_ * a / w);
    }
  }
  void hessian(const VecX& x, double wgt, MatX& h) const override {
    const double c = wgt * scale_ / slots_.size();
    for (const auto& s : slots_) {
      const double w = x[s.w_idx], a = x[s.a_idx];
      h(s.w_idx, s.w_idx) +=
          c * (6.0 * c_cube_ * w + 2.0 * c_inv_ / (w * w * w) + 2.0 * c_qol_ * a * a / (w * w * w));
      h(s.a_idx, s.a_idx) += c * 2.0 * c_qol_ / w;
      h(s.w_idx, s.a_idx) += c * (-2.0 * c_qol_ * a / (w * w));
      h(s.a_idx, s.w_idx) += c * (-2.0 * c_qol_ * a / (w * w));
    }
  }

  double raw_power(const VecX& x) const {
    return (value(x) / scale_ + p_lim_) * slots_.size();
  }

 private:
  static std::vector<int> make_support(const std::vector<AngleSlot>& slots) {
    std::vector<int> sup;
    for (const auto& s : slots) {
      sup.push_back(s.w_idx);
      sup.push_back(s.a_idx);
    }
    return sup;
  }

  std::vector<AngleSlot> slots_;
  double p_lim_, scale_;
  double c_cube_ = 0, c_inv_ = 0, c_qol_ = 0;
};

/// Tangential/centripetal acceleration bound at fixed radius:
///   scale * (r^2 alpha^2 + r^2 omega^4 - a_max^2) <= 0.
class CircularAccelFunc : public Func {
 public:
  CircularAccelFunc(std::string name, int w_idx, int a_idx, double r, double a_max,
                    double scale)
      : Func(std::move(name), FuncKind::kConvexSmooth, {w_idx, a_idx}),
        w_idx_(w_idx),
        a_idx_(a_idx),
        r2_(r * r),
        cap_(a_max * a_max),
        scale_(scale) {}

  double value(const VecX& x) const override {
    const double w = x[w_idx_], a = x[a_idx_];
    return scale_ * (r2_ * a * a + r2_ * w * w * w * w - cap_);
  }
  void gradient(const VecX& x, VecX& g) const override {
    const double w = x[w_idx_], a = x[a_idx_];
    g[w_idx_] = scale_ * 4.0 * r2_ * w * w * w;
    g[a_idx_] = scale_ * 2.0 * r2_ * a;
  }
  void hessian(const VecX& x, double wgt, MatX& h) const override {
    const double w = x[w_idx_];
    h(w_idx_, w_idx_) += wgt * scale_ * 12.0 * r2_ * w * w;
    h(a_idx_, a_idx_) += wgt * scale_ * 2.0 * r2_;
  }

 private:
  int w_idx_, a_idx_;
  double r2_, cap_, scale_;
};

/// Dinkelbach objective for the circular stages: eta - lambda * N * avg power,
/// where the power evaluator is either RadiusPowerFunc or AnglePowerFunc
/// shifted to drop its limit. Implemented by wrapping an inner Func built with
/// p_lim = 0 and scale = 1, whose value is then avg power.
class CircularDinkelbachObjective : public Func {
 public:
  CircularDinkelbachObjective(std::string name, int eta_idx, double lambda, int slots,
                              FuncPtr avg_power)
      : Func(std::move(name), FuncKind::kConvexSmooth,
             make_support(eta_idx, avg_power)),
        eta_(eta_idx),
        lambda_n_(lambda * slots),
        avg_power_(std::move(avg_power)) {}

  double value(const VecX& x) const override {
    return x[eta_] - lambda_n_ * avg_power_->value(x);
  }
  void gradient(const VecX& x, VecX& g) const override {
    avg_power_->gradient(x, g);
    for (int idx : avg_power_->support()) g[idx] *= -lambda_n_;
    g[eta_] = 1.0;
  }
  void hessian(const VecX& x, double w, MatX& h) const override {
    avg_power_->hessian(x, -w * lambda_n_, h);
  }

 private:
  static std::vector<int> make_support(int eta, const FuncPtr& p) {
    std::vector<int> sup{eta};
    sup.insert(sup.end(), p->support().begin(), p->support().end());
    return sup;
  }

  int eta_;
  double lambda_n_;
  FuncPtr avg_power_;
};

}  // namespace subsolver
}  // namespace uavplan

#endif  // UAVPLAN_FUNCS_HPP
