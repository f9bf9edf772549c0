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

#ifndef UAVPLAN_SUBSOLVER_HPP
#define UAVPLAN_SUBSOLVER_HPP

#include <Eigen/Cholesky>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "uavplan/common.hpp"

namespace uavplan {
namespace subsolver {

enum class FuncKind { kAffine, kConvexSmooth, kSecondOrderCone };

/// Smooth scalar function of the decision vector with sparse support.
/// Constraints are convex with the convention f(x) <= 0; the objective is
/// concave and maximized.
class Func {
 public:
  virtual ~Func() = default;
  virtual double value(const VecX& x) const = 0;
  /// Writes the partial derivatives into g at the support indices (assign,
  /// not accumulate). Entries outside the support are left untouched.
  virtual void gradient(const VecX& x, VecX& g) const = 0;
  /// h += w * hessian(x). No-op for affine functions.
  virtual void hessian(const VecX& x, double w, MatX& h) const = 0;

  const std::string& name() const { return name_; }
  FuncKind kind() const { return kind_; }
  const std::vector<int>& support() const { return support_; }

 protected:
  Func(std::string name, FuncKind kind, std::vector<int> support)
      : name_(std::move(name)), kind_(kind), support_(std::move(support)) {}

 private:
  std::string name_;
  FuncKind kind_;
  std::vector<int> support_;
};

using FuncPtr = std::shared_ptr<const Func>;

struct Block {
  std::string name;
  int offset = 0;
  int size = 0;
};

struct BlockLayout {
  std::vector<Block> blocks;

  int add(const std::string& name, int size) {
    const int offset = num_vars();
    blocks.push_back({name, offset, size});
    return offset;
  }
  int num_vars() const {
    return blocks.empty() ? 0 : blocks.back().offset + blocks.back().size;
  }
  const Block& find(const std::string& name) const {
    for (const auto& b : blocks)
      if (b.name == name) return b;
    throw std::out_of_range("unknown block: " + name);
  }
};

/// Canonicalized concave maximization handed to the barrier solver:
/// max f0(x) s.t. A x = b, f_i(x) <= 0, with a strictly feasible warm start.
struct SubProblem {
  BlockLayout layout;
  FuncPtr objective;
  std::vector<FuncPtr> constraints;
  Eigen::SparseMatrix<double> eq_matrix;  // A
  VecX eq_rhs;                            // b
  VecX warm_start;

  int num_vars() const { return layout.num_vars(); }
  VecX block_of(const VecX& x, const std::string& name) const {
    const Block& b = layout.find(name);
    return x.segment(b.offset, b.size);
  }
};

enum class SolveStatus { kOptimal, kMaxIterations, kBreakdown };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kMaxIterations: return "max-iter";
    case SolveStatus::kBreakdown: return "breakdown";
  }
  return "unknown";
}

struct SolveResult {
  VecX x;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kOptimal;
  int newton_iters = 0;
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double complementarity = 0.0;
  VecX ineq_dual;  // barrier multiplier estimates mu / slack
  VecX eq_dual;
  std::string message;
};

struct SolverOptions {
  double tol = 1e-6;
  double mu0 = 1.0;             // initial barrier weight
  double mu_factor = 0.1;       // per-stage decrease
  double newton_tol = 1e-8;     // on half the squared Newton decrement
  int max_newton_per_stage = 60;
  int max_total_newton = 4000;
  double precondition_tol = 1e-6;  // admissible warm-start violation
  double pad_base = 1e-9;          // strict-interior padding
  double reg_cap = 1e-2;           // max Hessian regularization
  double armijo = 0.25;
};

namespace detail {

inline bool eval_constraints(const SubProblem& sp, const VecX& x, VecX& fvals) {
  const int m = static_cast<int>(sp.constraints.size());
  fvals.resize(m);
  for (int i = 0; i < m; ++i) {
    fvals[i] = sp.constraints[i]->value(x);
    if (!std::isfinite(fvals[i])) return false;
  }
  return true;
}

inline double barrier_value(const SubProblem& sp, const VecX& x, const VecX& fvals,
                            const VecX& pads, double mu) {
  double phi = -sp.objective->value(x);
  for (int i = 0; i < fvals.size(); ++i) {
    const double slack = pads[i] - fvals[i];
    if (slack <= 0.0) return std::numeric_limits<double>::infinity();
    phi -= mu * std::log(slack);
  }
  return phi;
}

}  // namespace detail

/// Primal log-barrier interior point with equality-constrained Newton steps
/// and backtracking line search. The barrier weight decreases by mu_factor per
/// stage from mu0 down to tol / (number of inequality constraints).
inline SolveResult solve(const SubProblem& sp, const SolverOptions& opt = {}) {
  const int n = sp.num_vars();
  const int m_ineq = static_cast<int>(sp.constraints.size());
  const int m_eq = static_cast<int>(sp.eq_matrix.rows());

  VecX x = sp.warm_start;

  // Equality projection: warm starts carry rounding drift from previous
  // solves; Newton keeps A x = b thereafter.
  MatX eq_dense;
  Eigen::LLT<MatX> aat_llt;
  if (m_eq > 0) {
    eq_dense = MatX(sp.eq_matrix);
    MatX aat = eq_dense * eq_dense.transpose();
    aat.diagonal().array() += 1e-12;
    aat_llt.compute(aat);
    x += eq_dense.transpose() * aat_llt.solve(sp.eq_rhs - eq_dense * x);
  }

  // Precondition check and strict-interior padding.
  VecX fvals(m_ineq), pads(m_ineq);
  if (!detail::eval_constraints(sp, x, fvals))
    throw InfeasibleError("warm start: non-finite constraint evaluation");
  for (int i = 0; i < m_ineq; ++i) {
    if (fvals[i] > opt.precondition_tol)
      throw InfeasibleError("warm start violates constraint '" +
                            sp.constraints[i]->name() + "' by " +
                            std::to_string(fvals[i]));
    pads[i] = std::max(0.0, fvals[i]) + opt.pad_base;
  }

  const double mu_end = opt.tol / std::max(1, m_ineq);
  double mu = std::max(opt.mu0, mu_end);

  SolveResult res;
  res.status = SolveStatus::kOptimal;

  VecX grad(n), scratch(n), dx(n), eq_dual;
  scratch.setZero();
  MatX hess(n, n);

  int total_newton = 0;
  bool done_stages = false;
  while (!done_stages) {
    for (int it = 0; it < opt.max_newton_per_stage; ++it) {
      if (total_newton >= opt.max_total_newton) {
        res.status = SolveStatus::kMaxIterations;
        res.message = "newton budget exhausted";
        done_stages = true;
        break;
      }
      // Assemble gradient and Hessian of the barrier function.
      grad.setZero();
      hess.setZero();
      sp.objective->gradient(x, scratch);
      for (int idx : sp.objective->support()) {
        grad[idx] -= scratch[idx];
        scratch[idx] = 0.0;
      }
      sp.objective->hessian(x, -1.0, hess);
      for (int i = 0; i < m_ineq; ++i) {
        fvals[i] = sp.constraints[i]->value(x);
        const double slack = pads[i] - fvals[i];
        const double w1 = mu / slack;
        const double w2 = w1 / slack;
        const auto& sup = sp.constraints[i]->support();
        sp.constraints[i]->gradient(x, scratch);
        for (int a : sup) grad[a] += w1 * scratch[a];
        for (size_t ia = 0; ia < sup.size(); ++ia) {
          const double ga = scratch[sup[ia]];
          for (size_t ib = 0; ib <= ia; ++ib) {
            const double add = w2 * ga * scratch[sup[ib]];
            hess(sup[ia], sup[ib]) += add;
            if (ib != ia) hess(sup[ib], sup[ia]) += add;
          }
        }
        sp.constraints[i]->hessian(x, w1, hess);
        for (int a : sup) scratch[a] = 0.0;
      }

      // Newton direction with equality constraints via the Schur complement.
      double reg = 0.0;
      bool factored = false;
      Eigen::LLT<MatX> hllt;
      while (!factored) {
        hllt.compute(hess);
        if (hllt.info() == Eigen::Success) {
          factored = true;
        } else {
          reg = (reg == 0.0) ? 1e-10 : reg * 10.0;
          if (reg > opt.reg_cap) break;
          hess.diagonal().array() += reg;
        }
      }
      if (!factored) {
        res.status = SolveStatus::kBreakdown;
        res.message = "hessian factorization failed at regularization cap";
        done_stages = true;
        break;
      }

      if (m_eq > 0) {
        const VecX hig = hllt.solve(grad);
        const MatX hiat = hllt.solve(MatX(eq_dense.transpose()));
        MatX schur = eq_dense * hiat;
        schur.diagonal().array() += 1e-14;
        Eigen::LLT<MatX> sllt(schur);
        if (sllt.info() != Eigen::Success) {
          res.status = SolveStatus::kBreakdown;
          res.message = "schur factorization failed";
          done_stages = true;
          break;
        }
        const VecX rp = eq_dense * x - sp.eq_rhs;
        eq_dual = sllt.solve(rp - eq_dense * hig);
        dx = -hig - hiat * eq_dual;
      } else {
        dx = -hllt.solve(grad);
      }

      const double dec = -grad.dot(dx);
      ++total_newton;
      if (dec * 0.5 <= opt.newton_tol) break;

      // Backtracking: stay strictly inside, then Armijo on the barrier value.
      const double phi0 = detail::barrier_value(sp, x, fvals, pads, mu);
      double t = 1.0;
      VecX xt;
      VecX ft;
      bool stepped = false;
      for (int ls = 0; ls < 70; ++ls) {
        xt = x + t * dx;
        if (detail::eval_constraints(sp, xt, ft)) {
          const double phit = detail::barrier_value(sp, xt, ft, pads, mu);
          if (phit <= phi0 - opt.armijo * t * dec) {
            x = xt;
            stepped = true;
            break;
          }
        }
        t *= 0.5;
      }
      if (!stepped) break;  // stalled line search: accept stage as converged
    }
    if (done_stages) break;
    if (mu <= mu_end * (1.0 + 1e-12)) break;
    mu = std::max(mu * opt.mu_factor, mu_end);
  }

  // Dual estimates and KKT residuals at the returned point.
  detail::eval_constraints(sp, x, fvals);
  VecX lambda(m_ineq);
  double compl_max = 0.0, primal = 0.0;
  VecX stat(n);
  stat.setZero();
  sp.objective->gradient(x, scratch);
  for (int idx : sp.objective->support()) {
    stat[idx] -= scratch[idx];
    scratch[idx] = 0.0;
  }
  for (int i = 0; i < m_ineq; ++i) {
    const double slack = pads[i] - fvals[i];
    lambda[i] = slack > 0 ? mu / slack : 0.0;
    compl_max = std::max(compl_max, lambda[i] * std::abs(slack));
    primal = std::max(primal, fvals[i]);
    sp.constraints[i]->gradient(x, scratch);
    for (int a : sp.constraints[i]->support()) {
      stat[a] += lambda[i] * scratch[a];
      scratch[a] = 0.0;
    }
  }
  double dual_scale = 1.0;
  if (m_ineq > 0) dual_scale = std::max(dual_scale, lambda.cwiseAbs().maxCoeff());
  if (m_eq > 0) {
    if (eq_dual.size() == 0) eq_dual = VecX::Zero(m_eq);
    stat += eq_dense.transpose() * eq_dual;
    primal = std::max(primal, (eq_dense * x - sp.eq_rhs).cwiseAbs().maxCoeff());
    dual_scale = std::max(dual_scale, eq_dual.cwiseAbs().maxCoeff());
  }
  res.x = x;
  res.objective = sp.objective->value(x);
  res.newton_iters = total_newton;
  res.ineq_dual = lambda;
  res.eq_dual = (m_eq > 0) ? eq_dual : VecX();
  // Stationarity is scaled by the dual magnitude, as is conventional for
  // interior-point KKT reporting.
  res.stationarity = stat.cwiseAbs().maxCoeff() / dual_scale;
  res.primal_feasibility = std::max(0.0, primal);
  res.complementarity = compl_max;
  if (res.status == SolveStatus::kOptimal &&
      (res.stationarity > opt.tol * 10 || res.complementarity > opt.tol))
    res.status = SolveStatus::kMaxIterations;
  return res;
}

}  // namespace subsolver
}  // namespace uavplan

#endif  // UAVPLAN_SUBSOLVER_HPP
