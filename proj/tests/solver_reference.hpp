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

// Test-only reference solvers. These are kept independent of the barrier
// implementation they check: a dense primal active-set method for box QPs and
// a projected-gradient method with Polyak feasibility restoration for general
// subproblem instances.

#ifndef UAVPLAN_TESTS_SOLVER_REFERENCE_HPP
#define UAVPLAN_TESTS_SOLVER_REFERENCE_HPP

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "uavplan/subsolver.hpp"

namespace uavplan {
namespace testref {

/// minimize 1/2 x'Px - q'x subject to l <= x <= u, P symmetric positive
/// definite. Exact primal active-set iteration.
inline VecX solve_box_qp_active_set(const MatX& p, const VecX& q, const VecX& l,
                                    const VecX& u) {
  const int n = static_cast<int>(q.size());
  enum Bound : int { kFree = 0, kLower = -1, kUpper = 1 };
  std::vector<int> state(n, kFree);
  VecX x = 0.5 * (l + u);

  const int max_iter = 50 * n + 200;
  for (int iter = 0; iter < max_iter; ++iter) {
    // Equality-constrained target with the working set pinned.
    std::vector<int> free_idx;
    for (int i = 0; i < n; ++i)
      if (state[i] == kFree) free_idx.push_back(i);
    VecX target = x;
    if (!free_idx.empty()) {
      const int nf = static_cast<int>(free_idx.size());
      MatX pff(nf, nf);
      VecX rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs[a] = q[free_idx[a]];
        for (int b = 0; b < nf; ++b) pff(a, b) = p(free_idx[a], free_idx[b]);
        for (int i = 0; i < n; ++i)
          if (state[i] != kFree) rhs[a] -= p(free_idx[a], i) * x[i];
      }
      const VecX xf = pff.ldlt().solve(rhs);
      for (int a = 0; a < nf; ++a) target[free_idx[a]] = xf[a];
    }

    // Step toward the target, stopping at the first blocking bound.
    double alpha = 1.0;
    int blocker = -1, blocker_state = kFree;
    for (int i = 0; i < n; ++i) {
      const double d = target[i] - x[i];
      if (std::abs(d) < 1e-15) continue;
      if (d < 0 && target[i] < l[i]) {
        const double a = (l[i] - x[i]) / d;
        if (a < alpha) {
          alpha = a;
          blocker = i;
          blocker_state = kLower;
        }
      } else if (d > 0 && target[i] > u[i]) {
        const double a = (u[i] - x[i]) / d;
        if (a < alpha) {
          alpha = a;
          blocker = i;
          blocker_state = kUpper;
        }
      }
    }
    x += alpha * (target - x);
    if (blocker >= 0) {
      state[blocker] = blocker_state;
      x[blocker] = blocker_state == kLower ? l[blocker] : u[blocker];
      continue;
    }

    // At the working-set optimum: check multiplier signs.
    const VecX grad = p * x - q;
    int worst = -1;
    double worst_viol = 1e-10;
    for (int i = 0; i < n; ++i) {
      if (state[i] == kLower && -grad[i] > worst_viol) {
        worst_viol = -grad[i];
        worst = i;
      } else if (state[i] == kUpper && grad[i] > worst_viol) {
        worst_viol = grad[i];
        worst = i;
      }
    }
    if (worst < 0) return x;
    state[worst] = kFree;
  }
  return x;
}

inline double box_qp_objective(const MatX& p, const VecX& q, const VecX& x) {
  return 0.5 * x.dot(p * x) - q.dot(x);
}

// ---------------------------------------------------------------------------
// Projected gradient with Polyak feasibility restoration.
// ---------------------------------------------------------------------------
struct PgResult {
  VecX x;
  double objective = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  double max_violation = 0.0;
};

class PgOracle {
 public:
  explicit PgOracle(const subsolver::SubProblem& sp) : sp_(sp) {
    if (sp_.eq_matrix.rows() > 0) {
      eq_dense_ = MatX(sp_.eq_matrix);
      MatX aat = eq_dense_ * eq_dense_.transpose();
      aat.diagonal().array() += 1e-13;
      aat_llt_.compute(aat);
    }
  }

  /// Cyclic half-space steps onto each violated constraint plus affine
  /// re-projection; returns the worst remaining violation.
  double restore(VecX& x, int sweeps = 400) const {
    VecX g = VecX::Zero(x.size());
    for (int s = 0; s < sweeps; ++s) {
      if (eq_dense_.size() > 0)
        x += eq_dense_.transpose() * aat_llt_.solve(sp_.eq_rhs - eq_dense_ * x);
      double worst = 0.0;
      for (const auto& c : sp_.constraints) {
        const double f = c->value(x);
        if (f > -1e-12) {
          c->gradient(x, g);
          double gnorm_sq = 0.0;
          for (int idx : c->support()) gnorm_sq += g[idx] * g[idx];
          if (gnorm_sq > 1e-30) {
            const double step = (f + 1e-11) / gnorm_sq;
            for (int idx : c->support()) x[idx] -= step * g[idx];
          }
          worst = std::max(worst, f);
        }
        for (int idx : c->support()) g[idx] = 0.0;
      }
      if (worst <= 1e-10) {
        if (eq_dense_.size() > 0)
          x += eq_dense_.transpose() * aat_llt_.solve(sp_.eq_rhs - eq_dense_ * x);
        return violation(x);
      }
    }
    return violation(x);
  }

  double violation(const VecX& x) const {
    double worst = 0.0;
    for (const auto& c : sp_.constraints) worst = std::max(worst, c->value(x));
    if (eq_dense_.size() > 0)
      worst = std::max(worst, (eq_dense_ * x - sp_.eq_rhs).cwiseAbs().maxCoeff());
    return worst;
  }

  PgResult run(int max_iters = 200000, double step0 = 1.0) const {
    VecX x = sp_.warm_start;
    restore(x);
    VecX grad = VecX::Zero(x.size());
    PgResult best;
    best.x = x;
    best.objective = sp_.objective->value(x);

    double step = step0;
    int stall = 0;
    for (int it = 0; it < max_iters; ++it) {
      for (int idx : sp_.objective->support()) grad[idx] = 0.0;
      sp_.objective->gradient(x, grad);
      double gnorm = 0.0;
      for (int idx : sp_.objective->support()) gnorm += grad[idx] * grad[idx];
      gnorm = std::sqrt(gnorm);
      if (gnorm < 1e-16) break;

      VecX trial = x;
      for (int idx : sp_.objective->support())
        trial[idx] += step / std::max(1.0, gnorm) * grad[idx];
      restore(trial);
      const double obj = sp_.objective->value(trial);
      if (obj > best.objective + 1e-14) {
        best.objective = obj;
        best.x = trial;
        x = trial;
        step *= 1.25;
        stall = 0;
      } else {
        step *= 0.5;
        ++stall;
        if (step < 1e-13) break;
        if (stall > 200) break;
      }
      best.iterations = it + 1;
    }
    best.max_violation = violation(best.x);
    return best;
  }

 private:
  const subsolver::SubProblem& sp_;
  MatX eq_dense_;
  Eigen::LLT<MatX> aat_llt_;
};

/// Dense concave quadratic objective for synthetic instances:
/// f0(x) = q'x - 1/2 x'Px with P positive semi-definite.
class DenseQuadObjective : public subsolver::Func {
 public:
  DenseQuadObjective(MatX p, VecX q)
      : Func("quad_objective", subsolver::FuncKind::kConvexSmooth, all_indices(q.size())),
        p_(std::move(p)),
        q_(std::move(q)) {}

  double value(const VecX& x) const override {
    return q_.dot(x) - 0.5 * x.dot(p_ * x);
  }
  void gradient(const VecX& x, VecX& g) const override {
    const VecX gv = q_ - p_ * x;
    for (int i = 0; i < gv.size(); ++i) g[i] = gv[i];
  }
  void hessian(const VecX&, double w, MatX& h) const override {
    h -= w * p_;  // objective hessian is -P
  }

 private:
  static std::vector<int> all_indices(Eigen::Index n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  MatX p_;
  VecX q_;
};

}  // namespace testref
}  // namespace uavplan

#endif  // UAVPLAN_TESTS_SOLVER_REFERENCE_HPP
