#include "morpho/qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "morpho/errors.hpp"

namespace morpho {

namespace {

enum class Bound : signed char { kFree = 0, kLower = -1, kUpper = 1 };

// Solves H_FF p = rhs, regularizing the diagonal if the factorization fails.
Eigen::VectorXd solve_free(const Eigen::MatrixXd& hff, const Eigen::VectorXd& rhs) {
  Eigen::LLT<Eigen::MatrixXd> llt(hff);
  if (llt.info() == Eigen::Success) return llt.solve(rhs);
  const double scale = std::max(1.0, hff.diagonal().cwiseAbs().maxCoeff());
  for (double reg = 1e-12; reg <= 1e-4; reg *= 100.0) {
    Eigen::MatrixXd h = hff;
    h.diagonal().array() += reg * scale;
    llt.compute(h);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
  }
  throw NumericalBreakdown("reduced Hessian is not positive definite");
}

}  // namespace

double box_kkt_residual(const BoxQp& qp, const Eigen::VectorXd& x) {
  const Eigen::VectorXd grad = qp.hessian * x + qp.gradient;
  const Eigen::VectorXd projected =
      (x - grad).cwiseMax(qp.lower).cwiseMin(qp.upper);
  return (x - projected).cwiseAbs().maxCoeff();
}

double qp_objective(const BoxQp& qp, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(qp.hessian * x) + qp.gradient.dot(x);
}

QpResult qp_solve(const BoxQp& qp, const Eigen::VectorXd* warm_start,
                  const QpOptions& options) {
  const Eigen::Index n = qp.gradient.size();
  if (qp.hessian.rows() != n || qp.hessian.cols() != n || qp.lower.size() != n ||
      qp.upper.size() != n) {
    throw NumericalBreakdown("inconsistent QP dimensions");
  }
  if ((qp.lower.array() > qp.upper.array()).any()) {
    throw NumericalBreakdown("lower bound exceeds upper bound");
  }

  Eigen::VectorXd x = warm_start ? *warm_start : Eigen::VectorXd::Zero(n);
  std::vector<Bound> state(static_cast<std::size_t>(n), Bound::kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] <= qp.lower[i]) {
      x[i] = qp.lower[i];
      state[i] = Bound::kLower;
    } else if (x[i] >= qp.upper[i]) {
      x[i] = qp.upper[i];
      state[i] = Bound::kUpper;
    }
  }

  QpResult result;
  std::vector<Eigen::Index> free;
  free.reserve(static_cast<std::size_t>(n));
  // Set after an unblocked step: x minimizes over the current face, and
  // recomputing the step would only chase roundoff.
  bool on_face_min = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter + 1;
    const Eigen::VectorXd grad = qp.hessian * x + qp.gradient;

    free.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (state[i] == Bound::kFree) free.push_back(i);
    }
    const auto nf = static_cast<Eigen::Index>(free.size());

    Eigen::VectorXd step_free = Eigen::VectorXd::Zero(nf);
    if (nf > 0 && !on_face_min) {
      Eigen::MatrixXd hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs[a] = -grad[free[a]];
        for (Eigen::Index b = 0; b < nf; ++b) hff(a, b) = qp.hessian(free[a], free[b]);
      }
      step_free = solve_free(hff, rhs);
      if (!step_free.allFinite()) throw NumericalBreakdown("non-finite QP step");
    }

    const double step_scale = std::max(1.0, x.cwiseAbs().maxCoeff());
    if (nf == 0 || on_face_min ||
        step_free.cwiseAbs().maxCoeff() <= options.tolerance * step_scale) {
      // Stationary on the current face: check the bound multipliers.
      Eigen::Index release = -1;
      double worst = -options.tolerance * std::max(1.0, grad.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < n; ++i) {
        double multiplier = 0.0;
        if (state[i] == Bound::kLower) multiplier = grad[i];
        if (state[i] == Bound::kUpper) multiplier = -grad[i];
        if (state[i] != Bound::kFree && multiplier < worst) {
          worst = multiplier;
          release = i;
        }
      }
      if (release < 0) {
        result.x = x;
        result.kkt_residual = box_kkt_residual(qp, x);
        return result;
      }
      state[release] = Bound::kFree;
      on_face_min = false;
      continue;
    }

    // Longest feasible fraction of the step.
    double alpha = 1.0;
    Eigen::Index blocking = -1;
    Bound blocking_side = Bound::kFree;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free[a];
      const double p = step_free[a];
      if (p < 0.0) {
        const double t = (qp.lower[i] - x[i]) / p;
        if (t < alpha) {
          alpha = t;
          blocking = i;
          blocking_side = Bound::kLower;
        }
      } else if (p > 0.0) {
        const double t = (qp.upper[i] - x[i]) / p;
        if (t < alpha) {
          alpha = t;
          blocking = i;
          blocking_side = Bound::kUpper;
        }
      }
    }
    alpha = std::max(alpha, 0.0);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free[a];
      x[i] = std::clamp(x[i] + alpha * step_free[a], qp.lower[i], qp.upper[i]);
    }
    on_face_min = blocking < 0;
    if (blocking >= 0) {
      state[blocking] = blocking_side;
      x[blocking] = blocking_side == Bound::kLower ? qp.lower[blocking]
                                                   : qp.upper[blocking];
    }
  }
  throw MaxIterations(fmt::format("active-set QP exceeded {} iterations",
                                  options.max_iterations));
}

}  // namespace morpho
