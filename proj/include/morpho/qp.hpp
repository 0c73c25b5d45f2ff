#pragma once

#include <Eigen/Core>

namespace morpho {

/// minimize 0.5 x^T H x + g^T x  subject to  lower <= x <= upper.
struct BoxQp {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct QpOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;
};

struct QpResult {
  Eigen::VectorXd x;
  double kkt_residual = 0.0;  // infinity norm of the natural residual
  int iterations = 0;
};

/// Primal active-set method. Active variables sit exactly on their bounds.
/// An optional warm start is projected onto the box before use.
///
/// Throws MaxIterations or NumericalBreakdown.
QpResult qp_solve(const BoxQp& qp, const Eigen::VectorXd* warm_start = nullptr,
                  const QpOptions& options = {});

/// || x - clamp(x - (H x + g), lower, upper) ||_inf
double box_kkt_residual(const BoxQp& qp, const Eigen::VectorXd& x);

double qp_objective(const BoxQp& qp, const Eigen::VectorXd& x);

}  // namespace morpho
