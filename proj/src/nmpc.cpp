#include "morpho/nmpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>

#include <fmt/format.h>

#include "morpho/errors.hpp"

namespace morpho {

namespace {

constexpr double kFdStep = 1e-6;
constexpr double kConvergedStep = 1e-12;
constexpr double kConvergedStationarity = 1e-9;
constexpr int kMaxSqpIterations = 50;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

StateVector tracking_error(const StateVector& x, const StateVector& x_ref) {
  StateVector e = x - x_ref;
  e[idx::kYaw] = wrap_angle(e[idx::kYaw]);
  return e;
}

StateWeights blended_q(const OcpConfig& cfg, double alpha) {
  return alpha * cfg.weights.q1 + (1.0 - alpha) * cfg.weights.q2;
}

InputWeights blended_r(const OcpConfig& cfg, double alpha) {
  return alpha * cfg.weights.r1 + (1.0 - alpha) * cfg.weights.r2;
}

Eigen::VectorXd stack_inputs(const std::vector<AerialInput>& u) {
  Eigen::VectorXd out(4 * static_cast<Eigen::Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.segment<4>(4 * static_cast<Eigen::Index>(k)) = u[k];
  }
  return out;
}

std::vector<AerialInput> unstack_inputs(const Eigen::VectorXd& w) {
  std::vector<AerialInput> u(static_cast<std::size_t>(w.size() / 4));
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = w.segment<4>(4 * static_cast<Eigen::Index>(k));
  }
  return u;
}

NodeLinearization linearize_node(const Nlp& nlp, const NlpIterate& it, int k) {
  const StateVector& x = it.x[k];
  const AerialInput& u = it.u[k];
  NodeLinearization lin;
  for (int j = 0; j < 12; ++j) {
    StateVector xp = x, xm = x;
    xp[j] += kFdStep;
    xm[j] -= kFdStep;
    lin.a.col(j) = (nlp.shoot(xp, u) - nlp.shoot(xm, u)) / (2.0 * kFdStep);
  }
  for (int j = 0; j < 4; ++j) {
    AerialInput up = u, um = u;
    up[j] += kFdStep;
    um[j] -= kFdStep;
    lin.b.col(j) = (nlp.shoot(x, up) - nlp.shoot(x, um)) / (2.0 * kFdStep);
  }
  lin.defect = nlp.shoot(x, u) - it.x[k + 1];
  return lin;
}

}  // namespace

CostWeights CostWeights::fig5() {
  CostWeights w;
  w.q1 << 1, 1, 1, 10, 10, 20, 0.1, 0.1, 0.1, 3, 5, 1.5;
  w.q2 << 0, 0, 0, 0, 0, 0, 0, 0, 0, 3, 5, 1.5;
  w.r1.setConstant(0.1);
  w.r2.setConstant(0.1);
  return w;
}

CostWeights CostWeights::retuned() {
  CostWeights w;
  w.q1 << 1, 1, 1, 10, 10, 18, 0.1, 0.1, 0.8, 1.5, 2.7, 2.0;
  w.q2 << 0, 0, 0, 0, 0, 0, 0, 0, 0, 1.5, 2.7, 2.0;
  w.r1.setConstant(0.1);
  w.r2.setConstant(0.1);
  return w;
}

CostWeights CostWeights::preset(const std::string& name) {
  if (name == "fig5") return fig5();
  if (name == "retuned") return retuned();
  throw UnknownParameter("weight preset '" + name + "'");
}

void OcpConfig::validate() const {
  const auto nonneg = [](const auto& v) { return (v.array() >= 0.0).all(); };
  if (!nonneg(weights.q1) || !nonneg(weights.q2) || !nonneg(weights.r1) ||
      !nonneg(weights.r2)) {
    throw InvalidParams("cost weights must be non-negative");
  }
  if (nodes < 2) throw InvalidParams("at least two shooting nodes required");
  if (!(horizon > 0.0)) throw InvalidParams("horizon must be positive");
  if (!(u_min < u_max)) throw InvalidParams("u_min must be below u_max");
  if (alpha_update_period < 1) throw InvalidParams("alpha_update_period < 1");
  if (!(control_rate > 0.0)) throw InvalidParams("control rate must be positive");
  if (integrator_substeps < 1 || dt_node() / integrator_substeps > 0.01 + 1e-12) {
    throw InvalidParams("integrator substeps must keep each RK4 step <= 10 ms");
  }
}

double blend_alpha(double z, double phi, const BlendContext& ctx) {
  double f = 0.0;
  if (z >= ctx.z_star) {
    f = 1.0;
  } else if (z >= ctx.z_g && ctx.z_star > ctx.z_g) {
    f = (z - ctx.z_g) / (ctx.z_star - ctx.z_g);
  }
  return std::clamp(f * std::cos(phi), 0.0, 1.0);
}

double stage_cost(const StateVector& x, const AerialInput& u,
                  const StateVector& x_ref, const AerialInput& u_ref,
                  double alpha, const OcpConfig& cfg) {
  const StateVector e = tracking_error(x, x_ref);
  const AerialInput du = u - u_ref;
  const auto quad = [](const auto& v, const auto& w) {
    return (v.array().square() * w.array()).sum();
  };
  const double l1 = quad(e, cfg.weights.q1) + quad(du, cfg.weights.r1);
  const double l2 = quad(e, cfg.weights.q2) + quad(du, cfg.weights.r2);
  return alpha * l1 + (1.0 - alpha) * l2;
}

StateVector Nlp::shoot(const StateVector& x, const AerialInput& u) const {
  const double h = cfg.dt_node() / cfg.integrator_substeps;
  StateVector out = x;
  for (int i = 0; i < cfg.integrator_substeps; ++i) {
    out = rk4_step(out, u, tilted, h, params, ge_ratio);
  }
  return out;
}

double Nlp::objective(const NlpIterate& it) const {
  double total = 0.0;
  for (int k = 0; k < cfg.nodes; ++k) {
    total += stage_cost(it.x[k], it.u[k], refs.x_ref, refs.u_ref, alpha, cfg);
  }
  return total;
}

Eigen::VectorXd Nlp::constraint_residual(const NlpIterate& it) const {
  Eigen::VectorXd r(num_initial_conditions() + num_defects());
  r.head<12>() = it.x[0] - x0;
  for (int k = 0; k < cfg.nodes; ++k) {
    r.segment<12>(12 * (k + 1)) = it.x[k + 1] - shoot(it.x[k], it.u[k]);
  }
  return r;
}

NlpIterate Nlp::rollout(const std::vector<AerialInput>& u) const {
  NlpIterate it;
  it.u = u;
  it.x.resize(u.size() + 1);
  it.x[0] = x0;
  for (std::size_t k = 0; k < u.size(); ++k) it.x[k + 1] = shoot(it.x[k], u[k]);
  return it;
}

NlpIterate Nlp::initial_guess() const {
  const AerialInput u0 = refs.u_ref.cwiseMax(cfg.u_min).cwiseMin(cfg.u_max);
  return rollout(std::vector<AerialInput>(static_cast<std::size_t>(cfg.nodes), u0));
}

Nlp transcribe(const StateVector& x0, const References& refs, double phi,
               double alpha, const OcpConfig& cfg, const RobotParams& params,
               double ge_ratio) {
  cfg.validate();
  Nlp nlp;
  nlp.x0 = x0;
  nlp.refs = refs;
  nlp.phi = phi;
  nlp.alpha = alpha;
  nlp.ge_ratio = ge_ratio;
  nlp.cfg = cfg;
  nlp.params = params;
  nlp.tilted = configure(params, phi);
  return nlp;
}

std::vector<NodeLinearization> linearize_nodes_serial(const Nlp& nlp,
                                                      const NlpIterate& it) {
  std::vector<NodeLinearization> out(static_cast<std::size_t>(nlp.cfg.nodes));
  for (int k = 0; k < nlp.cfg.nodes; ++k) out[k] = linearize_node(nlp, it, k);
  return out;
}

std::vector<NodeLinearization> linearize_nodes_parallel(const Nlp& nlp,
                                                        const NlpIterate& it) {
  const int n = nlp.cfg.nodes;
  std::vector<NodeLinearization> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < n; ++k) {
    try {
      out[k] = linearize_node(nlp, it, k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

CondensedQp condense(const Nlp& nlp, const NlpIterate& it,
                     const std::vector<NodeLinearization>& lin) {
  const int n = nlp.cfg.nodes;
  const int nu = 4 * n;
  const StateWeights q = blended_q(nlp.cfg, nlp.alpha);
  const InputWeights r = blended_r(nlp.cfg, nlp.alpha);

  // x[k] + dx[k] = x[k] + g[k] + G[k] dU, propagated through the linearized
  // shooting intervals.
  Eigen::Matrix<double, 12, Eigen::Dynamic> g_mat =
      Eigen::Matrix<double, 12, Eigen::Dynamic>::Zero(12, nu);
  StateVector g_vec = nlp.x0 - it.x[0];

  Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(nu, nu);
  Eigen::VectorXd gradient = Eigen::VectorXd::Zero(nu);
  for (int k = 0; k < n; ++k) {
    const StateVector e = tracking_error(it.x[k] + g_vec, nlp.refs.x_ref);
    if (k > 0) {
      const auto cols = 4 * k;
      const auto gk = g_mat.leftCols(cols);
      hessian.topLeftCorner(cols, cols).noalias() +=
          2.0 * gk.transpose() * q.asDiagonal() * gk;
      gradient.head(cols).noalias() += 2.0 * gk.transpose() * (q.cwiseProduct(e));
    }
    const AerialInput du = it.u[k] - nlp.refs.u_ref;
    hessian.diagonal().segment<4>(4 * k) += 2.0 * r;
    gradient.segment<4>(4 * k) += 2.0 * r.cwiseProduct(du);

    // Advance the sensitivities to node k + 1.
    const auto& nl = lin[static_cast<std::size_t>(k)];
    g_mat.leftCols(4 * k) = nl.a * g_mat.leftCols(4 * k);
    g_mat.middleCols<4>(4 * k) = nl.b;
    g_vec = nl.a * g_vec + nl.defect;
  }

  CondensedQp out;
  const Eigen::VectorXd u_bar = stack_inputs(it.u);
  out.qp.hessian = 0.5 * (hessian + hessian.transpose());
  out.qp.gradient = gradient - out.qp.hessian * u_bar;
  out.qp.lower = Eigen::VectorXd::Constant(nu, nlp.cfg.u_min);
  out.qp.upper = Eigen::VectorXd::Constant(nu, nlp.cfg.u_max);
  out.reduced_gradient = gradient;
  return out;
}

namespace {

std::vector<NodeLinearization> linearize(const Nlp& nlp, const NlpIterate& it,
                                         bool parallel) {
  return parallel ? linearize_nodes_parallel(nlp, it)
                  : linearize_nodes_serial(nlp, it);
}

double natural_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& grad,
                        double lo, double hi) {
  const Eigen::VectorXd projected = (u - grad).cwiseMax(lo).cwiseMin(hi);
  return (u - projected).cwiseAbs().maxCoeff();
}

}  // namespace

double projected_stationarity(const Nlp& nlp, const NlpIterate& it,
                              bool parallel) {
  const NlpIterate rolled = nlp.rollout(it.u);
  const auto cq = condense(nlp, rolled, linearize(nlp, rolled, parallel));
  return natural_residual(stack_inputs(rolled.u), cq.reduced_gradient,
                          nlp.cfg.u_min, nlp.cfg.u_max);
}

SqpResult sqp_iterate(const Nlp& nlp, const NlpIterate& start, SqpMode mode,
                      bool parallel) {
  const int max_iterations = mode == SqpMode::kRealTime ? 1 : kMaxSqpIterations;
  const int max_backtracks = mode == SqpMode::kRealTime ? 6 : 30;

  SqpResult res;
  NlpIterate cur = start;
  double merit = nlp.objective(nlp.rollout(cur.u));
  for (int iter = 0; iter < max_iterations; ++iter) {
    const auto cq = condense(nlp, cur, linearize(nlp, cur, parallel));
    const Eigen::VectorXd u_bar = stack_inputs(cur.u);
    const QpResult qp = qp_solve(cq.qp, &u_bar);
    res.iterations = iter + 1;
    res.qp_iterations += qp.iterations;
    res.kkt_residual = qp.kkt_residual;

    const Eigen::VectorXd step = qp.x - u_bar;
    res.step_norm = step.cwiseAbs().maxCoeff();
    if (!std::isfinite(res.step_norm)) throw SolverFailure("non-finite SQP step");
    if (mode == SqpMode::kConverge &&
        (res.step_norm < kConvergedStep ||
         natural_residual(u_bar, cq.reduced_gradient, nlp.cfg.u_min, nlp.cfg.u_max) <
             kConvergedStationarity)) {
      cur = nlp.rollout(cur.u);
      break;
    }

    // Backtracking on the rolled-out objective. The candidate
    // (1 - t) u_bar + t u_qp is a convex combination of feasible points with
    // t a power of two, so it stays inside [u_min, u_max] without clipping.
    const double slope = std::min(cq.reduced_gradient.dot(step), 0.0);
    NlpIterate best;
    double best_merit = std::numeric_limits<double>::infinity();
    bool accepted = false;
    double t = 1.0;
    for (int bt = 0; bt <= max_backtracks; ++bt, t *= 0.5) {
      const Eigen::VectorXd trial_u = t == 1.0 ? qp.x : ((1.0 - t) * u_bar + t * qp.x).eval();
      NlpIterate trial = nlp.rollout(unstack_inputs(trial_u));
      const double f = nlp.objective(trial);
      if (f < best_merit) {
        best_merit = f;
        best = std::move(trial);
      }
      if (f <= merit + 1e-4 * t * slope && f < merit) {
        accepted = true;
        break;
      }
    }
    if (!accepted && mode == SqpMode::kConverge) {
      // No descent along the GN direction: stationary to working precision.
      cur = nlp.rollout(cur.u);
      break;
    }
    cur = std::move(best);
    merit = best_merit;
  }

  res.iterate = std::move(cur);
  res.objective = nlp.objective(res.iterate);
  if (mode == SqpMode::kConverge) {
    res.stationarity = projected_stationarity(nlp, res.iterate, parallel);
  }
  return res;
}

NmpcController::NmpcController(OcpConfig cfg, RobotParams params,
                               BlendContext blend)
    : cfg_(std::move(cfg)), params_(std::move(params)), blend_(blend) {
  cfg_.validate();
  params_.validate();
}

void NmpcController::reset() {
  warm_.reset();
  cycle_ = 0;
  last_u_.setZero();
  diag_ = {};
}

AerialInput NmpcController::hover_reference(double phi) const {
  const double u = std::min(hover_command(params_, phi), cfg_.u_ref_max);
  return AerialInput::Constant(std::clamp(u, cfg_.u_min, cfg_.u_max));
}

AerialInput NmpcController::mpc_step(const StateVector& x_hat,
                                     const References& refs, double phi,
                                     double height) {
  const auto start = std::chrono::steady_clock::now();
  if (cycle_ % cfg_.alpha_update_period == 0) {
    blend_.alpha = blend_alpha(height, phi, blend_);
  }
  ++cycle_;

  diag_ = {};
  diag_.alpha = blend_.alpha;
  const Nlp nlp = transcribe(x_hat, refs, phi, blend_.alpha, cfg_, params_);

  NlpIterate init;
  if (warm_) {
    // Shift the previous plan forward by one control period.
    const double s = std::clamp(cfg_.control_period() / cfg_.dt_node(), 0.0, 1.0);
    init = *warm_;
    const int n = cfg_.nodes;
    for (int k = 0; k < n; ++k) {
      const int next = std::min(k + 1, n - 1);
      init.u[k] = (1.0 - s) * warm_->u[k] + s * warm_->u[next];
      init.x[k] = (1.0 - s) * warm_->x[k] + s * warm_->x[k + 1];
    }
  } else {
    init = nlp.initial_guess();
  }

  try {
    const SqpResult r =
        sqp_iterate(nlp, init, SqpMode::kRealTime, cfg_.parallel_linearization);
    const AerialInput u = r.iterate.u.front();
    if (!u.allFinite()) throw SolverFailure("non-finite input");
    warm_ = r.iterate;
    last_u_ = u;
    diag_.objective = r.objective;
    diag_.kkt_residual = r.kkt_residual;
    diag_.qp_iterations = r.qp_iterations;
  } catch (const Error& e) {
    // Hold the previous command and cold-start the next cycle.
    warm_.reset();
    diag_.failed = true;
    diag_.failure = e.what();
  }
  diag_.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return last_u_;
}

}  // namespace morpho
