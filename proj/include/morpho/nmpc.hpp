#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "morpho/dynamics.hpp"
#include "morpho/qp.hpp"

namespace morpho {

using StateWeights = Eigen::Matrix<double, 12, 1>;
using InputWeights = Eigen::Vector4d;

/// Diagonal weights of the flight (1) and transition (2) quadratic costs.
struct CostWeights {
  StateWeights q1 = StateWeights::Zero();
  StateWeights q2 = StateWeights::Zero();
  InputWeights r1 = InputWeights::Zero();
  InputWeights r2 = InputWeights::Zero();

  /// Weights used for the first wheel-landing experiment.
  static CostWeights fig5();
  /// Weights retuned for the remaining maneuvers.
  static CostWeights retuned();
  /// "fig5" or "retuned"; throws UnknownParameter otherwise.
  static CostWeights preset(const std::string& name);
};

struct OcpConfig {
  double horizon = 1.0;  // s
  int nodes = 10;
  CostWeights weights = CostWeights::fig5();
  double u_min = 0.0;
  double u_max = 1.0;
  int alpha_update_period = 10;  // controller cycles
  double control_rate = 150.0;   // Hz
  // RK4 substeps per shooting interval; each substep stays within the
  // integrator's 10 ms limit.
  int integrator_substeps = 10;
  // Hover-equilibrium input reference is capped here once the tilt makes the
  // equilibrium unreachable.
  double u_ref_max = 1.0;
  bool parallel_linearization = true;

  double dt_node() const { return horizon / nodes; }
  double control_period() const { return 1.0 / control_rate; }
  void validate() const;
};

/// Height band over which the flight cost hands over to the transition cost.
struct BlendContext {
  double z_star = 0.45;  // m, start of the transition band
  double z_g = 0.0;      // m, ground contact height
  double alpha = 1.0;
};

/// alpha = f(z) cos(phi) with f ramping from 0 at z_g to 1 at z_star.
double blend_alpha(double z, double phi, const BlendContext& ctx);

/// Convex combination of the two quadratic tracking costs. The yaw error is
/// wrapped to (-pi, pi].
double stage_cost(const StateVector& x, const AerialInput& u,
                  const StateVector& x_ref, const AerialInput& u_ref,
                  double alpha, const OcpConfig& cfg);

struct References {
  StateVector x_ref = StateVector::Zero();
  AerialInput u_ref = AerialInput::Zero();
};

struct NlpIterate {
  std::vector<StateVector> x;  // N + 1 nodes
  std::vector<AerialInput> u;  // N nodes
};

/// Multiple-shooting transcription of the receding-horizon problem at a
/// fixed tilt angle and blend factor.
struct Nlp {
  StateVector x0 = StateVector::Zero();
  References refs;
  double phi = 0.0;
  double alpha = 1.0;
  double ge_ratio = 1.0;
  OcpConfig cfg;
  RobotParams params;
  TiltedConfig tilted;

  int num_state_vars() const { return 12 * (cfg.nodes + 1); }
  int num_input_vars() const { return 4 * cfg.nodes; }
  int num_defects() const { return 12 * cfg.nodes; }
  int num_initial_conditions() const { return 12; }

  /// One shooting interval: RK4 over dt_node.
  StateVector shoot(const StateVector& x, const AerialInput& u) const;
  double objective(const NlpIterate& it) const;
  /// x[0] - x0 followed by x[k+1] - shoot(x[k], u[k]).
  Eigen::VectorXd constraint_residual(const NlpIterate& it) const;
  /// States obtained by integrating the inputs from x0.
  NlpIterate rollout(const std::vector<AerialInput>& u) const;
  /// Constant-input initial guess at the input reference.
  NlpIterate initial_guess() const;
};

Nlp transcribe(const StateVector& x0, const References& refs, double phi,
               double alpha, const OcpConfig& cfg, const RobotParams& params,
               double ge_ratio = 1.0);

/// Discrete-time sensitivities of one shooting interval.
struct NodeLinearization {
  StateMatrix a;
  InputMatrix b;
  StateVector defect;  // shoot(x[k], u[k]) - x[k+1]
};

/// Linearizes every shooting interval. The serial and OpenMP variants
/// produce bitwise-identical results.
std::vector<NodeLinearization> linearize_nodes_serial(const Nlp& nlp,
                                                      const NlpIterate& it);
std::vector<NodeLinearization> linearize_nodes_parallel(const Nlp& nlp,
                                                        const NlpIterate& it);

/// Gauss-Newton QP in the inputs, states eliminated by forward sensitivities.
/// The variables are the absolute inputs, so bounds are exact.
struct CondensedQp {
  BoxQp qp;
  Eigen::VectorXd reduced_gradient;  // GN gradient of the objective at it.u
};

CondensedQp condense(const Nlp& nlp, const NlpIterate& it,
                     const std::vector<NodeLinearization>& lin);

enum class SqpMode { kRealTime, kConverge };

struct SqpResult {
  NlpIterate iterate;
  int iterations = 0;
  double step_norm = 0.0;     // inf-norm of the last input step
  double kkt_residual = 0.0;  // of the last QP subproblem
  double stationarity = 0.0;  // projected reduced gradient at the result
  double objective = 0.0;
  int qp_iterations = 0;
};

/// Real-time mode: a single Gauss-Newton step. Converge mode: repeats until
/// the projected reduced gradient drops below 1e-9, the step below 1e-12, the
/// line search finds no descent, or 50 iterations. States are re-rolled
/// from x0 after every accepted step.
SqpResult sqp_iterate(const Nlp& nlp, const NlpIterate& it, SqpMode mode,
                      bool parallel = false);

/// Projected gradient of the single-shooting objective, inf-norm.
double projected_stationarity(const Nlp& nlp, const NlpIterate& it,
                              bool parallel = false);

struct NmpcDiagnostics {
  double alpha = 1.0;
  double objective = 0.0;
  double kkt_residual = 0.0;
  double solve_seconds = 0.0;
  int qp_iterations = 0;
  bool failed = false;
  std::string failure;  // error message when failed
};

/// Receding-horizon controller with real-time-iteration warm starts.
/// Calls are sequential per instance.
class NmpcController {
 public:
  NmpcController(OcpConfig cfg, RobotParams params, BlendContext blend = {});

  /// `height` and `phi` drive the blend factor, refreshed every
  /// alpha_update_period calls. Returns the first input of the plan.
  AerialInput mpc_step(const StateVector& x_hat, const References& refs,
                       double phi, double height);

  /// Input reference: hover equilibrium at phi, capped at u_ref_max.
  AerialInput hover_reference(double phi) const;

  void set_blend_context(const BlendContext& ctx) { blend_ = ctx; }
  void set_ground_height(double z_g) { blend_.z_g = z_g; }
  const BlendContext& blend_context() const { return blend_; }
  double alpha() const { return blend_.alpha; }
  const NmpcDiagnostics& diagnostics() const { return diag_; }
  const OcpConfig& config() const { return cfg_; }
  long cycles() const { return cycle_; }
  void reset();

 private:
  OcpConfig cfg_;
  RobotParams params_;
  BlendContext blend_;
  std::optional<NlpIterate> warm_;
  AerialInput last_u_ = AerialInput::Zero();
  long cycle_ = 0;
  NmpcDiagnostics diag_;
};

}  // namespace morpho
