#include "morpho/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "morpho/dynamics.hpp"
#include "morpho/errors.hpp"
#include "morpho/ground_effect.hpp"
#include "morpho/nmpc.hpp"
#include "morpho/qp.hpp"
#include "morpho/scenario.hpp"
#include "morpho/sim.hpp"
#include "morpho/sim_log.hpp"
#include "morpho/tilt_mechanism.hpp"

namespace morpho {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

using guidance::Mode;

// Shared state for one suite run: inputs, cached runs, aggregate stats.
class Suite {
 public:
  explicit Suite(AcceptanceConfig cfg) : cfg_(std::move(cfg)) {}

  const RobotParams& params() {
    if (!params_) params_ = load_robot_params(cfg_.params_path);
    return *params_;
  }

  const GroundEffectTable& table() {
    if (!table_) table_ = load_table_file(cfg_.table_path);
    return *table_;
  }

  Scenario scenario(const std::string& name) {
    Scenario s = load_scenario(cfg_.scenario_dir / (name + ".yaml"));
    s.seed = cfg_.seed;
    return s;
  }

  // Runs and records a scenario; `tag` names the output subdirectory.
  const SimLog& run_tagged(const std::string& tag, const Scenario& s) {
    const auto start = std::chrono::steady_clock::now();
    SimLog log = run(s, params(), s.ground_effect ? &table() : nullptr);
    wall_[tag] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!cfg_.out_dir.empty()) write_run_outputs(log, cfg_.out_dir / tag);
    if (log.controller_calls > 0) {
      solve_total_ += log.mean_solve_seconds * static_cast<double>(log.controller_calls);
      solve_calls_ += log.controller_calls;
    }
    for (const auto& r : log.rows) {
      ++samples_;
      if (!(r.u.array() >= 0.0).all() || !(r.u.array() <= 1.0).all()) ++out_of_bounds_;
    }
    return logs_.emplace(tag, std::move(log)).first->second;
  }

  const SimLog& cached(const std::string& tag, const std::function<Scenario()>& make) {
    const auto it = logs_.find(tag);
    if (it != logs_.end()) return it->second;
    return run_tagged(tag, make());
  }

  double wall(const std::string& tag) const { return wall_.at(tag); }
  long samples() const { return samples_; }
  long out_of_bounds() const { return out_of_bounds_; }
  long solve_calls() const { return solve_calls_; }
  double mean_solve() const {
    return solve_calls_ > 0 ? solve_total_ / static_cast<double>(solve_calls_) : 0.0;
  }
  std::uint64_t seed() const { return cfg_.seed; }

 private:
  AcceptanceConfig cfg_;
  std::optional<RobotParams> params_;
  std::optional<GroundEffectTable> table_;
  std::map<std::string, SimLog> logs_;
  std::map<std::string, double> wall_;
  long samples_ = 0;
  long out_of_bounds_ = 0;
  double solve_total_ = 0.0;
  long solve_calls_ = 0;
};

struct Check {
  bool pass = true;
  std::vector<std::string> measured;
  std::vector<std::string> target;

  void expect(bool ok, std::string m, std::string t) {
    pass = pass && ok;
    measured.push_back(std::move(m));
    target.push_back(std::move(t));
  }
};

const SimLog& wheel_landing(Suite& s) {
  return s.cached("wheel_landing", [&] { return s.scenario("wheel_landing"); });
}

const SimLog& wheel_landing_no_ge(Suite& s) {
  return s.cached("wheel_landing_no_ge", [&] {
    Scenario sc = s.scenario("wheel_landing");
    sc.ground_effect = false;
    return sc;
  });
}

Check criterion_landing(Suite& s) {
  Check c;
  const SimLog& log = wheel_landing(s);
  const Summary sum = summarize(log);
  c.expect(sum.touched_down && log.outcome == ContactKind::kTouchdown,
           fmt::format("outcome {}", contact_name(log.outcome)), "touchdown");
  if (!sum.touched_down) return c;
  const auto& m = sum.touchdown;
  c.expect(m.phi_g >= 60.0, fmt::format("phi_g {:.2f} deg", m.phi_g), ">= 60");
  c.expect(std::abs(m.roll) <= 5.0 && std::abs(m.pitch) <= 5.0,
           fmt::format("roll {:.2f} pitch {:.2f} deg", m.roll, m.pitch), "<= 5");
  c.expect(m.impact_speed <= 0.5, fmt::format("impact {:.3f} m/s", m.impact_speed),
           "<= 0.5");
  c.expect(m.max_mean_thrust <= 0.9, fmt::format("u_bar peak {:.3f}", m.max_mean_thrust),
           "<= 0.9");
  const double wall = s.wall("wheel_landing");
  c.expect(wall <= 60.0, fmt::format("runtime {:.1f} s", wall), "<= 60 s");
  return c;
}

Check criterion_past_saturation(Suite& s) {
  Check c;
  const Scenario sc = s.scenario("wheel_landing");
  c.expect(std::abs(sc.supervisor.phi_transition - 70.0 * kDeg) < 1e-12,
           fmt::format("cap {:.1f} deg", sc.supervisor.phi_transition / kDeg), "70");
  const SimLog& log = wheel_landing(s);
  const double critical = critical_angle(s.params()) / kDeg;
  const Summary sum = summarize(log);
  c.expect(sum.touched_down && sum.touchdown.phi_g > critical,
           fmt::format("phi_g {:.2f} deg", sum.touchdown.phi_g),
           fmt::format("> critical {:.2f} deg", critical));
  return c;
}

Check criterion_ground_effect(Suite& s) {
  Check c;
  const Summary on = summarize(wheel_landing(s));
  const Summary off = summarize(wheel_landing_no_ge(s));
  c.expect(on.touched_down && off.touched_down &&
               off.touchdown.impact_speed > on.touchdown.impact_speed,
           fmt::format("impact on {:.3f} off {:.3f} m/s", on.touchdown.impact_speed,
                       off.touchdown.impact_speed),
           "off > on");
  return c;
}

std::string sequence_text(const std::vector<Mode>& seq) {
  std::string out;
  for (Mode m : seq) {
    if (!out.empty()) out += ">";
    out += guidance::mode_name(m);
  }
  return out;
}

Check criterion_driving_takeoff(Suite& s) {
  Check c;
  const SimLog& log =
      s.cached("driving_takeoff", [&] { return s.scenario("driving_takeoff"); });
  const auto seq = log.mode_sequence();
  const std::vector<Mode> want{Mode::kGrounded, Mode::kFlight, Mode::kTransition,
                               Mode::kGrounded};
  c.expect(seq == want, sequence_text(seq), sequence_text(want));
  const Summary sum = summarize(log);
  c.expect(sum.touched_down && sum.touchdown.phi_g >= 55.0,
           fmt::format("phi_g {:.2f} deg", sum.touchdown.phi_g), ">= 55");
  c.expect(sum.touched_down && sum.touchdown.max_mean_thrust <= 0.95,
           fmt::format("u_bar peak {:.3f}", sum.touchdown.max_mean_thrust), "<= 0.95");
  return c;
}

Check criterion_slope(Suite& s) {
  Check c;
  const SimLog& morph =
      s.cached("slope_landing", [&] { return s.scenario("slope_landing"); });
  c.expect(morph.outcome == ContactKind::kTouchdown && !morph.touchdowns.empty(),
           fmt::format("morphed {}", contact_name(morph.outcome)), "touchdown");
  c.expect(morph.drive_distance >= 1.0,
           fmt::format("driven {:.2f} m", morph.drive_distance), ">= 1 m");
  const SimLog& quad =
      s.cached("slope_quad_control", [&] { return s.scenario("slope_quad_control"); });
  c.expect(quad.outcome == ContactKind::kTipover,
           fmt::format("phi=0 {} ({})", contact_name(quad.outcome), quad.tipover_reason),
           "tipover");
  return c;
}

Check criterion_alpha(Suite&) {
  Check c;
  const BlendContext ctx{0.45, 0.0, 1.0};
  const double a1 = blend_alpha(0.45, 0.0, ctx);
  const double a2 = blend_alpha(1.0, 0.0, ctx);
  c.expect(a1 == 1.0 && a2 == 1.0, fmt::format("alpha(z>=z*,0) {} {}", a1, a2), "1");
  double worst_ground = 0.0;
  for (int i = 0; i <= 90; ++i) {
    worst_ground = std::max(worst_ground, std::abs(blend_alpha(0.0, i * kDeg, ctx)));
  }
  c.expect(worst_ground == 0.0, fmt::format("alpha(z_g,.) max {}", worst_ground), "0");
  const double mid = blend_alpha(0.225, kPi / 3.0, ctx);
  c.expect(std::abs(mid - 0.25) <= 1e-15, fmt::format("alpha(mid,60) {:.17g}", mid),
           "0.25");

  // Continuity: neighbouring grid points 1e-6 apart never jump.
  constexpr double kStep = 1e-6;
  double worst_jump = 0.0;
  for (double z = -0.05; z <= 0.6; z += 0.0013) {
    for (double deg = 0.0; deg <= 90.0; deg += 1.7) {
      const double phi = deg * kDeg;
      const double a = blend_alpha(z, phi, ctx);
      worst_jump = std::max({worst_jump, std::abs(blend_alpha(z + kStep, phi, ctx) - a),
                             std::abs(blend_alpha(z, phi + kStep, ctx) - a)});
    }
  }
  for (double zb : {ctx.z_g, ctx.z_star}) {
    for (double sgn : {-1.0, 1.0}) {
      worst_jump = std::max(worst_jump, std::abs(blend_alpha(zb + sgn * kStep, 0.3, ctx) -
                                                 blend_alpha(zb, 0.3, ctx)));
    }
  }
  // The ramp slope is 1/0.45 per metre, so a 1e-6 step moves alpha by < 3e-6.
  c.expect(worst_jump < 3e-6, fmt::format("max jump {:.2e}", worst_jump), "< 3e-6");
  return c;
}

// Brute force over the 3^2 active sets of a 2-variable box QP.
Eigen::Vector2d brute_force_qp(const BoxQp& qp) {
  std::optional<Eigen::Vector2d> best;
  double best_f = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int st[2] = {a, b};  // 0 free, 1 lower, 2 upper
      Eigen::Vector2d x = Eigen::Vector2d::Zero();
      std::vector<int> free;
      for (int i = 0; i < 2; ++i) {
        if (st[i] == 1) x[i] = qp.lower[i];
        if (st[i] == 2) x[i] = qp.upper[i];
        if (st[i] == 0) free.push_back(i);
      }
      if (free.size() == 2) {
        x = qp.hessian.ldlt().solve(-qp.gradient);
      } else if (free.size() == 1) {
        const int i = free[0];
        const int j = 1 - i;
        x[i] = -(qp.gradient[i] + qp.hessian(i, j) * x[j]) / qp.hessian(i, i);
      }
      if (x[0] < qp.lower[0] || x[0] > qp.upper[0] || x[1] < qp.lower[1] ||
          x[1] > qp.upper[1]) {
        continue;
      }
      const double f = qp_objective(qp, x);
      if (!best || f < best_f) {
        best = x;
        best_f = f;
      }
    }
  }
  return *best;
}

Check criterion_nmpc(Suite& s) {
  Check c;
  // Force the closed-loop runs so their samples are counted.
  wheel_landing(s);
  wheel_landing_no_ge(s);
  c.expect(s.samples() > 0 && s.out_of_bounds() == 0,
           fmt::format("{} of {} samples outside [0,1]", s.out_of_bounds(), s.samples()),
           "0");

  std::mt19937_64 rng(s.seed() + 7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  double worst_stat = 0.0;
  double worst_feas = 0.0;
  int solved = 0;
  OcpConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    StateVector x0 = StateVector::Zero();
    x0.segment<3>(idx::kPos) = Vec3(0.3 * unit(rng), 0.3 * unit(rng), 1.0 + 0.3 * unit(rng));
    x0.segment<3>(idx::kEuler) = 0.1 * Vec3(unit(rng), unit(rng), unit(rng));
    x0.segment<3>(idx::kVel) = 0.3 * Vec3(unit(rng), unit(rng), unit(rng));
    x0.segment<3>(idx::kOmega) = 0.2 * Vec3(unit(rng), unit(rng), unit(rng));
    const double phi = 60.0 * kDeg * frac(rng);
    References refs;
    refs.x_ref.segment<3>(idx::kPos) = Vec3(0.0, 0.0, 1.0);
    refs.u_ref = AerialInput::Constant(std::min(1.0, hover_command(s.params(), phi)));
    cfg.weights = trial % 2 == 0 ? CostWeights::fig5() : CostWeights::retuned();
    const Nlp nlp = transcribe(x0, refs, phi, frac(rng), cfg, s.params());
    try {
      const SqpResult r = sqp_iterate(nlp, nlp.initial_guess(), SqpMode::kConverge);
      worst_stat = std::max(worst_stat, r.stationarity);
      worst_feas = std::max(worst_feas,
                            nlp.constraint_residual(r.iterate).cwiseAbs().maxCoeff());
      ++solved;
    } catch (const Error&) {
      worst_stat = std::max(worst_stat, 1.0);
    }
  }
  c.expect(solved == 20 && worst_stat < 1e-6,
           fmt::format("{} of 20 solved, stationarity {:.2e}", solved, worst_stat),
           "< 1e-6");
  c.expect(worst_feas < 1e-8, fmt::format("defects {:.2e}", worst_feas), "< 1e-8");

  double worst_qp = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::Matrix2d l;
    l << 0.2 + frac(rng), 0.0, unit(rng), 0.2 + frac(rng);
    BoxQp qp;
    qp.hessian = l * l.transpose();
    qp.gradient = 2.0 * Eigen::Vector2d(unit(rng), unit(rng));
    qp.lower = Eigen::Vector2d(-frac(rng), -frac(rng));
    qp.upper = Eigen::Vector2d(frac(rng), frac(rng));
    const QpResult r = qp_solve(qp);
    worst_qp = std::max(worst_qp, (r.x - brute_force_qp(qp)).cwiseAbs().maxCoeff());
  }
  c.expect(worst_qp <= 1e-12, fmt::format("2-var QP mismatch {:.1e}", worst_qp),
           "<= 1e-12");
  return c;
}

Check criterion_hover(Suite& s) {
  Check c;
  const Scenario sc = s.scenario("hover_step");
  const SimLog& log = s.cached("hover_step", [&] { return sc; });
  const Vec3 target = sc.initial.segment<3>(idx::kPos) + sc.reference_offset;
  c.expect(std::abs(sc.reference_offset.norm() - 0.5) < 1e-12,
           fmt::format("step {:.2f} m", sc.reference_offset.norm()), "0.5 m");
  double settle = 0.0;
  for (const auto& r : log.rows) {
    if ((r.x.segment<3>(idx::kPos) - target).norm() > 0.02) settle = r.t;
  }
  settle += 1.0 / sc.control_rate;
  c.expect(settle <= 2.0, fmt::format("settled in {:.2f} s", settle), "<= 2 s");
  double sum = 0.0;
  int n = 0;
  for (const auto& r : log.rows) {
    if (r.t >= sc.duration - 1.0) {
      sum += r.u.mean();
      ++n;
    }
  }
  const double steady = n > 0 ? sum / n : 0.0;
  c.expect(std::abs(steady - 0.476) <= 0.01, fmt::format("steady u_bar {:.4f}", steady),
           "0.476 +- 0.01");
  return c;
}

StateVector mirror(const StateVector& x) {
  StateVector m = x;
  m[idx::kY] = -x[idx::kY];
  m[idx::kYaw] = -x[idx::kYaw];
  m[idx::kRoll] = -x[idx::kRoll];
  m[idx::kVy] = -x[idx::kVy];
  m[idx::kWx] = -x[idx::kWx];
  m[idx::kWz] = -x[idx::kWz];
  return m;
}

AerialInput swap_sides(const AerialInput& u) { return {u[1], u[0], u[3], u[2]}; }

Check criterion_dynamics(Suite& s) {
  Check c;
  const RobotParams& p = s.params();

  // Ballistic flight: thrust off, tumbling body.
  {
    const TiltedConfig cfg = configure(p, 0.4);
    StateVector x = StateVector::Zero();
    x.segment<3>(idx::kPos) = Vec3(0.0, 0.0, 10.0);
    x.segment<3>(idx::kVel) = Vec3(1.0, -0.5, 3.0);
    x.segment<3>(idx::kOmega) = Vec3(0.8, -0.6, 1.1);
    const double e0 = mechanical_energy(x, cfg, p);
    for (int k = 0; k < 1000; ++k) x = rk4_step(x, AerialInput::Zero(), cfg, 1e-3, p);
    const double drift = std::abs(mechanical_energy(x, cfg, p) - e0) / std::abs(e0);
    c.expect(drift < 1e-6, fmt::format("energy drift {:.1e}", drift), "< 1e-6");
  }

  // Convergence order against a fine-step reference.
  {
    const TiltedConfig cfg = configure(p, 0.6);
    StateVector x0 = StateVector::Zero();
    x0.segment<3>(idx::kEuler) = Vec3(0.2, -0.1, 0.15);
    x0.segment<3>(idx::kVel) = Vec3(0.5, 0.2, -0.3);
    x0.segment<3>(idx::kOmega) = Vec3(1.5, -1.0, 2.0);
    const AerialInput u(0.9, 0.3, 0.6, 0.75);
    const auto integrate_with = [&](int steps) {
      StateVector x = x0;
      for (int k = 0; k < steps; ++k) x = rk4_step(x, u, cfg, 0.5 / steps, p);
      return x;
    };
    const StateVector ref = integrate_with(800);
    const double e1 = (integrate_with(50) - ref).norm();
    const double e2 = (integrate_with(100) - ref).norm();
    const double order = std::log2(e1 / e2);
    c.expect(order >= 3.8, fmt::format("RK4 order {:.2f}", order), ">= 3.8");
  }

  // Left/right mirror symmetry.
  {
    double worst = 0.0;
    std::mt19937_64 rng(s.seed() + 11);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      StateVector x;
      for (int i = 0; i < 12; ++i) x[i] = 0.5 * unit(rng);
      AerialInput u;
      for (int i = 0; i < 4; ++i) u[i] = 0.5 + 0.5 * unit(rng);
      const double phi = 0.75 * (1.0 + unit(rng));
      const StateVector lhs = eom(mirror(x), swap_sides(u), phi, p);
      const StateVector rhs = mirror(eom(x, u, phi, p));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    c.expect(worst <= 1e-9, fmt::format("mirror error {:.1e}", worst), "<= 1e-9");
  }

  // Roll command -> lateral force at hover, relative to sin(phi).
  {
    const AerialInput roll_dir(1.0, -1.0, 1.0, -1.0);
    const auto coupling = [&](double phi) {
      const double u0 = hover_command(p, phi);
      const Linearization lin =
          linearize(state_at(Vec3(0.0, 0.0, 1.0)), AerialInput::Constant(u0), phi, p);
      return p.mass() * (lin.b.row(idx::kVy) * roll_dir)(0);
    };
    const double c50 = coupling(50.0 * kDeg);
    const double k50 = c50 / std::sin(50.0 * kDeg);
    double worst = 0.0;
    for (double deg : {20.0, 35.0, 50.0, 65.0}) {
      worst = std::max(worst, std::abs(coupling(deg * kDeg) / std::sin(deg * kDeg) / k50 - 1.0));
    }
    c.expect(std::abs(c50) > 1e-3 && worst <= 0.01,
             fmt::format("dF_y/du {:.3f} N, sin-ratio spread {:.1e}", c50, worst),
             "nonzero, <= 1%");
  }
  return c;
}

// Independent oracle: for fixed phi, bisection on the first closure equation
// for theta in [0, pi], then x from the second.
double oracle_displacement(double phi, const tilt::LinkageGeometry& g) {
  const double target = g.dx - g.h - g.d2 * std::cos(phi);
  double lo = 0.0, hi = kPi;  // d1 cos(theta) decreases on [0, pi]
  if (g.d1 * std::cos(lo) <= target) {
    hi = lo;
  } else {
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      (g.d1 * std::cos(mid) > target ? lo : hi) = mid;
    }
  }
  const double theta = 0.5 * (lo + hi);
  return g.dy - g.d1 * std::sin(theta) + g.d2 * std::sin(phi);
}

Check criterion_kinematics(Suite& s) {
  Check c;
  const tilt::LinkageGeometry g = s.params().linkage;
  double worst_trip = 0.0;
  double worst_res = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double phi = (kPi / 2.0) * i / 99.0;
    const double x = tilt::solve_inverse(phi, g);
    const auto sol = tilt::solve_forward(x, g);
    worst_trip = std::max(worst_trip, std::abs(sol.phi - phi));
    const auto r = tilt::closure_residual(g, x, sol.theta, sol.phi);
    worst_res = std::max({worst_res, std::abs(r[0]), std::abs(r[1])});
  }
  c.expect(worst_trip <= 1e-9, fmt::format("roundtrip {:.1e} rad", worst_trip), "<= 1e-9");
  c.expect(worst_res <= 1e-10, fmt::format("closure {:.1e} cm", worst_res), "<= 1e-10");

  const tilt::TiltMechanism mech(g);
  const double phi0 = mech.encoder_to_tilt(0.0);
  const long count0 = mech.tilt_to_encoder(0.0);
  c.expect(std::abs(phi0) <= 1e-9 && count0 == 0,
           fmt::format("encoder 0 -> {:.1e} rad, phi 0 -> {}", phi0, count0), "0");

  const double lo = oracle_displacement(0.0, g);
  const double hi = oracle_displacement(kPi / 2.0, g);
  const double err = std::max(std::abs(tilt::solve_inverse(0.0, g) - lo),
                              std::abs(tilt::solve_inverse(kPi / 2.0, g) - hi));
  c.expect(err <= 1e-4 && std::abs(mech.x_zero() - lo) <= 1e-4 &&
               std::abs(mech.x_max() - hi) <= 1e-4,
           fmt::format("range [{:.4f}, {:.4f}] cm, oracle [{:.4f}, {:.4f}]", mech.x_zero(),
                       mech.x_max(), lo, hi),
           "within 1e-4 cm");
  return c;
}

// Peak horizontal distance from the start, and the final one.
std::pair<double, double> lateral_excursion(const SimLog& log) {
  double peak = 0.0, last = 0.0;
  const Eigen::Vector2d start = log.rows.front().x.head<2>();
  for (const auto& r : log.rows) {
    last = (r.x.head<2>() - start).norm();
    peak = std::max(peak, last);
  }
  return {peak, last};
}

Check criterion_pid(Suite& s) {
  Check c;
  const SimLog& nmpc = s.cached("pid_impulse_nmpc", [&] {
    Scenario sc = s.scenario("pid_impulse");
    sc.controller = ControllerKind::kNmpc;
    return sc;
  });
  const auto [nmpc_peak, nmpc_final] = lateral_excursion(nmpc);

  bool pid_diverged = false;
  double pid_peak = 0.0;
  try {
    const SimLog& pid = s.cached("pid_impulse_pid", [&] {
      Scenario sc = s.scenario("pid_impulse");
      sc.controller = ControllerKind::kPid;
      return sc;
    });
    pid_diverged = pid.outcome != ContactKind::kAirborne;
    pid_peak = lateral_excursion(pid).first;
  } catch (const SimDiverged&) {
    pid_diverged = true;
  }
  c.expect(pid_diverged || pid_peak >= 2.0 * nmpc_peak,
           pid_diverged ? std::string("PID diverged")
                        : fmt::format("PID peak {:.3f} m, NMPC peak {:.3f} m", pid_peak,
                                      nmpc_peak),
           ">= 2x NMPC or divergence");
  c.expect(nmpc_final <= 0.05, fmt::format("NMPC final {:.3f} m", nmpc_final), "<= 0.05 m");
  return c;
}

Check criterion_throughput(Suite& s) {
  Check c;
  wheel_landing(s);
  const double ms = 1e3 * s.mean_solve();
  c.expect(s.solve_calls() > 0 && ms <= 6.7,
           fmt::format("mean step {:.2f} ms over {} calls", ms, s.solve_calls()),
           "<= 6.7 ms");
  return c;
}

}  // namespace

AcceptanceConfig default_acceptance_config() {
  AcceptanceConfig cfg;
  cfg.scenario_dir = data_dir() / "scenarios";
  cfg.params_path = data_dir() / "robot.yaml";
  cfg.table_path = data_dir() / "ground_effect.csv";
  return cfg;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceConfig& cfg) {
  struct Entry {
    int id;
    const char* name;
    bool soft;
    Check (*fn)(Suite&);
  };
  static const Entry kEntries[] = {
      {1, "dynamic wheel landing", false, criterion_landing},
      {2, "landing past the critical angle", false, criterion_past_saturation},
      {3, "ground-effect benefit", false, criterion_ground_effect},
      {4, "driving takeoff and landing", false, criterion_driving_takeoff},
      {5, "slope landing", false, criterion_slope},
      {6, "blending factor", false, criterion_alpha},
      {7, "NMPC correctness", false, criterion_nmpc},
      {8, "hover regulation", false, criterion_hover},
      {9, "dynamics fidelity", false, criterion_dynamics},
      {10, "linkage kinematics", false, criterion_kinematics},
      {11, "PID baseline contrast", false, criterion_pid},
      {12, "controller throughput", true, criterion_throughput},
  };

  Suite suite(cfg);
  std::vector<CriterionResult> out;
  for (const Entry& e : kEntries) {
    if (!cfg.only.empty() &&
        std::find(cfg.only.begin(), cfg.only.end(), e.id) == cfg.only.end())
      continue;
    CriterionResult r;
    r.id = e.id;
    r.name = e.name;
    r.soft = e.soft;
    try {
      const Check c = e.fn(suite);
      r.pass = c.pass;
      r.measured = fmt::format("{}", fmt::join(c.measured, "; "));
      r.target = fmt::format("{}", fmt::join(c.target, "; "));
    } catch (const std::exception& ex) {
      r.pass = false;
      r.measured = fmt::format("error: {}", ex.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_report(const std::vector<CriterionResult>& results) {
  std::string out;
  for (const auto& r : results) {
    const char* verdict = r.pass ? "PASS" : (r.soft ? "WARN" : "FAIL");
    out += fmt::format("[{}] {:2d} {}: {}", verdict, r.id, r.name, r.measured);
    if (!r.target.empty()) out += fmt::format(" (target {})", r.target);
    out += '\n';
  }
  return out;
}

bool all_required_pass(const std::vector<CriterionResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CriterionResult& r) { return r.pass || r.soft; });
}

}  // namespace morpho
