#include "morpho/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "morpho/errors.hpp"
#include "morpho/nmpc.hpp"
#include "morpho/pid_baseline.hpp"

namespace morpho {

namespace {

using guidance::Mode;

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kEscapeDistance = 1000.0;  // m

struct GroundPose {
  double s = 0.0;  // along the incline
  double y = 0.0;
  double heading = 0.0;
};

StateVector grounded_state(const GroundPose& pose, double v, double omega,
                           double phi, const Surface& surface,
                           const RobotParams& params) {
  const Mat3 frame = surface.frame();
  const Mat3 r = frame * Eigen::AngleAxisd(pose.heading, Vec3::UnitZ()).toRotationMatrix();
  StateVector x = StateVector::Zero();
  x.segment<3>(idx::kPos) = surface.to_world(pose.s, pose.y, rest_height(phi, params));
  x.segment<3>(idx::kEuler) = euler_from_rotation(r);
  x.segment<3>(idx::kVel) =
      frame * Vec3(v * std::cos(pose.heading), v * std::sin(pose.heading), 0.0);
  x[idx::kWz] = omega;
  return x;
}

GroundPose pose_from_state(const StateVector& x, const Surface& surface) {
  const Vec3 p = x.segment<3>(idx::kPos);
  return {surface.along(p), p.y(), x[idx::kYaw]};
}

guidance::DrivePose drive_pose(const GroundPose& g, const RobotParams& params) {
  guidance::DrivePose d;
  d.x = g.s;
  d.y = g.y;
  d.heading = g.heading;
  d.wheel_radius = params.wheel_radius;
  d.half_base = params.drive_half_base;
  return d;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{seed, stream};
  return std::mt19937_64(seq);
}

class Measurement {
 public:
  Measurement(const NoiseConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(make_rng(seed, 0x6e6f697365)) {}

  StateVector operator()(const StateVector& x) {
    if (!cfg_.enabled) return x;
    StateVector out = x;
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 3; ++i) {
      out[idx::kPos + i] += cfg_.position_sd * n(rng_);
      out[idx::kEuler + i] += cfg_.attitude_sd * n(rng_);
      out[idx::kVel + i] += cfg_.velocity_sd * n(rng_);
      out[idx::kOmega + i] += cfg_.rate_sd * n(rng_);
    }
    return out;
  }

 private:
  NoiseConfig cfg_;
  std::mt19937_64 rng_;
};

bool within_bounds(const AerialInput& u) {
  return (u.array() >= 0.0).all() && (u.array() <= 1.0).all();
}

}  // namespace

std::vector<Mode> SimLog::mode_sequence() const {
  std::vector<Mode> seq;
  for (const auto& r : rows) {
    if (seq.empty() || seq.back() != r.mode) seq.push_back(r.mode);
  }
  return seq;
}

SimLog run(const Scenario& sc, const RobotParams& params,
           const GroundEffectTable* table) {
  sc.validate();
  params.validate();
  if (sc.ground_effect && table == nullptr) {
    throw ScenarioInvalid("ground effect enabled but no table supplied");
  }

  SimLog log;
  log.scenario = sc.name;
  log.controller = sc.controller;
  log.preset = sc.preset;
  log.ground_effect = sc.ground_effect;
  log.seed = sc.seed;
  log.critical_angle_deg = critical_angle(params) * kDeg;

  const int substeps = sc.physics_substeps();
  const double h = sc.physics_step();
  const double ts = 1.0 / sc.control_rate;
  const Surface& surface = sc.surface;
  const guidance::SupervisorConfig& sup = sc.supervisor;

  OcpConfig ocp = sc.ocp;
  ocp.weights = CostWeights::preset(sc.preset);
  ocp.control_rate = sc.control_rate;
  NmpcController nmpc(ocp, params, BlendContext{sup.z_star, 0.0, 1.0});
  PidBaseline pid(params, ts);

  std::mt19937_64 ge_rng = make_rng(sc.seed, 0x6765);
  Measurement measure(sc.noise, sc.seed);

  double phi = sc.initial_phi;
  StateVector x = sc.initial;
  bool on_ground = sc.start_grounded;
  GroundPose pose;
  double drive_v = 0.0, drive_omega = 0.0;
  if (on_ground) {
    pose = pose_from_state(x, surface);
    x = grounded_state(pose, 0.0, 0.0, phi, surface, params);
  }
  guidance::ModeState mode =
      guidance::initial_mode(on_ground ? Mode::kGrounded : Mode::kFlight, sup);
  Vec3 p_ref = x.segment<3>(idx::kPos) + sc.reference_offset;
  Eigen::Vector2d ground_ref(pose.s, pose.y);
  std::optional<double> touchdown_time;
  bool done = false;
  double solve_total = 0.0;

  const long ticks = static_cast<long>(std::floor(sc.duration * sc.control_rate + 1e-9));
  bool solver_failing = false;
  for (long k = 0; k <= ticks && !done; ++k) {
    const double t = static_cast<double>(k) * ts;
    const guidance::PilotCommand cmd = sc.pilot_at(t);
    const StateVector meas = measure(x);
    const double height = surface.distance(meas.segment<3>(idx::kPos));
    const double rest = rest_height(phi, params);

    // Supervisor.
    const guidance::ModeState prev = mode;
    if (mode.mode == Mode::kGrounded && cmd.throttle >= 0.5 &&
        phi <= sup.phi_flight + 1e-9) {
      mode = guidance::takeoff(mode, sup);
      log.events.push_back({t, "takeoff", fmt::format("phi = {:.2f} deg", phi * kDeg)});
    } else {
      mode = guidance::mode_update(
          height, surface.normal().dot(meas.segment<3>(idx::kVel)), rest, mode, ts, sup);
    }
    if (mode.mode != prev.mode) {
      log.events.push_back({t, "mode", fmt::format("{} -> {}", guidance::mode_name(prev.mode),
                                                   guidance::mode_name(mode.mode))});
      if (mode.mode == Mode::kGrounded) {
        nmpc.reset();
        pid.reset();
        ground_ref = Eigen::Vector2d(pose.s, pose.y);
      }
      if (prev.mode == Mode::kGrounded) p_ref = meas.segment<3>(idx::kPos);
    }

    // Tilt rate.
    double tilt_rate = guidance::tilt_reference(height, cmd.throttle, mode.lambda,
                                                sc.z_phi, sc.v_max);
    if (sc.takeoff_retract && mode.mode == Mode::kFlight && !mode.landing_armed) {
      tilt_rate = cmd.v_cmd.z() > 0.0 ? -sc.v_max : 0.0;
    }

    // References.
    if (mode.mode == Mode::kGrounded) {
      ground_ref += ts * cmd.v_cmd.head<2>();
    } else if (sc.reference == ReferenceMode::kIntegrated) {
      p_ref += ts * cmd.v_cmd;
    } else {
      p_ref = guidance::position_reference(meas.segment<3>(idx::kPos), cmd, ts);
    }
    References refs;
    refs.x_ref = guidance::state_reference(p_ref, cmd);
    refs.u_ref = nmpc.hover_reference(phi);

    // Aerial controller. In flight the blend sees the full flight cost; the
    // height ramp applies once the transition has started.
    AerialInput u_a = AerialInput::Zero();
    double alpha = 0.0;
    if (mode.mode != Mode::kGrounded) {
      const double blend_height =
          mode.mode == Mode::kFlight ? std::max(height, sup.z_star) : height;
      nmpc.set_ground_height(rest);
      if (sc.controller == ControllerKind::kNmpc) {
        u_a = nmpc.mpc_step(meas, refs, phi, blend_height);
        alpha = nmpc.alpha();
        const auto& d = nmpc.diagnostics();
        solve_total += d.solve_seconds;
        log.max_solve_seconds = std::max(log.max_solve_seconds, d.solve_seconds);
        ++log.controller_calls;
        if (d.failed) {
          // One event per streak of failed cycles.
          if (!solver_failing) log.events.push_back({t, "solver_failure", d.failure});
          ++log.solver_failures;
        }
        solver_failing = d.failed;
      } else {
        u_a = pid.step(meas, refs.x_ref, phi);
        alpha = blend_alpha(blend_height, phi, BlendContext{sup.z_star, rest, 1.0});
      }
    }

    // Ground controller.
    guidance::WheelCommand wheels;
    if (mode.mode != Mode::kFlight) {
      const GroundPose current =
          mode.mode == Mode::kGrounded ? pose : pose_from_state(meas, surface);
      const Eigen::Vector2d target =
          mode.mode == Mode::kGrounded
              ? ground_ref
              : Eigen::Vector2d(surface.along(p_ref), p_ref.y());
      const auto [v, w] = guidance::drive_track(drive_pose(current, params), target);
      wheels = guidance::wheel_speeds(v, w, params.wheel_radius, params.drive_half_base);
    }
    const guidance::RoutedCommands out = guidance::actuator_switch(mode, u_a, wheels);
    if (!within_bounds(out.thrust)) {
      throw SimDiverged(fmt::format("t = {:.3f}: thrust command outside [0, 1]", t));
    }

    double ge = 1.0;
    if (sc.ground_effect) {
      const double z_rotor = rotor_plane_height(x, phi, surface, params);
      ge = sc.ge_variability ? sample_ratio(z_rotor, phi, *table, ge_rng)
                             : thrust_ratio(z_rotor, phi, *table);
    }

    log.rows.push_back({t, x, phi, alpha, out.thrust, out.wheels, mode.mode, ge});

    if (touchdown_time && sc.stop_after_grounded >= 0.0 &&
        t - *touchdown_time >= sc.stop_after_grounded - 1e-9) {
      break;
    }
    if (k == ticks) break;

    // Physics over one control period with the commands held.
    for (int j = 0; j < substeps; ++j) {
      const double tj = t + j * h;
      phi = tilt::tilt_integrate(phi, tilt_rate, h, mode.phi_limit);

      if (on_ground) {
        const bool thrusting = out.thrust.maxCoeff() > 0.0;
        bool lift = false;
        if (thrusting) {
          const Wrench w = thrust_wrench(out.thrust, phi, params, ge);
          const Mat3 r = rotation_from_euler(x[idx::kYaw], x[idx::kPitch], x[idx::kRoll]);
          lift = surface.normal().dot(r * w.force) >
                 params.mass() * params.g * surface.normal().z();
        }
        if (!lift) {
          std::tie(drive_v, drive_omega) = guidance::unicycle_rates(
              out.wheels, params.wheel_radius, params.drive_half_base);
          const auto next = guidance::unicycle_step(drive_pose(pose, params), drive_v,
                                                    drive_omega, h);
          if (touchdown_time) {
            log.drive_distance += std::hypot(next.x - pose.s, next.y - pose.y);
          }
          pose = {next.x, next.y, next.heading};
          x = grounded_state(pose, drive_v, drive_omega, phi, surface, params);
          continue;
        }
        on_ground = false;
        log.events.push_back({tj, "liftoff", ""});
      }

      try {
        x = rk4_step(x, out.thrust, configure(params, phi), h, params, ge,
                     sc.disturbance_at(tj));
      } catch (const EulerSingularity& e) {
        throw SimDiverged(fmt::format("t = {:.3f}: {}", tj, e.what()));
      }
      if (!x.allFinite() || x.head<3>().norm() > kEscapeDistance) {
        throw SimDiverged(fmt::format("t = {:.3f}: state left the valid range", tj));
      }

      const ContactResult contact = contact_resolve(x, phi, surface, params);
      if (contact.kind == ContactKind::kAirborne) continue;

      TouchdownMetrics m = contact.metrics;
      m.time = tj + h;
      const Vec3 p = x.segment<3>(idx::kPos);
      m.lateral_drift = (p - p_ref).head<2>().norm();
      log.touchdowns.push_back(m);
      log.outcome = contact.kind;
      if (contact.kind == ContactKind::kTipover) {
        log.tipover_reason = contact.reason;
        log.events.push_back({m.time, "tipover", contact.reason});
        done = true;
        break;
      }
      log.events.push_back(
          {m.time, "touchdown",
           fmt::format("phi_g = {:.2f} deg, impact = {:.3f} m/s", m.phi_g, m.impact_speed)});
      on_ground = true;
      touchdown_time = m.time;
      log.drive_distance = 0.0;
      pose = pose_from_state(x, surface);
      drive_v = 0.0;
      drive_omega = 0.0;
      x = grounded_state(pose, 0.0, 0.0, phi, surface, params);
    }
  }

  if (log.controller_calls > 0) log.mean_solve_seconds = solve_total / log.controller_calls;
  if (log.outcome != ContactKind::kTipover && on_ground && !log.touchdowns.empty()) {
    log.outcome = ContactKind::kTouchdown;
  } else if (log.outcome != ContactKind::kTipover && !on_ground) {
    log.outcome = ContactKind::kAirborne;
  }
  return log;
}

TouchdownMetrics metrics(const SimLog& log) {
  if (log.touchdowns.empty()) throw NoTouchdown("scenario '" + log.scenario + "'");
  const double last = log.touchdowns.back().time;

  // Landing phase: the final airborne stretch before the last touchdown. The
  // supervisor may switch to grounded a few ticks before contact, so trailing
  // grounded rows are skipped first.
  std::size_t end = 0;
  while (end < log.rows.size() && log.rows[end].t < last - 1e-12) ++end;
  std::size_t stop = end;
  while (stop > 0 && log.rows[stop - 1].mode == Mode::kGrounded) --stop;
  std::size_t begin = stop;
  while (begin > 0 && log.rows[begin - 1].mode != Mode::kGrounded) --begin;

  // First contact of that landing; later entries are hops of the same landing.
  const double t0 = begin < log.rows.size() ? log.rows[begin].t : last;
  TouchdownMetrics m = log.touchdowns.back();
  for (const auto& td : log.touchdowns) {
    if (td.time >= t0 - 1e-12) {
      m = td;
      break;
    }
  }

  std::size_t apex = begin;
  for (std::size_t i = begin; i < end; ++i) {
    if (log.rows[i].x[idx::kZ] > log.rows[apex].x[idx::kZ]) apex = i;
  }
  m.max_mean_thrust = 0.0;
  for (std::size_t i = apex; i < end; ++i) {
    m.max_mean_thrust = std::max(m.max_mean_thrust, log.rows[i].u.mean());
  }
  return m;
}

Summary summarize(const SimLog& log) {
  Summary s;
  if (!log.touchdowns.empty()) {
    s.touchdown = metrics(log);
    s.touched_down = true;
  }
  if (!log.rows.empty()) {
    const Eigen::Vector2d start = log.rows.front().x.head<2>();
    for (const auto& r : log.rows) {
      s.max_mean_thrust_overall = std::max(s.max_mean_thrust_overall, r.u.mean());
      s.max_lateral_excursion =
          std::max(s.max_lateral_excursion, (r.x.head<2>() - start).norm());
    }
  }
  return s;
}

}  // namespace morpho
