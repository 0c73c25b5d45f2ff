#include <doctest.h>

#include <cmath>
#include <numbers>

#include "morpho/batch.hpp"
#include "morpho/errors.hpp"
#include "morpho/pid_baseline.hpp"
#include "morpho/sim.hpp"

using namespace morpho;
using guidance::Mode;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const RobotParams& params() {
  static const RobotParams p = load_robot_params(data_dir() / "robot.yaml");
  return p;
}

const GroundEffectTable& table() {
  static const GroundEffectTable t = load_table_file(data_dir() / "ground_effect.csv");
  return t;
}

Scenario scenario(const std::string& name) {
  return load_scenario(data_dir() / "scenarios" / (name + ".yaml"));
}

const SimLog& landing_log() {
  static const SimLog log = run(scenario("wheel_landing"), params(), &table());
  return log;
}

bool same_logs(const SimLog& a, const SimLog& b) {
  if (a.rows.size() != b.rows.size() || a.touchdowns.size() != b.touchdowns.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const LogRow &r = a.rows[i], &s = b.rows[i];
    if (r.t != s.t || (r.x.array() != s.x.array()).any() || r.phi != s.phi ||
        r.alpha != s.alpha || (r.u.array() != s.u.array()).any() || r.mode != s.mode ||
        r.ge_ratio != s.ge_ratio || r.wheels.left != s.wheels.left)
      return false;
  }
  return a.events.size() == b.events.size();
}

LogRow row(double t, double z, double u, Mode m) {
  LogRow r;
  r.t = t;
  r.x = state_at(Vec3(0, 0, z));
  r.u = AerialInput::Constant(u);
  r.mode = m;
  return r;
}

}  // namespace

TEST_CASE("hover holds position") {
  const SimLog log = run(scenario("hover"), params(), nullptr);
  CHECK(log.rows.size() == 1501);
  double worst = 0.0;
  for (const auto& r : log.rows) {
    worst = std::max(worst, (r.x.head<3>() - Vec3(0, 0, 1.5)).norm());
    CHECK(r.mode == Mode::kFlight);
  }
  CHECK(worst <= 0.02);
  CHECK(log.outcome == ContactKind::kAirborne);
  CHECK_THROWS_AS(metrics(log), NoTouchdown);
  CHECK(!summarize(log).touched_down);
}

TEST_CASE("hover step response") {
  const SimLog log = run(scenario("hover_step"), params(), nullptr);
  double peak = 0.0;
  for (const auto& r : log.rows) peak = std::max(peak, r.u.mean());
  CHECK(peak > 0.5);
  CHECK(peak <= 1.0);
  CHECK(std::abs(log.rows.back().x[idx::kZ] - 2.0) < 0.02);
  CHECK(log.rows.back().u.mean() == doctest::Approx(0.476).epsilon(0.02));
}

TEST_CASE("runs are deterministic") {
  Scenario s = scenario("wheel_landing");
  s.duration = 4.0;
  s.noise.enabled = true;
  s.noise.position_sd = 0.002;
  const SimLog a = run(s, params(), &table());
  const SimLog b = run(s, params(), &table());
  CHECK(same_logs(a, b));
  s.seed = 1;
  const SimLog c = run(s, params(), &table());
  CHECK(!same_logs(a, c));
}

TEST_CASE("wheel landing") {
  const SimLog& log = landing_log();
  const auto seq = log.mode_sequence();
  REQUIRE(seq.size() == 3);
  CHECK(seq[0] == Mode::kFlight);
  CHECK(seq[1] == Mode::kTransition);
  CHECK(seq[2] == Mode::kGrounded);
  CHECK(log.outcome == ContactKind::kTouchdown);

  // alpha collapses at the ground and thrust stays off afterwards
  bool grounded = false;
  double prev_t = -1.0;
  for (const auto& r : log.rows) {
    CHECK(r.t > prev_t);
    prev_t = r.t;
    CHECK(r.u.minCoeff() >= 0.0);
    CHECK(r.u.maxCoeff() <= 1.0);
    CHECK(r.alpha >= 0.0);
    CHECK(r.alpha <= 1.0);
    CHECK(r.phi <= 70 * kDeg + 1e-12);
    if (r.mode == Mode::kFlight) CHECK(r.phi <= 50 * kDeg + 1e-12);
    grounded |= r.mode == Mode::kGrounded;
    if (grounded) {
      CHECK(r.u.isZero());
      CHECK(r.alpha == 0.0);
    }
  }
  const TouchdownMetrics m = metrics(log);
  CHECK(m.phi_g >= 60.0);
  CHECK(m.impact_speed <= 0.5);
  CHECK(std::abs(m.roll) <= 5.0);
  CHECK(std::abs(m.pitch) <= 5.0);
  CHECK(m.max_mean_thrust <= 0.9);
  CHECK(m.phi_g > log.critical_angle_deg);
}

TEST_CASE("ground effect softens the impact") {
  Scenario s = scenario("wheel_landing");
  s.ground_effect = false;
  const SimLog off = run(s, params(), nullptr);
  CHECK(metrics(off).impact_speed > metrics(landing_log()).impact_speed);
  CHECK(!off.ground_effect);
  for (const auto& r : off.rows) CHECK(r.ge_ratio == 1.0);

  s.ground_effect = true;
  CHECK_THROWS_AS(run(s, params(), nullptr), ScenarioInvalid);
}

TEST_CASE("slope scenarios") {
  const SimLog morphed = run(scenario("slope_landing"), params(), &table());
  CHECK(morphed.outcome == ContactKind::kTouchdown);
  CHECK(morphed.drive_distance >= 1.0);
  const SimLog quad = run(scenario("slope_quad_control"), params(), &table());
  CHECK(quad.outcome == ContactKind::kTipover);
  CHECK(!quad.tipover_reason.empty());
}

TEST_CASE("driving takeoff") {
  const SimLog log = run(scenario("driving_takeoff"), params(), &table());
  const auto seq = log.mode_sequence();
  REQUIRE(seq.size() == 4);
  CHECK(seq[0] == Mode::kGrounded);
  CHECK(seq[1] == Mode::kFlight);
  CHECK(seq[2] == Mode::kTransition);
  CHECK(seq[3] == Mode::kGrounded);
  CHECK(metrics(log).phi_g >= 55.0);
}

TEST_CASE("metrics from a synthetic log") {
  SimLog log;
  log.scenario = "synthetic";
  // an early hop, a climb, then the real landing
  log.rows.push_back(row(0.0, 0.2, 0.0, Mode::kGrounded));
  log.rows.push_back(row(0.1, 0.5, 0.95, Mode::kFlight));
  log.rows.push_back(row(0.2, 2.0, 0.5, Mode::kFlight));
  log.rows.push_back(row(0.3, 1.0, 0.6, Mode::kFlight));
  log.rows.push_back(row(0.4, 0.4, 0.72, Mode::kTransition));
  log.rows.push_back(row(0.5, 0.2, 0.65, Mode::kTransition));
  log.rows.push_back(row(0.6, 0.2, 0.0, Mode::kGrounded));
  TouchdownMetrics hop;
  hop.time = 0.0;
  hop.phi_g = 10.0;
  TouchdownMetrics first;
  first.time = 0.55;
  first.phi_g = 64.0;
  first.impact_speed = 0.31;
  first.roll = 1.5;
  TouchdownMetrics bounce = first;
  bounce.time = 0.58;
  bounce.phi_g = 65.0;
  log.touchdowns = {hop, first, bounce};

  const TouchdownMetrics m = metrics(log);
  CHECK(m.time == 0.55);
  CHECK(m.phi_g == 64.0);
  CHECK(m.impact_speed == 0.31);
  CHECK(m.roll == 1.5);
  CHECK(m.max_mean_thrust == doctest::Approx(0.72));  // from the apex on

  const Summary s = summarize(log);
  CHECK(s.touched_down);
  CHECK(s.max_mean_thrust_overall == doctest::Approx(0.95));
}

TEST_CASE("PID baseline") {
  const double ts = 1.0 / 150;
  PidBaseline pid(params(), ts);
  const StateVector x = state_at(Vec3(0, 0, 1));
  const AerialInput u = pid.step(x, x, 0.0);
  for (int i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(hover_command(params(), 0.0)));

  Scenario s = scenario("hover");
  s.controller = ControllerKind::kPid;
  s.initial[idx::kX] += 0.1;
  s.duration = 5.0;
  const SimLog log = run(s, params(), nullptr);
  CHECK(log.controller_calls == 0);
  CHECK((log.rows.back().x.head<3>() - Vec3(0.1, 0, 1.5)).norm() < 0.02);
  for (const auto& r : log.rows) {
    CHECK(r.u.minCoeff() >= 0.0);
    CHECK(r.u.maxCoeff() <= 1.0);
  }
}

TEST_CASE("batch runs") {
  std::vector<BatchJob> jobs;
  for (int k = 0; k < 4; ++k) {
    Scenario s = scenario("wheel_landing");
    s.duration = 3.0;
    s.seed = static_cast<std::uint64_t>(k);
    jobs.push_back({s, params()});
  }
  Scenario broken = scenario("hover");
  broken.duration = -1.0;
  jobs.push_back({broken, params()});

  const auto serial = run_batch_serial(jobs, &table());
  const auto parallel = run_batch_parallel(jobs, &table());
  REQUIRE(serial.size() == jobs.size());
  REQUIRE(parallel.size() == jobs.size());
  for (std::size_t i = 0; i + 1 < jobs.size(); ++i) {
    REQUIRE(serial[i].log);
    REQUIRE(parallel[i].log);
    CHECK(same_logs(*serial[i].log, *parallel[i].log));
  }
  CHECK(!serial.back().log);
  CHECK(!serial.back().error.empty());
  CHECK(parallel.back().error == serial.back().error);
}
