#include "morpho/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "morpho/errors.hpp"

namespace morpho {

namespace {

constexpr double kRad = std::numbers::pi / 180.0;

template <class E>
void check_keys(const YAML::Node& node, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!node) return;
  if (!node.IsMap()) throw E(where + ": expected a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.contains(key)) throw E(fmt::format("{}: unknown key '{}'", where, key));
  }
}

template <class E, class T>
T get(const YAML::Node& node, const char* key, T fallback) {
  if (!node || !node[key]) return fallback;
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception& e) {
    throw E(fmt::format("key '{}': {}", key, e.what()));
  }
}

template <class E>
Vec3 get_vec3(const YAML::Node& node, const char* key, const Vec3& fallback) {
  if (!node || !node[key]) return fallback;
  const YAML::Node v = node[key];
  if (!v.IsSequence() || v.size() != 3) {
    throw E(fmt::format("key '{}': expected a list of three numbers", key));
  }
  try {
    return {v[0].as<double>(), v[1].as<double>(), v[2].as<double>()};
  } catch (const YAML::Exception& e) {
    throw E(fmt::format("key '{}': {}", key, e.what()));
  }
}

template <class E>
YAML::Node parse(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw E(std::string("malformed YAML: ") + e.what());
  }
}

std::string read_file(const std::filesystem::path& path, bool scenario) {
  std::ifstream in(path);
  if (!in) {
    const std::string msg = "cannot open " + path.string();
    if (scenario) throw ScenarioInvalid(msg);
    throw InvalidParams(msg);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ControllerKind controller_from_name(const std::string& name) {
  if (name == "nmpc") return ControllerKind::kNmpc;
  if (name == "pid") return ControllerKind::kPid;
  throw UnknownParameter("controller '" + name + "'");
}

const char* controller_name(ControllerKind k) {
  return k == ControllerKind::kNmpc ? "nmpc" : "pid";
}

int Scenario::physics_substeps() const {
  const double period = 1.0 / control_rate;
  return std::max(1, static_cast<int>(std::ceil(period / physics_dt - 1e-9)));
}

double Scenario::physics_step() const {
  return 1.0 / control_rate / physics_substeps();
}

guidance::PilotCommand Scenario::pilot_at(double t) const {
  guidance::PilotCommand cmd;
  for (const auto& e : pilot) {
    if (e.t <= t + 1e-12) cmd = e.cmd;
    else break;
  }
  return cmd.limited();
}

Wrench Scenario::disturbance_at(double t) const {
  Wrench w;
  for (const auto& d : disturbances) {
    if (t >= d.t - 1e-12 && t < d.t + d.duration - 1e-12) {
      w.force += d.force;
      w.torque += d.torque;
    }
  }
  return w;
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ScenarioInvalid("duration must be positive");
  if (!(physics_dt > 0.0) || !(control_rate > 0.0)) {
    throw ScenarioInvalid("physics step and control rate must be positive");
  }
  if (physics_dt > 1.0 / control_rate + 1e-12) {
    throw ScenarioInvalid("physics step longer than the control period");
  }
  if (!initial.allFinite() || !std::isfinite(initial_phi)) {
    throw ScenarioInvalid("initial state must be finite");
  }
  if (initial_phi < 0.0 || initial_phi > std::numbers::pi / 2) {
    throw ScenarioInvalid("initial tilt outside [0, 90] deg");
  }
  if (std::abs(surface.slope) >= std::numbers::pi / 3) {
    throw ScenarioInvalid("slope must be below 60 deg");
  }
  if (!(supervisor.z_star > 0.0)) throw ScenarioInvalid("z_star must be positive");
  if (!(v_max >= 0.0)) throw ScenarioInvalid("tilt rate must be non-negative");
  for (std::size_t i = 1; i < pilot.size(); ++i) {
    if (pilot[i].t < pilot[i - 1].t) throw ScenarioInvalid("pilot times not sorted");
  }
  for (std::size_t i = 1; i < disturbances.size(); ++i) {
    if (disturbances[i].t < disturbances[i - 1].t) {
      throw ScenarioInvalid("disturbance times not sorted");
    }
  }
  for (const auto& d : disturbances) {
    if (!(d.duration > 0.0)) throw ScenarioInvalid("disturbance duration must be positive");
  }
  try {
    CostWeights::preset(preset);
  } catch (const UnknownParameter& e) {
    throw ScenarioInvalid(e.what());
  }
  try {
    ocp.validate();
  } catch (const InvalidParams& e) {
    throw ScenarioInvalid(e.what());
  }
}

Scenario load_scenario_string(const std::string& text) {
  const YAML::Node root = parse<ScenarioInvalid>(text);
  if (!root.IsMap()) throw ScenarioInvalid("scenario must be a mapping");
  check_keys<ScenarioInvalid>(
      root, "scenario",
      {"name", "duration_s", "physics_dt_s", "control_rate_hz", "seed", "controller",
       "preset", "initial", "surface", "ground_effect", "guidance", "nmpc", "noise",
       "pilot", "disturbances"});

  Scenario s;
  using E = ScenarioInvalid;
  s.name = get<E>(root, "name", s.name);
  s.duration = get<E>(root, "duration_s", s.duration);
  s.physics_dt = get<E>(root, "physics_dt_s", s.physics_dt);
  s.control_rate = get<E>(root, "control_rate_hz", s.control_rate);
  s.seed = get<E, std::uint64_t>(root, "seed", s.seed);
  try {
    s.controller = controller_from_name(get<E>(root, "controller", std::string("nmpc")));
  } catch (const UnknownParameter& e) {
    throw ScenarioInvalid(e.what());
  }
  s.preset = get<E>(root, "preset", s.preset);

  const YAML::Node init = root["initial"];
  check_keys<E>(init, "initial",
                {"position_m", "euler_deg", "velocity_mps", "omega_radps", "phi_deg",
                 "grounded", "reference_offset_m"});
  s.initial.segment<3>(idx::kPos) = get_vec3<E>(init, "position_m", Vec3::Zero());
  s.initial.segment<3>(idx::kEuler) = get_vec3<E>(init, "euler_deg", Vec3::Zero()) * kRad;
  s.initial.segment<3>(idx::kVel) = get_vec3<E>(init, "velocity_mps", Vec3::Zero());
  s.initial.segment<3>(idx::kOmega) = get_vec3<E>(init, "omega_radps", Vec3::Zero());
  s.initial_phi = get<E>(init, "phi_deg", 0.0) * kRad;
  s.start_grounded = get<E>(init, "grounded", false);
  s.reference_offset = get_vec3<E>(init, "reference_offset_m", Vec3::Zero());

  const YAML::Node surf = root["surface"];
  check_keys<E>(surf, "surface", {"z_g_m", "slope_deg"});
  s.surface.z_g = get<E>(surf, "z_g_m", 0.0);
  s.surface.slope = get<E>(surf, "slope_deg", 0.0) * kRad;

  const YAML::Node ge = root["ground_effect"];
  check_keys<E>(ge, "ground_effect", {"enabled", "variability"});
  s.ground_effect = get<E>(ge, "enabled", s.ground_effect);
  s.ge_variability = get<E>(ge, "variability", s.ge_variability);

  const YAML::Node gd = root["guidance"];
  check_keys<E>(gd, "guidance",
                {"z_star_m", "z_phi_m", "tilt_rate_radps", "phi_flight_deg",
                 "phi_transition_deg", "reference", "takeoff_retract",
                 "stop_after_grounded_s"});
  s.supervisor.z_star = get<E>(gd, "z_star_m", s.supervisor.z_star);
  s.z_phi = get<E>(gd, "z_phi_m", s.z_phi);
  s.v_max = get<E>(gd, "tilt_rate_radps", s.v_max);
  s.supervisor.phi_flight = get<E>(gd, "phi_flight_deg", 50.0) * kRad;
  s.supervisor.phi_transition = get<E>(gd, "phi_transition_deg", 70.0) * kRad;
  const auto ref = get<E>(gd, "reference", std::string("integrated"));
  if (ref == "integrated") s.reference = ReferenceMode::kIntegrated;
  else if (ref == "relative") s.reference = ReferenceMode::kRelative;
  else throw ScenarioInvalid("guidance.reference must be 'relative' or 'integrated'");
  s.takeoff_retract = get<E>(gd, "takeoff_retract", s.takeoff_retract);
  s.stop_after_grounded = get<E>(gd, "stop_after_grounded_s", s.stop_after_grounded);

  const YAML::Node nm = root["nmpc"];
  check_keys<E>(nm, "nmpc",
                {"horizon_s", "nodes", "integrator_substeps", "alpha_update_period",
                 "u_ref_max", "parallel_linearization"});
  s.ocp.horizon = get<E>(nm, "horizon_s", s.ocp.horizon);
  s.ocp.nodes = get<E>(nm, "nodes", s.ocp.nodes);
  s.ocp.integrator_substeps = get<E>(nm, "integrator_substeps", s.ocp.integrator_substeps);
  s.ocp.alpha_update_period = get<E>(nm, "alpha_update_period", s.ocp.alpha_update_period);
  s.ocp.u_ref_max = get<E>(nm, "u_ref_max", s.ocp.u_ref_max);
  s.ocp.parallel_linearization =
      get<E>(nm, "parallel_linearization", s.ocp.parallel_linearization);
  s.ocp.control_rate = s.control_rate;

  const YAML::Node nz = root["noise"];
  check_keys<E>(nz, "noise",
                {"enabled", "position_sd_m", "attitude_sd_rad", "velocity_sd_mps",
                 "rate_sd_radps"});
  s.noise.enabled = get<E>(nz, "enabled", false);
  s.noise.position_sd = get<E>(nz, "position_sd_m", 0.0);
  s.noise.attitude_sd = get<E>(nz, "attitude_sd_rad", 0.0);
  s.noise.velocity_sd = get<E>(nz, "velocity_sd_mps", 0.0);
  s.noise.rate_sd = get<E>(nz, "rate_sd_radps", 0.0);

  if (const YAML::Node pl = root["pilot"]) {
    if (!pl.IsSequence()) throw ScenarioInvalid("pilot must be a list");
    for (const auto& row : pl) {
      check_keys<E>(row, "pilot entry", {"t", "v_mps", "throttle", "yaw_rate_radps"});
      PilotEntry e;
      e.t = get<E>(row, "t", 0.0);
      e.cmd.v_cmd = get_vec3<E>(row, "v_mps", Vec3::Zero());
      e.cmd.throttle = get<E>(row, "throttle", 0.0);
      e.cmd.yaw_rate_cmd = get<E>(row, "yaw_rate_radps", 0.0);
      s.pilot.push_back(e);
    }
  }
  if (const YAML::Node ds = root["disturbances"]) {
    if (!ds.IsSequence()) throw ScenarioInvalid("disturbances must be a list");
    for (const auto& row : ds) {
      check_keys<E>(row, "disturbance", {"t", "duration_s", "force_n", "torque_nm"});
      Disturbance d;
      d.t = get<E>(row, "t", 0.0);
      d.duration = get<E>(row, "duration_s", d.duration);
      d.force = get_vec3<E>(row, "force_n", Vec3::Zero());
      d.torque = get_vec3<E>(row, "torque_nm", Vec3::Zero());
      s.disturbances.push_back(d);
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return load_scenario_string(read_file(path, true));
}

RobotParams load_robot_params_string(const std::string& text) {
  using E = InvalidParams;
  const YAML::Node root = parse<E>(text);
  if (!root.IsMap()) throw E("robot parameters must be a mapping");
  check_keys<E>(root, "robot",
                {"g_mps2", "thrust_to_weight", "k_T_n", "k_M_m", "rotor", "spin_signs",
                 "tilt_signs", "wheel_radius_m", "drive_half_base_m", "hull",
                 "components", "linkage"});
  RobotParams p = RobotParams::defaults();
  p.g = get<E>(root, "g_mps2", p.g);
  p.k_M = get<E>(root, "k_M_m", p.k_M);

  const YAML::Node rotor = root["rotor"];
  check_keys<E>(rotor, "rotor", {"x_m", "y_m", "z_m", "hinge_y_m"});
  p.rotor_x = get<E>(rotor, "x_m", p.rotor_x);
  p.rotor_y = get<E>(rotor, "y_m", p.rotor_y);
  p.rotor_z = get<E>(rotor, "z_m", p.rotor_z);
  p.hinge_y = get<E>(rotor, "hinge_y_m", p.hinge_y);

  if (root["spin_signs"]) {
    const auto v = get<E>(root, "spin_signs", std::vector<int>{});
    if (v.size() != 4) throw E("spin_signs needs four entries");
    std::copy(v.begin(), v.end(), p.spin_signs.begin());
  }
  if (root["tilt_signs"]) {
    const auto v = get<E>(root, "tilt_signs", std::vector<int>{});
    if (v.size() != 2) throw E("tilt_signs needs two entries (left, right)");
    p.tilt_sign_left = v[0];
    p.tilt_sign_right = v[1];
  }
  p.wheel_radius = get<E>(root, "wheel_radius_m", p.wheel_radius);
  p.drive_half_base = get<E>(root, "drive_half_base_m", p.drive_half_base);

  const YAML::Node hull = root["hull"];
  check_keys<E>(hull, "hull", {"min_m", "max_m"});
  p.hull_min = get_vec3<E>(hull, "min_m", p.hull_min);
  p.hull_max = get_vec3<E>(hull, "max_m", p.hull_max);

  if (const YAML::Node comps = root["components"]) {
    if (!comps.IsSequence()) throw E("components must be a list");
    p.components.clear();
    for (const auto& c : comps) {
      check_keys<E>(c, "component",
                    {"name", "mass_kg", "shape", "size_m", "radius_m", "height_m",
                     "attachment", "offset_m"});
      InertialComponent ic;
      ic.name = get<E>(c, "name", std::string("component"));
      ic.mass = get<E>(c, "mass_kg", 0.0);
      const auto shape = get<E>(c, "shape", std::string("box"));
      if (shape == "box") {
        ic.shape.kind = Shape::Kind::kBox;
        ic.shape.size = get_vec3<E>(c, "size_m", Vec3::Zero());
      } else if (shape == "cylinder") {
        ic.shape.kind = Shape::Kind::kCylinder;
        ic.shape.radius = get<E>(c, "radius_m", 0.0);
        ic.shape.height = get<E>(c, "height_m", 0.0);
      } else {
        throw E("unknown shape '" + shape + "'");
      }
      const auto att = get<E>(c, "attachment", std::string("base"));
      if (att == "base") ic.attachment = Attachment::kBase;
      else if (att == "left_arm") ic.attachment = Attachment::kLeftArm;
      else if (att == "right_arm") ic.attachment = Attachment::kRightArm;
      else throw E("unknown attachment '" + att + "'");
      ic.offset = get_vec3<E>(c, "offset_m", Vec3::Zero());
      p.components.push_back(ic);
    }
  }

  if (root["k_T_n"] && root["thrust_to_weight"]) {
    throw E("give either k_T_n or thrust_to_weight, not both");
  }
  if (root["k_T_n"]) {
    p.k_T = get<E>(root, "k_T_n", p.k_T);
  } else {
    p.k_T = p.mass() * p.g * get<E>(root, "thrust_to_weight", 2.1) / 4.0;
  }

  const YAML::Node lk = root["linkage"];
  check_keys<E>(lk, "linkage",
                {"h_cm", "d1_cm", "d2_cm", "dx_cm", "dy_cm", "pitch_cm",
                 "counts_per_rev"});
  p.linkage.h = get<E>(lk, "h_cm", p.linkage.h);
  p.linkage.d1 = get<E>(lk, "d1_cm", p.linkage.d1);
  p.linkage.d2 = get<E>(lk, "d2_cm", p.linkage.d2);
  p.linkage.dx = get<E>(lk, "dx_cm", p.linkage.dx);
  p.linkage.dy = get<E>(lk, "dy_cm", p.linkage.dy);
  p.linkage.pitch = get<E>(lk, "pitch_cm", p.linkage.pitch);
  p.linkage.counts_per_rev = get<E>(lk, "counts_per_rev", p.linkage.counts_per_rev);

  p.validate();
  return p;
}

RobotParams load_robot_params(const std::filesystem::path& path) {
  return load_robot_params_string(read_file(path, false));
}

std::vector<std::string> sweepable_parameters() {
  return {"seed",          "tilt_cap_deg",     "phi_flight_deg", "z_phi_m",
          "z_star_m",      "tilt_rate_radps",  "slope_deg",      "ground_effect",
          "u_ref_max",     "descent_speed_mps", "thrust_to_weight", "k_M_m",
          "wheel_radius_m", "integrator_substeps"};
}

void apply_parameter(const std::string& name, double value, Scenario& s,
                     RobotParams& p) {
  if (name == "seed") {
    if (value < 0.0) throw UnknownParameter("seed must be non-negative");
    s.seed = static_cast<std::uint64_t>(std::llround(value));
  } else if (name == "tilt_cap_deg") {
    s.supervisor.phi_transition = value * kRad;
  } else if (name == "phi_flight_deg") {
    s.supervisor.phi_flight = value * kRad;
  } else if (name == "z_phi_m") {
    s.z_phi = value;
  } else if (name == "z_star_m") {
    s.supervisor.z_star = value;
  } else if (name == "tilt_rate_radps") {
    s.v_max = value;
  } else if (name == "slope_deg") {
    s.surface.slope = value * kRad;
  } else if (name == "ground_effect") {
    s.ground_effect = value != 0.0;
  } else if (name == "u_ref_max") {
    s.ocp.u_ref_max = value;
  } else if (name == "descent_speed_mps") {
    for (auto& e : s.pilot) {
      if (e.cmd.v_cmd.z() < 0.0) e.cmd.v_cmd.z() = -std::abs(value);
    }
  } else if (name == "thrust_to_weight") {
    p.k_T = p.mass() * p.g * value / 4.0;
  } else if (name == "k_M_m") {
    p.k_M = value;
  } else if (name == "wheel_radius_m") {
    p.wheel_radius = value;
  } else if (name == "integrator_substeps") {
    s.ocp.integrator_substeps = static_cast<int>(std::lround(value));
  } else {
    throw UnknownParameter("'" + name + "' is not a sweepable parameter");
  }
}

std::filesystem::path data_dir() { return MORPHO_DATA_DIR; }

}  // namespace morpho
