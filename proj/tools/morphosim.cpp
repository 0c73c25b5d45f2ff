// Command-line front end: run a scenario, run the acceptance suite, sweep a
// parameter over a batch of runs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "morpho/acceptance.hpp"
#include "morpho/batch.hpp"
#include "morpho/errors.hpp"
#include "morpho/ground_effect.hpp"
#include "morpho/scenario.hpp"
#include "morpho/sim.hpp"
#include "morpho/sim_log.hpp"
#include "morpho/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace morpho;

namespace {

struct RunConfig {
  fs::path scenario;
  fs::path params = data_dir() / "robot.yaml";
  fs::path ge_table = data_dir() / "ground_effect.csv";
  fs::path out = "out";
  std::optional<std::uint64_t> seed;
  std::string ground_effect;  // "", "on", "off"
  std::string noise;          // "", "on", "off"
  std::string controller;     // "", "nmpc", "pid"
  std::string preset;         // "", "fig5", "retuned"
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--scenario", cfg.scenario, "Scenario file (YAML)")->required();
  cmd->add_option("--params", cfg.params, "Robot parameter file (YAML)");
  cmd->add_option("--ge-table", cfg.ge_table, "Ground-effect table (CSV)");
  cmd->add_option("--out", cfg.out, "Output directory");
  cmd->add_option("--seed", cfg.seed, "Random seed (default: scenario seed)");
  cmd->add_option("--ground-effect", cfg.ground_effect, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--noise", cfg.noise, "Measurement noise on|off")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--controller", cfg.controller, "nmpc|pid")
      ->check(CLI::IsMember({"nmpc", "pid"}));
  cmd->add_option("--preset", cfg.preset, "Cost weight preset fig5|retuned")
      ->check(CLI::IsMember({"fig5", "retuned"}));
}

// Loads inputs and applies the command-line overrides.
struct Loaded {
  Scenario scenario;
  RobotParams params;
  std::optional<GroundEffectTable> table;
};

Loaded load(const RunConfig& cfg) {
  Loaded l;
  l.scenario = load_scenario(cfg.scenario);
  l.params = load_robot_params(cfg.params);
  if (cfg.seed) l.scenario.seed = *cfg.seed;
  if (!cfg.ground_effect.empty()) l.scenario.ground_effect = cfg.ground_effect == "on";
  if (!cfg.noise.empty()) l.scenario.noise.enabled = cfg.noise == "on";
  if (!cfg.controller.empty()) l.scenario.controller = controller_from_name(cfg.controller);
  if (!cfg.preset.empty()) l.scenario.preset = cfg.preset;
  l.scenario.validate();
  if (l.scenario.ground_effect) l.table = load_table_file(cfg.ge_table);
  return l;
}

int cmd_run(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  const SimLog log = run(l.scenario, l.params, l.table ? &*l.table : nullptr);
  write_run_outputs(log, cfg.out);
  write_channel_plots(read_csv(cfg.out / "log.csv"), cfg.out);

  const Summary s = summarize(log);
  fmt::print("{}: {} samples, outcome {}\n", log.scenario, log.rows.size(),
             contact_name(log.outcome));
  if (s.touched_down) {
    const auto& m = s.touchdown;
    fmt::print("  phi_g {:.2f} deg  impact {:.3f} m/s  roll {:.2f}  pitch {:.2f}  "
               "u_bar peak {:.3f}  drift {:.3f} m\n",
               m.phi_g, m.impact_speed, m.roll, m.pitch, m.max_mean_thrust,
               m.lateral_drift);
  }
  if (!log.tipover_reason.empty()) fmt::print("  tipover: {}\n", log.tipover_reason);
  if (log.controller_calls > 0) {
    fmt::print("  controller: {} calls, mean {:.2f} ms, max {:.2f} ms, {} failures\n",
               log.controller_calls, 1e3 * log.mean_solve_seconds,
               1e3 * log.max_solve_seconds, log.solver_failures);
  }
  fmt::print("  outputs in {}\n", cfg.out.string());
  return 0;
}

int cmd_check(const AcceptanceConfig& cfg) {
  const auto results = run_acceptance(cfg);
  const std::string report = format_report(results);
  std::cout << report;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    write_file_atomic(cfg.out_dir / "acceptance.txt", report);
  }
  return all_required_pass(results) ? 0 : 1;
}

// mean, sample sd, min, max
std::string stats_row(const std::string& name, const std::vector<double>& xs) {
  if (xs.empty()) return fmt::format("{},0,,,,\n", name);
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  return fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f}\n", name, xs.size(), mean, sd, *lo,
                     *hi);
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UnknownParameter("'" + item + "' is not a number");
    }
  }
  return values;
}

int cmd_sweep(const RunConfig& cfg, const std::string& param, const std::string& values_text,
              bool parallel) {
  const std::vector<double> values = parse_values(values_text);
  const auto names = sweepable_parameters();
  if (std::find(names.begin(), names.end(), param) == names.end()) {
    throw UnknownParameter(fmt::format("'{}' (known: {})", param, fmt::join(names, ", ")));
  }
  if (values.empty()) {
    fmt::print("no values, nothing to run\n");
    return 0;
  }
  const Loaded base = load(cfg);
  std::optional<GroundEffectTable> table = base.table;
  if (!table && param == "ground_effect") table = load_table_file(cfg.ge_table);

  std::vector<BatchJob> jobs;
  for (double v : values) {
    BatchJob job{base.scenario, base.params};
    apply_parameter(param, v, job.scenario, job.params);
    job.scenario.validate();
    jobs.push_back(std::move(job));
  }
  const auto results = parallel ? run_batch_parallel(jobs, table ? &*table : nullptr)
                                : run_batch_serial(jobs, table ? &*table : nullptr);

  std::string csv = fmt::format(
      "{},outcome,phi_g_deg,impact_speed_mps,roll_deg,pitch_deg,u_bar_peak,"
      "lateral_drift_m,max_lateral_excursion_m,error\n",
      param);
  std::vector<double> drift, excursion, impact, phi_g;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.log) {
      csv += fmt::format("{},error,,,,,,,,\"{}\"\n", values[i], r.error);
      continue;
    }
    const Summary s = summarize(*r.log);
    const auto& m = s.touchdown;
    excursion.push_back(s.max_lateral_excursion);
    if (s.touched_down) {
      drift.push_back(m.lateral_drift);
      impact.push_back(m.impact_speed);
      phi_g.push_back(m.phi_g);
      csv += fmt::format("{},{},{:.4f},{:.6f},{:.4f},{:.4f},{:.6f},{:.6f},{:.6f},\n",
                         values[i], contact_name(r.log->outcome), m.phi_g, m.impact_speed,
                         m.roll, m.pitch, m.max_mean_thrust, m.lateral_drift,
                         s.max_lateral_excursion);
    } else {
      csv += fmt::format("{},{},,,,,,,{:.6f},\n", values[i], contact_name(r.log->outcome),
                         s.max_lateral_excursion);
    }
  }
  const std::string stats = "metric,count,mean,sd,min,max\n" +
                            stats_row("lateral_drift_m", drift) +
                            stats_row("max_lateral_excursion_m", excursion) +
                            stats_row("impact_speed_mps", impact) +
                            stats_row("phi_g_deg", phi_g);
  std::cout << csv << "\n" << stats;
  fs::create_directories(cfg.out);
  write_file_atomic(cfg.out / fmt::format("sweep_{}.csv", param), csv);
  write_file_atomic(cfg.out / fmt::format("sweep_{}_stats.csv", param), stats);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flying/driving morphing robot simulator"};
  app.require_subcommand(1);

  RunConfig run_cfg;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario");
  add_common(run_cmd, run_cfg);

  AcceptanceConfig check_cfg = default_acceptance_config();
  CLI::App* check_cmd = app.add_subcommand("check", "Run the acceptance suite");
  check_cmd->add_option("--out", check_cfg.out_dir, "Directory for run outputs and the report");
  check_cmd->add_option("--seed", check_cfg.seed, "Random seed");
  check_cmd->add_option("--params", check_cfg.params_path, "Robot parameter file (YAML)");
  check_cmd->add_option("--ge-table", check_cfg.table_path, "Ground-effect table (CSV)");
  check_cmd->add_option("--scenarios", check_cfg.scenario_dir, "Scenario directory");
  check_cmd->add_option("--criterion", check_cfg.only, "Run only these criteria");

  RunConfig sweep_cfg;
  std::string sweep_param, sweep_values;
  bool sweep_serial = false;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Batch runs over one parameter");
  add_common(sweep_cmd, sweep_cfg);
  sweep_cmd->add_option("--param", sweep_param, "Parameter name")->required();
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep_cmd->add_flag("--serial", sweep_serial, "Run the batch on one thread");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(run_cfg);
    if (*check_cmd) return cmd_check(check_cfg);
    if (*sweep_cmd) return cmd_sweep(sweep_cfg, sweep_param, sweep_values, !sweep_serial);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
