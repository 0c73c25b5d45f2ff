#include "morpho/sim_log.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "morpho/errors.hpp"

namespace morpho {

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "t",       "x",       "y",       "z",     "theta_z", "theta_y", "theta_x",
      "v_x",     "v_y",     "v_z",     "omega_x", "omega_y", "omega_z", "phi",
      "alpha",   "u1",      "u2",      "u3",    "u4",      "wheel_l", "wheel_r",
      "mode",    "ge_ratio"};
  return cols;
}

std::string to_csv(const SimLog& log) {
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += cols[i];
    out += i + 1 < cols.size() ? ',' : '\n';
  }
  auto it = std::back_inserter(out);
  for (const auto& r : log.rows) {
    fmt::format_to(it, "{:.6f}", r.t);
    for (int i = 0; i < 12; ++i) fmt::format_to(it, ",{:.9g}", r.x[i]);
    fmt::format_to(it, ",{:.9g},{:.9g}", r.phi, r.alpha);
    for (int i = 0; i < 4; ++i) fmt::format_to(it, ",{:.9g}", r.u[i]);
    fmt::format_to(it, ",{:.9g},{:.9g},{},{:.9g}\n", r.wheels.left, r.wheels.right,
                   guidance::mode_name(r.mode), r.ge_ratio);
  }
  return out;
}

std::string to_summary(const SimLog& log) {
  const Summary s = summarize(log);
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << log.scenario;
  e << YAML::Key << "controller" << YAML::Value << controller_name(log.controller);
  e << YAML::Key << "preset" << YAML::Value << log.preset;
  e << YAML::Key << "ground_effect" << YAML::Value << (log.ground_effect ? "on" : "off");
  e << YAML::Key << "seed" << YAML::Value << log.seed;
  e << YAML::Key << "critical_angle_deg" << YAML::Value
    << fmt::format("{:.4f}", log.critical_angle_deg);
  e << YAML::Key << "samples" << YAML::Value << log.rows.size();
  e << YAML::Key << "outcome" << YAML::Value << contact_name(log.outcome);
  if (!log.tipover_reason.empty()) {
    e << YAML::Key << "tipover_reason" << YAML::Value << log.tipover_reason;
  }
  e << YAML::Key << "max_mean_thrust_overall" << YAML::Value
    << fmt::format("{:.6f}", s.max_mean_thrust_overall);
  e << YAML::Key << "max_lateral_excursion_m" << YAML::Value
    << fmt::format("{:.6f}", s.max_lateral_excursion);
  e << YAML::Key << "drive_distance_m" << YAML::Value
    << fmt::format("{:.6f}", log.drive_distance);
  e << YAML::Key << "touchdown" << YAML::Value;
  if (s.touched_down) {
    const auto& m = s.touchdown;
    e << YAML::BeginMap;
    e << YAML::Key << "time_s" << YAML::Value << fmt::format("{:.4f}", m.time);
    e << YAML::Key << "phi_g_deg" << YAML::Value << fmt::format("{:.4f}", m.phi_g);
    e << YAML::Key << "impact_speed_mps" << YAML::Value
      << fmt::format("{:.6f}", m.impact_speed);
    e << YAML::Key << "roll_deg" << YAML::Value << fmt::format("{:.4f}", m.roll);
    e << YAML::Key << "pitch_deg" << YAML::Value << fmt::format("{:.4f}", m.pitch);
    e << YAML::Key << "max_mean_thrust" << YAML::Value
      << fmt::format("{:.6f}", m.max_mean_thrust);
    e << YAML::Key << "lateral_drift_m" << YAML::Value
      << fmt::format("{:.6f}", m.lateral_drift);
    e << YAML::EndMap;
  } else {
    e << YAML::Null;
  }
  e << YAML::Key << "events" << YAML::Value << YAML::BeginSeq;
  for (const auto& ev : log.events) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "t" << YAML::Value << fmt::format("{:.4f}", ev.t);
    e << YAML::Key << "kind" << YAML::Value << ev.kind;
    if (!ev.detail.empty()) e << YAML::Key << "detail" << YAML::Value << ev.detail;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return values[i];
  }
  throw ParseError("no column '" + name + "'");
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV");
  {
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) table.columns.push_back(f);
  }
  table.values.resize(table.columns.size());
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::size_t i = 0;
    while (std::getline(ss, f, ',')) {
      if (i >= table.columns.size()) break;
      double v = 0.0;
      if (f == "flight") v = 0.0;
      else if (f == "transition") v = 1.0;
      else if (f == "grounded") v = 2.0;
      else {
        try {
          v = std::stod(f);
        } catch (const std::exception&) {
          throw ParseError(fmt::format("line {}: '{}' is not a number", line_no, f));
        }
      }
      table.values[i++].push_back(v);
    }
    if (i != table.columns.size()) {
      throw ParseError(fmt::format("line {}: expected {} fields", line_no,
                                   table.columns.size()));
    }
  }
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_run_outputs(const SimLog& log, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "log.csv", to_csv(log));
  write_file_atomic(dir / "summary.yaml", to_summary(log));
}

}  // namespace morpho
