#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "morpho/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("morpho_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Result morphosim(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + MORPHOSIM_EXE + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Result r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string scenario(const std::string& name) {
  return "\"" + (morpho::data_dir() / "scenarios" / (name + ".yaml")).string() + "\"";
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) v.push_back(l);
  return v;
}

// comma-split lines, no quoting
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& l : lines(text)) {
    std::vector<std::string> f;
    std::stringstream ss(l);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (!l.empty() && l.back() == ',') f.emplace_back();
    rows.push_back(f);
  }
  return rows;
}

std::string fmt_id(int id) { return (id < 10 ? " " : "") + std::to_string(id); }

int column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  FAIL("no column " << name);
  return -1;
}

}  // namespace

TEST_CASE("run: wheel landing writes CSV, summary and four plots") {
  const fs::path dir = scratch_dir("run");
  const Result r = morphosim("run --scenario " + scenario("wheel_landing") + " --out \"" +
                                 (dir / "out").string() + "\"",
                             dir);
  REQUIRE(r.status == 0);
  for (const char* f : {"log.csv", "summary.yaml", "z.svg", "phi.svg", "alpha.svg", "ubar.svg"}) {
    CHECK(fs::file_size(dir / "out" / f) > 0);
  }
  CHECK(r.out.find("wheel_landing") != std::string::npos);
}

TEST_CASE("run: missing table file is a ParseError with nonzero exit") {
  const fs::path dir = scratch_dir("missing_table");
  const Result r = morphosim("run --scenario " + scenario("wheel_landing") +
                                 " --ge-table \"" + (dir / "nope.csv").string() + "\" --out \"" +
                                 (dir / "out").string() + "\"",
                             dir);
  CHECK(r.status != 0);
  CHECK(r.err.find("ParseError") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "log.csv"));
}

TEST_CASE("run: ground effect off is recorded and changes the landing") {
  const fs::path dir = scratch_dir("ge_off");
  const std::string base = "run --scenario " + scenario("wheel_landing");
  REQUIRE(morphosim(base + " --out \"" + (dir / "on").string() + "\"", dir).status == 0);
  REQUIRE(morphosim(base + " --ground-effect off --out \"" + (dir / "off").string() + "\"", dir)
              .status == 0);
  const YAML::Node on = YAML::LoadFile((dir / "on" / "summary.yaml").string());
  const YAML::Node off = YAML::LoadFile((dir / "off" / "summary.yaml").string());
  CHECK(on["ground_effect"].as<std::string>() == "on");
  CHECK(off["ground_effect"].as<std::string>() == "off");
  REQUIRE(on["touchdown"]["impact_speed_mps"]);
  REQUIRE(off["touchdown"]["impact_speed_mps"]);
  CHECK(on["touchdown"]["impact_speed_mps"].as<double>() !=
        off["touchdown"]["impact_speed_mps"].as<double>());
}

TEST_CASE("run: bad arguments") {
  const fs::path dir = scratch_dir("bad_args");
  CHECK(morphosim("run", dir).status != 0);  // --scenario required
  CHECK(morphosim("run --scenario " + scenario("wheel_landing") + " --controller lqr", dir)
            .status != 0);
  const Result r = morphosim("run --scenario \"" + (dir / "none.yaml").string() + "\"", dir);
  CHECK(r.status != 0);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("run: outputs are byte-identical across runs") {
  const fs::path dir = scratch_dir("repro");
  const std::string base = "run --scenario " + scenario("hover_step") + " --seed 7";
  REQUIRE(morphosim(base + " --out \"" + (dir / "a").string() + "\"", dir).status == 0);
  REQUIRE(morphosim(base + " --out \"" + (dir / "b").string() + "\"", dir).status == 0);
  for (const char* f : {"log.csv", "summary.yaml", "z.svg", "phi.svg", "alpha.svg", "ubar.svg"}) {
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  }
}

TEST_CASE("sweep: empty value list is a no-op") {
  const fs::path dir = scratch_dir("sweep_empty");
  const Result r = morphosim("sweep --scenario " + scenario("wheel_landing") +
                                 " --param tilt_cap_deg --values \"\" --out \"" +
                                 (dir / "out").string() + "\"",
                             dir);
  CHECK(r.status == 0);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("sweep: unknown parameter") {
  const fs::path dir = scratch_dir("sweep_unknown");
  const Result r = morphosim("sweep --scenario " + scenario("wheel_landing") +
                                 " --param wing_span --values 1,2 --out \"" +
                                 (dir / "out").string() + "\"",
                             dir);
  CHECK(r.status != 0);
  CHECK(r.err.find("UnknownParameter") != std::string::npos);
}

TEST_CASE("sweep: tilt cap on wheel landing gives monotone touchdown tilt") {
  const fs::path dir = scratch_dir("sweep_cap");
  const Result r = morphosim("sweep --scenario " + scenario("wheel_landing") +
                                 " --param tilt_cap_deg --values 50,60,65,70 --out \"" +
                                 (dir / "out").string() + "\"",
                             dir);
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(slurp(dir / "out" / "sweep_tilt_cap_deg.csv"));
  REQUIRE(rows.size() == 5);
  const int phi = column(rows[0], "phi_g_deg");
  double prev = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i][static_cast<std::size_t>(phi)] != "");
    const double v = std::stod(rows[i][static_cast<std::size_t>(phi)]);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(prev > 60.0);
}

TEST_CASE("sweep: seeds give a drift statistics table") {
  const fs::path dir = scratch_dir("sweep_seed");
  const Result r = morphosim("sweep --scenario " + scenario("wheel_landing") +
                                 " --param seed --values 0,1,2,3,4,5,6,7,8,9 --out \"" +
                                 (dir / "out").string() + "\"",
                             dir);
  REQUIRE(r.status == 0);
  CHECK(csv_rows(slurp(dir / "out" / "sweep_seed.csv")).size() == 11);
  const auto stats = csv_rows(slurp(dir / "out" / "sweep_seed_stats.csv"));
  REQUIRE(stats.size() >= 2);
  CHECK(stats[0] == std::vector<std::string>{"metric", "count", "mean", "sd", "min", "max"});
  CHECK(stats[1][0] == "lateral_drift_m");
  CHECK(stats[1][1] == "10");
  const double lo = std::stod(stats[1][4]), mean = std::stod(stats[1][2]),
               hi = std::stod(stats[1][5]);
  CHECK(lo <= mean);
  CHECK(mean <= hi);
}

TEST_CASE("sweep: serial and parallel write the same table") {
  const fs::path dir = scratch_dir("sweep_serial");
  const std::string base = "sweep --scenario " + scenario("hover_step") +
                           " --param seed --values 1,2,3 --noise on";
  REQUIRE(morphosim(base + " --out \"" + (dir / "p").string() + "\"", dir).status == 0);
  REQUIRE(morphosim(base + " --serial --out \"" + (dir / "s").string() + "\"", dir).status == 0);
  CHECK(slurp(dir / "p" / "sweep_seed.csv") == slurp(dir / "s" / "sweep_seed.csv"));
}

TEST_CASE("check: corrupted table fails the ground-effect criteria only") {
  const fs::path dir = scratch_dir("check_corrupt");
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "height_m,tilt_deg,thrust_ratio\n0.1,oops\n";
  }
  const Result r = morphosim("check --criterion 3 6 10 --ge-table \"" +
                                 (dir / "bad.csv").string() + "\"",
                             dir);
  CHECK(r.status != 0);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 3);
  CHECK(ls[0].rfind("[FAIL]  3", 0) == 0);
  CHECK(ls[1].rfind("[PASS]  6", 0) == 0);
  CHECK(ls[2].rfind("[PASS] 10", 0) == 0);
}

TEST_CASE("check: same seed gives an identical report") {
  const fs::path dir = scratch_dir("check_repro");
  const std::string args = "check --criterion 6 8 9 10 --seed 3 --out ";
  const Result a = morphosim(args + "\"" + (dir / "a").string() + "\"", dir);
  const Result b = morphosim(args + "\"" + (dir / "b").string() + "\"", dir);
  CHECK(a.status == 0);
  CHECK(lines(a.out).size() == 4);
  CHECK(slurp(dir / "a" / "acceptance.txt") == slurp(dir / "b" / "acceptance.txt"));
  CHECK(a.out == slurp(dir / "a" / "acceptance.txt"));
}

TEST_CASE("check: full suite reports every criterion") {
  const fs::path dir = scratch_dir("check_full");
  const Result r = morphosim("check --out \"" + (dir / "out").string() + "\"", dir);
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 12);
  bool any_fail = false;
  for (int i = 0; i < 12; ++i) {
    const std::string& l = ls[static_cast<std::size_t>(i)];
    CHECK(l.substr(7, 2) == fmt_id(i + 1));
    any_fail = any_fail || l.rfind("[FAIL]", 0) == 0;
  }
  CHECK(r.status == (any_fail ? 1 : 0));
  CHECK(fs::exists(dir / "out" / "acceptance.txt"));
}
