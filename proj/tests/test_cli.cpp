#include "cpsconf/trace_io.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cpsconf;
using namespace cpsconf::testing;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("CPSCONF_CLI");
  REQUIRE_MESSAGE(env != nullptr, "CPSCONF_CLI must point at the cpsconf binary");
  return env;
}

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const fs::path out = fs::temp_directory_path() / "cpsconf_cli_out.txt";
  const std::string cmd = cli_path() + " " + args + " > " + out.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  return {WEXITSTATUS(raw), buf.str()};
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "cpsconf_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace

TEST_CASE("monitor prints the robustness and encodes the sign in the exit code") {
  const fs::path dir = work_dir();
  const fs::path trace = dir / "golden.csv";
  write_trace_csv_file(trace, scalar_trace({0.2, 0.5, 0.9}, {0, 1, 2}));

  auto pos = run_cli("monitor -f \"[]_[0,2] (y < 1)\" --trace " + trace.string());
  CHECK(pos.exit_code == 0);
  CHECK(pos.output == "0.1\n");

  auto neg = run_cli("monitor -f \"!([]_[0,2] (y < 1))\" --trace " + trace.string());
  CHECK(neg.exit_code == 1);
  CHECK(neg.output == "-0.1\n");

  auto missing = run_cli("monitor -f \"y < 1\" --trace /nonexistent.csv");
  CHECK(missing.exit_code == 2);
}

TEST_CASE("check reports closeness verdicts with witnesses") {
  const fs::path dir = work_dir();
  const fs::path a = dir / "a.csv";
  const fs::path b = dir / "b.csv";
  const fs::path c = dir / "c.csv";
  write_trace_csv_file(a, constant_trace(0.0, 10, 0.5));
  write_trace_csv_file(b, constant_trace(0.0, 10, 0.5));
  write_trace_csv_file(c, constant_trace(0.3, 10, 0.5));

  auto same = run_cli("check " + a.string() + " " + b.string() + " --tau 0.1 --eps 0.01");
  CHECK(same.exit_code == 0);
  CHECK(same.output == "CLOSE\n");

  auto apart = run_cli("check " + a.string() + " " + c.string() + " --tau 0.1 --eps 0.2");
  CHECK(apart.exit_code == 1);
  CHECK(apart.output.find("NOT CLOSE, witness i=1") != std::string::npos);

  const fs::path bad = dir / "bad.csv";
  std::ofstream(bad) << "nonsense\n";
  auto err = run_cli("check " + a.string() + " " + bad.string() + " --tau 0.1 --eps 0.2");
  CHECK(err.exit_code == 2);
}

namespace {

std::string falsify_config(const fs::path& dir, double offset, int budget, int seed) {
  std::ostringstream cfg;
  cfg << R"({
  "seed": )" << seed << R"(,
  "budget": )" << budget << R"(,
  "T": 6.0,
  "J": 50,
  "model": {"kind": "builtin", "name": "nav4", "dt": 0.1},
  "impl": {"kind": "automaton", "file": "offset.json", "dt": 0.1},
  "objective": {"kind": "conformance", "tau": 0.05, "eps": 0.25, "robustness": "spatial"},
  "space": {"h0_box": [[0.2, 0.4], [0.2, 0.4]], "input_box": [[-0.2, 0.2]],
            "control_points": 3, "interpolation": "pc"},
  "optimizer": {"kind": "sa"}
})";
  // the benchmark automaton with a constant output offset
  std::ostringstream automaton;
  automaton << R"({
  "name": "nav4-offset",
  "state_dim": 2,
  "input_dim": 1,
  "initial_mode": 1,
  "initial_box": [[0.2, 0.4], [0.2, 0.4]],
  "flow_box": [[-0.5, 2.5], [-0.5, 2.5]],
  "output": {"matrix": [[1, 0], [0, 1]], "offset": [)" << offset << R"(, 0]},
  "modes": [
    {"label": 1, "A": [[-0.02, -0.9], [0.9, -0.02]], "B": [[0.4], [0]], "c": [0.92, -0.88]},
    {"label": 2, "A": [[-0.02, -0.9], [0.9, -0.02]], "B": [[0.4], [0]], "c": [0.92, -0.88]},
    {"label": 4, "A": [[-0.02, -0.9], [0.9, -0.02]], "B": [[0.4], [0]], "c": [0.92, -0.88]},
    {"label": 3, "A": [[-0.02, -0.9], [0.9, -0.02]], "B": [[0.4], [0]], "c": [0.92, -0.88]}
  ],
  "edges": [
    {"from": 1, "to": 2, "guard": [{"axis": 0, "op": ">=", "value": 1.0}]},
    {"from": 2, "to": 4, "guard": [{"axis": 1, "op": ">=", "value": 1.0}]},
    {"from": 4, "to": 3, "guard": [{"axis": 0, "op": "<=", "value": 1.0}]},
    {"from": 3, "to": 1, "guard": [{"axis": 1, "op": "<=", "value": 1.0}]}
  ]
})";
  std::ofstream(dir / "offset.json") << automaton.str();
  const fs::path cfg_path = dir / "falsify.json";
  std::ofstream(cfg_path) << cfg.str();
  return cfg_path.string();
}

} // namespace

TEST_CASE("falsify writes reports and encodes the finding in the exit code") {
  const fs::path dir = work_dir();
  const fs::path out1 = dir / "run_ident";
  const fs::path out2 = dir / "run_offset";
  fs::remove_all(out1);
  fs::remove_all(out2);

  const std::string ident_cfg = falsify_config(dir, 0.0, 15, 42);
  auto clean = run_cli("falsify " + ident_cfg + " --out " + out1.string());
  CHECK(clean.exit_code == 0);
  CHECK(fs::exists(out1 / "manifest.json"));
  CHECK(fs::exists(out1 / "report.json"));
  CHECK(fs::exists(out1 / "tests.csv"));
  CHECK(slurp(out1 / "report.json").find("\"falsified\": false") != std::string::npos);

  const std::string offset_cfg = falsify_config(dir, 1.0, 50, 42);
  auto finding = run_cli("falsify " + offset_cfg + " --out " + out2.string());
  CHECK(finding.exit_code == 1);
  const std::string report = slurp(out2 / "report.json");
  CHECK(report.find("\"falsified\": true") != std::string::npos);
  CHECK(report.find("best_theta") != std::string::npos);

  auto bad = run_cli("falsify /nonexistent.json");
  CHECK(bad.exit_code == 2);

  // schema violations list their paths
  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << R"({"budget": 0, "T": -1})";
  auto schema = run_cli("falsify " + broken.string());
  CHECK(schema.exit_code == 2);
  CHECK(schema.output.find("/budget") != std::string::npos);
  CHECK(schema.output.find("/T") != std::string::npos);
  CHECK(schema.output.find("/objective") != std::string::npos);
}

TEST_CASE("falsify runs are byte-identical for a fixed manifest") {
  const fs::path dir = work_dir();
  const fs::path out1 = dir / "det1";
  const fs::path out2 = dir / "det2";
  fs::remove_all(out1);
  fs::remove_all(out2);
  const std::string cfg = falsify_config(dir, 0.2, 25, 7);
  auto r1 = run_cli("falsify " + cfg + " --out " + out1.string());
  auto r2 = run_cli("falsify " + cfg + " --out " + out2.string());
  CHECK(r1.exit_code == r2.exit_code);
  for (const char* name : {"manifest.json", "report.json", "tests.csv"})
    CHECK(slurp(out1 / name) == slurp(out2 / name));
}

TEST_CASE("degree command brackets a replay offset") {
  const fs::path dir = work_dir();
  const fs::path a = dir / "deg_a.csv";
  const fs::path b = dir / "deg_b.csv";
  write_trace_csv_file(a, constant_trace(0.0, 11, 0.5));
  write_trace_csv_file(b, constant_trace(0.3, 11, 0.5));
  const fs::path cfg_path = dir / "degree.json";
  std::ofstream(cfg_path) << R"({
  "seed": 1,
  "budget": 4,
  "T": 5.0,
  "J": 4,
  "model": {"kind": "replay", "traces": ["deg_a.csv"]},
  "impl": {"kind": "replay", "traces": ["deg_b.csv"]},
  "space": {"h0_box": [[0, 0]], "input_box": [[0, 0]], "control_points": 1},
  "optimizer": {"kind": "uniform"},
  "degree": {"search": "epsilon", "tau": 0.1, "eps0": 0.1, "K": 12}
})";
  const fs::path out = dir / "degree_out";
  fs::remove_all(out);
  auto res = run_cli("degree " + cfg_path.string() + " --out " + out.string());
  CHECK(res.exit_code == 1); // midpoints falsified: a nonzero degree was certified
  CHECK(fs::exists(out / "degree.json"));
  CHECK(fs::exists(out / "iterations.csv"));
  const std::string report = slurp(out / "degree.json");
  CHECK(report.find("\"axis\": \"epsilon\"") != std::string::npos);

  const fs::path out2 = dir / "degree_out2";
  fs::remove_all(out2);
  auto res2 = run_cli("degree " + cfg_path.string() + " --out " + out2.string());
  CHECK(res2.exit_code == res.exit_code);
  for (const char* name : {"manifest.json", "degree.json", "iterations.csv"})
    CHECK(slurp(out / name) == slurp(out2 / name));
}

TEST_CASE("bench summarizes mutant families") {
  const fs::path dir = work_dir();
  const fs::path cfg_path = dir / "bench.json";
  std::ofstream(cfg_path) << R"({
  "seed": 5,
  "runs": 3,
  "budget": 10,
  "T": 6.0,
  "J": 50,
  "base": {"kind": "builtin", "name": "nav4", "dt": 0.1},
  "mutants": [
    {"label": "ident", "mutation": {"kind": "dynamics_scale", "factor": 1.0}},
    {"label": "vg_big", "mutation": {"kind": "guard_offset", "axis": "vertical", "delta": 3.0}}
  ],
  "objective": {"kind": "pwc", "D": 0.5},
  "space": {"h0_box": [[0.2, 0.4], [0.2, 0.4]], "input_box": [[-0.2, 0.2]],
            "control_points": 3},
  "optimizer": {"kind": "sa"}
})";
  const fs::path out = dir / "bench_out";
  fs::remove_all(out);
  auto res = run_cli("bench " + cfg_path.string() + " --out " + out.string());
  CHECK(res.exit_code == 1); // the guard mutant falsifies
  REQUIRE(fs::exists(out / "bench.csv"));
  const std::string csv = slurp(out / "bench.csv");
  CHECK(csv.find("ident,0,3,0,") != std::string::npos);  // no falsifications
  CHECK(csv.find("vg_big,3,3,3,") != std::string::npos); // all runs falsified
  // the large guard mutant falls on the first tests of every run
  const auto row = csv.find("vg_big");
  std::stringstream fields(csv.substr(row));
  std::string field;
  for (int i = 0; i < 5; ++i) std::getline(fields, field, ',');
  CHECK(std::stod(field) <= 2.0);
}

TEST_CASE("monitor evaluates formulas over a trace pair") {
  const fs::path dir = work_dir();
  const fs::path a = dir / "pair_a.csv";
  const fs::path b = dir / "pair_b.csv";
  write_trace_csv_file(a, scalar_trace({0.2, 0.5, 0.9}, {0, 1, 2}));
  write_trace_csv_file(b, scalar_trace({0.1, 0.6, 0.9}, {0, 1, 2}));
  auto res = run_cli("monitor -f \"[]_[0,2] (err < 0.3)\" --trace " + a.string() +
                     " --trace2 " + b.string());
  CHECK(res.exit_code == 0);
  CHECK(res.output == "0.2\n");
}

TEST_CASE("degree command explores a tau grid") {
  const fs::path dir = work_dir();
  // step traces 0.3 s apart: eps collapses once tau clears the delay
  auto step = [](double at) {
    std::vector<double> ys(41);
    std::vector<HybridTimestamp> st(41);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      const double t = 0.1 * static_cast<double>(i);
      ys[i] = t >= at ? 1.0 : 0.0;
      st[i] = {t, 1};
    }
    return TimedStateSequence(std::move(ys), std::move(st), 1);
  };
  write_trace_csv_file(dir / "par_a.csv", step(1.0));
  write_trace_csv_file(dir / "par_b.csv", step(1.3));
  const fs::path cfg = dir / "pareto.json";
  std::ofstream(cfg) << R"({
  "seed": 3,
  "budget": 3,
  "T": 4.0,
  "J": 4,
  "model": {"kind": "replay", "traces": ["par_a.csv"]},
  "impl": {"kind": "replay", "traces": ["par_b.csv"]},
  "space": {"h0_box": [[0, 0]], "input_box": [[0, 0]], "control_points": 1},
  "optimizer": {"kind": "uniform"},
  "degree": {"search": "pareto", "tau_grid": [0.05, 0.2, 0.5], "eps0": 0.05, "K": 8}
})";
  const fs::path out = dir / "pareto_out";
  fs::remove_all(out);
  auto res = run_cli("degree " + cfg.string() + " --out " + out.string());
  CHECK(res.exit_code == 1);
  REQUIRE(fs::exists(out / "pareto.csv"));
  const std::string csv = slurp(out / "pareto.csv");
  // three grid rows plus header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(res.output.find("tau=0.5") != std::string::npos);
}
