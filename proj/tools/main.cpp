#include "config.hpp"

#include "cpsconf/conformance.hpp"
#include "cpsconf/degree.hpp"
#include "cpsconf/falsify.hpp"
#include "cpsconf/monitor.hpp"
#include "cpsconf/trace_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace cpsconf;
using namespace cpsconf::cli;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFinding = 1;
constexpr int kExitError = 2;

RobustnessKind parse_kind(const std::string& name) {
  if (name == "spatial") return RobustnessKind::spatial;
  if (name == "temporal") return RobustnessKind::temporal;
  throw std::runtime_error("robustness kind must be 'spatial' or 'temporal'");
}

std::string robustness_text(double v) { return format_double(v); }

ParallelTrace load_pair(const std::string& file_a, const std::string& file_b,
                        double horizon, int max_jumps) {
  auto a = read_trace_csv_file(file_a);
  auto b = file_b.empty() ? a : read_trace_csv_file(file_b);
  const double h = horizon > 0.0 ? horizon : std::max(a.span_end(), b.span_end());
  const int j = max_jumps > 0
                    ? max_jumps
                    : std::max(a.stamps().back().j, b.stamps().back().j);
  return ParallelTrace(std::move(a), std::move(b), h, j);
}

int cmd_monitor(const std::string& formula_text, const std::string& trace_a,
                const std::string& trace_b, const std::string& kind_name, double at,
                double horizon, int max_jumps) {
  auto phi = parse_formula(formula_text);
  auto trace = load_pair(trace_a, trace_b, horizon, max_jumps);
  const Robustness rho = robustness(phi, trace, at, parse_kind(kind_name));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", rho.value);
  std::cout << buf << "\n";
  return rho.value >= 0.0 ? kExitPass : kExitFinding;
}

int cmd_check(const std::string& trace_a, const std::string& trace_b, double tau,
              double eps, double horizon, int max_jumps) {
  auto a = read_trace_csv_file(trace_a);
  auto b = read_trace_csv_file(trace_b);
  ClosenessParams params;
  params.tau = tau;
  params.eps = eps;
  params.horizon = horizon > 0.0 ? horizon : std::max(a.span_end(), b.span_end());
  params.max_jumps = max_jumps > 0
                         ? max_jumps
                         : std::max(a.stamps().back().j, b.stamps().back().j);
  auto verdict = is_close(a, b, params);
  if (verdict.close) {
    std::cout << "CLOSE\n";
    return kExitPass;
  }
  const auto& w = *verdict.witness;
  std::cout << "NOT CLOSE, witness i=" << w.index << " side="
            << (w.side == WitnessSide::model ? "A" : "B") << " t=" << format_double(w.t)
            << " j=" << w.j << "\n";
  return kExitFinding;
}

struct LoadedRun {
  RunConfig cfg;
  SystemUnderTest model;
  SystemUnderTest impl;
  json raw;
};

LoadedRun load_run(const fs::path& config_path, bool needs_objective,
                   Objective* objective) {
  const json doc = load_json_file(config_path);
  std::vector<std::string> problems;
  RunConfig cfg = parse_run_config(doc, config_path.parent_path(), problems);
  SystemUnderTest model =
      parse_system(doc.contains("model") ? doc["model"] : json{}, "/model",
                   config_path.parent_path(), problems);
  SystemUnderTest impl =
      parse_system(doc.contains("impl") ? doc["impl"] : json{}, "/impl",
                   config_path.parent_path(), problems);
  if (needs_objective) {
    if (!doc.contains("objective")) problems.push_back("/objective: missing");
    else *objective = parse_objective(doc["objective"], "/objective", cfg.horizon,
                                      problems);
  }
  if (!problems.empty()) throw ConfigError(problems);
  return {std::move(cfg), std::move(model), std::move(impl), doc};
}

std::string theta_text(const Theta& theta) {
  std::string out = "h0:";
  for (double v : theta.h0) out += " " + format_double(v);
  out += " u:";
  for (std::size_t p = 0; p < theta.control_values.size(); ++p) {
    if (p) out += " |";
    for (double v : theta.control_values[p]) out += " " + format_double(v);
  }
  return out;
}

std::string tests_csv(const FalsificationResult& result) {
  std::ostringstream out;
  out << "test,robustness,falsified,error,theta\n";
  for (const auto& rec : result.log) {
    out << rec.index << ',';
    if (rec.error) out << "nan,0,1," << '"' << rec.message << '"';
    else
      out << format_double(rec.robustness) << ',' << (rec.robustness < 0.0 ? 1 : 0)
          << ",0," << '"' << theta_text(rec.theta) << '"';
    out << "\n";
  }
  return out.str();
}

void apply_seed(RunConfig& cfg, const std::optional<std::uint64_t>& override_seed) {
  if (override_seed) {
    cfg.seed = *override_seed;
    cfg.seed_given = true;
  }
  if (!cfg.seed_given) {
    cfg.seed = std::random_device{}();
    std::cerr << "note: no seed in config, generated " << cfg.seed
              << " (recorded in the manifest; rerun with --seed to reproduce)\n";
  }
}

int cmd_falsify(const fs::path& config_path, fs::path out_dir,
                const std::optional<std::uint64_t>& seed_override) {
  Objective objective;
  LoadedRun run = load_run(config_path, true, &objective);
  if (out_dir.empty())
    out_dir = run.raw.value("output_dir", std::string("cpsconf_out"));
  fs::create_directories(out_dir);
  apply_seed(run.cfg, seed_override);

  auto result = falsify(run.model, run.impl, objective, run.cfg.space,
                        run.cfg.optimizer, run.cfg.budget, run.cfg.seed);

  write_manifest(out_dir, "falsify", run.raw, run.cfg.seed);
  json report;
  report["seed"] = result.rng_seed;
  report["budget"] = run.cfg.budget;
  report["tests_run"] = result.tests_run;
  report["falsified"] = result.falsified;
  report["best_robustness"] = robustness_text(result.best_robustness.value);
  report["best_theta"] = theta_to_json(result.best_theta);
  write_text_file(out_dir / "report.json", canonical(report));
  write_text_file(out_dir / "tests.csv", tests_csv(result));

  std::cout << (result.falsified ? "FALSIFIED" : "no falsification") << " after "
            << result.tests_run << " tests, best robustness "
            << robustness_text(result.best_robustness.value) << " ("
            << format_double(result.wall_time_seconds) << " s)\n"
            << "reports in " << out_dir.string() << "\n";
  return result.falsified ? kExitFinding : kExitPass;
}

std::string iterations_csv(const DegreeResult& result) {
  std::ostringstream out;
  out << "iteration,value,robustness,falsified,tests\n";
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    const auto& it = result.log[i];
    out << (i + 1) << ',' << format_double(it.value) << ','
        << format_double(it.robustness) << ',' << (it.falsified ? 1 : 0) << ','
        << it.tests_run << "\n";
  }
  return out.str();
}

json degree_to_json(const DegreeResult& result) {
  json out;
  out["axis"] = result.axis == DegreeAxis::epsilon ? "epsilon" : "tau";
  out["fixed"] = format_double(result.fixed_value);
  out["lo"] = format_double(result.lo);
  out["hi"] = format_double(result.hi);
  out["width"] = format_double(result.width);
  out["iterations"] = result.iterations;
  if (result.witness) out["witness"] = theta_to_json(*result.witness);
  return out;
}

int cmd_degree(const fs::path& config_path, fs::path out_dir,
               const std::optional<std::uint64_t>& seed_override) {
  LoadedRun run = load_run(config_path, false, nullptr);
  const json* spec = run.raw.contains("degree") ? &run.raw["degree"] : nullptr;
  if (!spec) throw ConfigError({"/degree: missing"});
  if (out_dir.empty())
    out_dir = run.raw.value("output_dir", std::string("cpsconf_out"));
  fs::create_directories(out_dir);
  apply_seed(run.cfg, seed_override);

  const std::string search = spec->value("search", std::string("epsilon"));
  DegreeOptions opts;
  opts.iterations = spec->value("K", 10);
  opts.max_doublings = spec->value("max_doublings", 30);

  write_manifest(out_dir, "degree", run.raw, run.cfg.seed);

  if (search == "pareto") {
    std::vector<double> grid;
    for (const auto& v : spec->value("tau_grid", json::array()))
      grid.push_back(v.get<double>());
    const double eps0 = spec->value("eps0", 0.1);
    auto points = pareto_front(run.model, run.impl, grid, eps0, run.cfg.space,
                               run.cfg.optimizer, run.cfg.budget, run.cfg.seed, opts);
    std::ostringstream csv;
    csv << "tau,eps_lo,eps_hi,width,error\n";
    json report = json::array();
    bool any_witness = false;
    for (const auto& p : points) {
      json row;
      row["tau"] = format_double(p.tau);
      if (p.result) {
        csv << format_double(p.tau) << ',' << format_double(p.result->lo) << ','
            << format_double(p.result->hi) << ',' << format_double(p.result->width)
            << ",\n";
        row["degree"] = degree_to_json(*p.result);
        any_witness |= p.result->witness.has_value();
      } else {
        csv << format_double(p.tau) << ",,,," << '"' << p.error << '"' << "\n";
        row["error"] = p.error;
      }
      report.push_back(row);
      std::cout << "tau=" << format_double(p.tau) << ": "
                << (p.result ? "eps in [" + format_double(p.result->lo) + ", " +
                                   format_double(p.result->hi) + "]"
                             : "error: " + p.error)
                << "\n";
    }
    write_text_file(out_dir / "degree.json", canonical(report));
    write_text_file(out_dir / "pareto.csv", csv.str());
    return any_witness ? kExitFinding : kExitPass;
  }

  DegreeResult result;
  if (search == "epsilon") {
    const double tau = spec->value("tau", 0.0);
    if (tau <= 0.0) throw ConfigError({"/degree/tau: must be positive"});
    double eps_h;
    if (spec->contains("eps_h")) {
      eps_h = (*spec)["eps_h"].get<double>();
    } else {
      const double eps0 = spec->value("eps0", 0.1);
      eps_h = initial_bracket(run.model, run.impl, tau, eps0, run.cfg.space,
                              run.cfg.optimizer, run.cfg.budget, run.cfg.seed,
                              RobustnessKind::spatial, opts.max_doublings);
      opts.verify_upper = false; // the bracket stage just cleared it
    }
    result = binary_search_epsilon(run.model, run.impl, tau, eps_h, run.cfg.space,
                                   run.cfg.optimizer, run.cfg.budget, run.cfg.seed,
                                   opts);
  } else if (search == "tau") {
    const double eps = spec->value("eps", 0.0);
    if (eps <= 0.0) throw ConfigError({"/degree/eps: must be positive"});
    const double tau_h = spec->value("tau_h", 0.0);
    if (tau_h <= 0.0) throw ConfigError({"/degree/tau_h: must be positive"});
    result = binary_search_tau(run.model, run.impl, eps, tau_h, run.cfg.space,
                               run.cfg.optimizer, run.cfg.budget, run.cfg.seed, opts);
  } else {
    throw ConfigError({"/degree/search: expected 'epsilon', 'tau' or 'pareto'"});
  }

  write_text_file(out_dir / "degree.json", canonical(degree_to_json(result)));
  write_text_file(out_dir / "iterations.csv", iterations_csv(result));
  std::cout << (result.axis == DegreeAxis::epsilon ? "eps" : "tau") << " in ["
            << format_double(result.lo) << ", " << format_double(result.hi)
            << "] after " << result.iterations << " iterations ("
            << format_double(result.wall_time_seconds) << " s)\n"
            << "reports in " << out_dir.string() << "\n";
  return result.witness ? kExitFinding : kExitPass;
}

int cmd_bench(const fs::path& config_path, fs::path out_dir,
              const std::optional<std::uint64_t>& seed_override) {
  const json doc = load_json_file(config_path);
  std::vector<std::string> problems;
  RunConfig cfg = parse_run_config(doc, config_path.parent_path(), problems);
  if (!doc.contains("base")) problems.push_back("/base: missing");
  if (!doc.contains("mutants") || !doc["mutants"].is_array() || doc["mutants"].empty())
    problems.push_back("/mutants: expected a non-empty array");
  const int runs = doc.value("runs", 20);
  if (runs <= 0) problems.push_back("/runs: expected a positive integer");
  if (!doc.contains("objective")) problems.push_back("/objective: missing");
  if (!problems.empty()) throw ConfigError(problems);

  Objective objective = parse_objective(doc["objective"], "/objective", cfg.horizon,
                                        problems);
  SystemUnderTest base = parse_system(doc["base"], "/base", config_path.parent_path(),
                                      problems);

  struct MutantSpec {
    std::string label;
    Mutation mutation;
    double magnitude;
  };
  std::vector<MutantSpec> mutants;
  const json base_spec = doc["base"];
  for (std::size_t i = 0; i < doc["mutants"].size(); ++i) {
    const auto& m = doc["mutants"][i];
    MutantSpec spec;
    spec.label = m.value("label", "mutant" + std::to_string(i + 1));
    spec.mutation = [&]() -> Mutation {
      const std::string where = "/mutants/" + std::to_string(i) + "/mutation";
      if (!m.contains("mutation")) throw ConfigError({where + ": missing"});
      const json& mut = m["mutation"];
      const std::string kind = mut.value("kind", "");
      if (kind == "guard_offset")
        return GuardOffset{mut.value("axis", ""), mut.value("delta", 0.0)};
      if (kind == "dynamics_scale")
        return DynamicsScale{mut.value("factor", 1.0), {}};
      throw ConfigError({where + "/kind: expected 'dynamics_scale' or 'guard_offset'"});
    }();
    spec.magnitude = mutation_magnitude(spec.mutation);
    mutants.push_back(std::move(spec));
  }
  if (!problems.empty()) throw ConfigError(problems);

  if (out_dir.empty()) out_dir = doc.value("output_dir", std::string("cpsconf_out"));
  fs::create_directories(out_dir);
  apply_seed(cfg, seed_override);
  write_manifest(out_dir, "bench", doc, cfg.seed);

  // base automaton needed to derive mutants; replay/external bases only
  // support identity "mutants"
  const bool base_is_automaton = base_spec.value("kind", "") == "builtin" ||
                                 base_spec.value("kind", "") == "automaton";

  std::ostringstream csv;
  csv << "mutant,magnitude,runs,falsified_runs,avg_tests_to_falsification,"
         "avg_finite_robustness,neg_inf_count,pos_inf_count,avg_time_s\n";
  json rows = json::array();
  bool any_falsified = false;

  for (const auto& mutant : mutants) {
    SystemUnderTest impl = [&] {
      if (!base_is_automaton)
        throw ConfigError({"/base/kind: bench mutants need an automaton base"});
      json spec = base_spec;
      spec["mutation"] =
          std::holds_alternative<DynamicsScale>(mutant.mutation)
              ? json{{"kind", "dynamics_scale"},
                     {"factor", std::get<DynamicsScale>(mutant.mutation).factor}}
              : json{{"kind", "guard_offset"},
                     {"axis", std::get<GuardOffset>(mutant.mutation).axis},
                     {"delta", std::get<GuardOffset>(mutant.mutation).delta}};
      std::vector<std::string> ps;
      auto sys = parse_system(spec, "/base", config_path.parent_path(), ps);
      if (!ps.empty()) throw ConfigError(ps);
      return sys;
    }();

    std::size_t falsified_runs = 0;
    double tests_acc = 0.0;
    double finite_acc = 0.0;
    std::size_t finite_count = 0;
    std::size_t neg_inf = 0;
    std::size_t pos_inf = 0;
    double time_acc = 0.0;
    for (int r = 0; r < runs; ++r) {
      auto res = falsify(base, impl, objective, cfg.space, cfg.optimizer, cfg.budget,
                         cfg.seed + static_cast<std::uint64_t>(r));
      time_acc += res.wall_time_seconds;
      if (res.falsified) {
        ++falsified_runs;
        tests_acc += static_cast<double>(res.tests_run);
        any_falsified = true;
      }
      const double rho = res.best_robustness.value;
      if (rho == kMinusInf) ++neg_inf;
      else if (rho == kPlusInf) ++pos_inf;
      else {
        finite_acc += rho;
        ++finite_count;
      }
    }
    const std::string avg_tests =
        falsified_runs ? format_double(tests_acc / static_cast<double>(falsified_runs))
                       : "";
    const std::string avg_rho =
        finite_count ? format_double(finite_acc / static_cast<double>(finite_count))
                     : "";
    csv << mutant.label << ',' << format_double(mutant.magnitude) << ',' << runs << ','
        << falsified_runs << ',' << avg_tests << ',' << avg_rho << ',' << neg_inf << ','
        << pos_inf << ',' << format_double(time_acc / runs) << "\n";
    json row;
    row["mutant"] = mutant.label;
    row["magnitude"] = mutant.magnitude;
    row["runs"] = runs;
    row["falsified_runs"] = falsified_runs;
    row["avg_tests_to_falsification"] = avg_tests;
    row["avg_finite_robustness"] = avg_rho;
    row["neg_inf_count"] = neg_inf;
    row["pos_inf_count"] = pos_inf;
    rows.push_back(row);
    std::cout << mutant.label << ": " << falsified_runs << "/" << runs
              << " runs falsified" << (avg_tests.empty() ? "" : ", avg tests " + avg_tests)
              << "\n";
  }

  write_text_file(out_dir / "bench.csv", csv.str());
  write_text_file(out_dir / "bench.json", canonical(rows));
  std::cout << "reports in " << out_dir.string() << "\n";
  return any_falsified ? kExitFinding : kExitPass;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformance testing engine for sampled CPS trajectories"};
  app.require_subcommand(1);

  std::string formula_text, trace_a, trace_b, kind_name = "spatial";
  double at = 0.0, horizon = 0.0, tau = 0.0, eps = 0.0;
  int max_jumps = 0;
  std::string config_file, out_dir;
  std::uint64_t seed_flag = 0;

  auto* monitor = app.add_subcommand("monitor", "robustness of a formula over traces");
  monitor->add_option("--formula,-f", formula_text, "formula text")->required();
  monitor->add_option("--trace", trace_a, "first trace CSV (channels y*)")->required();
  monitor->add_option("--trace2", trace_b, "second trace CSV (channels z*)");
  monitor->add_option("--kind", kind_name, "spatial | temporal");
  monitor->add_option("--at", at, "evaluation time (default 0)");
  monitor->add_option("--T", horizon, "horizon override");
  monitor->add_option("--J", max_jumps, "jump budget override");

  auto* check = app.add_subcommand("check", "closeness of two trace files");
  check->add_option("traceA", trace_a)->required();
  check->add_option("traceB", trace_b)->required();
  check->add_option("--tau", tau, "time tolerance")->required();
  check->add_option("--eps", eps, "value tolerance")->required();
  check->add_option("--T", horizon, "horizon (default: trace span)");
  check->add_option("--J", max_jumps, "jump budget (default: max j)");

  auto* falsify_cmd = app.add_subcommand("falsify", "falsification campaign");
  falsify_cmd->add_option("config", config_file)->required();
  falsify_cmd->add_option("--out", out_dir, "output directory");
  auto* fals_seed = falsify_cmd->add_option("--seed", seed_flag, "seed override");

  auto* degree_cmd = app.add_subcommand("degree", "tightest-degree binary search");
  degree_cmd->add_option("config", config_file)->required();
  degree_cmd->add_option("--out", out_dir, "output directory");
  auto* deg_seed = degree_cmd->add_option("--seed", seed_flag, "seed override");

  auto* bench_cmd = app.add_subcommand("bench", "mutant-family campaign");
  bench_cmd->add_option("config", config_file)->required();
  bench_cmd->add_option("--out", out_dir, "output directory");
  auto* bench_seed = bench_cmd->add_option("--seed", seed_flag, "seed override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitError; // help exits clean, bad usage errors
  }

  try {
    if (monitor->parsed())
      return cmd_monitor(formula_text, trace_a, trace_b, kind_name, at, horizon,
                         max_jumps);
    if (check->parsed()) return cmd_check(trace_a, trace_b, tau, eps, horizon, max_jumps);
    auto seed_of = [&](const CLI::Option* opt) {
      return opt->count() ? std::optional<std::uint64_t>(seed_flag) : std::nullopt;
    };
    if (falsify_cmd->parsed())
      return cmd_falsify(config_file, out_dir, seed_of(fals_seed));
    if (degree_cmd->parsed()) return cmd_degree(config_file, out_dir, seed_of(deg_seed));
    if (bench_cmd->parsed()) return cmd_bench(config_file, out_dir, seed_of(bench_seed));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
