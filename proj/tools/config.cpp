#include "config.hpp"

#include "cpsconf/conformance.hpp"
#include "cpsconf/trace_io.hpp"

#include <fstream>
#include <sstream>

namespace cpsconf::cli {

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::runtime_error([&problems] {
        std::string msg = "config errors:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()) {}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace {

const json* get(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

double require_number(const json& doc, const std::string& path, const std::string& key,
                      std::vector<std::string>& problems, double fallback = 0.0) {
  const json* v = get(doc, key);
  if (!v || !v->is_number()) {
    problems.push_back(path + "/" + key + ": expected a number");
    return fallback;
  }
  return v->get<double>();
}

std::string require_string(const json& doc, const std::string& path,
                           const std::string& key, std::vector<std::string>& problems) {
  const json* v = get(doc, key);
  if (!v || !v->is_string()) {
    problems.push_back(path + "/" + key + ": expected a string");
    return {};
  }
  return v->get<std::string>();
}

Box parse_box(const json& v, const std::string& path,
              std::vector<std::string>& problems) {
  Box box;
  if (!v.is_array() || v.empty()) {
    problems.push_back(path + ": expected an array of [lo, hi] pairs");
    return box;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& pair = v[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
        !pair[1].is_number()) {
      problems.push_back(path + "/" + std::to_string(i) + ": expected [lo, hi]");
      return box;
    }
    box.lo.push_back(pair[0].get<double>());
    box.hi.push_back(pair[1].get<double>());
    if (box.lo.back() > box.hi.back())
      problems.push_back(path + "/" + std::to_string(i) + ": lo exceeds hi");
  }
  return box;
}

Mutation parse_mutation(const json& spec, const std::string& path,
                        std::vector<std::string>& problems) {
  const std::string kind = require_string(spec, path, "kind", problems);
  if (kind == "dynamics_scale") {
    DynamicsScale s;
    s.factor = require_number(spec, path, "factor", problems, 1.0);
    return s;
  }
  if (kind == "guard_offset") {
    GuardOffset g;
    g.axis = require_string(spec, path, "axis", problems);
    g.delta = require_number(spec, path, "delta", problems);
    return g;
  }
  problems.push_back(path + "/kind: expected 'dynamics_scale' or 'guard_offset'");
  return DynamicsScale{};
}

} // namespace

SystemUnderTest parse_system(const json& spec, const std::string& path,
                             const std::filesystem::path& base_dir,
                             std::vector<std::string>& problems) {
  // fallback system so parsing can continue after an error
  auto fallback = [] {
    return SystemUnderTest(
        SystemUnderTest::AutomatonBackend{nav_benchmark(), SimulationOptions{}});
  };
  if (!spec.is_object()) {
    problems.push_back(path + ": expected a system object");
    return fallback();
  }
  const std::string kind = require_string(spec, path, "kind", problems);
  try {
    if (kind == "builtin" || kind == "automaton") {
      HybridAutomaton automaton;
      if (kind == "builtin") {
        const std::string name = require_string(spec, path, "name", problems);
        if (name != "nav4") {
          problems.push_back(path + "/name: unknown builtin '" + name + "'");
          return fallback();
        }
        automaton = nav_benchmark();
      } else {
        const std::string file = require_string(spec, path, "file", problems);
        if (file.empty()) return fallback();
        automaton = load_automaton_file(base_dir / file);
      }
      if (const json* m = get(spec, "mutation"))
        automaton = make_mutant(automaton, parse_mutation(*m, path + "/mutation", problems));
      SimulationOptions opts;
      if (get(spec, "dt")) opts.sampling_period = require_number(spec, path, "dt", problems);
      if (const json* integ = get(spec, "integrator")) {
        const std::string name = integ->get<std::string>();
        if (name == "euler") opts.integrator = Integrator::euler;
        else if (name == "rk4") opts.integrator = Integrator::rk4;
        else problems.push_back(path + "/integrator: expected 'rk4' or 'euler'");
      }
      SystemUnderTest sut(SystemUnderTest::AutomatonBackend{automaton, opts});
      if (const json* oj = get(spec, "observe_jumps")) sut.set_observe_jumps(oj->get<bool>());
      return sut;
    }
    if (kind == "replay") {
      const json* traces = get(spec, "traces");
      if (!traces || !traces->is_array() || traces->empty()) {
        problems.push_back(path + "/traces: expected a non-empty array of trace files");
        return fallback();
      }
      SystemUnderTest::ReplayBackend backend;
      for (const auto& f : *traces)
        backend.table.push_back(read_trace_csv_file(base_dir / f.get<std::string>()));
      return SystemUnderTest(std::move(backend));
    }
    if (kind == "external") {
      const json* command = get(spec, "command");
      if (!command || !command->is_array() || command->empty()) {
        problems.push_back(path + "/command: expected a non-empty argv array");
        return fallback();
      }
      SystemUnderTest::ExternalBackend backend;
      for (const auto& a : *command)
        backend.command.argv.push_back(a.get<std::string>());
      if (get(spec, "timeout"))
        backend.command.timeout_seconds = require_number(spec, path, "timeout", problems);
      if (get(spec, "dt"))
        backend.sampling_period = require_number(spec, path, "dt", problems);
      return SystemUnderTest(std::move(backend));
    }
  } catch (const std::exception& e) {
    problems.push_back(path + ": " + e.what());
    return fallback();
  }
  problems.push_back(path + "/kind: expected 'builtin', 'automaton', 'replay' or "
                            "'external'");
  return fallback();
}

Objective parse_objective(const json& spec, const std::string& path, double horizon,
                          std::vector<std::string>& problems) {
  if (!spec.is_object()) {
    problems.push_back(path + ": expected an objective object");
    return ConformanceObjective{};
  }
  auto kind_of = [&](const std::string& name) {
    return name == "temporal" ? RobustnessKind::temporal : RobustnessKind::spatial;
  };
  const std::string kind = require_string(spec, path, "kind", problems);
  if (kind == "conformance") {
    ConformanceObjective obj;
    obj.tau = require_number(spec, path, "tau", problems);
    obj.eps = require_number(spec, path, "eps", problems);
    if (const json* r = get(spec, "robustness")) obj.kind = kind_of(r->get<std::string>());
    if (obj.tau <= 0.0) problems.push_back(path + "/tau: must be positive");
    if (obj.eps <= 0.0) problems.push_back(path + "/eps: must be positive");
    return obj;
  }
  if (kind == "formula") {
    FormulaObjective obj;
    const std::string text = require_string(spec, path, "text", problems);
    try {
      if (!text.empty()) obj.formula = parse_formula(text);
    } catch (const std::exception& e) {
      problems.push_back(path + "/text: " + e.what());
    }
    if (!obj.formula) obj.formula = Formula::verum();
    obj.kind = RobustnessKind::spatial;
    if (const json* r = get(spec, "robustness")) obj.kind = kind_of(r->get<std::string>());
    return obj;
  }
  if (kind == "pwc") {
    FormulaObjective obj;
    const double hold = require_number(spec, path, "D", problems);
    try {
      obj.formula = build_pwc_formula(hold, horizon);
    } catch (const std::exception& e) {
      problems.push_back(path + "/D: " + e.what());
      obj.formula = Formula::verum();
    }
    obj.kind = RobustnessKind::temporal;
    return obj;
  }
  problems.push_back(path + "/kind: expected 'conformance', 'formula' or 'pwc'");
  return ConformanceObjective{};
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir,
                           std::vector<std::string>& problems) {
  (void)base_dir;
  RunConfig cfg;
  cfg.raw = doc;
  if (const json* seed = get(doc, "seed")) {
    if (!seed->is_number_unsigned() && !seed->is_number_integer())
      problems.push_back("/seed: expected an integer");
    else {
      cfg.seed = seed->get<std::uint64_t>();
      cfg.seed_given = true;
    }
  }
  if (const json* budget = get(doc, "budget")) {
    if (!budget->is_number_integer() || budget->get<long long>() <= 0)
      problems.push_back("/budget: expected a positive integer");
    else
      cfg.budget = budget->get<std::size_t>();
  } else {
    problems.push_back("/budget: expected a positive integer");
  }
  cfg.horizon = require_number(doc, "", "T", problems);
  if (cfg.horizon <= 0.0) problems.push_back("/T: must be positive");
  const json* jumps = get(doc, "J");
  cfg.max_jumps = jumps && jumps->is_number_integer() ? jumps->get<int>() : 1 << 20;

  const json* space = get(doc, "space");
  if (!space || !space->is_object()) {
    problems.push_back("/space: expected an object");
  } else {
    cfg.space.h0_box = parse_box(space->contains("h0_box") ? (*space)["h0_box"]
                                                           : json::array(),
                                 "/space/h0_box", problems);
    if (const json* one = get(*space, "input_box")) {
      cfg.space.input_boxes = {parse_box(*one, "/space/input_box", problems)};
    } else if (const json* many = get(*space, "input_boxes")) {
      if (!many->is_array()) {
        problems.push_back("/space/input_boxes: expected an array of boxes");
      } else {
        for (std::size_t i = 0; i < many->size(); ++i)
          cfg.space.input_boxes.push_back(parse_box(
              (*many)[i], "/space/input_boxes/" + std::to_string(i), problems));
      }
    } else {
      problems.push_back("/space/input_box: expected a box");
    }
    const json* points = get(*space, "control_points");
    cfg.space.control_points =
        points && points->is_number_integer() && points->get<long long>() > 0
            ? points->get<std::size_t>()
            : (problems.push_back("/space/control_points: expected a positive integer"),
               1);
    if (const json* interp = get(*space, "interpolation")) {
      const std::string name = interp->get<std::string>();
      if (name == "pc")
        cfg.space.interpolation = InputSignal::Interpolation::piecewise_constant;
      else if (name == "pl")
        cfg.space.interpolation = InputSignal::Interpolation::piecewise_linear;
      else problems.push_back("/space/interpolation: expected 'pc' or 'pl'");
    }
  }
  cfg.space.horizon = cfg.horizon;
  cfg.space.max_jumps = cfg.max_jumps;

  if (const json* opt = get(doc, "optimizer")) {
    const std::string kind = require_string(*opt, "/optimizer", "kind", problems);
    if (kind == "sa") cfg.optimizer.kind = OptimizerConfig::Kind::simulated_annealing;
    else if (kind == "uniform")
      cfg.optimizer.kind = OptimizerConfig::Kind::uniform_random;
    else problems.push_back("/optimizer/kind: expected 'sa' or 'uniform'");
    if (get(*opt, "restarts"))
      cfg.optimizer.restarts =
          static_cast<int>(require_number(*opt, "/optimizer", "restarts", problems, 1));
    if (get(*opt, "cooling"))
      cfg.optimizer.cooling = require_number(*opt, "/optimizer", "cooling", problems, 0.97);
    if (get(*opt, "sigma_frac"))
      cfg.optimizer.sigma_frac =
          require_number(*opt, "/optimizer", "sigma_frac", problems, 0.1);
    if (get(*opt, "initial_temp"))
      cfg.optimizer.initial_temp =
          require_number(*opt, "/optimizer", "initial_temp", problems, 0.0);
  }
  return cfg;
}

std::string canonical(const json& doc) { return doc.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    const json& config, std::uint64_t seed) {
  json manifest;
  manifest["command"] = command;
  manifest["config_hash"] = stable_hash(canonical(config));
  manifest["config"] = config;
  manifest["seed"] = seed;
  manifest["version"] = "0.1.0";
  write_text_file(out_dir / "manifest.json", canonical(manifest));
}

json theta_to_json(const Theta& theta) {
  json out;
  out["h0"] = theta.h0;
  out["control_values"] = theta.control_values;
  return out;
}

} // namespace cpsconf::cli
