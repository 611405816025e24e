#include "cpsconf/conformance.hpp"
#include "cpsconf/degree.hpp"
#include "cpsconf/falsify.hpp"
#include "cpsconf/monitor.hpp"
#include "cpsconf/systems.hpp"
#include "cpsconf/trace_io.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace cpsconf;

namespace {

TimedStateSequence make_trace(const std::vector<std::vector<double>>& values,
                              const std::vector<double>& times,
                              const std::optional<std::vector<int>>& jumps,
                              const std::optional<std::vector<int>>& modes) {
  if (values.size() != times.size())
    throw std::invalid_argument("values and times differ in length");
  const std::size_t dim = values.empty() ? 0 : values.front().size();
  std::vector<double> flat;
  for (const auto& row : values) {
    if (row.size() != dim) throw std::invalid_argument("ragged value rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  std::vector<HybridTimestamp> stamps(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    stamps[i] = {times[i], jumps ? (*jumps)[i] : 1};
  return TimedStateSequence(std::move(flat), std::move(stamps), dim, modes);
}

RobustnessKind kind_from(const std::string& name) {
  if (name == "spatial") return RobustnessKind::spatial;
  if (name == "temporal") return RobustnessKind::temporal;
  throw std::invalid_argument("robustness kind must be 'spatial' or 'temporal'");
}

ParallelTrace make_parallel(const TimedStateSequence& model,
                            const TimedStateSequence& impl, std::optional<double> horizon,
                            std::optional<int> max_jumps) {
  const double h =
      horizon.value_or(std::max(model.span_end(), impl.span_end()));
  const int j = max_jumps.value_or(
      std::max(model.stamps().back().j, impl.stamps().back().j));
  return ParallelTrace(model, impl, h, j);
}

// pybind-side handle: shared_ptr<const Formula> is not a valid holder type
struct PyFormula {
  FormulaPtr ptr;
};

OptimizerConfig optimizer_from(const std::string& name) {
  OptimizerConfig cfg;
  if (name == "sa") cfg.kind = OptimizerConfig::Kind::simulated_annealing;
  else if (name == "uniform") cfg.kind = OptimizerConfig::Kind::uniform_random;
  else throw std::invalid_argument("optimizer must be 'sa' or 'uniform'");
  return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "conformance testing engine for sampled CPS trajectories";

  py::class_<TimedStateSequence>(m, "Trace")
      .def(py::init(&make_trace), py::arg("values"), py::arg("times"),
           py::arg("jumps") = std::nullopt, py::arg("modes") = std::nullopt)
      .def_property_readonly("dim", &TimedStateSequence::dim)
      .def("__len__", &TimedStateSequence::size)
      .def("times",
           [](const TimedStateSequence& t) {
             std::vector<double> out;
             for (const auto& s : t.stamps()) out.push_back(s.t);
             return out;
           })
      .def("jumps",
           [](const TimedStateSequence& t) {
             std::vector<int> out;
             for (const auto& s : t.stamps()) out.push_back(s.j);
             return out;
           })
      .def("modes",
           [](const TimedStateSequence& t) -> std::optional<std::vector<int>> {
             return t.modes();
           })
      .def("values",
           [](const TimedStateSequence& t) {
             std::vector<std::vector<double>> out;
             for (std::size_t i = 0; i < t.size(); ++i) {
               auto s = t.sample(i);
               out.emplace_back(s.begin(), s.end());
             }
             return out;
           })
      .def("__repr__", [](const TimedStateSequence& t) {
        return "<Trace of " + std::to_string(t.size()) + " samples, dim " +
               std::to_string(t.dim()) + ">";
      });

  m.def("read_trace", &read_trace_csv_file, py::arg("path"));
  m.def(
      "write_trace",
      [](const std::filesystem::path& path, const TimedStateSequence& t) {
        write_trace_csv_file(path, t);
      },
      py::arg("path"), py::arg("trace"));

  py::class_<PyFormula>(m, "Formula")
      .def("__str__", [](const PyFormula& f) { return f.ptr->render(); })
      .def("__repr__",
           [](const PyFormula& f) { return "<Formula " + f.ptr->render() + ">"; });
  m.def(
      "parse_formula",
      [](const std::string& text) { return PyFormula{parse_formula(text)}; },
      py::arg("text"));
  m.def(
      "pwc_formula",
      [](double hold, double horizon) {
        return PyFormula{build_pwc_formula(hold, horizon)};
      },
      py::arg("hold"), py::arg("horizon"));

  m.def(
      "robustness",
      [](const PyFormula& phi, const TimedStateSequence& model,
         const std::optional<TimedStateSequence>& impl, double at,
         const std::string& kind, std::optional<double> horizon,
         std::optional<int> max_jumps) {
        auto trace = make_parallel(model, impl.value_or(model), horizon, max_jumps);
        return robustness(phi.ptr, trace, at, kind_from(kind)).value;
      },
      py::arg("formula"), py::arg("trace"), py::arg("trace2") = std::nullopt,
      py::arg("at") = 0.0, py::arg("kind") = "spatial", py::arg("horizon") = std::nullopt,
      py::arg("max_jumps") = std::nullopt);

  m.def(
      "is_close",
      [](const TimedStateSequence& a, const TimedStateSequence& b, double tau,
         double eps, std::optional<double> horizon, std::optional<int> max_jumps) {
        ClosenessParams p;
        p.tau = tau;
        p.eps = eps;
        p.horizon = horizon.value_or(std::max(a.span_end(), b.span_end()));
        p.max_jumps =
            max_jumps.value_or(std::max(a.stamps().back().j, b.stamps().back().j));
        auto v = is_close(a, b, p);
        py::dict out;
        out["close"] = v.close;
        if (v.witness) {
          py::dict w;
          w["side"] = v.witness->side == WitnessSide::model ? "A" : "B";
          w["index"] = v.witness->index;
          w["t"] = v.witness->t;
          w["j"] = v.witness->j;
          out["witness"] = w;
        }
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("tau"), py::arg("eps"),
      py::arg("horizon") = std::nullopt, py::arg("max_jumps") = std::nullopt);

  m.def(
      "epsilon_star",
      [](const TimedStateSequence& a, const TimedStateSequence& b, double tau,
         std::optional<double> horizon, std::optional<int> max_jumps) {
        return epsilon_star(a, b, tau,
                            horizon.value_or(std::max(a.span_end(), b.span_end())),
                            max_jumps.value_or(std::max(a.stamps().back().j,
                                                        b.stamps().back().j)));
      },
      py::arg("a"), py::arg("b"), py::arg("tau"), py::arg("horizon") = std::nullopt,
      py::arg("max_jumps") = std::nullopt);

  m.def(
      "tau_star",
      [](const TimedStateSequence& a, const TimedStateSequence& b, double eps,
         std::optional<double> horizon, std::optional<int> max_jumps) {
        return tau_star(a, b, eps,
                        horizon.value_or(std::max(a.span_end(), b.span_end())),
                        max_jumps.value_or(std::max(a.stamps().back().j,
                                                    b.stamps().back().j)));
      },
      py::arg("a"), py::arg("b"), py::arg("eps"), py::arg("horizon") = std::nullopt,
      py::arg("max_jumps") = std::nullopt);

  m.def(
      "conformance_robustness",
      [](const TimedStateSequence& a, const TimedStateSequence& b, double tau,
         double eps, const std::string& kind, std::optional<double> horizon,
         std::optional<int> max_jumps) {
        auto trace = make_parallel(a, b, horizon, max_jumps);
        return conformance_robustness(trace, tau, eps, kind_from(kind)).value;
      },
      py::arg("a"), py::arg("b"), py::arg("tau"), py::arg("eps"),
      py::arg("kind") = "spatial", py::arg("horizon") = std::nullopt,
      py::arg("max_jumps") = std::nullopt);

  py::class_<HybridAutomaton>(m, "HybridAutomaton")
      .def_readonly("name", &HybridAutomaton::name)
      .def_property_readonly("modes",
                             [](const HybridAutomaton& a) { return a.modes.size(); });
  m.def("nav_benchmark", &nav_benchmark);
  m.def("load_automaton", &load_automaton_file, py::arg("path"));
  m.def(
      "scale_dynamics",
      [](const HybridAutomaton& base, double factor) {
        return make_mutant(base, DynamicsScale{factor, {}});
      },
      py::arg("automaton"), py::arg("factor"));
  m.def(
      "offset_guards",
      [](const HybridAutomaton& base, const std::string& axis, double delta) {
        return make_mutant(base, GuardOffset{axis, delta});
      },
      py::arg("automaton"), py::arg("axis"), py::arg("delta"));

  py::class_<SystemUnderTest>(m, "System")
      .def_static(
          "from_automaton",
          [](const HybridAutomaton& a, double dt, const std::string& integrator,
             bool observe_jumps) {
            SimulationOptions opts;
            opts.sampling_period = dt;
            opts.integrator =
                integrator == "euler" ? Integrator::euler : Integrator::rk4;
            SystemUnderTest sut(SystemUnderTest::AutomatonBackend{a, opts});
            sut.set_observe_jumps(observe_jumps);
            return sut;
          },
          py::arg("automaton"), py::arg("dt") = 0.05, py::arg("integrator") = "rk4",
          py::arg("observe_jumps") = true)
      .def_static("from_traces",
                  [](const std::vector<TimedStateSequence>& traces) {
                    return SystemUnderTest(SystemUnderTest::ReplayBackend{traces});
                  })
      .def(
          "simulate",
          [](const SystemUnderTest& sut, const std::vector<double>& h0,
             const std::vector<double>& control_times,
             const std::vector<std::vector<double>>& control_values, double horizon,
             int max_jumps, const std::string& interpolation) {
            InputSignal u;
            u.times = control_times;
            u.values = control_values;
            u.horizon = horizon;
            u.interpolation = interpolation == "pl"
                                  ? InputSignal::Interpolation::piecewise_linear
                                  : InputSignal::Interpolation::piecewise_constant;
            return sut.simulate(h0, u, horizon, max_jumps);
          },
          py::arg("h0"), py::arg("control_times"), py::arg("control_values"),
          py::arg("horizon"), py::arg("max_jumps") = 1 << 20,
          py::arg("interpolation") = "pc");

  py::class_<FalsificationResult>(m, "FalsificationResult")
      .def_readonly("falsified", &FalsificationResult::falsified)
      .def_readonly("tests_run", &FalsificationResult::tests_run)
      .def_property_readonly(
          "best_robustness",
          [](const FalsificationResult& r) { return r.best_robustness.value; })
      .def_property_readonly("best_h0",
                             [](const FalsificationResult& r) { return r.best_theta.h0; })
      .def_property_readonly(
          "best_controls",
          [](const FalsificationResult& r) { return r.best_theta.control_values; })
      .def_readonly("seed", &FalsificationResult::rng_seed);

  m.def(
      "falsify",
      [](const SystemUnderTest& model, const SystemUnderTest& impl, double tau,
         double eps, const std::string& kind, const std::optional<PyFormula>& formula,
         const std::vector<std::pair<double, double>>& h0_box,
         const std::vector<std::pair<double, double>>& input_box,
         std::size_t control_points, double horizon, int max_jumps, std::size_t budget,
         std::uint64_t seed, const std::string& optimizer) {
        SearchSpace space;
        for (const auto& [lo, hi] : h0_box) {
          space.h0_box.lo.push_back(lo);
          space.h0_box.hi.push_back(hi);
        }
        Box input;
        for (const auto& [lo, hi] : input_box) {
          input.lo.push_back(lo);
          input.hi.push_back(hi);
        }
        space.input_boxes = {input};
        space.control_points = control_points;
        space.horizon = horizon;
        space.max_jumps = max_jumps;
        Objective objective;
        if (formula) {
          objective = FormulaObjective{formula->ptr, kind_from(kind)};
        } else {
          ConformanceObjective obj;
          obj.tau = tau;
          obj.eps = eps;
          obj.kind = kind_from(kind);
          objective = obj;
        }
        return falsify(model, impl, objective, space, optimizer_from(optimizer), budget,
                       seed);
      },
      py::arg("model"), py::arg("impl"), py::arg("tau") = 0.0, py::arg("eps") = 0.0,
      py::arg("kind") = "spatial", py::arg("formula") = std::nullopt,
      py::arg("h0_box"), py::arg("input_box"), py::arg("control_points") = 1,
      py::arg("horizon"), py::arg("max_jumps") = 1 << 20, py::arg("budget") = 100,
      py::arg("seed") = 0, py::arg("optimizer") = "sa");

  py::class_<DegreeResult>(m, "DegreeResult")
      .def_property_readonly(
          "axis",
          [](const DegreeResult& r) {
            return r.axis == DegreeAxis::epsilon ? "epsilon" : "tau";
          })
      .def_readonly("lo", &DegreeResult::lo)
      .def_readonly("hi", &DegreeResult::hi)
      .def_readonly("width", &DegreeResult::width)
      .def_readonly("iterations", &DegreeResult::iterations);

  m.def(
      "binary_search_epsilon",
      [](const SystemUnderTest& model, const SystemUnderTest& impl, double tau,
         double eps_h, std::size_t iterations,
         const std::vector<std::pair<double, double>>& h0_box,
         const std::vector<std::pair<double, double>>& input_box,
         std::size_t control_points, double horizon, int max_jumps, std::size_t budget,
         std::uint64_t seed, const std::string& optimizer) {
        SearchSpace space;
        for (const auto& [lo, hi] : h0_box) {
          space.h0_box.lo.push_back(lo);
          space.h0_box.hi.push_back(hi);
        }
        Box input;
        for (const auto& [lo, hi] : input_box) {
          input.lo.push_back(lo);
          input.hi.push_back(hi);
        }
        space.input_boxes = {input};
        space.control_points = control_points;
        space.horizon = horizon;
        space.max_jumps = max_jumps;
        DegreeOptions opts;
        opts.iterations = iterations;
        return binary_search_epsilon(model, impl, tau, eps_h, space,
                                     optimizer_from(optimizer), budget, seed, opts);
      },
      py::arg("model"), py::arg("impl"), py::arg("tau"), py::arg("eps_h"),
      py::arg("iterations") = 10, py::arg("h0_box"), py::arg("input_box"),
      py::arg("control_points") = 1, py::arg("horizon"), py::arg("max_jumps") = 1 << 20,
      py::arg("budget") = 20, py::arg("seed") = 0, py::arg("optimizer") = "uniform");
}
