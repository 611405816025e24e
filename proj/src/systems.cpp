#include "cpsconf/systems.hpp"

#include "cpsconf/robustness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cpsconf {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Input signals
// ---------------------------------------------------------------------------

void InputSignal::validate() const {
  if (times.empty()) throw std::invalid_argument("input signal has no control points");
  if (times.size() != values.size())
    throw std::invalid_argument("control times and values differ in length");
  const std::size_t d = values.front().size();
  if (d == 0) throw std::invalid_argument("input values must be non-empty vectors");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (values[i].size() != d)
      throw std::invalid_argument("inconsistent input value dimensions");
    if (times[i] < 0.0 || (horizon > 0.0 && times[i] > horizon))
      throw std::invalid_argument("control time outside [0, horizon]");
    if (i > 0 && times[i] <= times[i - 1])
      throw std::invalid_argument("control times must be strictly increasing");
  }
}

std::vector<double> InputSignal::value_at(double t) const {
  if (times.empty()) throw std::invalid_argument("input signal has no control points");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  // last control point at or before t
  std::size_t k = 0;
  while (k + 1 < times.size() && times[k + 1] <= t) ++k;
  if (interpolation == Interpolation::piecewise_constant) return values[k];
  const double t0 = times[k];
  const double t1 = times[k + 1];
  const double w = (t - t0) / (t1 - t0);
  std::vector<double> out(values[k].size());
  for (std::size_t d = 0; d < out.size(); ++d)
    out[d] = values[k][d] + w * (values[k + 1][d] - values[k][d]);
  return out;
}

std::vector<std::vector<double>> materialize_input(const InputSignal& u,
                                                   const std::vector<double>& grid) {
  u.validate();
  std::vector<std::vector<double>> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(u.value_at(t));
  return out;
}

// ---------------------------------------------------------------------------
// Automaton pieces
// ---------------------------------------------------------------------------

bool Box::contains(const std::vector<double>& x) const {
  if (x.size() != lo.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

void Box::validate() const {
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds differ in length");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!(lo[i] <= hi[i])) throw std::invalid_argument("box has empty extent");
}

bool GuardCondition::holds(const std::vector<double>& x) const {
  if (axis >= x.size()) throw std::invalid_argument("guard axis out of range");
  return geq ? x[axis] >= value : x[axis] <= value;
}

std::vector<double> AffineMap::apply(const std::vector<double>& x) const {
  std::vector<double> out;
  if (matrix.empty()) {
    out = x;
  } else {
    out.assign(matrix.size(), 0.0);
    for (std::size_t r = 0; r < matrix.size(); ++r) {
      if (matrix[r].size() != x.size())
        throw std::invalid_argument("affine map dimension mismatch");
      for (std::size_t c = 0; c < x.size(); ++c) out[r] += matrix[r][c] * x[c];
    }
  }
  if (!offset.empty()) {
    if (offset.size() != out.size())
      throw std::invalid_argument("affine offset dimension mismatch");
    for (std::size_t r = 0; r < out.size(); ++r) out[r] += offset[r];
  }
  return out;
}

std::size_t HybridAutomaton::output_dim() const {
  if (!output.matrix.empty()) return output.matrix.size();
  if (!output.offset.empty()) return output.offset.size();
  return state_dim;
}

const ModeDynamics& HybridAutomaton::dynamics(int label) const {
  for (const auto& m : modes)
    if (m.label == label) return m;
  throw std::runtime_error(name + ": unknown mode label " + std::to_string(label));
}

void HybridAutomaton::validate() const {
  if (state_dim == 0) throw std::invalid_argument("automaton needs a state dimension");
  if (modes.empty()) throw std::invalid_argument("automaton needs at least one mode");
  initial_box.validate();
  if (initial_box.dim() != state_dim)
    throw std::invalid_argument("initial box dimension mismatch");
  dynamics(initial_mode);
  for (const auto& m : modes) {
    if (m.a.size() != state_dim)
      throw std::invalid_argument("flow matrix rows must match state dimension");
    for (const auto& row : m.a)
      if (row.size() != state_dim)
        throw std::invalid_argument("flow matrix columns must match state dimension");
    if (!m.b.empty()) {
      if (m.b.size() != state_dim)
        throw std::invalid_argument("input matrix rows must match state dimension");
      for (const auto& row : m.b)
        if (row.size() != input_dim)
          throw std::invalid_argument("input matrix columns must match input dimension");
    }
    if (!m.c.empty() && m.c.size() != state_dim)
      throw std::invalid_argument("drift vector must match state dimension");
  }
  for (const auto& e : edges) {
    dynamics(e.from);
    dynamics(e.to);
    for (const auto& g : e.guard)
      if (g.axis >= state_dim) throw std::invalid_argument("guard axis out of range");
  }
}

// ---------------------------------------------------------------------------
// Mutations
// ---------------------------------------------------------------------------

double DynamicsScale::magnitude() const {
  double m = std::abs(factor - 1.0);
  for (const auto& [label, f] : per_mode) m = std::max(m, std::abs(f - 1.0));
  return m;
}

namespace {
void scale_mode(ModeDynamics& mode, double factor) {
  for (auto& row : mode.a)
    for (double& v : row) v *= factor;
  for (auto& row : mode.b)
    for (double& v : row) v *= factor;
  for (double& v : mode.c) v *= factor;
}
} // namespace

HybridAutomaton make_mutant(const HybridAutomaton& base, const Mutation& mutation) {
  HybridAutomaton out = base;
  if (const auto* scale = std::get_if<DynamicsScale>(&mutation)) {
    if (scale->factor <= 0.0)
      throw std::invalid_argument("dynamics scale factor must be positive");
    for (auto& mode : out.modes) {
      double f = scale->factor;
      for (const auto& [label, pf] : scale->per_mode)
        if (label == mode.label) f = pf;
      if (f <= 0.0) throw std::invalid_argument("dynamics scale factor must be positive");
      scale_mode(mode, f);
    }
    out.name = base.name + "+dyn" + format_double(scale->factor);
    return out;
  }
  const auto& offset = std::get<GuardOffset>(mutation);
  std::size_t axis;
  if (offset.axis == "vertical") axis = 0;
  else if (offset.axis == "horizontal") axis = 1;
  else throw std::invalid_argument("unknown guard axis label '" + offset.axis + "'");
  if (!std::isfinite(offset.delta))
    throw std::invalid_argument("guard offset must be finite");
  for (auto& e : out.edges)
    for (auto& g : e.guard)
      if (g.axis == axis) g.value += offset.delta;
  out.name = base.name + "+" + offset.axis + format_double(offset.delta);
  return out;
}

double mutation_magnitude(const Mutation& mutation) {
  return std::visit([](const auto& m) { return m.magnitude(); }, mutation);
}

std::string mutation_label(const Mutation& mutation) {
  if (const auto* s = std::get_if<DynamicsScale>(&mutation))
    return "dyn_scale " + format_double(s->factor);
  const auto& g = std::get<GuardOffset>(mutation);
  return "guard_" + g.axis + " " + format_double(g.delta);
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

std::vector<double> flow(const ModeDynamics& mode, const std::vector<double>& x,
                         const std::vector<double>& u) {
  std::vector<double> dx(x.size(), 0.0);
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t c = 0; c < x.size(); ++c) dx[r] += mode.a[r][c] * x[c];
    if (!mode.b.empty())
      for (std::size_t c = 0; c < u.size(); ++c) dx[r] += mode.b[r][c] * u[c];
    if (!mode.c.empty()) dx[r] += mode.c[r];
  }
  return dx;
}

std::vector<double> step_state(const ModeDynamics& mode, const std::vector<double>& x,
                               const InputSignal& u, double t, double dt,
                               Integrator integrator) {
  auto axpy = [](const std::vector<double>& a, double s, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
    return out;
  };
  if (integrator == Integrator::euler) {
    return axpy(x, dt, flow(mode, x, u.value_at(t)));
  }
  const auto u0 = u.value_at(t);
  const auto uh = u.value_at(t + dt / 2.0);
  const auto u1 = u.value_at(t + dt);
  const auto k1 = flow(mode, x, u0);
  const auto k2 = flow(mode, axpy(x, dt / 2.0, k1), uh);
  const auto k3 = flow(mode, axpy(x, dt / 2.0, k2), uh);
  const auto k4 = flow(mode, axpy(x, dt, k3), u1);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

const Edge* enabled_edge(const HybridAutomaton& automaton, int mode,
                         const std::vector<double>& x) {
  for (const auto& e : automaton.edges) {
    if (e.from != mode) continue;
    bool all = !e.guard.empty();
    for (const auto& g : e.guard)
      if (!g.holds(x)) {
        all = false;
        break;
      }
    if (all) return &e;
  }
  return nullptr;
}

} // namespace

TimedStateSequence simulate_automaton(const HybridAutomaton& automaton,
                                      const std::vector<double>& h0,
                                      const InputSignal& u, double horizon,
                                      int max_jumps, const SimulationOptions& opts) {
  automaton.validate();
  u.validate();
  if (!automaton.initial_box.contains(h0))
    throw std::invalid_argument(automaton.name +
                                ": initial condition outside the initial box");
  if (automaton.input_dim > 0 && u.dim() != automaton.input_dim)
    throw std::invalid_argument(automaton.name + ": input dimension mismatch");
  if (opts.sampling_period <= 0.0)
    throw std::invalid_argument("sampling period must be positive");

  const std::size_t out_dim = automaton.output_dim();
  std::vector<double> values;
  std::vector<HybridTimestamp> stamps;
  std::vector<int> mode_labels;

  std::vector<double> x = h0;
  int mode = automaton.initial_mode;
  int j = 1;
  double t = 0.0;

  auto clamp_to_flow_box = [&](std::vector<double>& state) {
    if (!automaton.flow_box) return;
    for (std::size_t i = 0; i < state.size(); ++i)
      state[i] = std::clamp(state[i], automaton.flow_box->lo[i],
                            automaton.flow_box->hi[i]);
  };

  auto emit = [&](double time) {
    auto y = automaton.output.apply(x);
    values.insert(values.end(), y.begin(), y.end());
    stamps.push_back({time, j});
    mode_labels.push_back(mode);
  };

  // Fires zero-time jumps until no guard is enabled; returns false when the
  // jump budget is exhausted.
  auto settle_jumps = [&](double time) {
    int fired = 0;
    while (const Edge* e = enabled_edge(automaton, mode, x)) {
      if (++fired > opts.max_jumps_per_instant)
        throw std::runtime_error(automaton.name + ": Zeno guard cycle at t = " +
                                 format_double(time));
      if (j + 1 > max_jumps) return false;
      x = e->reset.apply(x);
      mode = e->to;
      ++j;
      emit(time);
    }
    return true;
  };

  emit(0.0);
  bool budget_left = settle_jumps(0.0);
  while (budget_left &&
         t + opts.sampling_period <= horizon + opts.sampling_period * 1e-9) {
    const auto& dyn = automaton.dynamics(mode);
    x = step_state(dyn, x, u, t, opts.sampling_period, opts.integrator);
    clamp_to_flow_box(x);
    t += opts.sampling_period;
    emit(t);
    budget_left = settle_jumps(t);
  }

  return TimedStateSequence(std::move(values), std::move(stamps), out_dim,
                            std::move(mode_labels));
}

// ---------------------------------------------------------------------------
// SystemUnderTest
// ---------------------------------------------------------------------------

SystemUnderTest::SystemUnderTest(AutomatonBackend backend)
    : backend_(std::move(backend)) {
  std::get<AutomatonBackend>(backend_).automaton.validate();
}

SystemUnderTest::SystemUnderTest(ReplayBackend backend) : backend_(std::move(backend)) {
  if (std::get<ReplayBackend>(backend_).table.empty())
    throw std::invalid_argument("replay backend needs at least one trace");
}

SystemUnderTest::SystemUnderTest(ExternalBackend backend)
    : backend_(std::move(backend)) {
  if (std::get<ExternalBackend>(backend_).command.argv.empty())
    throw std::invalid_argument("external backend needs a command");
}

void SystemUnderTest::set_h0_projection(std::vector<std::size_t> indices) {
  h0_projection_ = std::move(indices);
}

double SystemUnderTest::sampling_period() const {
  if (const auto* a = std::get_if<AutomatonBackend>(&backend_))
    return a->options.sampling_period;
  if (const auto* e = std::get_if<ExternalBackend>(&backend_))
    return e->sampling_period;
  return 0.0;
}

std::uint64_t stable_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {
std::string theta_bytes(const std::vector<double>& h0, const InputSignal& u) {
  std::string bytes;
  auto push = [&](double v) {
    char buf[sizeof(double)];
    std::memcpy(buf, &v, sizeof(double));
    bytes.append(buf, sizeof(double));
  };
  for (double v : h0) push(v);
  for (const auto& cp : u.values)
    for (double v : cp) push(v);
  for (double v : u.times) push(v);
  return bytes;
}
} // namespace

TimedStateSequence SystemUnderTest::simulate(const std::vector<double>& h0,
                                             const InputSignal& u, double horizon,
                                             int max_jumps,
                                             const std::string& context) const {
  std::vector<double> projected = h0;
  if (!h0_projection_.empty()) {
    projected.clear();
    for (std::size_t idx : h0_projection_) {
      if (idx >= h0.size())
        throw std::invalid_argument("initial-condition projection index out of range");
      projected.push_back(h0[idx]);
    }
  }
  auto observed = [&](TimedStateSequence tss) {
    return observe_jumps_ ? tss : tss.without_jump_observation();
  };
  if (const auto* a = std::get_if<AutomatonBackend>(&backend_))
    return observed(
        simulate_automaton(a->automaton, projected, u, horizon, max_jumps, a->options));
  if (const auto* r = std::get_if<ReplayBackend>(&backend_)) {
    const std::size_t idx =
        r->table.size() == 1
            ? 0
            : static_cast<std::size_t>(stable_hash(theta_bytes(projected, u)) %
                                       r->table.size());
    return observed(r->table[idx].truncated(horizon, max_jumps));
  }
  const auto& e = std::get<ExternalBackend>(backend_);
  return observed(external_simulate(e.command, projected, u, horizon, max_jumps,
                                    e.sampling_period, context));
}

// ---------------------------------------------------------------------------
// Benchmark automaton
// ---------------------------------------------------------------------------

HybridAutomaton nav_benchmark() {
  // Lightly damped rotation around the cell corner (1, 1): the trajectory
  // orbits counter-clockwise through the four cells of the 2x2 grid,
  // crossing the guard lines x1 = 1 (vertical) and x2 = 1 (horizontal)
  // once per quarter turn. The input adds a horizontal drift. Scaling the
  // dynamics speeds the orbit up, so mode switches drift apart in time;
  // offsetting a guard line moves the switching phase without changing
  // the continuous trajectory.
  HybridAutomaton nav;
  nav.name = "nav4";
  nav.state_dim = 2;
  nav.input_dim = 1;
  nav.initial_mode = 1;
  nav.initial_box = {{0.2, 0.2}, {0.4, 0.4}};
  nav.flow_box = Box{{-0.5, -0.5}, {2.5, 2.5}};

  const double omega = 0.9;
  const double damping = 0.02;
  auto mode = [&](int label) {
    ModeDynamics m;
    m.label = label;
    m.a = {{-damping, -omega}, {omega, -damping}};
    m.b = {{0.4}, {0.0}};
    // keeps the orbit centered on (1, 1)
    m.c = {damping + omega, damping - omega};
    return m;
  };
  // cell layout: 1 = lower-left, 2 = lower-right, 4 = upper-right, 3 = upper-left
  nav.modes = {mode(1), mode(2), mode(4), mode(3)};

  auto edge = [](int from, int to, GuardCondition g) {
    Edge e;
    e.from = from;
    e.to = to;
    e.guard = {g};
    return e;
  };
  nav.edges = {
      edge(1, 2, {0, true, 1.0}),  // x1 >= 1, vertical guard
      edge(2, 4, {1, true, 1.0}),  // x2 >= 1, horizontal guard
      edge(4, 3, {0, false, 1.0}), // x1 <= 1, vertical guard
      edge(3, 1, {1, false, 1.0}), // x2 <= 1, horizontal guard
  };
  return nav;
}

// ---------------------------------------------------------------------------
// Automaton JSON schema
// ---------------------------------------------------------------------------

namespace {

std::vector<double> to_vector(const json& a, const std::string& where) {
  if (!a.is_array()) throw std::runtime_error(where + ": expected array");
  std::vector<double> out;
  for (const auto& v : a) {
    if (!v.is_number()) throw std::runtime_error(where + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::vector<double>> to_matrix(const json& a, const std::string& where) {
  if (!a.is_array()) throw std::runtime_error(where + ": expected array of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t r = 0; r < a.size(); ++r)
    out.push_back(to_vector(a[r], where + "[" + std::to_string(r) + "]"));
  return out;
}

Box to_box(const json& a, const std::string& where) {
  auto rows = to_matrix(a, where);
  Box box;
  for (const auto& row : rows) {
    if (row.size() != 2) throw std::runtime_error(where + ": expected [lo, hi] pairs");
    box.lo.push_back(row[0]);
    box.hi.push_back(row[1]);
  }
  box.validate();
  return box;
}

AffineMap to_affine(const json& o, const std::string& where) {
  AffineMap map;
  if (o.contains("matrix")) map.matrix = to_matrix(o["matrix"], where + "/matrix");
  if (o.contains("offset")) map.offset = to_vector(o["offset"], where + "/offset");
  return map;
}

} // namespace

HybridAutomaton load_automaton_json(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  HybridAutomaton out;
  out.name = doc.value("name", origin);
  out.state_dim = doc.at("state_dim").get<std::size_t>();
  out.input_dim = doc.value("input_dim", std::size_t{0});
  out.initial_mode = doc.value("initial_mode", 1);
  out.initial_box = to_box(doc.at("initial_box"), origin + "/initial_box");
  if (doc.contains("flow_box")) out.flow_box = to_box(doc["flow_box"], origin + "/flow_box");
  if (doc.contains("output")) out.output = to_affine(doc["output"], origin + "/output");

  for (const auto& m : doc.at("modes")) {
    ModeDynamics mode;
    mode.label = m.at("label").get<int>();
    mode.a = to_matrix(m.at("A"), origin + "/modes/A");
    if (m.contains("B")) mode.b = to_matrix(m["B"], origin + "/modes/B");
    if (m.contains("c")) mode.c = to_vector(m["c"], origin + "/modes/c");
    out.modes.push_back(std::move(mode));
  }
  for (const auto& e : doc.value("edges", json::array())) {
    Edge edge;
    edge.from = e.at("from").get<int>();
    edge.to = e.at("to").get<int>();
    for (const auto& g : e.at("guard")) {
      GuardCondition cond;
      cond.axis = g.at("axis").get<std::size_t>();
      const std::string op = g.at("op").get<std::string>();
      if (op == ">=") cond.geq = true;
      else if (op == "<=") cond.geq = false;
      else throw std::runtime_error(origin + ": guard op must be '>=' or '<='");
      cond.value = g.at("value").get<double>();
      edge.guard.push_back(cond);
    }
    if (e.contains("reset")) edge.reset = to_affine(e["reset"], origin + "/edges/reset");
    out.edges.push_back(std::move(edge));
  }
  out.validate();
  return out;
}

HybridAutomaton load_automaton_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open automaton file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return load_automaton_json(text, path.string());
}

} // namespace cpsconf
