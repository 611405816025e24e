#pragma once

#include "cpsconf/tss.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cpsconf {

/// Piecewise input signal described by control points. Piecewise-constant
/// holds the latest point at or before t; piecewise-linear interpolates and
/// clamps to the first/last values outside the control-point span.
struct InputSignal {
  enum class Interpolation { piecewise_constant, piecewise_linear };

  std::vector<double> times;                // strictly increasing, within [0, horizon]
  std::vector<std::vector<double>> values;  // one vector in U per control point
  Interpolation interpolation = Interpolation::piecewise_constant;
  double horizon = 0.0;

  std::size_t dim() const { return values.empty() ? 0 : values.front().size(); }
  void validate() const;
  std::vector<double> value_at(double t) const;
};

/// Input vectors at the given sample times.
std::vector<std::vector<double>> materialize_input(const InputSignal& u,
                                                   const std::vector<double>& grid);

/// Axis-aligned box, one [lo, hi] pair per coordinate.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dim() const { return lo.size(); }
  bool contains(const std::vector<double>& x) const;
  void validate() const;
};

/// One inequality `x[axis] op value` of a guard; a guard is the conjunction
/// of its conditions. Axis 0 thresholds are "vertical" guard lines, axis 1
/// thresholds "horizontal" ones (planar benchmark convention).
struct GuardCondition {
  std::size_t axis = 0;
  bool geq = true; // x[axis] >= value when true, <= otherwise
  double value = 0.0;

  bool holds(const std::vector<double>& x) const;
};

/// Affine map x -> M x + b; empty M means identity.
struct AffineMap {
  std::vector<std::vector<double>> matrix;
  std::vector<double> offset;

  std::vector<double> apply(const std::vector<double>& x) const;
};

/// Mode dynamics dx/dt = A x + B u + c.
struct ModeDynamics {
  int label = 1;
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> b;
  std::vector<double> c;
};

struct Edge {
  int from = 1;
  int to = 1;
  std::vector<GuardCondition> guard;
  AffineMap reset; // identity by default
};

/// Hybrid automaton with affine per-mode flows, guard-triggered zero-time
/// jumps with affine resets, and an affine output map. Guards are checked
/// in edge-declaration order; the first enabled edge fires.
struct HybridAutomaton {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  int initial_mode = 1;
  Box initial_box;
  std::optional<Box> flow_box; // state clamp during continuous evolution
  std::vector<ModeDynamics> modes;
  std::vector<Edge> edges;
  AffineMap output; // y = C x + d; identity by default

  std::size_t output_dim() const;
  const ModeDynamics& dynamics(int label) const;
  void validate() const;
};

enum class Integrator { rk4, euler };

/// Mutations applied to a base automaton for benchmark campaigns. The
/// magnitude accessor gives a total order on mutants of the same family.
struct DynamicsScale {
  double factor = 1.0;                      // applied to every mode...
  std::vector<std::pair<int, double>> per_mode; // ...or per mode label when set
  double magnitude() const;
};

struct GuardOffset {
  std::string axis; // "horizontal" (axis 1) or "vertical" (axis 0)
  double delta = 0.0;
  double magnitude() const { return std::abs(delta); }
};

using Mutation = std::variant<DynamicsScale, GuardOffset>;

HybridAutomaton make_mutant(const HybridAutomaton& base, const Mutation& mutation);
double mutation_magnitude(const Mutation& mutation);
std::string mutation_label(const Mutation& mutation);

/// Fixed-step simulation of the automaton: integrate the active mode's flow
/// at the sampling period, fire the first enabled guard at the sample that
/// entered it (a zero-time jump emits two samples at the same t), stop at
/// the horizon or the jump budget. Consecutive zero-time jumps beyond
/// max_jumps_per_instant raise a Zeno error.
struct SimulationOptions {
  double sampling_period = 0.05;
  Integrator integrator = Integrator::rk4;
  int max_jumps_per_instant = 10;
};

TimedStateSequence simulate_automaton(const HybridAutomaton& automaton,
                                      const std::vector<double>& h0,
                                      const InputSignal& u, double horizon,
                                      int max_jumps, const SimulationOptions& opts);

/// External process adapter: writes a request file, runs
/// `command... <request> <response>`, reads the response trace CSV back and
/// validates it.
struct ExternalCommand {
  std::vector<std::string> argv;
  double timeout_seconds = 60.0;
  std::filesystem::path work_dir; // empty: a fresh temporary directory
};

TimedStateSequence external_simulate(const ExternalCommand& cmd,
                                     const std::vector<double>& h0,
                                     const InputSignal& u, double horizon,
                                     int max_jumps, double sampling_period,
                                     const std::string& context = "");

/// Uniform black-box system interface. Backends: the built-in automaton
/// simulator, replay of recorded traces, or an external process.
class SystemUnderTest {
public:
  struct AutomatonBackend {
    HybridAutomaton automaton;
    SimulationOptions options;
  };
  struct ReplayBackend {
    std::vector<TimedStateSequence> table; // selected by a stable hash of (h0, u)
  };
  struct ExternalBackend {
    ExternalCommand command;
    double sampling_period = 0.05;
  };

  explicit SystemUnderTest(AutomatonBackend backend);
  explicit SystemUnderTest(ReplayBackend backend);
  explicit SystemUnderTest(ExternalBackend backend);

  /// Projection applied to the shared initial condition before simulation,
  /// for systems whose state dimension differs from the search space.
  void set_h0_projection(std::vector<std::size_t> indices);

  /// When disabled, returned traces pretend jumps are unobservable: one
  /// sample per instant with j == 1 throughout.
  void set_observe_jumps(bool observe) { observe_jumps_ = observe; }

  TimedStateSequence simulate(const std::vector<double>& h0, const InputSignal& u,
                              double horizon, int max_jumps,
                              const std::string& context = "") const;

  double sampling_period() const;

private:
  std::variant<AutomatonBackend, ReplayBackend, ExternalBackend> backend_;
  std::vector<std::size_t> h0_projection_;
  bool observe_jumps_ = true;
};

/// Four-mode planar navigation benchmark: constant-drift affine flows on a
/// 2x2 grid of cells with guard lines at x1 = 1 (vertical) and x2 = 1
/// (horizontal), identity resets, position output. The single input steers
/// the horizontal drift.
HybridAutomaton nav_benchmark();

HybridAutomaton load_automaton_json(const std::string& text,
                                    const std::string& origin = "<json>");
HybridAutomaton load_automaton_file(const std::filesystem::path& path);

/// Stable 64-bit content hash used for replay-table selection and config
/// fingerprints (FNV-1a).
std::uint64_t stable_hash(const std::string& bytes);

} // namespace cpsconf
