#pragma once

#include "cpsconf/conformance.hpp"
#include "cpsconf/mtl.hpp"
#include "cpsconf/robustness.hpp"
#include "cpsconf/systems.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace cpsconf {

/// Finite-dimensional search space: a box of initial conditions and one box
/// of input values per control point. Control points sit on a uniform grid
/// over [0, horizon].
struct SearchSpace {
  Box h0_box;
  std::vector<Box> input_boxes; // one per control point; a single box repeats
  std::size_t control_points = 1;
  InputSignal::Interpolation interpolation =
      InputSignal::Interpolation::piecewise_constant;
  double horizon = 0.0;
  int max_jumps = 0;

  void validate() const;
  std::size_t dimension() const;
  const Box& input_box(std::size_t point) const;
  std::vector<double> control_times() const;
};

/// One sampled parameter vector: initial condition plus control values.
struct Theta {
  std::vector<double> h0;
  std::vector<std::vector<double>> control_values;

  InputSignal to_input(const SearchSpace& space) const;
};

/// Objective to minimize: the closeness robustness at a fixed (tau, eps),
/// or an explicit formula over the parallel trace.
struct ConformanceObjective {
  double tau = 0.0;
  double eps = 0.0;
  RobustnessKind kind = RobustnessKind::spatial;
  Norm norm = Norm::euclidean;
};

struct FormulaObjective {
  FormulaPtr formula;
  RobustnessKind kind = RobustnessKind::spatial;
};

using Objective = std::variant<ConformanceObjective, FormulaObjective>;

Robustness evaluate_objective(const Objective& objective, const ParallelTrace& trace);

struct OptimizerConfig {
  enum class Kind { simulated_annealing, uniform_random };
  Kind kind = Kind::simulated_annealing;
  int restarts = 1;
  double cooling = 0.97;     // geometric temperature decay per step
  double sigma_frac = 0.1;   // proposal std-dev as a fraction of box width
  double initial_temp = 0.0; // 0: start from the first sample's |robustness|
};

struct TestRecord {
  std::size_t index = 0;
  Theta theta;
  double robustness = 0.0;
  bool error = false;
  std::string message;
};

struct FalsificationResult {
  Theta best_theta;
  Robustness best_robustness;
  std::size_t tests_run = 0;
  bool falsified = false;
  double wall_time_seconds = 0.0;
  std::uint64_t rng_seed = 0;
  std::vector<TestRecord> log;
};

/// Minimizes the objective's robustness over the search space by sampling
/// parameter vectors, simulating both systems on each, and stopping as soon
/// as a negative-robustness pair appears or the budget runs out. Failed
/// simulations are logged, skipped, and still count against the budget.
/// Deterministic for a fixed seed and configuration.
FalsificationResult falsify(const SystemUnderTest& model, const SystemUnderTest& impl,
                            const Objective& objective, const SearchSpace& space,
                            const OptimizerConfig& optimizer, std::size_t budget,
                            std::uint64_t seed,
                            const std::optional<Theta>& warm_start = std::nullopt);

/// Annealing acceptance rule: downhill moves always pass, uphill moves pass
/// with probability exp(-delta / temperature).
bool metropolis_accept(double current, double proposed, double temperature,
                       std::mt19937_64& rng);

/// Mirrors x at the walls of [lo, hi] until it lands inside.
double reflect_into(double x, double lo, double hi);

} // namespace cpsconf
