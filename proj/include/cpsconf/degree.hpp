#pragma once

#include "cpsconf/falsify.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cpsconf {

/// Which tolerance the binary search bisects; the other one stays fixed.
enum class DegreeAxis { epsilon, tau };

struct DegreeIteration {
  double value = 0.0;      // midpoint tried on the searched axis
  double robustness = 0.0; // best robustness of the campaign at that midpoint
  bool falsified = false;
  std::size_t tests_run = 0;
};

/// Result of a tightest-degree search: the final bracket on the searched
/// axis, the other axis fixed, and the falsifying parameters certifying the
/// lower endpoint when any midpoint falsified. The width field is the exact
/// initial width halved once per iteration.
struct DegreeResult {
  DegreeAxis axis = DegreeAxis::epsilon;
  double fixed_value = 0.0; // tau for an epsilon search, eps for a tau search
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
  std::size_t iterations = 0;
  std::vector<DegreeIteration> log;
  std::optional<Theta> witness; // falsifying parameters at the lower endpoint
  double wall_time_seconds = 0.0;
};

struct DegreeOptions {
  std::size_t iterations = 10;  // K midpoint campaigns
  double lo = 0.0;
  std::size_t max_doublings = 30;
  bool verify_upper = true;     // campaign at hi before iterating
  bool warm_start = true;       // reuse the last falsifying theta
  // Objective for the campaigns. Spatial robustness changes sign exactly
  // where closeness flips on both axes; temporal robustness (monotone in
  // tau as well) sits at zero on single-sample violations, so its sign
  // flip can undershoot the closeness threshold by up to one sampling
  // period on the tau axis.
  RobustnessKind kind = RobustnessKind::spatial;
};

/// Doubles eps0 until a falsification campaign at (tau, eps) stops finding
/// negative robustness, and returns that eps. Errors past max_doublings.
double initial_bracket(const SystemUnderTest& model, const SystemUnderTest& impl,
                       double tau, double eps0, const SearchSpace& space,
                       const OptimizerConfig& optimizer, std::size_t budget,
                       std::uint64_t seed, RobustnessKind kind = RobustnessKind::spatial,
                       std::size_t max_doublings = 30);

/// K-iteration bisection of the smallest eps at fixed tau: each midpoint
/// runs a full falsification campaign; falsified midpoints raise the lower
/// endpoint, the rest lower the upper endpoint. Uses spatial robustness.
DegreeResult binary_search_epsilon(const SystemUnderTest& model,
                                   const SystemUnderTest& impl, double tau, double eps_h,
                                   const SearchSpace& space,
                                   const OptimizerConfig& optimizer, std::size_t budget,
                                   std::uint64_t seed, const DegreeOptions& options = {});

/// Mirror search for the smallest tau at fixed eps.
DegreeResult binary_search_tau(const SystemUnderTest& model, const SystemUnderTest& impl,
                               double eps, double tau_h, const SearchSpace& space,
                               const OptimizerConfig& optimizer, std::size_t budget,
                               std::uint64_t seed, const DegreeOptions& options = {});

struct ParetoPoint {
  double tau = 0.0;
  std::optional<DegreeResult> result;
  std::string error; // set when this grid point failed
};

/// Epsilon search per grid point; eps upper endpoints are non-increasing
/// along the (strictly increasing) tau grid up to bracket width.
std::vector<ParetoPoint> pareto_front(const SystemUnderTest& model,
                                      const SystemUnderTest& impl,
                                      const std::vector<double>& tau_grid, double eps0,
                                      const SearchSpace& space,
                                      const OptimizerConfig& optimizer,
                                      std::size_t budget, std::uint64_t seed,
                                      const DegreeOptions& options = {});

} // namespace cpsconf
