#include "cpsconf/degree.hpp"

#include "cpsconf/robustness.hpp"

#include <chrono>
#include <stdexcept>

namespace cpsconf {

namespace {

Objective make_objective(DegreeAxis axis, double fixed, double searched,
                         RobustnessKind kind, Norm norm) {
  ConformanceObjective obj;
  obj.norm = norm;
  obj.kind = kind;
  if (axis == DegreeAxis::epsilon) {
    obj.tau = fixed;
    obj.eps = searched;
  } else {
    obj.tau = searched;
    obj.eps = fixed;
  }
  return obj;
}

DegreeResult bisect(const SystemUnderTest& model, const SystemUnderTest& impl,
                    DegreeAxis axis, double fixed, double hi, const SearchSpace& space,
                    const OptimizerConfig& optimizer, std::size_t budget,
                    std::uint64_t seed, const DegreeOptions& options) {
  if (options.iterations == 0) throw std::invalid_argument("need at least one iteration");
  if (!(hi > options.lo))
    throw std::invalid_argument("upper endpoint must exceed the lower endpoint");
  const auto started = std::chrono::steady_clock::now();

  DegreeResult result;
  result.axis = axis;
  result.fixed_value = fixed;
  result.iterations = options.iterations;

  std::optional<Theta> warm;
  std::uint64_t campaign_seed = seed;
  auto campaign = [&](double value) {
    const Objective obj = make_objective(axis, fixed, value, options.kind, Norm::euclidean);
    auto res = falsify(model, impl, obj, space, optimizer, budget, campaign_seed++,
                       options.warm_start ? warm : std::nullopt);
    if (res.falsified && options.warm_start) warm = res.best_theta;
    return res;
  };

  if (options.verify_upper) {
    auto res = campaign(hi);
    if (res.falsified)
      throw std::runtime_error("campaign at the upper endpoint " + format_double(hi) +
                               " still falsifies; widen the bracket first");
  }

  // Track (lo, width); halving the width is exact, so the final bracket
  // width is the initial width / 2^K regardless of the midpoint roundings.
  double lo = options.lo;
  double width = hi - options.lo;
  for (std::size_t i = 0; i < options.iterations; ++i) {
    width *= 0.5;
    const double mid = lo + width;
    auto res = campaign(mid);
    DegreeIteration it;
    it.value = mid;
    it.robustness = res.best_robustness.value;
    it.falsified = res.falsified;
    it.tests_run = res.tests_run;
    result.log.push_back(it);
    if (res.falsified) {
      lo = mid;
      result.witness = res.best_theta;
    }
  }

  result.lo = lo;
  result.hi = lo + width;
  result.width = width;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

} // namespace

double initial_bracket(const SystemUnderTest& model, const SystemUnderTest& impl,
                       double tau, double eps0, const SearchSpace& space,
                       const OptimizerConfig& optimizer, std::size_t budget,
                       std::uint64_t seed, RobustnessKind kind,
                       std::size_t max_doublings) {
  if (eps0 <= 0.0) throw std::invalid_argument("eps0 must be positive");
  double eps = eps0;
  std::uint64_t campaign_seed = seed;
  for (std::size_t i = 0; i <= max_doublings; ++i) {
    ConformanceObjective obj;
    obj.tau = tau;
    obj.eps = eps;
    obj.kind = kind;
    auto res = falsify(model, impl, obj, space, optimizer, budget, campaign_seed++);
    if (!res.falsified) return eps;
    eps *= 2.0;
  }
  throw std::runtime_error("systems differ unboundedly at this tau (still falsified "
                           "after " +
                           std::to_string(max_doublings) + " doublings of eps)");
}

DegreeResult binary_search_epsilon(const SystemUnderTest& model,
                                   const SystemUnderTest& impl, double tau, double eps_h,
                                   const SearchSpace& space,
                                   const OptimizerConfig& optimizer, std::size_t budget,
                                   std::uint64_t seed, const DegreeOptions& options) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  return bisect(model, impl, DegreeAxis::epsilon, tau, eps_h, space, optimizer, budget,
                seed, options);
}

DegreeResult binary_search_tau(const SystemUnderTest& model, const SystemUnderTest& impl,
                               double eps, double tau_h, const SearchSpace& space,
                               const OptimizerConfig& optimizer, std::size_t budget,
                               std::uint64_t seed, const DegreeOptions& options) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  return bisect(model, impl, DegreeAxis::tau, eps, tau_h, space, optimizer, budget, seed,
                options);
}

std::vector<ParetoPoint> pareto_front(const SystemUnderTest& model,
                                      const SystemUnderTest& impl,
                                      const std::vector<double>& tau_grid, double eps0,
                                      const SearchSpace& space,
                                      const OptimizerConfig& optimizer,
                                      std::size_t budget, std::uint64_t seed,
                                      const DegreeOptions& options) {
  if (tau_grid.empty()) throw std::invalid_argument("tau grid is empty");
  for (std::size_t i = 1; i < tau_grid.size(); ++i)
    if (tau_grid[i] <= tau_grid[i - 1])
      throw std::invalid_argument("tau grid must be strictly increasing");

  std::vector<ParetoPoint> points;
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    ParetoPoint point;
    point.tau = tau_grid[i];
    try {
      const double eps_h =
          initial_bracket(model, impl, point.tau, eps0, space, optimizer, budget,
                          seed + 1000 * i, RobustnessKind::spatial,
                          options.max_doublings);
      point.result = binary_search_epsilon(model, impl, point.tau, eps_h, space,
                                           optimizer, budget, seed + 1000 * i + 500,
                                           options);
    } catch (const std::exception& e) {
      point.error = e.what();
    }
    points.push_back(std::move(point));
  }
  return points;
}

} // namespace cpsconf
