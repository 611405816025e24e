#include "cpsconf/falsify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

namespace cpsconf {

void SearchSpace::validate() const {
  h0_box.validate();
  if (control_points == 0) throw std::invalid_argument("need at least one control point");
  if (input_boxes.empty()) throw std::invalid_argument("input box missing");
  if (input_boxes.size() != 1 && input_boxes.size() != control_points)
    throw std::invalid_argument("expected one input box, or one per control point");
  for (const auto& b : input_boxes) {
    b.validate();
    if (b.dim() != input_boxes.front().dim())
      throw std::invalid_argument("input boxes differ in dimension");
  }
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
  if (max_jumps < 0) throw std::invalid_argument("jump budget must be non-negative");
}

std::size_t SearchSpace::dimension() const {
  return h0_box.dim() + control_points * input_boxes.front().dim();
}

const Box& SearchSpace::input_box(std::size_t point) const {
  return input_boxes.size() == 1 ? input_boxes.front() : input_boxes.at(point);
}

std::vector<double> SearchSpace::control_times() const {
  std::vector<double> times(control_points);
  if (control_points == 1) {
    times[0] = 0.0;
  } else {
    const double step = horizon / static_cast<double>(control_points - 1);
    for (std::size_t i = 0; i < control_points; ++i)
      times[i] = static_cast<double>(i) * step;
    times.back() = horizon;
  }
  return times;
}

InputSignal Theta::to_input(const SearchSpace& space) const {
  InputSignal u;
  u.times = space.control_times();
  u.values = control_values;
  u.interpolation = space.interpolation;
  u.horizon = space.horizon;
  return u;
}

Robustness evaluate_objective(const Objective& objective, const ParallelTrace& trace) {
  if (const auto* c = std::get_if<ConformanceObjective>(&objective))
    return conformance_robustness(trace, c->tau, c->eps, c->kind, c->norm);
  const auto& f = std::get<FormulaObjective>(objective);
  return robustness(f.formula, trace, trace.grid().front().t, f.kind);
}

double reflect_into(double x, double lo, double hi) {
  if (lo == hi) return lo;
  const double width = hi - lo;
  double offset = std::fmod(x - lo, 2.0 * width);
  if (offset < 0.0) offset += 2.0 * width;
  return offset <= width ? lo + offset : hi - (offset - width);
}

bool metropolis_accept(double current, double proposed, double temperature,
                       std::mt19937_64& rng) {
  if (proposed < current) return true;
  if (std::isinf(proposed)) return false; // +inf never improves
  const double delta = proposed - current;
  if (!(temperature > 0.0)) return false;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < std::exp(-delta / temperature);
}

namespace {

class ParameterSpace {
public:
  explicit ParameterSpace(const SearchSpace& space) : space_(space) {}

  Theta uniform(std::mt19937_64& rng) const {
    Theta theta;
    for (std::size_t i = 0; i < space_.h0_box.dim(); ++i)
      theta.h0.push_back(draw(rng, space_.h0_box.lo[i], space_.h0_box.hi[i]));
    for (std::size_t p = 0; p < space_.control_points; ++p) {
      const Box& box = space_.input_box(p);
      std::vector<double> cp;
      for (std::size_t i = 0; i < box.dim(); ++i)
        cp.push_back(draw(rng, box.lo[i], box.hi[i]));
      theta.control_values.push_back(std::move(cp));
    }
    return theta;
  }

  // Gaussian move per coordinate, scaled to the box width and reflected
  // back inside.
  Theta propose(const Theta& current, double sigma_frac, std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Theta theta = current;
    for (std::size_t i = 0; i < theta.h0.size(); ++i) {
      const double width = space_.h0_box.hi[i] - space_.h0_box.lo[i];
      theta.h0[i] = reflect_into(theta.h0[i] + gauss(rng) * sigma_frac * width,
                                 space_.h0_box.lo[i], space_.h0_box.hi[i]);
    }
    for (std::size_t p = 0; p < theta.control_values.size(); ++p) {
      const Box& box = space_.input_box(p);
      for (std::size_t i = 0; i < box.dim(); ++i) {
        const double width = box.hi[i] - box.lo[i];
        theta.control_values[p][i] =
            reflect_into(theta.control_values[p][i] + gauss(rng) * sigma_frac * width,
                         box.lo[i], box.hi[i]);
      }
    }
    return theta;
  }

  Theta clamp(const Theta& theta) const {
    Theta out = theta;
    for (std::size_t i = 0; i < out.h0.size() && i < space_.h0_box.dim(); ++i)
      out.h0[i] = std::clamp(out.h0[i], space_.h0_box.lo[i], space_.h0_box.hi[i]);
    for (std::size_t p = 0; p < out.control_values.size(); ++p) {
      const Box& box = space_.input_box(std::min(p, space_.control_points - 1));
      for (std::size_t i = 0; i < out.control_values[p].size() && i < box.dim(); ++i)
        out.control_values[p][i] =
            std::clamp(out.control_values[p][i], box.lo[i], box.hi[i]);
    }
    return out;
  }

private:
  static double draw(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return lo == hi ? lo : dist(rng);
  }

  const SearchSpace& space_;
};

} // namespace

FalsificationResult falsify(const SystemUnderTest& model, const SystemUnderTest& impl,
                            const Objective& objective, const SearchSpace& space,
                            const OptimizerConfig& optimizer, std::size_t budget,
                            std::uint64_t seed, const std::optional<Theta>& warm_start) {
  space.validate();
  if (budget == 0) throw std::invalid_argument("budget must be at least 1");
  const auto started = std::chrono::steady_clock::now();

  const RobustnessKind kind = std::holds_alternative<ConformanceObjective>(objective)
                                  ? std::get<ConformanceObjective>(objective).kind
                                  : std::get<FormulaObjective>(objective).kind;

  ParameterSpace params(space);
  std::mt19937_64 rng(seed);

  FalsificationResult result;
  result.rng_seed = seed;
  result.best_robustness = Robustness(kPlusInf, kind);

  auto evaluate = [&](const Theta& theta) -> double {
    const InputSignal u = theta.to_input(space);
    const std::string ctx = "test " + std::to_string(result.tests_run + 1);
    TimedStateSequence a = model.simulate(theta.h0, u, space.horizon, space.max_jumps,
                                          ctx + " model");
    TimedStateSequence b =
        impl.simulate(theta.h0, u, space.horizon, space.max_jumps, ctx + " impl");
    ParallelTrace parallel(std::move(a), std::move(b), space.horizon, space.max_jumps);
    return evaluate_objective(objective, parallel).value;
  };

  std::size_t failures = 0;
  auto record = [&](const Theta& theta) -> std::optional<double> {
    TestRecord rec;
    rec.index = result.tests_run + 1;
    rec.theta = theta;
    std::optional<double> rob;
    try {
      rec.robustness = evaluate(theta);
      rob = rec.robustness;
    } catch (const std::exception& e) {
      rec.error = true;
      rec.message = e.what();
      ++failures;
    }
    ++result.tests_run;
    result.log.push_back(std::move(rec));
    if (rob && *rob < result.best_robustness.value) {
      result.best_robustness = Robustness(*rob, kind);
      result.best_theta = theta;
    }
    return rob;
  };

  const int restarts = std::max(1, optimizer.restarts);
  const std::size_t chunk = (budget + static_cast<std::size_t>(restarts) - 1) /
                            static_cast<std::size_t>(restarts);

  bool done = false;
  for (int restart = 0; restart < restarts && !done; ++restart) {
    Theta current = (restart == 0 && warm_start) ? params.clamp(*warm_start)
                                                 : params.uniform(rng);
    std::optional<double> current_rob;
    double temperature = optimizer.initial_temp;
    for (std::size_t step = 0; step < chunk && result.tests_run < budget; ++step) {
      Theta candidate;
      if (!current_rob.has_value()) {
        candidate = current; // first evaluation of this restart
      } else if (optimizer.kind == OptimizerConfig::Kind::uniform_random) {
        candidate = params.uniform(rng);
      } else {
        candidate = params.propose(current, optimizer.sigma_frac, rng);
      }

      const std::optional<double> rob = record(candidate);
      if (rob && *rob < 0.0) {
        done = true; // non-conformant pair found, stop the search
        break;
      }
      if (!rob) {
        // simulation failed; resample the anchor point if it never evaluated
        if (!current_rob.has_value()) current = params.uniform(rng);
        continue;
      }

      if (!current_rob.has_value()) {
        current = candidate;
        current_rob = rob;
        if (temperature <= 0.0)
          temperature = std::isfinite(*rob) && *rob != 0.0 ? std::abs(*rob) : 1.0;
        continue;
      }
      if (optimizer.kind == OptimizerConfig::Kind::uniform_random) {
        if (*rob < *current_rob) {
          current = candidate;
          current_rob = rob;
        }
      } else {
        if (metropolis_accept(*current_rob, *rob, temperature, rng)) {
          current = candidate;
          current_rob = rob;
        }
        temperature *= optimizer.cooling;
      }
    }
  }

  if (failures == result.tests_run)
    throw std::runtime_error("every test failed to simulate; last error: " +
                             (result.log.empty() ? std::string("none")
                                                 : result.log.back().message));

  result.falsified = result.best_robustness.value < 0.0;
  result.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

} // namespace cpsconf
