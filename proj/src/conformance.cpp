#include "cpsconf/conformance.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace cpsconf {

void ClosenessParams::validate() const {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  if (horizon <= 0.0) throw std::invalid_argument("horizon must be positive");
  if (max_jumps < 0) throw std::invalid_argument("max jump count must be non-negative");
}

namespace {

// Distance from sample i of `from` to its nearest same-jump partner on `to`
// within the (strict) time window tau; +inf when no partner qualifies.
double nearest_partner_distance(const TimedStateSequence& from, std::size_t i,
                                const TimedStateSequence& to, double tau, Norm norm) {
  double best = kPlusInf;
  for (std::size_t k = 0; k < to.size(); ++k) {
    if (to.jumps(k) != from.jumps(i)) continue;
    if (std::abs(to.time(k) - from.time(i)) >= tau) continue;
    best = std::min(best, sample_distance(from, i, to, k, norm));
  }
  return best;
}

bool in_scope(const TimedStateSequence& tss, std::size_t i, double horizon,
              int max_jumps) {
  return tss.time(i) <= horizon && tss.jumps(i) <= max_jumps;
}

// One direction of the closeness check; returns the first violating index.
std::optional<std::size_t> violating_index(const TimedStateSequence& from,
                                           const TimedStateSequence& to,
                                           const ClosenessParams& p) {
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!in_scope(from, i, p.horizon, p.max_jumps)) continue;
    if (nearest_partner_distance(from, i, to, p.tau, p.norm) >= p.eps) return i;
  }
  return std::nullopt;
}

double directed_epsilon(const TimedStateSequence& from, const TimedStateSequence& to,
                        double tau, double horizon, int max_jumps, Norm norm) {
  double worst = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!in_scope(from, i, horizon, max_jumps)) continue;
    worst = std::max(worst, nearest_partner_distance(from, i, to, tau, norm));
  }
  return worst;
}

double directed_tau(const TimedStateSequence& from, const TimedStateSequence& to,
                    double eps, double horizon, int max_jumps, Norm norm) {
  double worst = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (!in_scope(from, i, horizon, max_jumps)) continue;
    double best = kPlusInf;
    for (std::size_t k = 0; k < to.size(); ++k) {
      if (to.jumps(k) != from.jumps(i)) continue;
      if (sample_distance(from, i, to, k, norm) >= eps) continue;
      best = std::min(best, std::abs(to.time(k) - from.time(i)));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

} // namespace

ConformanceVerdict is_close(const TimedStateSequence& model,
                            const TimedStateSequence& impl,
                            const ClosenessParams& params) {
  params.validate();
  if (model.dim() != impl.dim())
    throw std::invalid_argument("model and implementation trace dimensions differ");

  ConformanceVerdict verdict;
  if (auto i = violating_index(model, impl, params)) {
    verdict.close = false;
    verdict.witness = {WitnessSide::model, *i + 1, model.time(*i), model.jumps(*i)};
    return verdict;
  }
  if (auto i = violating_index(impl, model, params)) {
    verdict.close = false;
    verdict.witness = {WitnessSide::impl, *i + 1, impl.time(*i), impl.jumps(*i)};
    return verdict;
  }
  verdict.close = true;
  return verdict;
}

double epsilon_star(const TimedStateSequence& model, const TimedStateSequence& impl,
                    double tau, double horizon, int max_jumps, Norm norm) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  if (model.dim() != impl.dim())
    throw std::invalid_argument("model and implementation trace dimensions differ");
  return std::max(directed_epsilon(model, impl, tau, horizon, max_jumps, norm),
                  directed_epsilon(impl, model, tau, horizon, max_jumps, norm));
}

double tau_star(const TimedStateSequence& model, const TimedStateSequence& impl,
                double eps, double horizon, int max_jumps, Norm norm) {
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
  if (model.dim() != impl.dim())
    throw std::invalid_argument("model and implementation trace dimensions differ");
  return std::max(directed_tau(model, impl, eps, horizon, max_jumps, norm),
                  directed_tau(impl, model, eps, horizon, max_jumps, norm));
}

namespace {

// Shift window for one direction: every shifted copy of `other` within
// +/- count, compared against `ref` index by index.
FormulaPtr direction_clause(const std::shared_ptr<const TimedStateSequence>& ref,
                            const TimedStateSequence& other, std::size_t count,
                            FillPolicy fill, double horizon, double eps, Norm norm) {
  std::vector<FormulaPtr> atoms;
  const long c = static_cast<long>(count);
  for (long k = -c; k <= c; ++k) {
    auto shifted =
        std::make_shared<const TimedStateSequence>(shift(other, k, fill, horizon));
    atoms.push_back(
        Formula::atom(std::make_shared<ShiftedGap>(ref, shifted, k, eps, norm)));
  }
  return Formula::disjunction(atoms);
}

// Shift count for a trace: zero when the trace is too short for a window.
std::size_t shift_count(const TimedStateSequence& tss, double tau) {
  if (tss.size() <= 1 || tss.span_start() == tss.span_end()) return 0;
  return window_count(tss, tau);
}

// Closeness robustness for one real-timed pair.
double pair_robustness(const TimedStateSequence& model, const TimedStateSequence& impl,
                       double tau, double eps, FillPolicy fill, double horizon,
                       RobustnessKind kind, Norm norm) {
  // Evaluate over the longer trace's grid so samples past the shorter trace
  // still constrain the result.
  if (impl.size() > model.size())
    return pair_robustness(impl, model, tau, eps, fill, horizon, kind, norm);

  auto model_ptr = std::make_shared<const TimedStateSequence>(model);
  auto impl_ptr = std::make_shared<const TimedStateSequence>(impl);
  const std::size_t n = shift_count(*impl_ptr, tau); // window on the impl trace
  const std::size_t m = shift_count(*model_ptr, tau);

  FormulaPtr p1 = direction_clause(model_ptr, *impl_ptr, n, fill, horizon, eps, norm);
  FormulaPtr p2 = direction_clause(impl_ptr, *model_ptr, m, fill, horizon, eps, norm);
  FormulaPtr phi =
      Formula::always(Interval::closed(0.0, horizon), Formula::conjunction(p1, p2));

  const double span = std::max({horizon, model_ptr->span_end(), impl_ptr->span_end()});
  ParallelTrace parallel(*model_ptr, *impl_ptr, span,
                         std::max(model_ptr->stamps().back().j,
                                  impl_ptr->stamps().back().j));
  return robustness_signal(phi, parallel, kind).front();
}

} // namespace

Robustness conformance_robustness(const ParallelTrace& parallel, double tau, double eps,
                                  RobustnessKind kind, Norm norm) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  if (eps <= 0.0) throw std::invalid_argument("eps must be positive");

  const TimedStateSequence& model = parallel.model();
  const TimedStateSequence& impl = parallel.impl();

  const bool real_pair = model.is_real_timed() && impl.is_real_timed();
  if (real_pair) {
    if (model.size() <= 1 && impl.size() <= 1)
      throw std::invalid_argument("Zeno or degenerate trace");
    if (model.jumps(0) != impl.jumps(0)) // no same-jump partners at all
      return Robustness(kMinusInf, kind);
    return Robustness(pair_robustness(model, impl, tau, eps,
                                      FillPolicy::constant_interpolation,
                                      parallel.horizon(), kind, norm),
                      kind);
  }

  auto model_segments = segment_by_jumps(model);
  auto impl_segments = segment_by_jumps(impl);
  const auto model_jumps = jump_values(model);
  const auto impl_jumps = jump_values(impl);
  const std::size_t groups = std::max(model_segments.size(), impl_segments.size());
  double worst = kPlusInf;
  for (std::size_t g = 0; g < groups; ++g) {
    if (g >= model_segments.size() || g >= impl_segments.size() ||
        model_jumps[g] != impl_jumps[g]) {
      worst = kMinusInf; // no same-jump partners exist for this segment
      continue;
    }
    worst = std::min(worst, pair_robustness(model_segments[g], impl_segments[g], tau,
                                            eps, FillPolicy::positive_infinity,
                                            parallel.horizon(), kind, norm));
  }
  return Robustness(worst, kind);
}

FormulaPtr build_pwc_formula(double hold, double horizon) {
  if (!(hold > 0.0) || hold >= horizon)
    throw std::invalid_argument("reconvergence window must satisfy 0 < D < T");
  FormulaPtr diverged = Formula::atom(std::make_shared<ModeMatch>(false));
  FormulaPtr together = Formula::atom(std::make_shared<ModeMatch>(true));
  return Formula::always(
      Interval::closed(0.0, horizon - hold),
      Formula::implication(diverged,
                           Formula::eventually(Interval::closed(0.0, hold), together)));
}

} // namespace cpsconf
