#include "cpsconf/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cpsconf {

namespace {

class Evaluator {
public:
  Evaluator(const ParallelTrace& trace, RobustnessKind kind)
      : trace_(trace), kind_(kind), n_(trace.grid().size()) {}

  const std::vector<double>& eval(const FormulaPtr& f) {
    auto it = memo_.find(f.get());
    if (it != memo_.end()) return it->second;
    std::vector<double> v;
    switch (f->kind()) {
    case FormulaKind::verum:
      v.assign(n_, kPlusInf);
      break;
    case FormulaKind::atom:
      v = atom_values(*f->predicate());
      break;
    case FormulaKind::negation: {
      v = eval(f->left());
      for (double& x : v) x = -x;
      break;
    }
    case FormulaKind::conjunction: {
      v = eval(f->left());
      const auto& rhs = eval(f->right());
      for (std::size_t i = 0; i < n_; ++i) v[i] = std::min(v[i], rhs[i]);
      break;
    }
    case FormulaKind::disjunction: {
      v = eval(f->left());
      const auto& rhs = eval(f->right());
      for (std::size_t i = 0; i < n_; ++i) v[i] = std::max(v[i], rhs[i]);
      break;
    }
    case FormulaKind::implication: {
      v = eval(f->left());
      const auto& rhs = eval(f->right());
      for (std::size_t i = 0; i < n_; ++i) v[i] = std::max(-v[i], rhs[i]);
      break;
    }
    case FormulaKind::always: {
      const auto& sub = eval(f->left());
      v.assign(n_, kPlusInf);
      window_fold(f->interval(), sub, v, /*take_min=*/true);
      break;
    }
    case FormulaKind::eventually: {
      const auto& sub = eval(f->left());
      v.assign(n_, kMinusInf);
      window_fold(f->interval(), sub, v, /*take_min=*/false);
      break;
    }
    case FormulaKind::until: {
      const auto& lhs = eval(f->left());
      const auto& rhs = eval(f->right());
      v.assign(n_, kMinusInf);
      const Interval& iv = f->interval();
      for (std::size_t i = 0; i < n_; ++i) {
        double prefix = kPlusInf; // min of lhs over indices [i, k)
        double acc = kMinusInf;
        for (std::size_t k = i; k < n_; ++k) {
          const double offset = time_of(k) - time_of(i);
          if (iv.contains(offset)) acc = std::max(acc, std::min(rhs[k], prefix));
          prefix = std::min(prefix, lhs[k]);
          if (iv.hi_open ? offset >= iv.hi : offset > iv.hi) break;
        }
        v[i] = acc;
      }
      break;
    }
    }
    return memo_.emplace(f.get(), std::move(v)).first->second;
  }

private:
  double time_of(std::size_t i) const { return trace_.grid()[i].t; }

  // min (or max) of sub over the samples whose offset from each index lies
  // in the interval; empty windows give +inf (min) / -inf (max).
  void window_fold(const Interval& iv, const std::vector<double>& sub,
                   std::vector<double>& out, bool take_min) const {
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = take_min ? kPlusInf : kMinusInf;
      for (std::size_t k = i; k < n_; ++k) {
        const double offset = time_of(k) - time_of(i);
        if (iv.contains(offset)) acc = take_min ? std::min(acc, sub[k]) : std::max(acc, sub[k]);
        if (iv.hi_open ? offset >= iv.hi : offset > iv.hi) break;
      }
      out[i] = acc;
    }
  }

  std::vector<double> atom_values(const Predicate& p) const {
    std::vector<double> v(n_);
    if (kind_ == RobustnessKind::spatial) {
      for (std::size_t i = 0; i < n_; ++i) v[i] = p.signed_distance(trace_, i);
      return v;
    }
    std::vector<char> truth(n_);
    for (std::size_t i = 0; i < n_; ++i) truth[i] = p.holds(trace_, i) ? 1 : 0;
    const bool constant =
        std::all_of(truth.begin(), truth.end(), [&](char c) { return c == truth[0]; });
    for (std::size_t i = 0; i < n_; ++i) {
      const double sign = truth[i] ? 1.0 : -1.0;
      if (constant) {
        v[i] = sign * kPlusInf;
        continue;
      }
      std::size_t back = i;
      while (back > 0 && truth[back - 1] == truth[i]) --back;
      std::size_t fwd = i;
      while (fwd + 1 < n_ && truth[fwd + 1] == truth[i]) ++fwd;
      const double theta_minus = sign * (time_of(i) - time_of(back));
      const double theta_plus = sign * (time_of(fwd) - time_of(i));
      v[i] = std::min(theta_minus, theta_plus);
    }
    return v;
  }

  const ParallelTrace& trace_;
  RobustnessKind kind_;
  std::size_t n_;
  std::map<const Formula*, std::vector<double>> memo_;
};

std::size_t grid_index(const ParallelTrace& trace, double t) {
  constexpr double tol = 1e-9;
  const auto& grid = trace.grid();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (std::abs(grid[i].t - t) <= tol) return i;
  throw std::invalid_argument("time " + format_double(t) +
                              " is not on the trace's sample grid");
}

} // namespace

std::vector<double> robustness_signal(const FormulaPtr& phi, const ParallelTrace& trace,
                                      RobustnessKind kind) {
  if (!phi) throw std::invalid_argument("null formula");
  Evaluator ev(trace, kind);
  return ev.eval(phi);
}

Robustness robustness(const FormulaPtr& phi, const ParallelTrace& trace, double t,
                      RobustnessKind kind) {
  const std::size_t i = grid_index(trace, t);
  return Robustness(robustness_signal(phi, trace, kind)[i], kind);
}

Robustness spatial_robustness(const FormulaPtr& phi, const ParallelTrace& trace,
                              double t) {
  return robustness(phi, trace, t, RobustnessKind::spatial);
}

Robustness temporal_robustness(const FormulaPtr& phi, const ParallelTrace& trace,
                               double t) {
  return robustness(phi, trace, t, RobustnessKind::temporal);
}

} // namespace cpsconf
