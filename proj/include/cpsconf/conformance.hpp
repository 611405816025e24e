#pragma once

#include "cpsconf/monitor.hpp"
#include "cpsconf/mtl.hpp"
#include "cpsconf/robustness.hpp"
#include "cpsconf/tss.hpp"

#include <optional>

namespace cpsconf {

/// Closeness bound: test horizon T, jump budget J and the (tau, eps)
/// tolerance pair. Both tolerances are strict bounds.
struct ClosenessParams {
  double horizon = 0.0;
  int max_jumps = 0;
  double tau = 0.0;
  double eps = 0.0;
  Norm norm = Norm::euclidean;

  void validate() const;
};

/// Which trace a closeness witness points into.
enum class WitnessSide { model, impl };

struct ConformanceVerdict {
  bool close = false;
  struct Witness {
    WitnessSide side;
    std::size_t index; // one-based sample index on the violating side
    double t;
    int j;
  };
  std::optional<Witness> witness;         // present whenever close == false
  std::optional<Robustness> robustness;   // filled by robustness-based callers
};

/// Direct double-quantifier closeness check: every sample within the horizon
/// and jump budget on either trace must have a partner on the other trace
/// with the same jump counter, within tau in time and eps in value.
ConformanceVerdict is_close(const TimedStateSequence& model,
                            const TimedStateSequence& impl,
                            const ClosenessParams& params);

/// Smallest eps such that the traces are (tau, eps)-close, i.e. the largest
/// over both directions and all in-scope samples of the distance to the
/// nearest same-jump partner within tau. +inf when some sample has no
/// partner at all. is_close holds strictly above the returned value and
/// fails at or strictly below it.
double epsilon_star(const TimedStateSequence& model, const TimedStateSequence& impl,
                    double tau, double horizon, int max_jumps,
                    Norm norm = Norm::euclidean);

/// Mirror of epsilon_star over the time axis: smallest tau such that every
/// in-scope sample has a same-jump partner within tau at distance < eps.
double tau_star(const TimedStateSequence& model, const TimedStateSequence& impl,
                double eps, double horizon, int max_jumps,
                Norm norm = Norm::euclidean);

/// Robustness of the closeness property encoded as a formula over shifted
/// trace copies. Real-timed pairs use one window per trace with
/// constant-interpolation filler; hybrid pairs are split at jumps, each
/// segment pair encoded with unbounded-sentinel filler, and the result is
/// the minimum over segment pairs. Unmatched segments contribute -inf.
Robustness conformance_robustness(const ParallelTrace& parallel, double tau, double eps,
                                  RobustnessKind kind, Norm norm = Norm::euclidean);

/// Mode-reconvergence property: whenever the two traces are in different
/// modes, they must be back in the same mode within hold seconds. Intended
/// for temporal robustness over mode-labelled traces.
FormulaPtr build_pwc_formula(double hold, double horizon);

} // namespace cpsconf
