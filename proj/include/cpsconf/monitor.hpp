#pragma once

#include "cpsconf/mtl.hpp"
#include "cpsconf/robustness.hpp"
#include "cpsconf/tss.hpp"

#include <vector>

namespace cpsconf {

/// Robustness of `phi` over every sample of the trace's grid, as one vector
/// indexed like the grid. Spatial kind: signed-distance base case; temporal
/// kind: past/future truth-duration base case. Both use the same min/max
/// recursion for composite operators. Dynamic programming over
/// (subformula, index); unbounded until costs O(|phi| * n^2).
std::vector<double> robustness_signal(const FormulaPtr& phi, const ParallelTrace& trace,
                                      RobustnessKind kind);

/// Robustness at one time point, which must lie on the trace's grid
/// (matched with absolute tolerance 1e-9).
Robustness spatial_robustness(const FormulaPtr& phi, const ParallelTrace& trace,
                              double t);
Robustness temporal_robustness(const FormulaPtr& phi, const ParallelTrace& trace,
                               double t);
Robustness robustness(const FormulaPtr& phi, const ParallelTrace& trace, double t,
                      RobustnessKind kind);

} // namespace cpsconf
