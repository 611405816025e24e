#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace cpsconf {

/// Which robustness notion a value was computed under.
enum class RobustnessKind { spatial, temporal };

constexpr double kPlusInf = std::numeric_limits<double>::infinity();
constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

/// Extended-real robustness valuation. Closed under min/max/negation with
/// sup of an empty set = -inf and inf of an empty set = +inf.
struct Robustness {
  double value = 0.0;
  RobustnessKind kind = RobustnessKind::spatial;

  Robustness() = default;
  Robustness(double v, RobustnessKind k) : value(v == 0.0 ? 0.0 : v), kind(k) {}

  bool falsifying() const { return value < 0.0; }
  bool finite() const { return std::isfinite(value); }
};

std::string format_double(double v);

} // namespace cpsconf
