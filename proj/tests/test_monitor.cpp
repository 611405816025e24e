#include "cpsconf/monitor.hpp"

#include "boolean_oracle.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace cpsconf;
using namespace cpsconf::testing;

namespace {

ParallelTrace single(const TimedStateSequence& tss) {
  return ParallelTrace(tss, tss, tss.span_end(), tss.stamps().back().j);
}

ParallelTrace pair_of(const TimedStateSequence& a, const TimedStateSequence& b) {
  const double horizon = std::max(a.span_end(), b.span_end());
  const int jumps = std::max(a.stamps().back().j, b.stamps().back().j);
  return ParallelTrace(a, b, horizon, jumps);
}

// random positive-or-negated boolean/temporal combinations over channel,
// gap and mode atoms
FormulaPtr random_formula(std::mt19937_64& rng, int depth, bool with_modes) {
  std::uniform_int_distribution<int> kind_dist(0, depth <= 0 ? 1 : 8);
  std::uniform_real_distribution<double> thr(-1.5, 1.5);
  std::uniform_real_distribution<double> width(0.1, 2.0);
  auto interval = [&] {
    const double lo = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Interval iv = Interval::closed(lo, lo + width(rng));
    if (kind_dist(rng) == 0) iv.hi = kPlusInf, iv.hi_open = true;
    return iv;
  };
  switch (kind_dist(rng)) {
  case 0: {
    const bool model_side = kind_dist(rng) % 2 == 0;
    const bool upper = kind_dist(rng) % 2 == 0;
    return Formula::atom(std::make_shared<ChannelBound>(
        model_side ? TraceSide::model : TraceSide::impl, 0, upper, true, thr(rng)));
  }
  case 1:
    if (with_modes && kind_dist(rng) % 2 == 0)
      return Formula::atom(std::make_shared<ModeMatch>(kind_dist(rng) % 2 == 0));
    return Formula::atom(std::make_shared<OutputGap>(std::abs(thr(rng)) + 0.05));
  case 2:
    return Formula::negation(random_formula(rng, depth - 1, with_modes));
  case 3:
    return Formula::conjunction(random_formula(rng, depth - 1, with_modes),
                                random_formula(rng, depth - 1, with_modes));
  case 4:
    return Formula::disjunction(random_formula(rng, depth - 1, with_modes),
                                random_formula(rng, depth - 1, with_modes));
  case 5:
    return Formula::implication(random_formula(rng, depth - 1, with_modes),
                                random_formula(rng, depth - 1, with_modes));
  case 6:
    return Formula::always(interval(), random_formula(rng, depth - 1, with_modes));
  case 7:
    return Formula::eventually(interval(), random_formula(rng, depth - 1, with_modes));
  default:
    return Formula::until(interval(), random_formula(rng, depth - 1, with_modes),
                          random_formula(rng, depth - 1, with_modes));
  }
}

} // namespace

TEST_CASE("spatial robustness of a bounded always") {
  auto trace = single(scalar_trace({0.2, 0.5, 0.9}, {0, 1, 2}));
  auto phi = parse_formula("[]_[0,2] (y < 1)");
  CHECK(spatial_robustness(phi, trace, 0.0).value == doctest::Approx(0.1).epsilon(1e-12));
  // negation flips the sign exactly
  CHECK(spatial_robustness(Formula::negation(phi), trace, 0.0).value ==
        doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("empty eventually window yields -inf") {
  auto trace = single(scalar_trace({0.2, 0.5, 0.9}, {0, 1, 2}));
  auto phi = parse_formula("<>_(0,1] (y < 1)");
  CHECK(spatial_robustness(phi, trace, 2.0).value == kMinusInf); // no sample after t=2
  auto box = parse_formula("[]_(0,1] (y < 1)");
  CHECK(spatial_robustness(box, trace, 2.0).value == kPlusInf);
}

TEST_CASE("evaluation time must sit on the grid") {
  auto trace = single(scalar_trace({0.2, 0.5}, {0, 1}));
  auto phi = parse_formula("y < 1");
  CHECK_THROWS(spatial_robustness(phi, trace, 0.5));
  CHECK_NOTHROW(spatial_robustness(phi, trace, 1.0));
}

TEST_CASE("temporal robustness base case over a mode atom") {
  // truth pattern T T F F T at t = 0..4
  auto a = mode_trace({1, 1, 2, 2, 1});
  auto b = mode_trace({1, 1, 1, 1, 1});
  auto trace = pair_of(a, b);
  auto same = Formula::atom(std::make_shared<ModeMatch>(true));
  CHECK(temporal_robustness(same, trace, 1.0).value == doctest::Approx(0.0));
  CHECK(temporal_robustness(same, trace, 2.0).value == doctest::Approx(-1.0));
  CHECK(temporal_robustness(same, trace, 3.0).value == doctest::Approx(-1.0));

  // constant truth over the whole trace gives a signed infinity
  auto ident = pair_of(a, a);
  CHECK(temporal_robustness(same, ident, 0.0).value == kPlusInf);
  auto differ = Formula::atom(std::make_shared<ModeMatch>(false));
  CHECK(temporal_robustness(differ, ident, 0.0).value == kMinusInf);
}

TEST_CASE("desugaring identities hold exactly") {
  std::mt19937_64 rng(21);
  RandomTraceSpec spec;
  spec.max_segments = 1;
  int checked = 0;
  for (int rep = 0; rep < 500; ++rep) {
    auto a = random_trace(rng, spec, 1);
    auto b = random_trace(rng, spec, 1, nullptr, a.size());
    auto trace = pair_of(a, b);
    auto body = random_formula(rng, 2, false);
    const double lo = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    Interval iv = Interval::closed(lo, lo + 0.7);

    auto ev_native = robustness_signal(Formula::eventually(iv, body), trace,
                                       RobustnessKind::spatial);
    auto ev_sugar = robustness_signal(Formula::until(iv, Formula::verum(), body), trace,
                                      RobustnessKind::spatial);
    auto al_native =
        robustness_signal(Formula::always(iv, body), trace, RobustnessKind::spatial);
    auto al_sugar = robustness_signal(
        Formula::negation(Formula::eventually(iv, Formula::negation(body))), trace,
        RobustnessKind::spatial);
    REQUIRE(ev_native.size() == ev_sugar.size());
    for (std::size_t i = 0; i < ev_native.size(); ++i) {
      CHECK(ev_native[i] == ev_sugar[i]);
      CHECK(al_native[i] == al_sugar[i]);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("negation is an exact sign flip for both kinds") {
  std::mt19937_64 rng(22);
  RandomTraceSpec spec;
  for (int rep = 0; rep < 200; ++rep) {
    auto [a, b] = random_shared_grid_pair(rng, spec);
    auto trace = pair_of(a, b);
    auto phi = random_formula(rng, 2, false);
    for (auto kind : {RobustnessKind::spatial, RobustnessKind::temporal}) {
      auto direct = robustness_signal(phi, trace, kind);
      auto negated = robustness_signal(Formula::negation(phi), trace, kind);
      for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(direct[i] == -negated[i]);
    }
  }
}

TEST_CASE("sign soundness against the boolean oracle") {
  std::mt19937_64 rng(23);
  RandomTraceSpec spec;
  spec.max_segments = 1;
  int decisive = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    auto a = random_trace(rng, spec, 2);
    auto b = random_trace(rng, spec, 2, nullptr, a.size());
    auto trace = pair_of(a, b);
    auto phi = random_formula(rng, 3, false);
    const auto rho = robustness_signal(phi, trace, RobustnessKind::spatial);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      if (rho[i] == 0.0) continue; // boundary carries no Boolean information
      CHECK(boolean_holds(phi, trace, i) == (rho[i] > 0.0));
      ++decisive;
    }
  }
  CHECK(decisive > 5000);
}

TEST_CASE("raising every gap threshold never lowers spatial robustness") {
  std::mt19937_64 rng(24);
  RandomTraceSpec spec;
  spec.max_segments = 1;
  // positive combinations only: thresholds appear with positive polarity
  std::function<FormulaPtr(int, double)> build = [&](int depth, double bump) {
    std::uniform_int_distribution<int> kind_dist(0, depth <= 0 ? 0 : 4);
    // rng use must be identical for both bumps, so draw before branching
    const int kind = kind_dist(rng);
    const double eps = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    const double lo = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    switch (kind) {
    case 0:
      return Formula::atom(std::make_shared<OutputGap>(eps + bump));
    case 1:
      return Formula::conjunction(build(depth - 1, bump), build(depth - 1, bump));
    case 2:
      return Formula::disjunction(build(depth - 1, bump), build(depth - 1, bump));
    case 3:
      return Formula::always(Interval::closed(lo, lo + 1.0), build(depth - 1, bump));
    default:
      return Formula::eventually(Interval::closed(lo, lo + 1.0), build(depth - 1, bump));
    }
  };
  for (int rep = 0; rep < 200; ++rep) {
    auto a = random_trace(rng, spec, 2);
    auto b = random_trace(rng, spec, 2, nullptr, a.size());
    auto trace = pair_of(a, b);
    const auto state = rng;
    auto narrow = build(2, 0.0);
    rng = state; // same structure, wider thresholds
    auto wide = build(2, 0.25);
    auto r_narrow = robustness_signal(narrow, trace, RobustnessKind::spatial);
    auto r_wide = robustness_signal(wide, trace, RobustnessKind::spatial);
    for (std::size_t i = 0; i < r_narrow.size(); ++i) CHECK(r_narrow[i] <= r_wide[i]);
  }
}

TEST_CASE("mode atoms require mode columns") {
  auto plain = single(scalar_trace({1, 2}, {0, 1}));
  auto phi = parse_formula("lM == lI");
  CHECK_THROWS_WITH(spatial_robustness(phi, plain, 0.0),
                    doctest::Contains("mode column"));
}
