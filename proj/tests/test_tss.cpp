#include "cpsconf/trace_io.hpp"
#include "cpsconf/tss.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace cpsconf;
using namespace cpsconf::testing;

TEST_CASE("trace invariants are enforced at construction") {
  CHECK_THROWS(TimedStateSequence({}, {}, 1));
  CHECK_THROWS(TimedStateSequence({1.0, 2.0}, {{0.0, 1}}, 1));        // length mismatch
  CHECK_THROWS(TimedStateSequence({1.0, 2.0}, {{1.0, 1}, {0.5, 1}}, 1)); // t decreasing
  CHECK_THROWS(TimedStateSequence({1.0, 2.0}, {{1.0, 1}, {1.0, 1}}, 1)); // (t, j) repeated
  CHECK_THROWS(TimedStateSequence({1.0, 2.0}, {{1.0, 2}, {2.0, 1}}, 1)); // j decreasing
  CHECK_THROWS(TimedStateSequence({1.0}, {{-0.5, 1}}, 1));            // negative time
  CHECK_NOTHROW(TimedStateSequence({1.0, 2.0}, {{1.0, 1}, {1.0, 2}}, 1)); // zero-time jump
}

TEST_CASE("shift by zero is the identity") {
  auto x = scalar_trace({1, 2, 3}, {0, 1, 2});
  auto s = shift(x, 0, FillPolicy::constant_interpolation, 3.0);
  CHECK(s.values() == x.values());
  CHECK(s.stamps() == x.stamps());
}

TEST_CASE("forward shift drops the head and extends the tail") {
  auto x = scalar_trace({1, 2, 3}, {0, 1, 2});
  auto s = shift(x, 1, FillPolicy::constant_interpolation, 3.0);
  CHECK(s.values() == std::vector<double>{2, 3, 3});
  CHECK(s.time(0) == doctest::Approx(1.0));
  CHECK(s.time(1) == doctest::Approx(2.0));
  CHECK(s.time(2) == doctest::Approx(3.0)); // t_last + horizon / size
  CHECK_FALSE(s.is_sentinel(2));
}

TEST_CASE("backward shift replicates the head and keeps timestamps") {
  auto x = scalar_trace({1, 2, 3}, {0, 1, 2});
  auto s = shift(x, -1, FillPolicy::constant_interpolation, 3.0);
  CHECK(s.values() == std::vector<double>{1, 1, 2});
  CHECK(s.stamps() == x.stamps());
}

TEST_CASE("sentinel fill marks filler samples and poisons distances") {
  auto x = scalar_trace({1, 2, 3}, {0, 1, 2});
  auto s = shift(x, 2, FillPolicy::positive_infinity, 3.0);
  CHECK(s.values()[0] == 3.0);
  CHECK(s.is_sentinel(1));
  CHECK(s.is_sentinel(2));
  CHECK(sample_distance(x, 0, s, 1) == kPlusInf);
}

TEST_CASE("shift rejects out-of-range magnitudes") {
  auto x = scalar_trace({1, 2, 3}, {0, 1, 2});
  CHECK_THROWS_WITH(shift(x, 3, FillPolicy::constant_interpolation, 3.0),
                    doctest::Contains("shift exceeds trace length"));
  CHECK_THROWS(shift(x, -5, FillPolicy::constant_interpolation, 3.0));
}

TEST_CASE("shift round trip restores interior values") {
  std::mt19937_64 rng(7);
  RandomTraceSpec spec;
  spec.max_segments = 1;
  for (int rep = 0; rep < 50; ++rep) {
    auto x = random_trace(rng, spec);
    const long n = static_cast<long>(x.size());
    const double horizon = x.span_end() + 1.0;
    for (long k = 1; 2 * k < n; ++k) {
      for (long sign : {1L, -1L}) {
        auto fwd = shift(x, sign * k, FillPolicy::constant_interpolation, horizon);
        auto rt = shift(fwd, -sign * k, FillPolicy::constant_interpolation, horizon);
        REQUIRE(rt.size() == x.size());
        for (long i = k; i < n - k; ++i)
          for (std::size_t d = 0; d < x.dim(); ++d)
            CHECK(rt.sample(i)[d] == x.sample(i)[d]);
      }
    }
  }
}

TEST_CASE("shift preserves length and timestamp monotonicity") {
  std::mt19937_64 rng(8);
  RandomTraceSpec spec;
  spec.max_segments = 1;
  for (int rep = 0; rep < 50; ++rep) {
    auto x = random_trace(rng, spec);
    std::uniform_int_distribution<long> k_dist(-(long(x.size()) - 1), long(x.size()) - 1);
    const long k = k_dist(rng);
    auto s = shift(x, k, FillPolicy::constant_interpolation, x.span_end() + 1.0);
    REQUIRE(s.size() == x.size());
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.time(i) >= s.time(i - 1));
  }
}

TEST_CASE("window count matches hand-computed examples") {
  auto t = scalar_trace({0, 0, 0, 0, 0}, {0, 0.5, 1.0, 1.5, 2.0});
  CHECK(window_count(t, 1.1) == 2);
  CHECK(window_count(t, 0.3) == 0);

  // uniform grid, window of 2.5 steps holds exactly two extra samples
  auto u = constant_trace(0.0, 20, 0.2);
  CHECK(window_count(u, 0.5) == 2);
}

TEST_CASE("window count falls back to the first index for huge windows") {
  auto t = scalar_trace({0, 0, 0}, {0, 1, 2});
  CHECK(window_count(t, 10.0) == 2);
}

TEST_CASE("window count rejects degenerate traces") {
  auto single = scalar_trace({1}, {0});
  CHECK_THROWS_WITH(window_count(single, 0.5), doctest::Contains("degenerate"));
}

TEST_CASE("window count is non-decreasing in the window width") {
  std::mt19937_64 rng(9);
  RandomTraceSpec spec;
  spec.max_segments = 1;
  for (int rep = 0; rep < 100; ++rep) {
    auto x = random_trace(rng, spec);
    std::uniform_real_distribution<double> tau_dist(0.01, 3.0);
    double a = tau_dist(rng);
    double b = tau_dist(rng);
    if (a > b) std::swap(a, b);
    CHECK(window_count(x, a) <= window_count(x, b));
  }
}

TEST_CASE("segmentation splits at jump-counter changes") {
  // j = (0,0,1,1,2): three segments of lengths 2, 2, 1
  TimedStateSequence x({1, 2, 3, 4, 5},
                       {{0.0, 0}, {1.0, 0}, {1.0, 1}, {2.0, 1}, {2.0, 2}}, 1);
  auto segs = segment_by_jumps(x);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0].size() == 2);
  CHECK(segs[1].size() == 2);
  CHECK(segs[2].size() == 1);
  for (const auto& s : segs) CHECK(s.is_real_timed());

  auto one = segment_by_jumps(scalar_trace({1, 2, 3}, {0, 1, 2}));
  REQUIRE(one.size() == 1);
  CHECK(one[0].values() == std::vector<double>{1, 2, 3});

  TimedStateSequence singletons({1, 2, 3, 4},
                                {{0.0, 0}, {0.0, 1}, {0.0, 2}, {0.0, 3}}, 1);
  CHECK(segment_by_jumps(singletons).size() == 4);
}

TEST_CASE("segments concatenate back to the original trace") {
  std::mt19937_64 rng(10);
  RandomTraceSpec spec;
  for (int rep = 0; rep < 100; ++rep) {
    auto x = random_trace(rng, spec);
    auto segs = segment_by_jumps(x);
    std::vector<double> values;
    std::vector<double> times;
    for (const auto& s : segs) {
      values.insert(values.end(), s.values().begin(), s.values().end());
      for (std::size_t i = 0; i < s.size(); ++i) times.push_back(s.time(i));
    }
    CHECK(values == x.values());
    REQUIRE(times.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(times[i] == x.time(i));
  }
}

TEST_CASE("parallel concatenation truncates at the horizon and jump budget") {
  auto a = constant_trace(1.0, 11, 1.0); // spans 10 s
  auto b = constant_trace(1.0, 11, 1.0);
  auto p = parallel_concat(a, b, 5.0, 10);
  CHECK(p.model().size() == 6);
  CHECK(p.model().span_end() == doctest::Approx(5.0));
  CHECK(p.impl().size() == 6);

  auto untouched = parallel_concat(a, b, 20.0, 10);
  CHECK(untouched.model().size() == 11);

  TimedStateSequence jumps({1, 2, 3, 4, 5},
                           {{0.0, 1}, {1.0, 2}, {2.0, 3}, {3.0, 4}, {4.0, 4}}, 1);
  auto q = parallel_concat(a, jumps, 20.0, 2);
  CHECK(q.impl().size() == 2); // samples with j <= 2

  auto c = TimedStateSequence({1, 1, 1, 1}, {{0, 1}, {1, 1}}, 2);
  CHECK_THROWS(parallel_concat(a, c, 5.0, 10)); // dim mismatch
}

TEST_CASE("trace csv round trip") {
  TimedStateSequence x({0.5, 1.5, 2.5, 3.5, 4.5, 5.5},
                       {{0.0, 1}, {0.5, 1}, {0.5, 2}}, 2,
                       std::vector<int>{4, 4, 7});
  std::stringstream buf;
  write_trace_csv(buf, x);
  auto y = read_trace_csv(buf);
  CHECK(y.values() == x.values());
  CHECK(y.stamps() == x.stamps());
  REQUIRE(y.has_modes());
  CHECK(*y.modes() == *x.modes());
}

TEST_CASE("trace csv accepts optional columns and rejects garbage") {
  std::stringstream minimal("t,y1\n0,1\n1,2\n");
  auto x = read_trace_csv(minimal);
  CHECK(x.size() == 2);
  CHECK(x.jumps(0) == 1);
  CHECK_FALSE(x.has_modes());

  std::stringstream bad_order("t,y1\n1,1\n0,2\n");
  CHECK_THROWS(read_trace_csv(bad_order));
  std::stringstream bad_number("t,y1\n0,abc\n");
  CHECK_THROWS(read_trace_csv(bad_number));
  std::stringstream empty("");
  CHECK_THROWS(read_trace_csv(empty));
}

TEST_CASE("index lookup by time returns the last sample at or before") {
  TimedStateSequence x({1, 2, 3, 4}, {{0.0, 1}, {1.0, 1}, {1.0, 2}, {2.0, 2}}, 1);
  CHECK(x.index_at(-0.5) == 0);
  CHECK(x.index_at(0.0) == 0);
  CHECK(x.index_at(0.7) == 0);
  CHECK(x.index_at(1.0) == 2); // post-jump duplicate wins
  CHECK(x.index_at(1.5) == 2);
  CHECK(x.index_at(9.0) == 3);
}
