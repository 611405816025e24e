#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cpsconf {

/// Timestamp of one sample: time in seconds plus the number of jumps taken
/// so far. Real-timed traces use j == 1 throughout.
struct HybridTimestamp {
  double t = 0.0;
  int j = 1;

  friend bool operator==(const HybridTimestamp&, const HybridTimestamp&) = default;
};

/// How shift fills the positions that fall off the end of a trace.
enum class FillPolicy {
  constant_interpolation, // replicate the boundary sample
  positive_infinity       // mark the filler as an unbounded sentinel
};

/// A finite sequence of output samples with hybrid timestamps and optional
/// per-sample mode labels. Immutable after construction; all operations on
/// traces are pure functions.
class TimedStateSequence {
public:
  TimedStateSequence(std::vector<double> values, std::vector<HybridTimestamp> stamps,
                     std::size_t dim, std::optional<std::vector<int>> modes = std::nullopt,
                     std::vector<std::uint8_t> sentinels = {});

  std::size_t size() const { return stamps_.size(); }
  std::size_t dim() const { return dim_; }
  bool has_modes() const { return modes_.has_value(); }

  std::span<const double> sample(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  const HybridTimestamp& stamp(std::size_t i) const { return stamps_[i]; }
  double time(std::size_t i) const { return stamps_[i].t; }
  int jumps(std::size_t i) const { return stamps_[i].j; }
  int mode(std::size_t i) const;
  bool is_sentinel(std::size_t i) const {
    return !sentinels_.empty() && sentinels_[i] != 0;
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<HybridTimestamp>& stamps() const { return stamps_; }
  const std::optional<std::vector<int>>& modes() const { return modes_; }

  double span_start() const { return stamps_.front().t; }
  double span_end() const { return stamps_.back().t; }

  /// Last sample index with time <= t (the post-jump sample at a jump
  /// instant); index 0 when t precedes the trace.
  std::size_t index_at(double t) const;

  /// True when every sample has the same jump counter (a real-timed trace).
  bool is_real_timed() const;

  /// Copy with all jump counters set to 1 (used when a segment with constant
  /// j is viewed as a real-timed trace).
  TimedStateSequence as_real_timed() const;

  /// The trace as recorded by a sampler that cannot observe jumps: one
  /// sample per instant (the post-jump one), j == 1 throughout.
  TimedStateSequence without_jump_observation() const;

  /// Copy truncated to samples with t <= horizon and j <= max_jumps.
  TimedStateSequence truncated(double horizon, int max_jumps) const;

private:
  std::vector<double> values_; // row-major, size() * dim_
  std::vector<HybridTimestamp> stamps_;
  std::optional<std::vector<int>> modes_;
  std::vector<std::uint8_t> sentinels_; // empty means no sentinel anywhere
  std::size_t dim_ = 0;
};

/// Euclidean (default) or Chebyshev distance between samples.
enum class Norm { euclidean, chebyshev };

/// Distance between samples a and b; +inf when either carries the sentinel
/// flag, so comparisons against filler samples are deterministic.
double sample_distance(const TimedStateSequence& a, std::size_t i,
                       const TimedStateSequence& b, std::size_t k,
                       Norm norm = Norm::euclidean);

/// Pair of traces produced by running two systems on the same stimulus,
/// truncated to the test horizon and jump budget on construction.
class ParallelTrace {
public:
  ParallelTrace(TimedStateSequence model, TimedStateSequence impl, double horizon,
                int max_jumps);

  const TimedStateSequence& model() const { return model_; }
  const TimedStateSequence& impl() const { return impl_; }
  double horizon() const { return horizon_; }
  int max_jumps() const { return max_jumps_; }

  /// Timestamps formula evaluation quantifies over (the model trace's grid).
  const std::vector<HybridTimestamp>& grid() const { return model_.stamps(); }

private:
  TimedStateSequence model_;
  TimedStateSequence impl_;
  double horizon_;
  int max_jumps_;
};

/// Discrete shift. k > 0 drops the first k samples and appends k filler
/// samples past the end, extending timestamps in steps of horizon/size.
/// k < 0 prepends |k| copies of the first sample and truncates the tail;
/// timestamps stay untouched. Filler values follow the fill policy.
TimedStateSequence shift(const TimedStateSequence& tss, long k, FillPolicy fill,
                         double horizon);

/// Smallest number of extra samples that fit in a window of width tau,
/// taken over the indices whose window lies inside the trace span. Falls
/// back to the first index when tau exceeds the whole span.
std::size_t window_count(const TimedStateSequence& tss, double tau);

/// Splits a hybrid trace into maximal runs of constant jump counter; each
/// segment is returned as a real-timed trace. Concatenating the segments in
/// order reproduces the input values and timestamps.
std::vector<TimedStateSequence> segment_by_jumps(const TimedStateSequence& tss);

/// Distinct jump-counter values in order of appearance.
std::vector<int> jump_values(const TimedStateSequence& tss);

ParallelTrace parallel_concat(const TimedStateSequence& model,
                              const TimedStateSequence& impl, double horizon,
                              int max_jumps);

} // namespace cpsconf
