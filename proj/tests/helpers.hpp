#pragma once

#include "cpsconf/mtl.hpp"
#include "cpsconf/tss.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace cpsconf::testing {

/// 1-D real-timed trace from (value, time) lists.
inline TimedStateSequence scalar_trace(std::vector<double> ys, std::vector<double> ts) {
  std::vector<HybridTimestamp> stamps;
  stamps.reserve(ts.size());
  for (double t : ts) stamps.push_back({t, 1});
  return TimedStateSequence(std::move(ys), std::move(stamps), 1);
}

/// Constant 1-D trace on a uniform grid.
inline TimedStateSequence constant_trace(double value, std::size_t n, double dt) {
  std::vector<double> ys(n, value);
  std::vector<HybridTimestamp> stamps;
  for (std::size_t i = 0; i < n; ++i) stamps.push_back({static_cast<double>(i) * dt, 1});
  return TimedStateSequence(std::move(ys), std::move(stamps), 1);
}

/// Mode-labelled constant-value trace at integer times.
inline TimedStateSequence mode_trace(std::vector<int> modes) {
  std::vector<double> ys(modes.size(), 0.0);
  std::vector<HybridTimestamp> stamps;
  for (std::size_t i = 0; i < modes.size(); ++i)
    stamps.push_back({static_cast<double>(i), 1});
  return TimedStateSequence(std::move(ys), std::move(stamps), 1, std::move(modes));
}

struct RandomTraceSpec {
  std::size_t min_len = 5;
  std::size_t max_len = 40;
  std::size_t min_dim = 1;
  std::size_t max_dim = 4;
  double dt = 0.1;
  double value_scale = 2.0;
  int max_segments = 4; // 1 keeps the trace real-timed
};

/// Random real- or hybrid-timed trace on a uniform grid; jumps (when any)
/// duplicate the boundary sample at the same time with j+1, as the
/// simulator does.
inline TimedStateSequence random_trace(std::mt19937_64& rng, const RandomTraceSpec& spec,
                                       std::size_t forced_dim = 0,
                                       const std::vector<std::size_t>* forced_jumps = nullptr,
                                       std::size_t forced_len = 0) {
  std::uniform_int_distribution<std::size_t> len_dist(spec.min_len, spec.max_len);
  std::uniform_int_distribution<std::size_t> dim_dist(spec.min_dim, spec.max_dim);
  std::uniform_real_distribution<double> val_dist(-spec.value_scale, spec.value_scale);

  const std::size_t len = forced_len ? forced_len : len_dist(rng);
  const std::size_t dim = forced_dim ? forced_dim : dim_dist(rng);

  std::vector<std::size_t> jump_at; // grid index where a zero-time jump fires
  if (forced_jumps) {
    jump_at = *forced_jumps;
  } else if (spec.max_segments > 1) {
    std::uniform_int_distribution<int> seg_dist(1, spec.max_segments);
    const int segments = seg_dist(rng);
    std::uniform_int_distribution<std::size_t> pos_dist(1, len - 1);
    for (int s = 1; s < segments; ++s) jump_at.push_back(pos_dist(rng));
    std::sort(jump_at.begin(), jump_at.end());
    jump_at.erase(std::unique(jump_at.begin(), jump_at.end()), jump_at.end());
  }

  std::vector<double> values;
  std::vector<HybridTimestamp> stamps;
  int j = 1;
  std::size_t next_jump = 0;
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) * spec.dt;
    for (std::size_t d = 0; d < dim; ++d) values.push_back(val_dist(rng));
    stamps.push_back({t, j});
    if (next_jump < jump_at.size() && jump_at[next_jump] == i + 1) {
      // duplicate the instant with the incremented jump counter
      for (std::size_t d = 0; d < dim; ++d) values.push_back(val_dist(rng));
      stamps.push_back({t, ++j});
      ++next_jump;
    }
  }
  return TimedStateSequence(std::move(values), std::move(stamps), dim);
}

/// Pair of traces on a shared grid with a shared jump structure, as
/// produced by sampling two systems at the same rate.
inline std::pair<TimedStateSequence, TimedStateSequence>
random_shared_grid_pair(std::mt19937_64& rng, const RandomTraceSpec& spec) {
  std::uniform_int_distribution<std::size_t> len_dist(spec.min_len, spec.max_len);
  std::uniform_int_distribution<std::size_t> dim_dist(spec.min_dim, spec.max_dim);
  const std::size_t len = len_dist(rng);
  const std::size_t dim = dim_dist(rng);

  std::vector<std::size_t> jumps;
  if (spec.max_segments > 1 && len > 2) {
    std::uniform_int_distribution<int> seg_dist(1, spec.max_segments);
    const int segments = seg_dist(rng);
    std::uniform_int_distribution<std::size_t> pos_dist(1, len - 1);
    for (int s = 1; s < segments; ++s) jumps.push_back(pos_dist(rng));
    std::sort(jumps.begin(), jumps.end());
    jumps.erase(std::unique(jumps.begin(), jumps.end()), jumps.end());
  }
  auto a = random_trace(rng, spec, dim, &jumps, len);
  auto b = random_trace(rng, spec, dim, &jumps, len);
  return {std::move(a), std::move(b)};
}

} // namespace cpsconf::testing
