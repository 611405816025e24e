#include "cpsconf/tss.hpp"

#include "cpsconf/robustness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace cpsconf {

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

TimedStateSequence::TimedStateSequence(std::vector<double> values,
                                       std::vector<HybridTimestamp> stamps,
                                       std::size_t dim,
                                       std::optional<std::vector<int>> modes,
                                       std::vector<std::uint8_t> sentinels)
    : values_(std::move(values)), stamps_(std::move(stamps)), modes_(std::move(modes)),
      sentinels_(std::move(sentinels)), dim_(dim) {
  if (stamps_.empty()) throw std::invalid_argument("trace must have at least one sample");
  if (dim_ == 0) throw std::invalid_argument("trace dimension must be positive");
  if (values_.size() != stamps_.size() * dim_)
    throw std::invalid_argument("value array length does not match sample count * dim");
  if (modes_ && modes_->size() != stamps_.size())
    throw std::invalid_argument("mode column length does not match sample count");
  if (!sentinels_.empty() && sentinels_.size() != stamps_.size())
    throw std::invalid_argument("sentinel flags length does not match sample count");
  for (std::size_t i = 0; i < stamps_.size(); ++i) {
    if (stamps_[i].t < 0.0) throw std::invalid_argument("timestamps must be non-negative");
    if (stamps_[i].j < 0) throw std::invalid_argument("jump counters must be non-negative");
    if (i + 1 < stamps_.size()) {
      const auto& a = stamps_[i];
      const auto& b = stamps_[i + 1];
      if (b.t < a.t || (b.t == a.t && b.j <= a.j) || b.j < a.j)
        throw std::invalid_argument("timestamps must be ordered by (t, j)");
    }
  }
}

int TimedStateSequence::mode(std::size_t i) const {
  if (!modes_) throw std::runtime_error("trace has no mode column");
  return (*modes_)[i];
}

std::size_t TimedStateSequence::index_at(double t) const {
  auto it = std::upper_bound(stamps_.begin(), stamps_.end(), t,
                             [](double v, const HybridTimestamp& s) { return v < s.t; });
  if (it == stamps_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(stamps_.begin(), it)) - 1;
}

bool TimedStateSequence::is_real_timed() const {
  for (const auto& s : stamps_)
    if (s.j != stamps_.front().j) return false;
  return true;
}

TimedStateSequence TimedStateSequence::as_real_timed() const {
  auto stamps = stamps_;
  for (auto& s : stamps) s.j = 1;
  return TimedStateSequence(values_, std::move(stamps), dim_, modes_, sentinels_);
}

TimedStateSequence TimedStateSequence::without_jump_observation() const {
  std::vector<double> values;
  std::vector<HybridTimestamp> stamps;
  std::optional<std::vector<int>> modes;
  if (modes_) modes.emplace();
  std::vector<std::uint8_t> sent;
  for (std::size_t i = 0; i < size(); ++i) {
    if (i + 1 < size() && stamps_[i + 1].t == stamps_[i].t) continue;
    auto s = sample(i);
    values.insert(values.end(), s.begin(), s.end());
    stamps.push_back({stamps_[i].t, 1});
    if (modes) modes->push_back((*modes_)[i]);
    if (!sentinels_.empty()) sent.push_back(sentinels_[i]);
  }
  bool any_sentinel =
      std::any_of(sent.begin(), sent.end(), [](std::uint8_t v) { return v != 0; });
  return TimedStateSequence(std::move(values), std::move(stamps), dim_,
                            std::move(modes),
                            any_sentinel ? std::move(sent)
                                         : std::vector<std::uint8_t>{});
}

TimedStateSequence TimedStateSequence::truncated(double horizon, int max_jumps) const {
  std::size_t keep = 0;
  while (keep < size() && stamps_[keep].t <= horizon && stamps_[keep].j <= max_jumps)
    ++keep;
  if (keep == 0)
    throw std::invalid_argument("truncation removes every sample of the trace");
  if (keep == size()) return *this;
  std::vector<double> vals(values_.begin(), values_.begin() + keep * dim_);
  std::vector<HybridTimestamp> stamps(stamps_.begin(), stamps_.begin() + keep);
  std::optional<std::vector<int>> modes;
  if (modes_) modes = std::vector<int>(modes_->begin(), modes_->begin() + keep);
  std::vector<std::uint8_t> sent;
  if (!sentinels_.empty()) sent.assign(sentinels_.begin(), sentinels_.begin() + keep);
  return TimedStateSequence(std::move(vals), std::move(stamps), dim_, std::move(modes),
                            std::move(sent));
}

double sample_distance(const TimedStateSequence& a, std::size_t i,
                       const TimedStateSequence& b, std::size_t k, Norm norm) {
  if (a.is_sentinel(i) || b.is_sentinel(k)) return kPlusInf;
  if (a.dim() != b.dim()) throw std::invalid_argument("trace dimensions differ");
  auto va = a.sample(i);
  auto vb = b.sample(k);
  if (norm == Norm::chebyshev) {
    double m = 0.0;
    for (std::size_t d = 0; d < va.size(); ++d) m = std::max(m, std::abs(va[d] - vb[d]));
    return m;
  }
  double acc = 0.0;
  for (std::size_t d = 0; d < va.size(); ++d) {
    const double diff = va[d] - vb[d];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

ParallelTrace::ParallelTrace(TimedStateSequence model, TimedStateSequence impl,
                             double horizon, int max_jumps)
    : model_(model.truncated(horizon, max_jumps)),
      impl_(impl.truncated(horizon, max_jumps)), horizon_(horizon),
      max_jumps_(max_jumps) {
  if (model_.dim() != impl_.dim())
    throw std::invalid_argument("model and implementation trace dimensions differ");
}

TimedStateSequence shift(const TimedStateSequence& tss, long k, FillPolicy fill,
                         double horizon) {
  const std::size_t n = tss.size();
  if (n == 0) throw std::invalid_argument("cannot shift an empty trace");
  if (static_cast<std::size_t>(std::labs(k)) >= n)
    throw std::invalid_argument("shift exceeds trace length");
  if (k == 0) return tss;

  const std::size_t dim = tss.dim();
  const std::size_t mag = static_cast<std::size_t>(std::labs(k));
  std::vector<double> values(n * dim);
  std::vector<HybridTimestamp> stamps(n);
  std::optional<std::vector<int>> modes;
  if (tss.has_modes()) modes = std::vector<int>(n);
  std::vector<std::uint8_t> sentinels(n, 0);

  auto copy_sample = [&](std::size_t dst, std::size_t src) {
    auto s = tss.sample(src);
    std::copy(s.begin(), s.end(), values.begin() + dst * dim);
    if (modes) (*modes)[dst] = tss.mode(src);
    sentinels[dst] = tss.is_sentinel(src) ? 1 : 0;
  };

  if (k > 0) {
    const double step = horizon / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = i + mag;
      if (src < n) {
        copy_sample(i, src);
        stamps[i] = tss.stamp(src);
      } else {
        copy_sample(i, n - 1); // boundary value; overwritten below for sentinel fill
        if (fill == FillPolicy::positive_infinity) sentinels[i] = 1;
        stamps[i] = {tss.time(n - 1) + static_cast<double>(src - n + 1) * step,
                     tss.jumps(n - 1)};
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      stamps[i] = tss.stamp(i);
      if (i < mag) {
        copy_sample(i, 0);
        if (fill == FillPolicy::positive_infinity) sentinels[i] = 1;
      } else {
        copy_sample(i, i - mag);
      }
    }
  }

  bool any_sentinel = std::any_of(sentinels.begin(), sentinels.end(),
                                  [](std::uint8_t s) { return s != 0; });
  return TimedStateSequence(std::move(values), std::move(stamps), dim, std::move(modes),
                            any_sentinel ? std::move(sentinels)
                                         : std::vector<std::uint8_t>{});
}

std::size_t window_count(const TimedStateSequence& tss, double tau) {
  const std::size_t n = tss.size();
  if (n <= 1 || tss.span_start() == tss.span_end())
    throw std::invalid_argument("Zeno or degenerate trace");
  if (tau <= 0.0) throw std::invalid_argument("window width must be positive");

  auto count_from = [&](std::size_t i) {
    std::size_t k = i;
    while (k + 1 < n && std::abs(tss.time(k + 1) - tss.time(i)) < tau) ++k;
    return k - i;
  };

  const double t_end = tss.time(n - 1);
  std::size_t best = 0;
  bool any_eligible = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (tss.time(i) + tau > t_end) continue;
    const std::size_t c = count_from(i);
    best = any_eligible ? std::min(best, c) : c;
    any_eligible = true;
  }
  if (!any_eligible) return count_from(0);
  return best;
}

std::vector<int> jump_values(const TimedStateSequence& tss) {
  std::vector<int> js;
  for (std::size_t i = 0; i < tss.size(); ++i)
    if (js.empty() || js.back() != tss.jumps(i)) js.push_back(tss.jumps(i));
  return js;
}

std::vector<TimedStateSequence> segment_by_jumps(const TimedStateSequence& tss) {
  std::vector<TimedStateSequence> segments;
  const std::size_t n = tss.size();
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || tss.jumps(i) != tss.jumps(begin)) {
      const std::size_t len = i - begin;
      std::vector<double> vals(tss.values().begin() + begin * tss.dim(),
                               tss.values().begin() + i * tss.dim());
      std::vector<HybridTimestamp> stamps(len);
      for (std::size_t s = 0; s < len; ++s) stamps[s] = {tss.time(begin + s), 1};
      std::optional<std::vector<int>> modes;
      if (tss.has_modes())
        modes = std::vector<int>(tss.modes()->begin() + begin, tss.modes()->begin() + i);
      segments.emplace_back(std::move(vals), std::move(stamps), tss.dim(),
                            std::move(modes));
      begin = i;
    }
  }
  return segments;
}

ParallelTrace parallel_concat(const TimedStateSequence& model,
                              const TimedStateSequence& impl, double horizon,
                              int max_jumps) {
  return ParallelTrace(model, impl, horizon, max_jumps);
}

} // namespace cpsconf
