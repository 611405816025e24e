#pragma once

#include "cpsconf/robustness.hpp"
#include "cpsconf/tss.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cpsconf {

/// Interval annotation of a temporal operator. Endpoints are non-negative;
/// the upper bound may be +inf (rendered as `inf`, always open).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  bool contains(double d) const {
    if (lo_open ? d <= lo : d < lo) return false;
    if (hi_open ? d >= hi : d > hi) return false;
    return true;
  }
  bool valid() const;
  std::string render() const;

  static Interval closed(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval unbounded(double lo = 0.0) { return {lo, kPlusInf, false, true}; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

class Predicate;
using PredicatePtr = std::shared_ptr<const Predicate>;

/// Atomic predicate over one sample of a parallel trace. Implementations
/// provide both a signed-distance valuation (spatial robustness base case)
/// and a Boolean truth value (temporal robustness base case).
class Predicate {
public:
  virtual ~Predicate() = default;

  virtual double signed_distance(const ParallelTrace& trace, std::size_t i) const = 0;
  virtual bool holds(const ParallelTrace& trace, std::size_t i) const = 0;
  virtual std::string render() const = 0;
};

/// Which trace of the pair a channel atom reads.
enum class TraceSide { model, impl };

/// `y3 < 0.5` style atom: one output channel against a constant threshold.
/// Signed distance from the satisfying half-line is threshold - value for
/// upper bounds and value - threshold for lower bounds.
class ChannelBound final : public Predicate {
public:
  ChannelBound(TraceSide side, std::size_t channel, bool upper, bool strict,
               double threshold);

  double signed_distance(const ParallelTrace& trace, std::size_t i) const override;
  bool holds(const ParallelTrace& trace, std::size_t i) const override;
  std::string render() const override;

private:
  double value_at(const ParallelTrace& trace, std::size_t i) const;

  TraceSide side_;
  std::size_t channel_; // zero-based
  bool upper_;          // value (<|<=) threshold when true, (>|>=) otherwise
  bool strict_;
  double threshold_;
};

/// `lM == lI` / `lM != lI`: the two traces' mode labels at the same index.
/// Spatial valuation is +/-inf by truth (discrete labels carry no metric).
class ModeMatch final : public Predicate {
public:
  explicit ModeMatch(bool want_equal) : want_equal_(want_equal) {}

  double signed_distance(const ParallelTrace& trace, std::size_t i) const override;
  bool holds(const ParallelTrace& trace, std::size_t i) const override;
  std::string render() const override;

private:
  bool want_equal_;
};

/// `err < eps`: norm of the pointwise model/impl difference against eps.
/// Valuation is eps - d (also when d >= eps), the signed distance of the
/// scalar d from the interval (-eps, eps).
class OutputGap final : public Predicate {
public:
  OutputGap(double eps, Norm norm = Norm::euclidean) : eps_(eps), norm_(norm) {}

  double signed_distance(const ParallelTrace& trace, std::size_t i) const override;
  bool holds(const ParallelTrace& trace, std::size_t i) const override;
  std::string render() const override;

private:
  double eps_;
  Norm norm_;
};

/// Norm atom over two materialized traces (typically a trace and a shifted
/// copy of the other one). Indices past the reference trace are vacuously
/// true: there is no sample there to constrain. Indices past the shifted
/// copy or flagged as sentinel have no candidate, giving -inf / false.
class ShiftedGap final : public Predicate {
public:
  ShiftedGap(std::shared_ptr<const TimedStateSequence> reference,
             std::shared_ptr<const TimedStateSequence> candidate, long shift,
             double eps, Norm norm = Norm::euclidean);

  double signed_distance(const ParallelTrace& trace, std::size_t i) const override;
  bool holds(const ParallelTrace& trace, std::size_t i) const override;
  std::string render() const override;

private:
  std::shared_ptr<const TimedStateSequence> reference_;
  std::shared_ptr<const TimedStateSequence> candidate_;
  long shift_;
  double eps_;
  Norm norm_;
};

/// Escape hatch for predicates over arbitrary output sets: the caller
/// supplies the signed-distance function and the Boolean truth function.
class CustomPredicate final : public Predicate {
public:
  using DistanceFn = std::function<double(const ParallelTrace&, std::size_t)>;
  using TruthFn = std::function<bool(const ParallelTrace&, std::size_t)>;

  CustomPredicate(std::string name, DistanceFn distance, TruthFn truth);

  double signed_distance(const ParallelTrace& trace, std::size_t i) const override;
  bool holds(const ParallelTrace& trace, std::size_t i) const override;
  std::string render() const override { return name_; }

private:
  std::string name_;
  DistanceFn distance_;
  TruthFn truth_;
};

enum class FormulaKind {
  verum,
  atom,
  negation,
  conjunction,
  disjunction,
  implication,
  until,
  always,
  eventually
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable formula tree. Conjunction, implication, always and eventually
/// are first-class nodes; their valuations coincide with the desugared
/// forms over verum, negation, disjunction and until.
class Formula {
public:
  static FormulaPtr verum();
  static FormulaPtr atom(PredicatePtr predicate);
  static FormulaPtr negation(FormulaPtr f);
  static FormulaPtr conjunction(FormulaPtr a, FormulaPtr b);
  static FormulaPtr disjunction(FormulaPtr a, FormulaPtr b);
  static FormulaPtr implication(FormulaPtr a, FormulaPtr b);
  static FormulaPtr until(Interval iv, FormulaPtr a, FormulaPtr b);
  static FormulaPtr always(Interval iv, FormulaPtr f);
  static FormulaPtr eventually(Interval iv, FormulaPtr f);

  /// n-ary helpers folding right.
  static FormulaPtr conjunction(const std::vector<FormulaPtr>& fs);
  static FormulaPtr disjunction(const std::vector<FormulaPtr>& fs);

  FormulaKind kind() const { return kind_; }
  const Interval& interval() const { return interval_; }
  const PredicatePtr& predicate() const { return predicate_; }
  const FormulaPtr& left() const { return left_; }
  const FormulaPtr& right() const { return right_; }

  std::string render() const;

private:
  Formula(FormulaKind kind, Interval iv, PredicatePtr pred, FormulaPtr left,
          FormulaPtr right)
      : kind_(kind), interval_(iv), predicate_(std::move(pred)),
        left_(std::move(left)), right_(std::move(right)) {}

  FormulaKind kind_;
  Interval interval_;
  PredicatePtr predicate_;
  FormulaPtr left_;
  FormulaPtr right_;
};

/// Structural equality; atoms compare by rendered text.
bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);

struct ParseError : std::runtime_error {
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  std::size_t position;
};

/// Parses the textual grammar:
///   formula  := or ( '->' formula )?
///   or       := and ( '\/' and )*
///   and      := until ( '/\' until )*
///   until    := unary ( 'U' '_' interval until )?
///   unary    := '!' unary | '[]' '_' interval unary | '<>' '_' interval unary
///             | '(' formula ')' | 'true' | atom
///   interval := ('['|'(') number ',' (number|'inf') (']'|')')
///   atom     := channel op number | number op channel | 'lM' ('=='|'!=') 'lI'
///   channel  := 'y' digits? | 'z' digits?   (y = first trace, z = second)
///             | 'err'                        (norm of the pointwise difference,
///                                             upper bounds only)
FormulaPtr parse_formula(const std::string& text);

} // namespace cpsconf
