#include "cpsconf/mtl.hpp"

#include "cpsconf/robustness.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace cpsconf {

bool Interval::valid() const {
  if (std::isnan(lo) || std::isnan(hi)) return false;
  if (lo < 0.0 || hi < lo) return false;
  if (lo == hi && (lo_open || hi_open)) return false; // empty
  if (std::isinf(hi) && !hi_open) return false;
  return true;
}

std::string Interval::render() const {
  std::string s;
  s += lo_open ? '(' : '[';
  s += format_double(lo);
  s += ',';
  s += std::isinf(hi) ? "inf" : format_double(hi);
  s += hi_open ? ')' : ']';
  return s;
}

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

ChannelBound::ChannelBound(TraceSide side, std::size_t channel, bool upper, bool strict,
                           double threshold)
    : side_(side), channel_(channel), upper_(upper), strict_(strict),
      threshold_(threshold) {}

double ChannelBound::value_at(const ParallelTrace& trace, std::size_t i) const {
  // Grid indices belong to the model trace; the other trace is read at the
  // same instant (holding the last sample when grids differ).
  const TimedStateSequence& tss = side_ == TraceSide::model ? trace.model() : trace.impl();
  const std::size_t k =
      side_ == TraceSide::model ? i : tss.index_at(trace.grid()[i].t);
  if (channel_ >= tss.dim())
    throw std::runtime_error("atom '" + render() + "' references channel " +
                             std::to_string(channel_ + 1) + " of a " +
                             std::to_string(tss.dim()) + "-channel trace");
  return tss.sample(k)[channel_];
}

double ChannelBound::signed_distance(const ParallelTrace& trace, std::size_t i) const {
  const double v = value_at(trace, i);
  return upper_ ? threshold_ - v : v - threshold_;
}

bool ChannelBound::holds(const ParallelTrace& trace, std::size_t i) const {
  const double v = value_at(trace, i);
  if (upper_) return strict_ ? v < threshold_ : v <= threshold_;
  return strict_ ? v > threshold_ : v >= threshold_;
}

std::string ChannelBound::render() const {
  std::string name = side_ == TraceSide::model ? "y" : "z";
  name += std::to_string(channel_ + 1);
  const char* op = upper_ ? (strict_ ? " < " : " <= ") : (strict_ ? " > " : " >= ");
  return name + op + format_double(threshold_);
}

double ModeMatch::signed_distance(const ParallelTrace& trace, std::size_t i) const {
  return holds(trace, i) ? kPlusInf : kMinusInf;
}

bool ModeMatch::holds(const ParallelTrace& trace, std::size_t i) const {
  if (!trace.model().has_modes() || !trace.impl().has_modes())
    throw std::runtime_error("mode atom requires mode columns on both traces");
  // Compare the mode trajectories at the grid instant: the label of the
  // last sample at or before it on each trace (post-jump at jump times).
  const double t = trace.grid()[i].t;
  const bool eq =
      trace.model().mode(trace.model().index_at(t)) ==
      trace.impl().mode(trace.impl().index_at(t));
  return want_equal_ ? eq : !eq;
}

std::string ModeMatch::render() const {
  return want_equal_ ? "lM == lI" : "lM != lI";
}

double OutputGap::signed_distance(const ParallelTrace& trace, std::size_t i) const {
  const double t = trace.grid()[i].t;
  const double d = sample_distance(trace.model(), i, trace.impl(),
                                   trace.impl().index_at(t), norm_);
  return eps_ - d;
}

bool OutputGap::holds(const ParallelTrace& trace, std::size_t i) const {
  return signed_distance(trace, i) > 0.0;
}

std::string OutputGap::render() const { return "err < " + format_double(eps_); }

ShiftedGap::ShiftedGap(std::shared_ptr<const TimedStateSequence> reference,
                       std::shared_ptr<const TimedStateSequence> candidate, long shift,
                       double eps, Norm norm)
    : reference_(std::move(reference)), candidate_(std::move(candidate)), shift_(shift),
      eps_(eps), norm_(norm) {
  if (!reference_ || !candidate_)
    throw std::invalid_argument("shifted atom requires both traces");
}

double ShiftedGap::signed_distance(const ParallelTrace&, std::size_t i) const {
  if (i >= reference_->size()) return kPlusInf; // no sample to constrain here
  if (i >= candidate_->size()) return kMinusInf;
  const double d = sample_distance(*reference_, i, *candidate_, i, norm_);
  if (std::isinf(d)) return kMinusInf;
  return eps_ - d;
}

bool ShiftedGap::holds(const ParallelTrace&, std::size_t i) const {
  if (i >= reference_->size()) return true;
  if (i >= candidate_->size()) return false;
  const double d = sample_distance(*reference_, i, *candidate_, i, norm_);
  return d < eps_;
}

std::string ShiftedGap::render() const {
  return "gap(S" + std::to_string(shift_) + ") < " + format_double(eps_);
}

CustomPredicate::CustomPredicate(std::string name, DistanceFn distance, TruthFn truth)
    : name_(std::move(name)), distance_(std::move(distance)), truth_(std::move(truth)) {
  if (!distance_ || !truth_)
    throw std::invalid_argument("custom predicate needs distance and truth functions");
}

double CustomPredicate::signed_distance(const ParallelTrace& trace, std::size_t i) const {
  return distance_(trace, i);
}

bool CustomPredicate::holds(const ParallelTrace& trace, std::size_t i) const {
  return truth_(trace, i);
}

// ---------------------------------------------------------------------------
// Formula construction
// ---------------------------------------------------------------------------

FormulaPtr Formula::verum() {
  return FormulaPtr(new Formula(FormulaKind::verum, {}, nullptr, nullptr, nullptr));
}

FormulaPtr Formula::atom(PredicatePtr predicate) {
  if (!predicate) throw std::invalid_argument("atom requires a predicate");
  return FormulaPtr(
      new Formula(FormulaKind::atom, {}, std::move(predicate), nullptr, nullptr));
}

FormulaPtr Formula::negation(FormulaPtr f) {
  if (!f) throw std::invalid_argument("negation requires an operand");
  return FormulaPtr(
      new Formula(FormulaKind::negation, {}, nullptr, std::move(f), nullptr));
}

FormulaPtr Formula::conjunction(FormulaPtr a, FormulaPtr b) {
  if (!a || !b) throw std::invalid_argument("conjunction requires two operands");
  return FormulaPtr(
      new Formula(FormulaKind::conjunction, {}, nullptr, std::move(a), std::move(b)));
}

FormulaPtr Formula::disjunction(FormulaPtr a, FormulaPtr b) {
  if (!a || !b) throw std::invalid_argument("disjunction requires two operands");
  return FormulaPtr(
      new Formula(FormulaKind::disjunction, {}, nullptr, std::move(a), std::move(b)));
}

FormulaPtr Formula::implication(FormulaPtr a, FormulaPtr b) {
  if (!a || !b) throw std::invalid_argument("implication requires two operands");
  return FormulaPtr(
      new Formula(FormulaKind::implication, {}, nullptr, std::move(a), std::move(b)));
}

FormulaPtr Formula::until(Interval iv, FormulaPtr a, FormulaPtr b) {
  if (!iv.valid()) throw std::invalid_argument("malformed interval " + iv.render());
  if (!a || !b) throw std::invalid_argument("until requires two operands");
  return FormulaPtr(
      new Formula(FormulaKind::until, iv, nullptr, std::move(a), std::move(b)));
}

FormulaPtr Formula::always(Interval iv, FormulaPtr f) {
  if (!iv.valid()) throw std::invalid_argument("malformed interval " + iv.render());
  if (!f) throw std::invalid_argument("always requires an operand");
  return FormulaPtr(new Formula(FormulaKind::always, iv, nullptr, std::move(f), nullptr));
}

FormulaPtr Formula::eventually(Interval iv, FormulaPtr f) {
  if (!iv.valid()) throw std::invalid_argument("malformed interval " + iv.render());
  if (!f) throw std::invalid_argument("eventually requires an operand");
  return FormulaPtr(
      new Formula(FormulaKind::eventually, iv, nullptr, std::move(f), nullptr));
}

FormulaPtr Formula::conjunction(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) return verum();
  FormulaPtr acc = fs.back();
  for (std::size_t i = fs.size() - 1; i-- > 0;) acc = conjunction(fs[i], acc);
  return acc;
}

FormulaPtr Formula::disjunction(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) throw std::invalid_argument("empty disjunction");
  FormulaPtr acc = fs.back();
  for (std::size_t i = fs.size() - 1; i-- > 0;) acc = disjunction(fs[i], acc);
  return acc;
}

namespace {
bool needs_parens(const FormulaPtr& f) {
  switch (f->kind()) {
  case FormulaKind::verum:
  case FormulaKind::atom:
    return f->kind() == FormulaKind::atom; // atoms contain spaces and operators
  default:
    return true;
  }
}

std::string render_child(const FormulaPtr& f) {
  return needs_parens(f) ? "(" + f->render() + ")" : f->render();
}
} // namespace

std::string Formula::render() const {
  switch (kind_) {
  case FormulaKind::verum:
    return "true";
  case FormulaKind::atom:
    return predicate_->render();
  case FormulaKind::negation:
    return "!" + render_child(left_);
  case FormulaKind::conjunction:
    return render_child(left_) + " /\\ " + render_child(right_);
  case FormulaKind::disjunction:
    return render_child(left_) + " \\/ " + render_child(right_);
  case FormulaKind::implication:
    return render_child(left_) + " -> " + render_child(right_);
  case FormulaKind::until:
    return render_child(left_) + " U_" + interval_.render() + " " + render_child(right_);
  case FormulaKind::always:
    return "[]_" + interval_.render() + " " + render_child(left_);
  case FormulaKind::eventually:
    return "<>_" + interval_.render() + " " + render_child(left_);
  }
  return "?";
}

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
  case FormulaKind::verum:
    return true;
  case FormulaKind::atom:
    return a->predicate()->render() == b->predicate()->render();
  case FormulaKind::negation:
  case FormulaKind::always:
  case FormulaKind::eventually:
    return a->interval() == b->interval() && structurally_equal(a->left(), b->left());
  default:
    return a->interval() == b->interval() && structurally_equal(a->left(), b->left()) &&
           structurally_equal(a->right(), b->right());
  }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum Kind {
    lparen, rparen, lbracket, rbracket, comma, underscore,
    bang, and_op, or_op, arrow, box, diamond, until_kw,
    lt, le, gt, ge, eq, ne,
    number, ident, true_kw, inf_kw, end
  };
  Kind kind;
  std::string text;
  double num = 0.0;
  std::size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }
  Token next() {
    Token t = current_;
    advance();
    return t;
  }

private:
  void advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    current_.pos = pos_;
    if (pos_ >= text_.size()) {
      current_.kind = Token::end;
      current_.text.clear();
      return;
    }
    const char c = text_[pos_];
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < text_.size() && text_[pos_ + 1] == b;
    };
    if (two('[', ']')) return take(Token::box, 2);
    if (two('<', '>')) return take(Token::diamond, 2);
    if (two('/', '\\')) return take(Token::and_op, 2);
    if (two('\\', '/')) return take(Token::or_op, 2);
    if (two('-', '>')) return take(Token::arrow, 2);
    if (two('<', '=')) return take(Token::le, 2);
    if (two('>', '=')) return take(Token::ge, 2);
    if (two('=', '=')) return take(Token::eq, 2);
    if (two('!', '=')) return take(Token::ne, 2);
    switch (c) {
    case '(': return take(Token::lparen, 1);
    case ')': return take(Token::rparen, 1);
    case '[': return take(Token::lbracket, 1);
    case ']': return take(Token::rbracket, 1);
    case ',': return take(Token::comma, 1);
    case '_': return take(Token::underscore, 1);
    case '!': return take(Token::bang, 1);
    case '<': return take(Token::lt, 1);
    case '>': return take(Token::gt, 1);
    default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+') {
      double v = 0.0;
      auto res = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (res.ec != std::errc{})
        throw ParseError("malformed number", pos_);
      current_.kind = Token::number;
      current_.num = v;
      current_.text.assign(text_.data() + pos_, res.ptr);
      pos_ = static_cast<std::size_t>(res.ptr - text_.data());
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '\''))
        ++end;
      current_.text = text_.substr(pos_, end - pos_);
      if (current_.text == "true") current_.kind = Token::true_kw;
      else if (current_.text == "inf") current_.kind = Token::inf_kw;
      else if (current_.text == "U") current_.kind = Token::until_kw;
      else current_.kind = Token::ident;
      pos_ = end;
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  void take(Token::Kind k, std::size_t len) {
    current_.kind = k;
    current_.text = text_.substr(pos_, len);
    pos_ += len;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  Token current_;
};

class Parser {
public:
  explicit Parser(const std::string& text) : lexer_(text) {}

  FormulaPtr parse() {
    FormulaPtr f = parse_implies();
    const Token& t = lexer_.peek();
    if (t.kind != Token::end)
      throw ParseError("unexpected trailing input '" + t.text + "'", t.pos);
    return f;
  }

private:
  FormulaPtr parse_implies() {
    FormulaPtr lhs = parse_or();
    if (lexer_.peek().kind == Token::arrow) {
      lexer_.next();
      return Formula::implication(lhs, parse_implies());
    }
    return lhs;
  }

  FormulaPtr parse_or() {
    FormulaPtr lhs = parse_and();
    while (lexer_.peek().kind == Token::or_op) {
      lexer_.next();
      lhs = Formula::disjunction(lhs, parse_and());
    }
    return lhs;
  }

  FormulaPtr parse_and() {
    FormulaPtr lhs = parse_until();
    while (lexer_.peek().kind == Token::and_op) {
      lexer_.next();
      lhs = Formula::conjunction(lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_until() {
    FormulaPtr lhs = parse_unary();
    if (lexer_.peek().kind == Token::until_kw) {
      lexer_.next();
      Interval iv = parse_interval_suffix();
      return Formula::until(iv, lhs, parse_until());
    }
    return lhs;
  }

  FormulaPtr parse_unary() {
    const Token t = lexer_.peek();
    switch (t.kind) {
    case Token::bang:
      lexer_.next();
      return Formula::negation(parse_unary());
    case Token::box: {
      lexer_.next();
      Interval iv = parse_interval_suffix();
      return Formula::always(iv, parse_unary());
    }
    case Token::diamond: {
      lexer_.next();
      Interval iv = parse_interval_suffix();
      return Formula::eventually(iv, parse_unary());
    }
    case Token::lparen: {
      lexer_.next();
      FormulaPtr f = parse_implies();
      const Token& close = lexer_.peek();
      if (close.kind != Token::rparen)
        throw ParseError("unmatched parenthesis: expected ')'", close.pos);
      lexer_.next();
      return f;
    }
    case Token::true_kw:
      lexer_.next();
      return Formula::verum();
    default:
      return parse_atom();
    }
  }

  Interval parse_interval_suffix() {
    const Token& us = lexer_.peek();
    if (us.kind != Token::underscore)
      throw ParseError("expected '_' before interval", us.pos);
    lexer_.next();
    const Token open = lexer_.next();
    Interval iv;
    if (open.kind == Token::lbracket) iv.lo_open = false;
    else if (open.kind == Token::lparen) iv.lo_open = true;
    else throw ParseError("expected '[' or '(' to open interval", open.pos);
    iv.lo = parse_bound(false);
    const Token comma = lexer_.next();
    if (comma.kind != Token::comma)
      throw ParseError("expected ',' inside interval", comma.pos);
    iv.hi = parse_bound(true);
    const Token close = lexer_.next();
    if (close.kind == Token::rbracket) iv.hi_open = false;
    else if (close.kind == Token::rparen) iv.hi_open = true;
    else throw ParseError("expected ']' or ')' to close interval", close.pos);
    if (!iv.valid())
      throw ParseError("malformed interval " + iv.render(), open.pos);
    return iv;
  }

  double parse_bound(bool allow_inf) {
    const Token t = lexer_.next();
    if (t.kind == Token::number) return t.num;
    if (t.kind == Token::inf_kw && allow_inf) return kPlusInf;
    throw ParseError("expected interval bound", t.pos);
  }

  struct ChannelRef {
    TraceSide side;
    std::size_t channel;
  };

  // Accepted atom names: y / y<k> (first trace channel k), z / z<k>
  // (second trace), err (pointwise difference norm), lM / lI (mode labels).
  FormulaPtr parse_atom() {
    const Token t = lexer_.peek();
    if (t.kind == Token::ident) {
      lexer_.next();
      if (t.text == "lM" || t.text == "lI") return parse_mode_atom(t);
      if (t.text == "err") return parse_gap_atom(t);
      ChannelRef ref = parse_channel_name(t);
      return parse_channel_atom(ref, t);
    }
    if (t.kind == Token::number) {
      // constant-first comparison: `0.3 > y1`
      lexer_.next();
      const Token op = lexer_.next();
      const Token name = lexer_.next();
      if (name.kind != Token::ident)
        throw ParseError("expected channel name after comparison", name.pos);
      ChannelRef ref = parse_channel_name(name);
      bool upper, strict;
      flip_comparison(op, upper, strict);
      return Formula::atom(std::make_shared<ChannelBound>(ref.side, ref.channel, upper,
                                                          strict, t.num));
    }
    throw ParseError("expected formula", t.pos);
  }

  ChannelRef parse_channel_name(const Token& t) {
    const std::string& s = t.text;
    TraceSide side;
    if (s[0] == 'y') side = TraceSide::model;
    else if (s[0] == 'z') side = TraceSide::impl;
    else throw ParseError("unknown predicate name '" + s + "'", t.pos);
    std::size_t channel = 0;
    if (s.size() > 1) {
      for (std::size_t i = 1; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
          throw ParseError("unknown predicate name '" + s + "'", t.pos);
        channel = channel * 10 + static_cast<std::size_t>(s[i] - '0');
      }
      if (channel == 0) throw ParseError("channel numbers start at 1", t.pos);
      --channel;
    }
    return {side, channel};
  }

  FormulaPtr parse_mode_atom(const Token& first) {
    const Token op = lexer_.next();
    bool want_equal;
    if (op.kind == Token::eq) want_equal = true;
    else if (op.kind == Token::ne) want_equal = false;
    else throw ParseError("mode atoms support only '==' and '!='", op.pos);
    const Token second = lexer_.next();
    if (second.kind != Token::ident || second.text == first.text ||
        (second.text != "lM" && second.text != "lI"))
      throw ParseError("mode atom must compare lM with lI", second.pos);
    return Formula::atom(std::make_shared<ModeMatch>(want_equal));
  }

  FormulaPtr parse_gap_atom(const Token& name) {
    const Token op = lexer_.next();
    if (op.kind != Token::lt && op.kind != Token::le)
      throw ParseError("'err' supports only upper bounds (< or <=)", op.pos);
    const Token bound = lexer_.next();
    if (bound.kind != Token::number)
      throw ParseError("expected numeric bound after 'err'", bound.pos);
    (void)name;
    return Formula::atom(std::make_shared<OutputGap>(bound.num));
  }

  FormulaPtr parse_channel_atom(ChannelRef ref, const Token& name) {
    const Token op = lexer_.next();
    bool upper, strict;
    switch (op.kind) {
    case Token::lt: upper = true; strict = true; break;
    case Token::le: upper = true; strict = false; break;
    case Token::gt: upper = false; strict = true; break;
    case Token::ge: upper = false; strict = false; break;
    default:
      throw ParseError("expected comparison after '" + name.text + "'", op.pos);
    }
    const Token bound = lexer_.next();
    if (bound.kind != Token::number)
      throw ParseError("expected numeric threshold", bound.pos);
    return Formula::atom(
        std::make_shared<ChannelBound>(ref.side, ref.channel, upper, strict, bound.num));
  }

  // `c > y` means `y < c`.
  static void flip_comparison(const Token& op, bool& upper, bool& strict) {
    switch (op.kind) {
    case Token::lt: upper = false; strict = true; break;
    case Token::le: upper = false; strict = false; break;
    case Token::gt: upper = true; strict = true; break;
    case Token::ge: upper = true; strict = false; break;
    default: throw ParseError("expected comparison operator", op.pos);
    }
  }

  Lexer lexer_;
};

} // namespace

FormulaPtr parse_formula(const std::string& text) { return Parser(text).parse(); }

} // namespace cpsconf
