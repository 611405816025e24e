#include "cpsconf/mtl.hpp"

#include <doctest.h>

using namespace cpsconf;

TEST_CASE("parser maps the grammar onto the expected tree") {
  auto f = parse_formula("[]_[0,5] (err < 0.3)");
  REQUIRE(f->kind() == FormulaKind::always);
  CHECK(f->interval() == Interval::closed(0.0, 5.0));
  REQUIRE(f->left()->kind() == FormulaKind::atom);
  CHECK(f->left()->predicate()->render() == "err < 0.3");
}

TEST_CASE("parser handles the mode-reconvergence shape") {
  auto f = parse_formula("[]_[0,9.5] ((lM != lI) -> <>_[0,0.5] (lM == lI))");
  REQUIRE(f->kind() == FormulaKind::always);
  CHECK(f->interval().hi == doctest::Approx(9.5));
  const auto& body = f->left();
  REQUIRE(body->kind() == FormulaKind::implication);
  CHECK(body->left()->predicate()->render() == "lM != lI");
  REQUIRE(body->right()->kind() == FormulaKind::eventually);
  CHECK(body->right()->interval() == Interval::closed(0.0, 0.5));
}

TEST_CASE("parser reports unmatched parentheses") {
  CHECK_THROWS_AS(parse_formula("(y U_[0,inf) z"), ParseError);
  try {
    parse_formula("(y < 1 U_[0,inf) z < 2");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("parenthesis") != std::string::npos);
  }
}

TEST_CASE("parser rejects malformed input") {
  CHECK_THROWS_AS(parse_formula(""), ParseError);
  CHECK_THROWS_AS(parse_formula("q < 1"), ParseError);      // unknown predicate name
  CHECK_THROWS_AS(parse_formula("y < "), ParseError);
  CHECK_THROWS_AS(parse_formula("[]_[5,0] y < 1"), ParseError); // empty interval
  CHECK_THROWS_AS(parse_formula("[]_[0,inf] y < 1"), ParseError); // closed at inf
  CHECK_THROWS_AS(parse_formula("lM == lM"), ParseError);
  CHECK_THROWS_AS(parse_formula("err > 1"), ParseError);
  CHECK_THROWS_AS(parse_formula("y < 1 y < 2"), ParseError); // trailing input
}

TEST_CASE("operator precedence and associativity") {
  // -> binds loosest and associates right; /\ binds tighter than \/
  auto f = parse_formula("y < 1 \\/ z > 0 /\\ err < 2 -> true");
  REQUIRE(f->kind() == FormulaKind::implication);
  REQUIRE(f->left()->kind() == FormulaKind::disjunction);
  CHECK(f->left()->right()->kind() == FormulaKind::conjunction);
  CHECK(f->right()->kind() == FormulaKind::verum);

  auto u = parse_formula("y < 1 U_[0,2] z < 1 U_(0,3] err < 1");
  REQUIRE(u->kind() == FormulaKind::until);
  CHECK(u->right()->kind() == FormulaKind::until);
  CHECK(u->right()->interval().lo_open);
}

TEST_CASE("channel names resolve sides and indices") {
  // conjunction chains fold left
  auto f = parse_formula("y2 <= 1.5 /\\ z >= -0.25 /\\ 3 > y");
  CHECK(f->left()->left()->predicate()->render() == "y2 <= 1.5");
  CHECK(f->left()->right()->predicate()->render() == "z1 >= -0.25");
  CHECK(f->right()->predicate()->render() == "y1 < 3");
}

TEST_CASE("render round trips to a structurally identical tree") {
  const char* samples[] = {
      "[]_[0,5] (err < 0.3)",
      "[]_[0,9.5] ((lM != lI) -> <>_[0,0.5] (lM == lI))",
      "!(y < 1) U_(0.5,inf) (z2 > 0.125 \\/ true)",
      "<>_[1,2] []_(0,4) (y1 >= 0 /\\ y2 <= 0 -> err < 1)",
  };
  for (const char* s : samples) {
    auto once = parse_formula(s);
    auto twice = parse_formula(once->render());
    CHECK(structurally_equal(once, twice));
  }
}
