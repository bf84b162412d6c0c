#include "doctest.h"
#include "nfk/formula.hpp"
#include "nfk/random.hpp"

using namespace nfk;
using F = Formula;

TEST_CASE("parse and render round trip") {
  for (const char* s : {"x0", "bot", "top", "~x0", "[]x0 -> x1", "x0 | x1 & x2", "(x0 -> x1) -> x2",
                        "forall x0. x0 == x1", "[](x0 == #c)", "~[]~x3"}) {
    F f = parse(s);
    CHECK(parse(render(f)) == f);
  }
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("x0 -> x1 -> x2") == F::imp(F::var(0), F::imp(F::var(1), F::var(2))));
  CHECK(parse("x0 | x1 & x2") == F::disj(F::var(0), F::conj(F::var(1), F::var(2))));
  CHECK(parse("~x0 & x1") == F::conj(F::neg(F::var(0)), F::var(1)));
  CHECK(parse("x0 == x1 -> x2") == F::imp(F::id(F::var(0), F::var(1)), F::var(2)));
  CHECK_THROWS_AS(parse("x0 == x1 == x2"), ParseError);
  CHECK_THROWS_AS(parse("x0 &"), ParseError);
  CHECK_THROWS_AS(parse("forall x0. x1"), ParseError);
}

TEST_CASE("quantifier requires a free bound variable") {
  CHECK_THROWS_AS(F::forall(0, F::var(1)), std::invalid_argument);
  CHECK_NOTHROW(F::forall(0, F::imp(F::var(0), F::var(1))));
}

TEST_CASE("free variables, depth and analysis") {
  F f = parse("forall x0. (x0 == x1) | []x2");
  CHECK(f.fvars() == std::vector<uint32_t>{1, 2});
  CHECK(f.depth() == 3);
  CHECK(f.max_var() == 2);
  Analysis a = analyze(parse("forall x0. forall x1. x0 -> x1 | #k"));
  CHECK(a.qrank == 2);
  CHECK(a.cons == std::set<std::string>{"k"});
  CHECK(a.fvars.empty());
}

TEST_CASE("fragments") {
  CHECK(fragment_of(parse("x0 -> x1 & ~x0")) == Fragment::Fm_p);
  CHECK(fragment_of(parse("[]x0 -> x0")) == Fragment::Fm_m);
  CHECK(fragment_of(parse("x0 == x1")) == Fragment::Full);
  CHECK(fragment_of(parse("forall x0. x0")) == Fragment::Full);
  CHECK(fragment_of(parse("[]#c")) == Fragment::Full);
  CHECK(in_fragment(parse("x0"), Fragment::Full));
  CHECK(in_fragment(parse("x0"), Fragment::Fm_m));
}

TEST_CASE("random formulas respect the generator bounds") {
  Rng rng(7);
  FormulaGen g;
  g.depth = 4;
  g.quantifiers = false;
  g.identity = false;
  for (int i = 0; i < 300; ++i) {
    F f = random_formula(rng, g);
    CHECK(f.depth() <= 4);
    CHECK(in_fragment(f, Fragment::Fm_m));
    for (uint32_t x : f.fvars()) CHECK(x < 2);
    CHECK(parse(render(f)) == f);
  }
}
