#include "doctest.h"
#include "nfk/model.hpp"
#include "nfk/random.hpp"
#include "nfk/substitution.hpp"
#include "oracles.hpp"

using namespace nfk;
using F = Formula;

TEST_CASE("substitution avoids capture") {
  F f = parse("forall x1. x0 == x1");
  F r = subst(f, 0, F::var(1));
  CHECK(r.fvars() == std::vector<uint32_t>{1});
  CHECK(alpha_eq(r, parse("forall x2. x1 == x2")));
  CHECK(!alpha_eq(r, parse("forall x1. x1 == x1")));
}

TEST_CASE("bound occurrences are untouched up to the forced renaming") {
  F f = parse("forall x0. x0 -> x1");
  // the binder becomes the least variable above the free symbols of the image
  CHECK(subst(f, 0, F::top()) == parse("forall x2. x2 -> x1"));
  CHECK(alpha_eq(subst(f, 0, F::top()), f));
  CHECK(subst(f, 1, F::bot()) == parse("forall x0. x0 -> bot"));
}

TEST_CASE("constants are substitution targets") {
  Substitution s = Substitution::single_const(intern_constant("c"), F::var(3));
  CHECK(apply(parse("#c -> #c | x0"), s) == parse("x3 -> x3 | x0"));
}

TEST_CASE("alpha equivalence") {
  CHECK(alpha_eq(parse("forall x0. x0 | x5"), parse("forall x7. x7 | x5")));
  CHECK(!alpha_eq(parse("forall x0. x0 | x5"), parse("forall x5. x5 | x5")));
}

TEST_CASE("substitution lemma against the reference evaluator") {
  // value(phi sigma, g) == value(phi, x -> value(sigma(x), g))
  ModalModel m = boolean_model(2, 0b1010, 0b1000, {0, 0, 0, 3});
  REQUIRE(validate_modal_model(m, 3).ok);
  Rng rng(11);
  FormulaGen g;
  g.depth = 3;
  g.num_vars = 3;
  for (int i = 0; i < 400; ++i) {
    F phi = random_formula(rng, g);
    Substitution s = random_substitution(rng, g);
    std::map<uint32_t, int> asg{{0, int(rng() % 4)}, {1, int(rng() % 4)}, {2, int(rng() % 4)}};
    std::map<uint32_t, int> shifted;
    for (uint32_t x = 0; x < 3; ++x) shifted[x] = oracle::eval(m, asg, s.lookup_var(x));
    CHECK(oracle::eval(m, asg, apply(phi, s)) == oracle::eval(m, shifted, phi));
  }
}

TEST_CASE("composition") {
  Substitution a = Substitution::single(0, parse("x1 -> x2"));
  Substitution b = Substitution::single(1, parse("[]x0"));
  F f = parse("x0 & x1");
  CHECK(apply(f, compose(a, b)) == apply(apply(f, a), b));
}
