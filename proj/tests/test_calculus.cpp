#include "doctest.h"
#include "nfk/calculus.hpp"
#include "nfk/proof_io.hpp"
#include "nfk/random.hpp"
#include "nfk/substitution.hpp"
#include "oracles.hpp"

using namespace nfk;
using F = Formula;

namespace {

Derivation one_line(int system, std::vector<F> hyps, F f, Justification j) {
  Derivation d;
  d.system = system;
  d.hypotheses = std::move(hyps);
  d.lines.push_back({std::move(f), std::move(j)});
  return d;
}

F SE(const F& a, const F& b) { return F::conj(F::box(F::imp(a, b)), F::box(F::imp(b, a))); }

}  // namespace

TEST_CASE("scheme recognition") {
  auto k = recognize_axiom(parse("[](x0 -> x1) -> []x0 -> []x1"), AxiomSet::Full, 3);
  REQUIRE(k);
  CHECK(k->scheme == SchemeId::AxK);
  auto t = recognize_axiom(parse("forall x0. []x0 -> x0"), AxiomSet::Full, 3);
  REQUIRE(t);
  CHECK(t->scheme == SchemeId::AxT);
  CHECK(t->foralls == std::vector<uint32_t>{0});
  auto taut = recognize_axiom(parse("x0 -> x0"), AxiomSet::Full, 3);
  REQUIRE(taut);
  CHECK(taut->scheme == SchemeId::AxTaut);
  CHECK(!recognize_axiom(parse("x0 -> x1"), AxiomSet::Full, 3));
  // Ax4 only from system 4 on.
  CHECK(!recognize_axiom(parse("[]x0 -> [][]x0"), AxiomSet::Full, 3));
  CHECK(recognize_axiom(parse("[]x0 -> [][]x0"), AxiomSet::Full, 4));
}

TEST_CASE("check_instance side conditions") {
  CHECK_THROWS_AS(check_instance(make_instance(SchemeId::AxAlpha, {{"phi", parse("forall x0. x0")},
                                                                   {"psi", parse("forall x1. x2 | x1")}}),
                                 AxiomSet::Full, 3),
                  CalculusError);
  CHECK(check_instance(make_instance(SchemeId::AxAlpha, {{"phi", parse("forall x0. x0")}, {"psi", parse("forall x1. x1")}}),
                       AxiomSet::Full, 3) == parse("(forall x0. x0) == (forall x1. x1)"));
  CHECK_THROWS_AS(check_instance(make_instance(SchemeId::Ax5, {{"phi", F::var(0)}}), AxiomSet::Full, 4), CalculusError);
  CHECK_THROWS_AS(check_instance(make_instance(SchemeId::AxTaut, {{"phi", parse("x0 -> x1")}}), AxiomSet::Full, 3),
                  CalculusError);
}

TEST_CASE("every scheme round-trips through recognition") {
  Rng rng(3);
  FormulaGen g;
  g.depth = 2;
  for (int system : {3, 4, 5})
    for (SchemeId s : all_schemes()) {
      if (!scheme_allowed(s, AxiomSet::Full, system)) continue;
      for (int i = 0; i < 20; ++i) {
        auto inst = random_instance(rng, s, AxiomSet::Full, system, g, 5);
        if (!inst) continue;
        F f = check_instance(*inst, AxiomSet::Full, system);
        auto r = recognize_axiom(f, AxiomSet::Full, system);
        REQUIRE_MESSAGE(r, scheme_name(s) << ": " << render(f));
        CHECK(check_instance(*r, AxiomSet::Full, system) == f);
      }
    }
}

TEST_CASE("tautology instances agree with a truth-table oracle") {
  Rng rng(5);
  FormulaGen g;
  g.depth = 2;
  g.quantifiers = false;
  const char* templates[] = {"x0 -> x0", "x0 | ~x0", "x0 -> x1 -> x0", "(x0 & x1) -> x1", "~~x0 -> x0",
                             "(x0 -> x1) -> (~x1 -> ~x0)", "x0 & x1 -> x1 & x0"};
  int pos = 0, neg = 0;
  for (int i = 0; i < 2000 && (pos < 50 || neg < 50); ++i) {
    F t = parse(templates[i % 7]);
    Substitution s;
    s.bind_var(0, random_formula(rng, g));
    s.bind_var(1, random_formula(rng, g));
    F f = i % 2 ? apply(t, s) : random_formula(rng, FormulaGen{3, 2, 0, true, true, false});
    bool expected = oracle::tautology(f);
    if (expected ? pos >= 50 : neg >= 50) continue;
    (expected ? pos : neg)++;
    CHECK_MESSAGE(taut_instance(f) == expected, render(f));
  }
  CHECK(pos == 50);
  CHECK(neg == 50);
}

TEST_CASE("derivation checker") {
  F tt = parse("top -> top");
  CHECK(check_derivation(one_line(3, {}, tt, Justification::axiom(make_instance(SchemeId::AxTaut, {{"phi", tt}})))).ok);
  CHECK(check_derivation(one_line(3, {}, F::box(tt), Justification::an(make_instance(SchemeId::AxTaut, {{"phi", tt}})))).ok);
  Derivation bad;
  bad.hypotheses = {F::var(0)};
  bad.lines.push_back({F::var(0), Justification::hypothesis(0)});
  bad.lines.push_back({F::var(1), Justification::mp(0, 0)});
  CheckReport r = check_derivation(bad);
  CHECK(!r.ok);
  CHECK(r.first_failure == 1);
  CHECK(!check_derivation(one_line(3, {}, F::var(0), Justification::hypothesis(0))).ok);
  // AN must box the reconstructed axiom.
  CHECK(!check_derivation(one_line(3, {}, tt, Justification::an(make_instance(SchemeId::AxTaut, {{"phi", tt}})))).ok);
}

TEST_CASE("deduction") {
  F phi = F::var(0);
  Derivation d = one_line(3, {phi}, phi, Justification::hypothesis(0));
  Derivation r = deduction(d, phi);
  CHECK(check_derivation(r).ok);
  CHECK(r.conclusion() == F::imp(phi, phi));
  CHECK(r.hypotheses.empty());

  F tt = parse("top -> top");
  Derivation an = one_line(3, {phi}, F::box(tt), Justification::an(make_instance(SchemeId::AxTaut, {{"phi", tt}})));
  Derivation r2 = deduction(an, phi);
  CHECK(check_derivation(r2).ok);
  CHECK(r2.conclusion() == F::imp(phi, F::box(tt)));
}

TEST_CASE("generalization") {
  F ax = parse("[]x0 -> x0");
  Derivation d = one_line(3, {}, ax, Justification::axiom(make_instance(SchemeId::AxT, {{"phi", F::var(0)}})));
  Derivation r = generalize(d, 0);
  CHECK(check_derivation(r).ok);
  CHECK(r.conclusion() == F::forall(0, ax));

  Derivation an = one_line(3, {}, F::box(ax), Justification::an(make_instance(SchemeId::AxT, {{"phi", F::var(0)}})));
  Derivation r2 = generalize(an, 0);
  CHECK(check_derivation(r2).ok);
  CHECK(r2.conclusion() == F::forall(0, F::box(ax)));

  Derivation h = one_line(3, {F::var(0)}, F::var(0), Justification::hypothesis(0));
  CHECK_THROWS(generalize(h, 0));
}

TEST_CASE("necessitation") {
  F tt = parse("top -> top");
  Derivation d = one_line(4, {}, tt, Justification::axiom(make_instance(SchemeId::AxTaut, {{"phi", tt}})));
  Derivation r = necessitate(d);
  CHECK(check_derivation(r).ok);
  CHECK(r.conclusion() == F::box(tt));

  Derivation an = one_line(4, {}, F::box(tt), Justification::an(make_instance(SchemeId::AxTaut, {{"phi", tt}})));
  Derivation r2 = necessitate(an);
  CHECK(check_derivation(r2).ok);
  CHECK(r2.conclusion() == F::box(F::box(tt)));
  bool uses4 = false;
  for (SchemeId s : schemes_used(r2)) uses4 = uses4 || s == SchemeId::Ax4;
  CHECK(uses4);

  d.system = 3;
  CHECK_THROWS_AS(necessitate(d), CalculusError);
}

TEST_CASE("constant elimination") {
  F cc = parse("#c == #c");
  Derivation d = one_line(3, {}, cc, Justification::axiom(make_instance(SchemeId::AxAlpha, {{"phi", parse("#c")}, {"psi", parse("#c")}})));
  Derivation r = eliminate_constant(d, intern_constant("c"), 9);
  CHECK(check_derivation(r).ok);
  CHECK(r.conclusion() == parse("x9 == x9"));
  CHECK_THROWS(eliminate_constant(one_line(3, {}, parse("x9 -> x9"),
                                           Justification::axiom(make_instance(SchemeId::AxTaut, {{"phi", parse("x9 -> x9")}}))),
                                  intern_constant("c"), 9));
}

TEST_CASE("generalization on a fresh constant") {
  // phi = []x0 -> x0, derived for #d in place of x0.
  F inst = parse("[]#d -> #d");
  Derivation d = one_line(3, {}, inst, Justification::axiom(make_instance(SchemeId::AxT, {{"phi", parse("#d")}})));
  Derivation r = generalize_constant(d, intern_constant("d"), parse("[]x0 -> x0"), 0);
  CHECK(check_derivation(r).ok);
  CHECK(r.conclusion() == parse("forall x0. []x0 -> x0"));
}

TEST_CASE("rigidity derivations") {
  Derivation d = generate_rigidity(F::var(0), F::var(1));
  CHECK(check_derivation(d).ok);
  CHECK(d.conclusion() == parse("x0 == x1 -> [](x0 == x1)"));
  Derivation t = generate_rigidity(F::top(), F::top());
  CHECK(check_derivation(t).ok);
}

TEST_CASE("strict identity congruences") {
  F a = F::var(0), c = F::var(1), a2 = F::var(2), c2 = F::var(3);
  auto ds = generate_strict_identity_library(a, c, a2, c2);
  REQUIRE(ds.size() == 6);
  F E = SE(a, c), E2 = F::conj(SE(a, c), SE(a2, c2));
  std::vector<F> expected{
      F::imp(E, SE(F::neg(a), F::neg(c))),
      F::imp(E2, SE(F::imp(a, a2), F::imp(c, c2))),
      F::imp(E2, SE(F::conj(a, a2), F::conj(c, c2))),
      F::imp(E2, SE(F::disj(a, a2), F::disj(c, c2))),
      F::imp(E2, SE(SE(a, a2), SE(c, c2))),
      F::imp(E, SE(F::box(a), F::box(c))),
  };
  for (size_t i = 0; i < 6; ++i) {
    CHECK(check_derivation(ds[i]).ok);
    CHECK_MESSAGE(ds[i].conclusion() == expected[i], render(ds[i].conclusion()));
    CHECK(ds[i].system == 3);
    for (SchemeId s : schemes_used(ds[i]))
      CHECK((s == SchemeId::AxTaut || s == SchemeId::AxT || s == SchemeId::AxK || s == SchemeId::AxK4strict));
  }
}

TEST_CASE("derivation files round trip") {
  Rng rng(9);
  DerivationGen g;
  g.hypotheses = 1;
  for (int i = 0; i < 30; ++i) {
    Derivation d = random_derivation(rng, g);
    REQUIRE(check_derivation(d).ok);
    nlohmann::json j = to_json(d);
    Derivation e = derivation_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(e) == j);
    CHECK(check_derivation(e).ok);
  }
  CHECK_THROWS_AS(derivation_from_json(nlohmann::json::parse(R"({"system":3,"lines":[{"formula":"x0"}]})")),
                  CalculusError);
  CHECK_THROWS_AS(derivation_from_json(nlohmann::json::parse(R"({"system":3,"lines":[{"formula":"x0 &","just":{"hyp":0}}]})")),
                  CalculusError);
}
