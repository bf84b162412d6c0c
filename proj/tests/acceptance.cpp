// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 9 by construction).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nfk/calculus.hpp"
#include "nfk/formula.hpp"
#include "nfk/kripke.hpp"
#include "nfk/model.hpp"
#include "nfk/prealgebra.hpp"
#include "nfk/random.hpp"
#include "nfk/substitution.hpp"
#include "oracles.hpp"

using namespace nfk;
using F = Formula;

namespace {

struct Outcome {
  bool ok = true;
  std::vector<std::string> facts;  // printed after the verdict
  std::vector<std::string> errors;

  void fail(const std::string& s) {
    ok = false;
    if (errors.size() < 5) errors.push_back(s);
  }
  void note(const std::string& s) { facts.push_back(s); }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

F SE(const F& a, const F& b) { return F::conj(F::box(F::imp(a, b)), F::box(F::imp(b, a))); }

std::vector<ModalModel> enumerated(int n_max, int system) {
  std::vector<ModalModel> out;
  enumerate_models(n_max, system, {}, [&](const ModalModel& m, const ModelReport&) {
    out.push_back(m);
    return true;
  });
  return out;
}

// All assignments of the listed variables to elements of an n-element model.
void for_assignments(int n, const std::vector<uint32_t>& vars,
                     const std::function<void(const std::map<uint32_t, int>&)>& body) {
  std::map<uint32_t, int> g;
  std::function<void(size_t)> rec = [&](size_t i) {
    if (i == vars.size()) {
      body(g);
      return;
    }
    for (int a = 0; a < n; ++a) {
      g[vars[i]] = a;
      rec(i + 1);
    }
  };
  rec(0);
}

int64_t max_var_in(const Derivation& d) {
  int64_t mx = -1;
  for (const auto& h : d.hypotheses) mx = std::max(mx, h.max_var());
  for (const auto& ln : d.lines) {
    mx = std::max(mx, ln.formula.max_var());
    for (const auto& [role, w] : ln.just.inst.witnesses) mx = std::max(mx, w.max_var());
    for (uint32_t x : ln.just.inst.foralls) mx = std::max(mx, static_cast<int64_t>(x));
  }
  return mx;
}

// Literal replacement of a constant; capture free when y is fresh, so the
// result is alpha-congruent to the substitution instance.
F replace_const(const F& f, int c, uint32_t y) {
  switch (f.op()) {
    case Op::Var: return f;
    case Op::Const: return f.const_id() == c ? F::var(y) : f;
    case Op::Neg: return F::neg(replace_const(f.lhs(), c, y));
    case Op::Box: return F::box(replace_const(f.lhs(), c, y));
    case Op::Or: return F::disj(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::And: return F::conj(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::Imp: return F::imp(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::Id: return F::id(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::Forall: return F::forall(f.var_index(), replace_const(f.lhs(), c, y));
  }
  return f;
}

bool boolean_algebra_oracle(const BoolOps& o) {
  const int n = o.n;
  for (int a = 0; a < n; ++a) {
    if (o.Or(a, o.Neg(a)) != o.top || o.And(a, o.Neg(a)) != o.bot) return false;
    if (o.And(a, o.top) != a || o.Or(a, o.bot) != a) return false;
    for (int b = 0; b < n; ++b) {
      if (o.Or(a, b) != o.Or(b, a) || o.And(a, b) != o.And(b, a)) return false;
      if (o.Or(a, o.And(a, b)) != a || o.And(a, o.Or(a, b)) != a) return false;
      if (o.Imp(a, b) != o.Or(o.Neg(a), b)) return false;
      for (int c = 0; c < n; ++c) {
        if (o.Or(a, o.Or(b, c)) != o.Or(o.Or(a, b), c)) return false;
        if (o.And(a, o.And(b, c)) != o.And(o.And(a, b), c)) return false;
        if (o.And(a, o.Or(b, c)) != o.Or(o.And(a, b), o.And(a, c))) return false;
      }
    }
  }
  return true;
}

// ------------------------------------------------------------------ 1

Outcome criterion1() {
  Outcome out;
  Rng rng(101);
  FormulaGen full{2, 2};
  size_t checked = 0;
  for (int i = 0; i < 100; ++i) {
    F phi = random_formula(rng, full), psi = random_formula(rng, full);
    Derivation d = generate_rigidity(phi, psi);
    CheckReport r = check_derivation(d);
    if (!r.ok) out.fail("rigidity rejected: " + r.message);
    if (d.conclusion() != F::imp(F::id(phi, psi), F::box(F::id(phi, psi))))
      out.fail("rigidity conclusion " + render(d.conclusion()));
    ++checked;
  }
  FormulaGen modal{2, 2};
  modal.identity = false;
  modal.quantifiers = false;
  for (int i = 0; i < 100; ++i) {
    F a = random_formula(rng, modal), c = random_formula(rng, modal);
    F a2 = random_formula(rng, modal), c2 = random_formula(rng, modal);
    auto ds = generate_strict_identity_library(a, c, a2, c2);
    F E = SE(a, c), E2 = F::conj(SE(a, c), SE(a2, c2));
    std::vector<F> expected{
        F::imp(E, SE(F::neg(a), F::neg(c))),
        F::imp(E2, SE(F::imp(a, a2), F::imp(c, c2))),
        F::imp(E2, SE(F::conj(a, a2), F::conj(c, c2))),
        F::imp(E2, SE(F::disj(a, a2), F::disj(c, c2))),
        F::imp(E2, SE(SE(a, a2), SE(c, c2))),
        F::imp(E, SE(F::box(a), F::box(c))),
    };
    if (ds.size() != 6) {
      out.fail("library size");
      continue;
    }
    for (size_t k = 0; k < 6; ++k) {
      ++checked;
      if (ds[k].system != 3 || !check_derivation(ds[k]).ok) out.fail("congruence derivation rejected");
      if (ds[k].conclusion() != expected[k]) out.fail("congruence conclusion " + render(ds[k].conclusion()));
      for (SchemeId s : schemes_used(ds[k]))
        if (s != SchemeId::AxTaut && s != SchemeId::AxT && s != SchemeId::AxK && s != SchemeId::AxK4strict)
          out.fail("scheme outside (i)-(iv): " + scheme_name(s));
    }
  }
  out.note(fmt("%zu derivations checked (100 rigidity, 600 congruence)", checked));
  return out;
}

// ------------------------------------------------------------------ 2

Outcome criterion2() {
  Outcome out;
  Rng rng(202);
  const int N = 500;
  size_t counts[5] = {};

  DerivationGen gd;
  gd.hypotheses = 2;
  for (int i = 0; i < N; ++i) {
    Derivation d = random_derivation(rng, gd);
    if (!check_derivation(d).ok) {
      out.fail("generator produced an invalid derivation");
      continue;
    }
    F phi = d.hypotheses[0];
    Derivation r = deduction(d, phi);
    std::vector<F> rest;
    for (const auto& h : d.hypotheses)
      if (h != phi) rest.push_back(h);
    if (!check_derivation(r).ok) out.fail("deduction output invalid");
    else if (r.conclusion() != F::imp(phi, d.conclusion()) || r.hypotheses != rest)
      out.fail("deduction conclusion " + render(r.conclusion()));
    else ++counts[0];
  }

  DerivationGen gg;
  gg.hypotheses = 1;
  gg.hyp_avoid_var = 0;
  gg.conclusion_var = 0;
  for (int i = 0; i < N; ++i) {
    Derivation d = random_derivation(rng, gg);
    if (!d.conclusion().is_free(0)) {
      out.fail("generator ignored conclusion_var");
      continue;
    }
    Derivation r = generalize(d, 0);
    if (!check_derivation(r).ok) out.fail("generalize output invalid");
    else if (r.conclusion() != F::forall(0, d.conclusion()) || r.hypotheses != d.hypotheses)
      out.fail("generalize conclusion " + render(r.conclusion()));
    else ++counts[1];
  }

  for (int m : {4, 5}) {
    DerivationGen gn;
    gn.system = m;
    for (int i = 0; i < N; ++i) {
      Derivation d = random_derivation(rng, gn);
      Derivation r = necessitate(d);
      if (!check_derivation(r).ok) out.fail("necessitate output invalid");
      else if (r.conclusion() != F::box(d.conclusion())) out.fail("necessitate conclusion");
      else ++counts[2];
    }
  }
  DerivationGen g3;
  size_t rejected = 0;
  for (int i = 0; i < 50; ++i) {
    try {
      necessitate(random_derivation(rng, g3));
    } catch (const CalculusError&) {
      ++rejected;
    }
  }
  if (rejected != 50) out.fail(fmt("necessitate accepted %zu S3 derivations", 50 - rejected));

  const int c = intern_constant("acc_c");
  DerivationGen gc;
  gc.hypotheses = 1;
  gc.formulas.consts = {c};
  gc.conclusion_const = c;
  for (int i = 0; i < N; ++i) {
    Derivation d = random_derivation(rng, gc);
    if (!d.conclusion().has_const(c)) {
      out.fail("generator ignored conclusion_const");
      continue;
    }
    uint32_t y = static_cast<uint32_t>(max_var_in(d) + 1);
    Derivation r = eliminate_constant(d, c, y);
    const Substitution sub = Substitution::single_const(c, F::var(y));
    bool hyps_ok = r.hypotheses.size() == d.hypotheses.size();
    for (size_t h = 0; hyps_ok && h < d.hypotheses.size(); ++h)
      hyps_ok = r.hypotheses[h] == apply(d.hypotheses[h], sub) &&
                alpha_eq(r.hypotheses[h], replace_const(d.hypotheses[h], c, y));
    bool clean = true;
    for (const auto& ln : r.lines) clean = clean && !ln.formula.has_const(c);
    if (!check_derivation(r).ok) out.fail("eliminate_constant output invalid");
    else if (r.conclusion() != apply(d.conclusion(), sub) ||
             !alpha_eq(r.conclusion(), replace_const(d.conclusion(), c, y)) || !hyps_ok || !clean)
      out.fail("eliminate_constant conclusion " + render(r.conclusion()));
    else ++counts[3];
  }
  out.note(fmt("deduction %zu, generalize %zu, necessitate %zu (m=4,5), eliminate_constant %zu; S3 rejected %zu/50",
               counts[0], counts[1], counts[2], counts[3], rejected));
  if (counts[0] < 500 || counts[1] < 500 || counts[2] < 1000 || counts[3] < 500) out.fail("too few valid transforms");
  return out;
}

// ------------------------------------------------------------------ 3

Outcome criterion3() {
  Outcome out;
  auto ps = enumerate_prealgebras(4);
  size_t trips = 0;
  for (const PreAlgebra& p : ps) {
    const int n = p.n();
    auto fs = oracle::filters(p);
    Subset meet = full_set(n);
    for (Subset f : fs) meet &= f;
    Subset top_class = 0;
    for (int a = 0; a < n; ++a)
      if (p.eqv(a, p.ops.top)) top_class |= singleton(a);
    int smallest_count = 0, class_count = 0, order_count = 0;
    for (Subset f : fs) {
      bool i = f == meet, ii = f == top_class, iii = true;
      for (int a = 0; a < n && iii; ++a)
        for (int b = 0; b < n && iii; ++b) iii = p.le(a, b) == contains(f, p.ops.Imp(a, b));
      smallest_count += i;
      class_count += ii;
      order_count += iii;
      if (i != ii || ii != iii) out.fail("characterizations disagree on a filter");
    }
    if (smallest_count != 1 || class_count != 1 || order_count != 1) out.fail("no unique smallest filter");
    FilterReport fr = filters(p);
    if (!fr.characterizations_agree || fr.smallest != meet) out.fail("library smallest filter differs");
    std::set<Subset> lib(fr.all.begin(), fr.all.end()), orc(fs.begin(), fs.end());
    if (lib != orc) out.fail("library filters differ from the brute force");
    for (size_t u = 0; u < fr.ultra.size(); ++u) {
      SciModel s = sci_from_prealgebra(p, static_cast<int>(u));
      if (!validate_sci(s).ok) out.fail("constructed SCI model invalid");
      SciToPre back = prealgebra_from_sci(s);
      if (!(back.p == p)) out.fail("round trip changed the structure");
      ++trips;
    }
  }
  out.note(fmt("%zu prealgebras (n<=4), %zu round trips", ps.size(), trips));
  if (ps.empty()) out.fail("no prealgebras enumerated");
  return out;
}

// ------------------------------------------------------------------ 4

Outcome criterion4() {
  Outcome out;
  Rng rng(404);
  size_t instances = 0, evaluations = 0;
  for (int system : {3, 4, 5}) {
    std::vector<ModalModel> ms;
    for (const auto& m : enumerated(3, system))
      if (m.normal()) ms.push_back(m);
    if (ms.empty()) out.fail(fmt("no normal models for system %d", system));
    FormulaGen g{2, 2};
    for (int i = 0; i < 1000; ++i) {
      SchemeInstance inst = random_axiom(rng, AxiomSet::Full, system, g, 3);
      F f = check_instance(inst, AxiomSet::Full, system);
      if (f.depth() > 3) out.fail("instance deeper than 3: " + render(f));
      ++instances;
      for (const auto& m : ms)
        for_assignments(m.n(), f.fvars(), [&](const std::map<uint32_t, int>& asg) {
          int v = eval(m, Assignment(asg), f);
          ++evaluations;
          if (v != oracle::eval(m, asg, f)) out.fail("evaluator disagrees with the oracle on " + render(f));
          if (!contains(m.nec, v)) out.fail(scheme_name(inst.scheme) + " instance outside NEC: " + render(f));
        });
    }
  }

  std::vector<ModalModel> ms = enumerated(3, 3);
  FormulaGen g{3, 3};
  FormulaGen gs{2, 3};
  size_t subst_triples = 0, coin_triples = 0;
  for (int i = 0; i < 10000; ++i) {
    const ModalModel& m = ms[rng() % ms.size()];
    F phi = random_formula(rng, g);
    Substitution s = random_substitution(rng, gs);
    std::map<uint32_t, int> asg;
    for (uint32_t x = 0; x < 3; ++x) asg[x] = static_cast<int>(rng() % static_cast<uint64_t>(m.n()));
    std::map<uint32_t, int> shifted;
    for (uint32_t x = 0; x < 3; ++x) shifted[x] = oracle::eval(m, asg, s.lookup_var(x));
    if (eval(m, Assignment(asg), apply(phi, s)) != oracle::eval(m, shifted, phi))
      out.fail("substitution lemma fails: " + render(phi));
    ++subst_triples;

    std::map<uint32_t, int> other = asg;
    for (uint32_t x = 0; x < 6; ++x)
      if (!phi.is_free(x)) other[x] = static_cast<int>(rng() % static_cast<uint64_t>(m.n()));
    if (eval(m, Assignment(asg), phi) != eval(m, Assignment(other), phi))
      out.fail("coincidence lemma fails: " + render(phi));
    ++coin_triples;
  }
  out.note(fmt("%zu axiom instances, %zu evaluations; %zu substitution and %zu coincidence triples", instances,
               evaluations, subst_triples, coin_triples));
  return out;
}

// ------------------------------------------------------------------ 5

Outcome criterion5(const std::vector<ModalModel>& s3, const std::string& archive) {
  Outcome out;
  const F ca = parse("([]x0 & []x1) -> (x0 == x1)");
  const F bicond = parse("(x0 == x1) <-> ([](x0 -> x1) & [](x1 -> x0))");
  const F refine = parse("(x0 == x1) -> ([](x0 -> x1) & [](x1 -> x0))");
  const F closed = F::forall(0, F::forall(1, bicond));
  auto valid = [](const ModalModel& m, const F& f) {
    bool all = true;
    for_assignments(m.n(), {0, 1}, [&](const std::map<uint32_t, int>& g) {
      all = all && contains(m.truth, oracle::eval(m, g, f));
    });
    return all;
  };
  size_t normal = 0, disagree = 0, found = 0;
  const ModalModel* witness = nullptr;
  for (const auto& m : s3) {
    if (!m.normal()) continue;
    ++normal;
    const int n = m.n();
    bool ba = boolean_algebra_oracle(m.ops);
    bool c1 = ba && valid(m, ca);
    bool c2 = ba && m.nec == singleton(m.ops.top);
    bool c3 = true;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b && contains(m.nec, m.ops.Imp(a, b)) && contains(m.nec, m.ops.Imp(b, a))) c3 = false;
    bool c4 = contains(m.truth, oracle::eval(m, {}, closed));
    if (!(c1 == c2 && c2 == c3 && c3 == c4)) {
      ++disagree;
      out.fail(fmt("conditions disagree on an n=%d model: %d%d%d%d", n, c1, c2, c3, c4));
    }
    CollapseReport cr = collapse_diagnostics(m);
    if (!cr.all_equivalent || cr.boolean_algebra != ba || cr.leq_antisymmetric != c3)
      out.fail("library diagnostics differ from the oracle");
    if (std::popcount(m.nec) >= 2) {
      ++found;
      bool ok = !valid(m, ca) && !valid(m, bicond) && valid(m, refine);
      if (!ok) out.fail("|NEC|>=2 model does not separate identity from strict equivalence");
      else if (!witness) witness = &m;
    }
  }
  if (!witness) out.fail("no |NEC|>=2 countermodel found");
  else {
    std::filesystem::create_directories(archive);
    std::string path = archive + "/collapse_countermodel.json";
    nlohmann::json j;
    j["model"] = to_json(*witness);
    for_assignments(witness->n(), {0, 1}, [&](const std::map<uint32_t, int>& g) {
      if (!contains(witness->truth, oracle::eval(*witness, g, ca)) && !j.contains("collapse_fails_at"))
        j["collapse_fails_at"] = to_json(Assignment(g));
    });
    std::ofstream(path) << j.dump(2) << "\n";
    out.note("archived " + path);
  }
  out.note(fmt("%zu normal models (n<=4), %zu disagreeing, %zu with |NEC|>=2", normal, disagree, found));
  return out;
}

// ------------------------------------------------------------------ 6

Outcome criterion6() {
  Outcome out;
  auto frames = enumerate_frames(3, 3);
  Rng rng(606);
  FormulaGen g{4, 2};
  size_t worlds = 0, pairs = 0, nonnormal = 0, classes = 0, spot = 0;
  for (const auto& fr : frames) {
    if (!validate_frame(fr).ok) out.fail("enumerated frame invalid");
    const size_t P = fr.props.size();
    for (int w = 0; w < fr.size(); ++w) {
      ++worlds;
      std::optional<WorldModel> first;
      for (size_t i = 0; i < P; ++i)
        for (size_t j = 0; j < P; ++j) {
          Valuation val;
          val.vars[0] = fr.props[i];
          val.vars[1] = fr.props[j];
          WorldModel wm = world_to_model(fr, w, val);
          ++pairs;
          if (!first) first = wm;
          else if (!(wm.m == first->m)) out.fail("world model depends on the valuation");
          if (rng() % 8 == 0) {
            std::map<uint32_t, int> asg(wm.gamma.values().begin(), wm.gamma.values().end());
            std::map<uint32_t, std::set<int>> kv;
            for (uint32_t x : {0u, 1u})
              for (int v = 0; v < fr.size(); ++v)
                if (contains(val.vars[x], v)) kv[x].insert(v);
            for (int k = 0; k < 10; ++k) {
              F f = random_formula(rng, g);
              bool model_side = contains(wm.m.truth, oracle::eval(wm.m, asg, f));
              bool frame_side = oracle::denote(fr, kv, f).count(w) > 0;
              if (model_side != frame_side) out.fail("oracle disagreement on " + render(f));
              ++spot;
            }
          }
        }
      ModelReport rep = validate_modal_model(first->m, fr.kind);
      if (!rep.ok) out.fail("world model fails " + rep.violated);
      if (!contains(fr.normal, w)) {
        ++nonnormal;
        if (first->m.n() != 2 || first->m.nec != 0) out.fail("non-normal world is not the two-element algebra");
      }
      AgreementReport ar = agreement_800(*first, fr, w, 4);
      classes += ar.classes;
      if (!ar.ok) out.fail("agreement: " + (ar.discrepancies.empty() ? std::string("?") : ar.discrepancies[0]));
    }
  }
  out.note(fmt("%zu frames, %zu worlds (%zu non-normal), %zu (world, valuation) pairs, %zu classes at depth 4, "
               "%zu oracle spot checks",
               frames.size(), worlds, nonnormal, pairs, classes, spot));
  if (frames.size() < 20) out.fail("fewer than 20 frames");
  return out;
}

// ------------------------------------------------------------------ 7

Outcome criterion7() {
  Outcome out;
  Rng rng(707);
  FormulaGen g{4, 2};
  g.identity = false;
  g.quantifiers = false;
  size_t counts[2] = {};
  for (int system : {4, 5}) {
    for (const auto& m : enumerated(4, system)) {
      UltrafilterFrame uf = model_to_kripke(m, Assignment(), system);
      const KripkeFrame& fr = uf.fr;
      const int N = fr.size();
      bool refl = true, trans = true, sym = true;
      for (int u = 0; u < N; ++u) {
        refl = refl && contains(fr.R[static_cast<size_t>(u)], u);
        for (int v = 0; v < N; ++v) {
          if (!contains(fr.R[static_cast<size_t>(u)], v)) continue;
          sym = sym && contains(fr.R[static_cast<size_t>(v)], u);
          trans = trans && (fr.R[static_cast<size_t>(v)] & ~fr.R[static_cast<size_t>(u)]) == 0;
        }
      }
      if (!refl || !trans) out.fail("ultrafilter frame not reflexive-transitive");
      if (fr.normal != fr.all()) out.fail("ultrafilter frame has non-normal worlds");
      if (system == 5 && !sym) out.fail("S5 frame not an equivalence");
      if (uf.reflexive != refl || uf.transitive != trans || (system == 5 && !uf.equivalence))
        out.fail("library frame flags differ");
      AgreementReport ar = agreement_820(m, uf, 4);
      if (!ar.ok) out.fail("agreement: " + (ar.discrepancies.empty() ? std::string("?") : ar.discrepancies[0]));
      for (int k = 0; k < 20; ++k) {
        std::map<uint32_t, int> asg{{0, static_cast<int>(rng() % static_cast<uint64_t>(m.n()))},
                                    {1, static_cast<int>(rng() % static_cast<uint64_t>(m.n()))}};
        std::map<uint32_t, std::set<int>> kv;
        for (auto [x, a] : asg) {
          Subset ext = fr.props[static_cast<size_t>(uf.prop_of[static_cast<size_t>(a)])];
          for (int v = 0; v < N; ++v)
            if (contains(ext, v)) kv[x].insert(v);
        }
        F f = random_formula(rng, g);
        bool model_side = contains(m.truth, oracle::eval(m, asg, f));
        bool frame_side = oracle::denote(fr, kv, f).count(uf.w0) > 0;
        if (model_side != frame_side) out.fail("oracle disagreement on " + render(f));
      }
      ++counts[system - 4];
    }
  }
  out.note(fmt("%zu S4 and %zu S5 models (n<=4), depth-4 agreement on Fm_m", counts[0], counts[1]));
  if (counts[0] == 0 || counts[1] == 0) out.fail("no models enumerated");
  return out;
}

// ------------------------------------------------------------------ 8

Outcome criterion8() {
  Outcome out;
  const std::vector<std::string> base{"[]x0 -> x0", "[](x0 -> x1) -> ([]x0 -> []x1)",
                                      "[](x0 -> x1) -> []([]x0 -> []x1)"};
  const F four = parse("[]x0 -> [][]x0"), five = parse("~[]x0 -> []~[]x0");
  for (int system : {3, 4, 5}) {
    std::vector<CorpusItem> corpus;
    for (const auto& s : base) corpus.push_back({parse(s), Expect::Theorem});
    corpus.push_back({four, system >= 4 ? Expect::Theorem : Expect::NonTheorem});
    corpus.push_back({five, system == 5 ? Expect::Theorem : Expect::NonTheorem});
    ProbeReport pr = conservativity_probe(system, corpus, 4);
    std::string line = fmt("S%d: %zu frames, %zu models;", system, pr.frames, pr.models);
    for (const auto& r : pr.results) {
      line += " " + r.status;
      bool want = r.expect == Expect::Theorem ? r.status == "valid" : r.status == "countermodel";
      if (!r.as_expected || !want) out.fail(fmt("S%d ", system) + render(r.f) + ": " + r.status);
    }
    if (!pr.ok) out.fail(fmt("S%d probe not ok", system));
    out.note(line);

    // Independent check of the theorem verdicts on the small frames.
    auto frames = enumerate_frames(3, system);
    for (const auto& item : corpus) {
      if (item.expect != Expect::Theorem) continue;
      for (const auto& fr : frames)
        for (Subset p0 : fr.props)
          for (Subset p1 : fr.props) {
            std::map<uint32_t, std::set<int>> kv;
            for (int v = 0; v < fr.size(); ++v) {
              if (contains(p0, v)) kv[0].insert(v);
              if (contains(p1, v)) kv[1].insert(v);
            }
            auto den = oracle::denote(fr, kv, item.f);
            for (int v = 0; v < fr.size(); ++v)
              if (contains(fr.normal, v) && !den.count(v)) out.fail("oracle countermodel to " + render(item.f));
          }
    }
  }
  return out;
}

// ------------------------------------------------------------------ 9

Outcome criterion9(const std::vector<ModalModel>& s3) {
  Outcome out;
  size_t models = 0, normal = 0, instances = 0, triples = 0;
  for (const auto& m : s3) {
    try {
      AdmissibleReport r = check_admissible_simple(m, 3, 500, 909 + models);
      normal += r.normal;
      if (r.normal != m.normal() || (r.normal && r.instances != 500)) out.fail("admissibility sample incomplete");
      instances += r.instances;
      triples += r.triples;
      if (!r.ok) out.fail("counterexample: " + (r.counterexamples.empty() ? std::string("?") : r.counterexamples[0]));
    } catch (const ClosureTooLarge& e) {
      out.fail(std::string("closure too large: ") + e.what());
    }
    ++models;
  }
  ModalModel bad = canonical_model();
  bad.box[static_cast<size_t>(bad.ops.top)] = static_cast<uint8_t>(bad.ops.bot);
  bool caught = false;
  try {
    caught = !check_admissible_simple(bad, 3, 500, 9).ok;
  } catch (const ModelError&) {
    caught = true;
  }
  if (!caught) out.fail("corrupted model not caught");
  out.note(fmt("%zu S3 models (n<=4, %zu normal), %zu instances, %zu triples; corrupted control %s", models, normal,
               instances, triples,
               caught ? "caught" : "missed"));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string archive = "archive";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--archive" && i + 1 < argc) archive = argv[++i];
    else {
      std::fprintf(stderr, "usage: %s [--archive DIR]\n", argv[0]);
      return 2;
    }
  }

  std::vector<ModalModel> s3_models;
  auto s3 = [&]() -> const std::vector<ModalModel>& {
    if (s3_models.empty()) s3_models = enumerated(4, 3);
    return s3_models;
  };

  struct Criterion {
    int id;
    const char* title;
    double limit_s;  // 0 when unbounded
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all{
      {1, "generated rigidity and congruence derivations check", 30, criterion1},
      {2, "transformers preserve validity", 60, criterion2},
      {3, "smallest filter characterizations and SCI round trip", 120, criterion3},
      {4, "axiom soundness, substitution and coincidence", 0, criterion4},
      {5, "collapse conditions equivalent; |NEC|>=2 countermodel", 0, [&] { return criterion5(s3(), archive); }},
      {6, "world models agree with their frames", 300, criterion6},
      {7, "ultrafilter frames for S4/S5 models", 0, criterion7},
      {8, "conservativity probe", 120, criterion8},
      {9, "admissibility of the simple semantics", 0, [&] { return criterion9(s3()); }},
  };

  int failed = 0;
  for (const auto& c : all) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.limit_s > 0 && secs > c.limit_s) o.fail(fmt("runtime %.1fs exceeds %.0fs", secs, c.limit_s));
    std::string limit = c.limit_s > 0 ? fmt(", limit %.0fs", c.limit_s) : std::string();
    std::printf("%s criterion %d: %s (%.1fs%s)\n", o.ok ? "PASS" : "FAIL", c.id, c.title, secs, limit.c_str());
    for (const auto& f : o.facts) std::printf("    %s\n", f.c_str());
    for (const auto& e : o.errors) std::printf("    error: %s\n", e.c_str());
    std::fflush(stdout);
    failed += !o.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
