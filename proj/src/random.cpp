#include "nfk/random.hpp"

#include <algorithm>

namespace nfk {

namespace {

using F = Formula;

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

F random_leaf(Rng& rng, const FormulaGen& g) {
  int options = static_cast<int>(g.num_vars) + (g.bot_top ? 2 : 0) + static_cast<int>(g.consts.size());
  int r = pick(rng, 0, std::max(0, options - 1));
  // Variables are weighted up so that most leaves are variables.
  if (g.num_vars > 0 && (r < static_cast<int>(g.num_vars) || coin(rng, 0.5)))
    return F::var(g.first_var + static_cast<uint32_t>(pick(rng, 0, static_cast<int>(g.num_vars) - 1)));
  r -= static_cast<int>(g.num_vars);
  if (r < 0) r = 0;
  if (g.bot_top && r < 2) return r == 0 ? F::bot() : F::top();
  if (g.bot_top) r -= 2;
  if (!g.consts.empty()) return F::constant(g.consts[static_cast<size_t>(r) % g.consts.size()]);
  return g.bot_top ? F::top() : F::var(g.first_var);
}

F gen(Rng& rng, const FormulaGen& g, int depth) {
  if (depth <= 0 || coin(rng, 0.25)) return random_leaf(rng, g);
  for (;;) {
    switch (pick(rng, 0, 7)) {
      case 0: return F::neg(gen(rng, g, depth - 1));
      case 1:
        if (!g.box) continue;
        return F::box(gen(rng, g, depth - 1));
      case 2: return F::disj(gen(rng, g, depth - 1), gen(rng, g, depth - 1));
      case 3: return F::conj(gen(rng, g, depth - 1), gen(rng, g, depth - 1));
      case 4:
      case 5: return F::imp(gen(rng, g, depth - 1), gen(rng, g, depth - 1));
      case 6:
        if (!g.identity) continue;
        return F::id(gen(rng, g, depth - 1), gen(rng, g, depth - 1));
      case 7: {
        if (!g.quantifiers) continue;
        F body = gen(rng, g, depth - 1);
        const auto& fv = body.fvars();
        if (fv.empty()) continue;
        return F::forall(fv[static_cast<size_t>(pick(rng, 0, static_cast<int>(fv.size()) - 1))], body);
      }
    }
  }
}

F random_tautology(Rng& rng, const FormulaGen& g, int depth) {
  int d = std::max(0, depth - 2);
  F a = gen(rng, g, d), b = gen(rng, g, d);
  switch (pick(rng, 0, 6)) {
    case 0: return F::imp(a, a);
    case 1: return F::disj(a, F::neg(a));
    case 2: return F::imp(a, F::imp(b, a));
    case 3: return F::imp(F::conj(a, b), b);
    case 4: return F::imp(a, F::disj(b, a));
    case 5: return F::imp(F::neg(F::neg(a)), a);
    default: return F::neg(F::conj(a, F::neg(a)));
  }
}

}  // namespace

Formula random_formula(Rng& rng, const FormulaGen& g) { return gen(rng, g, g.depth); }

Substitution random_substitution(Rng& rng, const FormulaGen& g) {
  Substitution s;
  for (uint32_t i = 0; i < g.num_vars; ++i)
    if (coin(rng)) s.bind_var(g.first_var + i, gen(rng, g, g.depth));
  for (int c : g.consts)
    if (coin(rng)) s.bind(Symbol::con(c), gen(rng, g, g.depth));
  return s;
}

std::optional<SchemeInstance> random_instance(Rng& rng, SchemeId s, AxiomSet set, int system,
                                              const FormulaGen& g, int max_depth) {
  if (!scheme_allowed(s, set, system)) return std::nullopt;
  for (int attempt = 0; attempt < 200; ++attempt) {
    // Shrink the witnesses as attempts fail.
    int wd = std::max(0, std::min(g.depth, max_depth - 1 - attempt / 40));
    SchemeInstance inst;
    inst.scheme = s;
    for (const std::string& role : scheme_roles(s)) {
      if (role == "x") {
        inst.witnesses[role] =
            F::var(g.first_var + static_cast<uint32_t>(pick(rng, 0, static_cast<int>(std::max(1u, g.num_vars)) - 1)));
      } else if (s == SchemeId::AxTaut) {
        inst.witnesses[role] = random_tautology(rng, g, std::max(1, max_depth));
      } else {
        inst.witnesses[role] = gen(rng, g, pick(rng, 0, wd));
      }
    }
    // Bias AxInst and AxVac towards their side conditions.
    if (s == SchemeId::AxInst) {
      uint32_t x = inst.at("x").var_index();
      if (!inst.at("phi").is_free(x)) inst.witnesses["phi"] = F::disj(F::var(x), inst.at("phi"));
    }
    try {
      F core = check_instance(inst, set, system);
      if (core.depth() > max_depth) continue;
      std::vector<uint32_t> fv = core.fvars();
      std::shuffle(fv.begin(), fv.end(), rng);
      F closed = core;
      for (uint32_t x : fv) {
        if (!coin(rng, 0.3) || closed.depth() + 1 > max_depth) continue;
        inst.foralls.insert(inst.foralls.begin(), x);
        closed = F::forall(x, closed);
      }
      return inst;
    } catch (const CalculusError&) {
    } catch (const std::invalid_argument&) {
    }
  }
  return std::nullopt;
}

SchemeInstance random_axiom(Rng& rng, AxiomSet set, int system, const FormulaGen& g, int max_depth) {
  std::vector<SchemeId> allowed;
  for (SchemeId s : all_schemes())
    if (scheme_allowed(s, set, system)) allowed.push_back(s);
  for (;;) {
    SchemeId s = allowed[static_cast<size_t>(pick(rng, 0, static_cast<int>(allowed.size()) - 1))];
    if (auto inst = random_instance(rng, s, set, system, g, max_depth)) return *inst;
  }
}

Derivation random_derivation(Rng& rng, const DerivationGen& g) {
  FormulaGen fg = g.formulas;
  std::vector<F> hyps;
  for (int i = 0; i < g.hypotheses; ++i) {
    F h;
    do {
      h = gen(rng, fg, fg.depth);
    } while (g.hyp_avoid_var && h.is_free(*g.hyp_avoid_var));
    hyps.push_back(h);
  }
  Builder b(g.system, g.set, hyps);
  int max_depth = fg.depth + 2;
  auto any_line = [&] { return pick(rng, 0, b.size() - 1); };

  for (int step = 0; step < g.steps; ++step) {
    int action = pick(rng, 0, 5);
    if (b.size() == 0 && action >= 3) action = 1;
    switch (action) {
      case 0:
        if (!hyps.empty()) {
          b.hyp(pick(rng, 0, static_cast<int>(hyps.size()) - 1));
          break;
        }
        [[fallthrough]];
      case 1: b.axiom(random_axiom(rng, g.set, g.system, fg, max_depth)); break;
      case 2: b.an(random_axiom(rng, g.set, g.system, fg, max_depth)); break;
      case 3: {
        // A |- B -> A
        int j = any_line();
        b.infer({j}, F::imp(gen(rng, fg, 1), b.formula(j)));
        break;
      }
      case 4: {
        // A, B |- A & B
        int j = any_line(), k = any_line();
        b.infer({j, k}, F::conj(b.formula(j), b.formula(k)));
        break;
      }
      default: {
        // Use an existing implication whose antecedent is already derived.
        bool done = false;
        for (int k = b.size() - 1; k >= 0 && !done; --k) {
          const F& f = b.formula(k);
          if (f.op() != Op::Imp) continue;
          for (int j = 0; j < b.size(); ++j)
            if (b.formula(j) == f.lhs()) {
              b.mp(j, k);
              done = true;
              break;
            }
        }
        if (!done) {
          // []phi by AN, then phi via AxT.
          SchemeInstance inst = random_axiom(rng, g.set, g.system, fg, max_depth);
          F phi = check_instance(inst, g.set, g.system);
          int boxed = b.an(inst);
          int t = b.axiom(make_instance(SchemeId::AxT, {{"phi", phi}}));
          b.mp(boxed, t);
        }
      }
    }
  }
  if (b.size() == 0) b.axiom(random_axiom(rng, g.set, g.system, fg, max_depth));

  F extra;
  if (g.conclusion_var || g.conclusion_const) {
    F lead = g.conclusion_var ? F::var(*g.conclusion_var) : F::top();
    if (g.conclusion_const) lead = F::disj(lead, F::constant(*g.conclusion_const));
    if (coin(rng)) lead = F::imp(gen(rng, fg, 1), lead);
    b.infer({b.size() - 1}, F::imp(lead, b.formula(b.size() - 1)));
  }
  return std::move(b).finish();
}

}  // namespace nfk
