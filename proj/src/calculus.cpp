#include "nfk/calculus.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace nfk {

namespace {

using F = Formula;

struct SchemeInfo {
  SchemeId id;
  const char* name;
  std::vector<std::string> roles;
};

const std::vector<SchemeInfo>& scheme_table() {
  static const std::vector<SchemeInfo> t = {
      {SchemeId::AxTaut, "AxTaut", {"phi"}},
      {SchemeId::AxT, "AxT", {"phi"}},
      {SchemeId::AxK, "AxK", {"phi", "psi"}},
      {SchemeId::AxK4strict, "AxK4strict", {"phi", "psi"}},
      {SchemeId::AxAlpha, "AxAlpha", {"phi", "psi"}},
      {SchemeId::AxIdImp, "AxIdImp", {"phi", "psi"}},
      {SchemeId::AxIdCong, "AxIdCong", {"x", "phi", "psi", "psi2"}},
      {SchemeId::AxIdForall, "AxIdForall", {"x", "phi", "psi"}},
      {SchemeId::AxInst, "AxInst", {"x", "phi", "psi"}},
      {SchemeId::AxDistr, "AxDistr", {"x", "phi", "psi"}},
      {SchemeId::AxVac, "AxVac", {"x", "phi", "psi"}},
      {SchemeId::AxCBF, "AxCBF", {"x", "phi"}},
      {SchemeId::AxBarcan, "AxBarcan", {"x", "phi"}},
      {SchemeId::Ax4, "Ax4", {"phi"}},
      {SchemeId::Ax5, "Ax5", {"phi"}},
  };
  return t;
}

const SchemeInfo& info(SchemeId s) { return scheme_table()[static_cast<size_t>(s)]; }

}  // namespace

const std::vector<SchemeId>& all_schemes() {
  static const std::vector<SchemeId> v = [] {
    std::vector<SchemeId> out;
    for (const auto& i : scheme_table()) out.push_back(i.id);
    return out;
  }();
  return v;
}

std::string scheme_name(SchemeId s) { return info(s).name; }

SchemeId scheme_from_name(const std::string& name) {
  for (const auto& i : scheme_table())
    if (name == i.name) return i.id;
  throw CalculusError("unknown axiom scheme '" + name + "'");
}

const std::vector<std::string>& scheme_roles(SchemeId s) { return info(s).roles; }

std::string to_string(AxiomSet a) { return a == AxiomSet::Full ? "full" : "minus"; }

AxiomSet axiom_set_from_name(const std::string& name) {
  if (name == "full") return AxiomSet::Full;
  if (name == "minus") return AxiomSet::Minus;
  throw CalculusError("unknown axiom set '" + name + "'");
}

bool scheme_allowed(SchemeId s, AxiomSet set, int system) {
  if (set == AxiomSet::Minus && (s == SchemeId::AxIdForall || s == SchemeId::AxBarcan)) return false;
  if (s == SchemeId::Ax4) return system >= 4;
  if (s == SchemeId::Ax5) return system == 5;
  return true;
}

const Formula& SchemeInstance::at(const std::string& role) const {
  auto it = witnesses.find(role);
  if (it == witnesses.end()) throw CalculusError(scheme_name(scheme) + ": missing witness '" + role + "'");
  return it->second;
}

SchemeInstance make_instance(SchemeId s, std::map<std::string, Formula> witnesses,
                             std::vector<uint32_t> foralls) {
  SchemeInstance inst;
  inst.scheme = s;
  inst.witnesses = std::move(witnesses);
  inst.foralls = std::move(foralls);
  return inst;
}

// ------------------------------------------------------------ tautologies

namespace {

struct SkelNode {
  Op op;
  int l = -1, r = -1, atom = -1;
};

int abstract_skeleton(const Formula& f, std::unordered_map<Formula, int, FormulaHash>& atoms,
                      std::vector<SkelNode>& nodes) {
  switch (f.op()) {
    case Op::Neg: {
      int a = abstract_skeleton(f.lhs(), atoms, nodes);
      nodes.push_back({Op::Neg, a});
      return static_cast<int>(nodes.size()) - 1;
    }
    case Op::Or:
    case Op::And:
    case Op::Imp: {
      int a = abstract_skeleton(f.lhs(), atoms, nodes);
      int b = abstract_skeleton(f.rhs(), atoms, nodes);
      nodes.push_back({f.op(), a, b});
      return static_cast<int>(nodes.size()) - 1;
    }
    case Op::Const:
      if (f.const_id() == kBot || f.const_id() == kTop) {
        nodes.push_back({Op::Const, -1, -1, f.const_id() == kTop ? 1 : 0});
        return static_cast<int>(nodes.size()) - 1;
      }
      [[fallthrough]];
    default: {
      auto [it, fresh] = atoms.emplace(f, static_cast<int>(atoms.size()));
      (void)fresh;
      nodes.push_back({Op::Var, -1, -1, it->second});
      return static_cast<int>(nodes.size()) - 1;
    }
  }
}

}  // namespace

bool taut_instance(const Formula& f, const TautOptions& opt) {
  std::unordered_map<Formula, int, FormulaHash> atoms;
  std::vector<SkelNode> nodes;
  abstract_skeleton(f, atoms, nodes);
  int k = static_cast<int>(atoms.size());
  if (k > opt.max_atoms)
    throw CalculusError("tautology check: " + std::to_string(k) + " atoms exceeds limit " +
                        std::to_string(opt.max_atoms));
  static constexpr std::array<uint64_t, 6> kPattern = {
      0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
      0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  uint64_t mask = k >= 6 ? ~0ULL : ((1ULL << (1u << k)) - 1);
  uint64_t blocks = k > 6 ? (1ULL << (k - 6)) : 1;
  std::vector<uint64_t> val(nodes.size());
  for (uint64_t blk = 0; blk < blocks; ++blk) {
    for (size_t i = 0; i < nodes.size(); ++i) {
      const SkelNode& n = nodes[i];
      switch (n.op) {
        case Op::Neg: val[i] = ~val[static_cast<size_t>(n.l)]; break;
        case Op::Or: val[i] = val[static_cast<size_t>(n.l)] | val[static_cast<size_t>(n.r)]; break;
        case Op::And: val[i] = val[static_cast<size_t>(n.l)] & val[static_cast<size_t>(n.r)]; break;
        case Op::Imp: val[i] = ~val[static_cast<size_t>(n.l)] | val[static_cast<size_t>(n.r)]; break;
        case Op::Const: val[i] = n.atom ? ~0ULL : 0ULL; break;
        default:
          if (n.atom < 6) val[i] = kPattern[static_cast<size_t>(n.atom)];
          else val[i] = ((blk >> (n.atom - 6)) & 1) ? ~0ULL : 0ULL;
      }
    }
    if ((val.back() & mask) != mask) return false;
  }
  return true;
}

// ------------------------------------------------------------ instances

namespace {

uint32_t witness_var(const SchemeInstance& inst) {
  const Formula& x = inst.at("x");
  if (x.op() != Op::Var) throw CalculusError(scheme_name(inst.scheme) + ": witness 'x' must be a variable");
  return x.var_index();
}

void require(bool cond, const SchemeInstance& inst, const std::string& what) {
  if (!cond) throw CalculusError(scheme_name(inst.scheme) + ": " + what);
}

Formula core_formula(const SchemeInstance& inst) {
  const auto& roles = scheme_roles(inst.scheme);
  if (inst.witnesses.size() != roles.size())
    throw CalculusError(scheme_name(inst.scheme) + ": expected " + std::to_string(roles.size()) + " witnesses");
  for (const auto& r : roles) inst.at(r);

  switch (inst.scheme) {
    case SchemeId::AxTaut: {
      const F& p = inst.at("phi");
      require(taut_instance(p), inst, "not a tautology instance");
      return p;
    }
    case SchemeId::AxT: {
      const F& p = inst.at("phi");
      return F::imp(F::box(p), p);
    }
    case SchemeId::AxK: {
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      return F::imp(F::box(F::imp(p, q)), F::imp(F::box(p), F::box(q)));
    }
    case SchemeId::AxK4strict: {
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      return F::imp(F::box(F::imp(p, q)), F::box(F::imp(F::box(p), F::box(q))));
    }
    case SchemeId::AxAlpha: {
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      require(alpha_eq(p, q), inst, "witnesses are not alpha-congruent");
      return F::id(p, q);
    }
    case SchemeId::AxIdImp: {
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      return F::imp(F::id(p, q), F::imp(p, q));
    }
    case SchemeId::AxIdCong: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      const F& a = inst.at("psi");
      const F& b = inst.at("psi2");
      require(p.is_free(x), inst, "x must be free in phi");
      return F::imp(F::id(a, b), F::id(subst(p, x, a), subst(p, x, b)));
    }
    case SchemeId::AxIdForall: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      require(p.is_free(x) && q.is_free(x), inst, "x must be free in both phi and psi");
      return F::imp(F::forall(x, F::id(p, q)), F::id(F::forall(x, p), F::forall(x, q)));
    }
    case SchemeId::AxInst: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      require(p.is_free(x), inst, "x must be free in phi");
      return F::imp(F::forall(x, p), subst(p, x, inst.at("psi")));
    }
    case SchemeId::AxDistr: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      require(p.is_free(x) && q.is_free(x), inst, "x must be free in both phi and psi");
      return F::imp(F::forall(x, F::imp(p, q)), F::imp(F::forall(x, p), F::forall(x, q)));
    }
    case SchemeId::AxVac: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      const F& q = inst.at("psi");
      require(!p.is_free(x), inst, "x must not be free in phi");
      require(q.is_free(x), inst, "x must be free in psi");
      return F::imp(F::forall(x, F::imp(p, q)), F::imp(p, F::forall(x, q)));
    }
    case SchemeId::AxCBF: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      require(p.is_free(x), inst, "x must be free in phi");
      return F::imp(F::box(F::forall(x, p)), F::forall(x, F::box(p)));
    }
    case SchemeId::AxBarcan: {
      uint32_t x = witness_var(inst);
      const F& p = inst.at("phi");
      require(p.is_free(x), inst, "x must be free in phi");
      return F::imp(F::forall(x, F::box(p)), F::box(F::forall(x, p)));
    }
    case SchemeId::Ax4: {
      const F& p = inst.at("phi");
      return F::imp(F::box(p), F::box(F::box(p)));
    }
    case SchemeId::Ax5: {
      const F& p = inst.at("phi");
      F nb = F::neg(F::box(p));
      return F::imp(nb, F::box(nb));
    }
  }
  throw CalculusError("unreachable scheme");
}

}  // namespace

Formula check_instance(const SchemeInstance& inst, AxiomSet set, int system) {
  if (system < 3 || system > 5) throw CalculusError("system must be 3, 4 or 5");
  if (!scheme_allowed(inst.scheme, set, system))
    throw CalculusError(scheme_name(inst.scheme) + " is not available in S" + std::to_string(system) +
                        " with axiom set " + to_string(set));
  Formula f = core_formula(inst);
  for (auto it = inst.foralls.rbegin(); it != inst.foralls.rend(); ++it) {
    if (!f.is_free(*it))
      throw CalculusError("closure variable x" + std::to_string(*it) + " is not free in the instance");
    f = Formula::forall(*it, f);
  }
  return f;
}

// ------------------------------------------------------------ recognition

namespace {

struct BoundPair {
  uint32_t l, r, u;
};

// Anti-unifies L against R where the differing positions must be exactly (p, q).
bool anti_unify(const F& L, const F& R, const F& p, const F& q, uint32_t x, uint32_t& next_fresh,
                std::vector<BoundPair>& bound, F& out, bool& used) {
  if (L == p && R == q) {
    out = F::var(x);
    used = true;
    return true;
  }
  if (L.op() != R.op()) return false;
  switch (L.op()) {
    case Op::Var: {
      for (auto it = bound.rbegin(); it != bound.rend(); ++it) {
        bool lm = it->l == L.var_index();
        bool rm = it->r == R.var_index();
        if (lm || rm) {
          if (!(lm && rm)) return false;
          out = F::var(it->u);
          return true;
        }
      }
      if (L != R) return false;
      out = L;
      return true;
    }
    case Op::Const:
      if (L != R) return false;
      out = L;
      return true;
    case Op::Neg:
    case Op::Box: {
      F a;
      if (!anti_unify(L.lhs(), R.lhs(), p, q, x, next_fresh, bound, a, used)) return false;
      out = L.op() == Op::Neg ? F::neg(a) : F::box(a);
      return true;
    }
    case Op::Forall: {
      uint32_t u = next_fresh++;
      bound.push_back({L.var_index(), R.var_index(), u});
      F a;
      bool ok = anti_unify(L.lhs(), R.lhs(), p, q, x, next_fresh, bound, a, used);
      bound.pop_back();
      if (!ok || !a.is_free(u)) return false;
      out = F::forall(u, a);
      return true;
    }
    default: {
      F a, b;
      if (!anti_unify(L.lhs(), R.lhs(), p, q, x, next_fresh, bound, a, used)) return false;
      if (!anti_unify(L.rhs(), R.rhs(), p, q, x, next_fresh, bound, b, used)) return false;
      switch (L.op()) {
        case Op::Or: out = F::disj(a, b); break;
        case Op::And: out = F::conj(a, b); break;
        case Op::Imp: out = F::imp(a, b); break;
        default: out = F::id(a, b); break;
      }
      return true;
    }
  }
}

// Replaces occurrences of p by x; when top_only, occurrences under binders are kept.
F abstract_occurrences(const F& f, const F& p, uint32_t x, bool top_only, bool under_binder, bool& used) {
  if (f == p && !(top_only && under_binder)) {
    used = true;
    return F::var(x);
  }
  switch (f.op()) {
    case Op::Var:
    case Op::Const: return f;
    case Op::Neg: return F::neg(abstract_occurrences(f.lhs(), p, x, top_only, under_binder, used));
    case Op::Box: return F::box(abstract_occurrences(f.lhs(), p, x, top_only, under_binder, used));
    case Op::Forall: {
      F body = abstract_occurrences(f.lhs(), p, x, top_only, true, used);
      if (!body.is_free(f.var_index())) return f;
      return F::forall(f.var_index(), body);
    }
    default: {
      F a = abstract_occurrences(f.lhs(), p, x, top_only, under_binder, used);
      F b = abstract_occurrences(f.rhs(), p, x, top_only, under_binder, used);
      switch (f.op()) {
        case Op::Or: return F::disj(a, b);
        case Op::And: return F::conj(a, b);
        case Op::Imp: return F::imp(a, b);
        default: return F::id(a, b);
      }
    }
  }
}

// Finds the subterm of r aligned with the first free occurrence of x in phi.
bool find_instance_term(const F& phi, const F& r, uint32_t x, F& out) {
  switch (phi.op()) {
    case Op::Var:
      if (phi.var_index() == x) {
        out = r;
        return true;
      }
      return false;
    case Op::Const: return false;
    default:
      if (phi.op() != r.op()) return false;
      if (phi.op() == Op::Forall && phi.var_index() == x) return false;
      if (phi.op() == Op::Neg || phi.op() == Op::Box || phi.op() == Op::Forall)
        return find_instance_term(phi.lhs(), r.lhs(), x, out);
      return find_instance_term(phi.lhs(), r.lhs(), x, out) || find_instance_term(phi.rhs(), r.rhs(), x, out);
  }
}

void candidates(const F& f, std::vector<SchemeInstance>& out) {
  auto add = [&](SchemeId s, std::map<std::string, F> w) { out.push_back(make_instance(s, std::move(w))); };
  auto var = [](uint32_t x) { return F::var(x); };
  if (f.op() == Op::Id) add(SchemeId::AxAlpha, {{"phi", f.lhs()}, {"psi", f.rhs()}});
  if (f.op() != Op::Imp) return;
  const F& a = f.lhs();
  const F& b = f.rhs();
  if (a.op() == Op::Box) {
    add(SchemeId::AxT, {{"phi", a.lhs()}});
    add(SchemeId::Ax4, {{"phi", a.lhs()}});
    if (a.lhs().op() == Op::Imp) {
      add(SchemeId::AxK, {{"phi", a.lhs().lhs()}, {"psi", a.lhs().rhs()}});
      add(SchemeId::AxK4strict, {{"phi", a.lhs().lhs()}, {"psi", a.lhs().rhs()}});
    }
    if (a.lhs().op() == Op::Forall)
      add(SchemeId::AxCBF, {{"x", var(a.lhs().var_index())}, {"phi", a.lhs().lhs()}});
  }
  if (a.op() == Op::Neg && a.lhs().op() == Op::Box) add(SchemeId::Ax5, {{"phi", a.lhs().lhs()}});
  if (a.op() == Op::Id) {
    add(SchemeId::AxIdImp, {{"phi", a.lhs()}, {"psi", a.rhs()}});
    if (b.op() == Op::Id) {
      const F& p = a.lhs();
      const F& q = a.rhs();
      uint32_t fresh = static_cast<uint32_t>(std::max(f.max_var(), int64_t{-1}) + 1);
      uint32_t x = fresh++;
      if (p != q) {
        std::vector<BoundPair> bound;
        F phi;
        bool used = false;
        if (anti_unify(b.lhs(), b.rhs(), p, q, x, fresh, bound, phi, used) && used)
          add(SchemeId::AxIdCong, {{"x", var(x)}, {"phi", phi}, {"psi", p}, {"psi2", q}});
      } else if (b.lhs() == b.rhs()) {
        for (bool top_only : {false, true}) {
          bool used = false;
          F phi = abstract_occurrences(b.lhs(), p, x, top_only, false, used);
          if (used) add(SchemeId::AxIdCong, {{"x", var(x)}, {"phi", phi}, {"psi", p}, {"psi2", q}});
        }
      }
    }
  }
  if (a.op() == Op::Forall) {
    uint32_t x = a.var_index();
    const F& body = a.lhs();
    F t;
    if (find_instance_term(body, b, x, t)) add(SchemeId::AxInst, {{"x", var(x)}, {"phi", body}, {"psi", t}});
    if (body.op() == Op::Id) add(SchemeId::AxIdForall, {{"x", var(x)}, {"phi", body.lhs()}, {"psi", body.rhs()}});
    if (body.op() == Op::Imp) {
      add(SchemeId::AxDistr, {{"x", var(x)}, {"phi", body.lhs()}, {"psi", body.rhs()}});
      add(SchemeId::AxVac, {{"x", var(x)}, {"phi", body.lhs()}, {"psi", body.rhs()}});
    }
    if (body.op() == Op::Box) add(SchemeId::AxBarcan, {{"x", var(x)}, {"phi", body.lhs()}});
  }
}

}  // namespace

std::optional<SchemeInstance> recognize_axiom(const Formula& f, AxiomSet set, int system) {
  std::vector<uint32_t> foralls;
  Formula core = f;
  while (core.op() == Op::Forall) {
    foralls.push_back(core.var_index());
    core = core.lhs();
  }
  std::vector<SchemeInstance> cands;
  candidates(core, cands);
  cands.push_back(make_instance(SchemeId::AxTaut, {{"phi", core}}));
  for (auto& c : cands) {
    if (!scheme_allowed(c.scheme, set, system)) continue;
    c.foralls = foralls;
    try {
      if (check_instance(c, set, system) == f) return c;
    } catch (const CalculusError&) {
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------------ derivations

const Formula& Derivation::conclusion() const {
  if (lines.empty()) throw CalculusError("empty derivation");
  return lines.back().formula;
}

CheckReport check_derivation(const Derivation& d) {
  CheckReport rep;
  auto fail = [&](size_t i, const std::string& msg) {
    rep.ok = false;
    rep.first_failure = static_cast<int>(i);
    rep.message = "line " + std::to_string(i) + ": " + msg;
    return rep;
  };
  if (d.system < 3 || d.system > 5) {
    rep.ok = false;
    rep.message = "system must be 3, 4 or 5";
    return rep;
  }
  for (size_t i = 0; i < d.lines.size(); ++i) {
    const Line& ln = d.lines[i];
    if (!ln.formula.valid()) return fail(i, "missing formula");
    const Justification& j = ln.just;
    switch (j.kind) {
      case Justification::Kind::Hyp:
        if (j.hyp < 0 || j.hyp >= static_cast<int>(d.hypotheses.size()))
          return fail(i, "hypothesis index " + std::to_string(j.hyp) + " out of range");
        if (d.hypotheses[static_cast<size_t>(j.hyp)] != ln.formula) return fail(i, "formula differs from hypothesis");
        break;
      case Justification::Kind::Axiom:
      case Justification::Kind::AN: {
        Formula f;
        try {
          f = check_instance(j.inst, d.axioms, d.system);
        } catch (const std::exception& e) {
          return fail(i, e.what());
        }
        if (j.kind == Justification::Kind::AN) f = Formula::box(f);
        if (f != ln.formula)
          return fail(i, std::string(j.kind == Justification::Kind::AN ? "AN" : "axiom") +
                             " reconstruction " + render(f) + " differs from line");
        break;
      }
      case Justification::Kind::MP: {
        int n = static_cast<int>(i);
        if (j.j < 0 || j.k < 0 || j.j >= n || j.k >= n) return fail(i, "MP premise index out of range");
        const Formula& maj = d.lines[static_cast<size_t>(j.k)].formula;
        const Formula& mnr = d.lines[static_cast<size_t>(j.j)].formula;
        if (maj.op() != Op::Imp || maj.lhs() != mnr || maj.rhs() != ln.formula)
          return fail(i, "MP premises do not match");
        break;
      }
    }
  }
  return rep;
}

std::vector<SchemeId> schemes_used(const Derivation& d) {
  std::vector<SchemeId> out;
  for (const auto& ln : d.lines) {
    if (ln.just.kind == Justification::Kind::Axiom || ln.just.kind == Justification::Kind::AN) {
      if (std::find(out.begin(), out.end(), ln.just.inst.scheme) == out.end()) out.push_back(ln.just.inst.scheme);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ------------------------------------------------------------ builder

Builder::Builder(int system, AxiomSet set, std::vector<Formula> hyps) {
  d_.system = system;
  d_.axioms = set;
  d_.hypotheses = std::move(hyps);
}

int Builder::push(Line line) {
  d_.lines.push_back(std::move(line));
  return size() - 1;
}

int Builder::hyp(int i) {
  if (i < 0 || i >= static_cast<int>(d_.hypotheses.size())) throw CalculusError("hypothesis index out of range");
  return push({d_.hypotheses[static_cast<size_t>(i)], Justification::hypothesis(i)});
}

int Builder::axiom(SchemeInstance inst) {
  Formula f = check_instance(inst, d_.axioms, d_.system);
  return push({f, Justification::axiom(std::move(inst))});
}

int Builder::an(SchemeInstance inst) {
  Formula f = check_instance(inst, d_.axioms, d_.system);
  return push({Formula::box(f), Justification::an(std::move(inst))});
}

int Builder::mp(int j, int k) {
  const Formula& maj = formula(k);
  if (maj.op() != Op::Imp || maj.lhs() != formula(j)) throw CalculusError("builder: MP premises do not match");
  Formula c = maj.rhs();
  return push({c, Justification::mp(j, k)});
}

int Builder::taut(const Formula& f) { return axiom(make_instance(SchemeId::AxTaut, {{"phi", f}})); }

int Builder::infer(const std::vector<int>& premises, const Formula& c) {
  Formula t = c;
  for (auto it = premises.rbegin(); it != premises.rend(); ++it) t = Formula::imp(formula(*it), t);
  int idx = taut(t);
  for (int p : premises) idx = mp(p, idx);
  return idx;
}

int Builder::alpha_bridge(int i, const Formula& target) {
  const Formula a = formula(i);
  if (a == target) return i;
  int e = axiom(make_instance(SchemeId::AxAlpha, {{"phi", a}, {"psi", target}}));
  int imp = axiom(make_instance(SchemeId::AxIdImp, {{"phi", a}, {"psi", target}}));
  int step = mp(e, imp);
  return mp(i, step);
}

Derivation Builder::finish() && { return std::move(d_); }

// ------------------------------------------------------------ transformers

namespace {

void require_valid(const Derivation& d, const char* who) {
  CheckReport r = check_derivation(d);
  if (!r.ok) throw CalculusError(std::string(who) + ": input derivation invalid: " + r.message);
  if (d.lines.empty()) throw CalculusError(std::string(who) + ": empty derivation");
}

F replace_const(const F& f, int c, const F& y) {
  if (!f.has_const(c)) return f;
  switch (f.op()) {
    case Op::Const: return y;
    case Op::Var: return f;
    case Op::Neg: return F::neg(replace_const(f.lhs(), c, y));
    case Op::Box: return F::box(replace_const(f.lhs(), c, y));
    case Op::Forall: return F::forall(f.var_index(), replace_const(f.lhs(), c, y));
    case Op::Or: return F::disj(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::And: return F::conj(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::Imp: return F::imp(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
    case Op::Id: return F::id(replace_const(f.lhs(), c, y), replace_const(f.rhs(), c, y));
  }
  return f;
}

int64_t derivation_max_var(const Derivation& d) {
  int64_t m = -1;
  for (const auto& h : d.hypotheses) m = std::max(m, h.max_var());
  for (const auto& ln : d.lines) {
    m = std::max(m, ln.formula.max_var());
    for (const auto& [role, w] : ln.just.inst.witnesses) m = std::max(m, w.max_var());
    for (uint32_t v : ln.just.inst.foralls) m = std::max<int64_t>(m, v);
  }
  return m;
}

}  // namespace

Derivation deduction(const Derivation& d, const Formula& phi) {
  require_valid(d, "deduction");
  std::vector<int> hyp_map(d.hypotheses.size(), -1);
  std::vector<Formula> hyps;
  bool listed = false;
  for (size_t i = 0; i < d.hypotheses.size(); ++i) {
    if (d.hypotheses[i] == phi) {
      listed = true;
      continue;
    }
    hyp_map[i] = static_cast<int>(hyps.size());
    hyps.push_back(d.hypotheses[i]);
  }
  if (!listed) throw CalculusError("deduction: formula is not among the hypotheses");

  Builder b(d.system, d.axioms, hyps);
  std::vector<int> at(d.lines.size());
  for (size_t i = 0; i < d.lines.size(); ++i) {
    const Line& ln = d.lines[i];
    const Formula& psi = ln.formula;
    Formula target = F::imp(phi, psi);
    switch (ln.just.kind) {
      case Justification::Kind::Hyp:
        if (hyp_map[static_cast<size_t>(ln.just.hyp)] < 0) {
          at[i] = b.taut(target);
          break;
        }
        [[fallthrough]];
      case Justification::Kind::Axiom:
      case Justification::Kind::AN: {
        Line copy = ln;
        if (copy.just.kind == Justification::Kind::Hyp) copy.just.hyp = hyp_map[static_cast<size_t>(ln.just.hyp)];
        int l = b.push(copy);
        at[i] = b.infer({l}, target);
        break;
      }
      case Justification::Kind::MP: {
        int j = ln.just.j;
        int k = ln.just.k;
        at[i] = b.infer({at[static_cast<size_t>(j)], at[static_cast<size_t>(k)]}, target);
        break;
      }
    }
  }
  return std::move(b).finish();
}

Derivation generalize(const Derivation& d, uint32_t x) {
  require_valid(d, "generalize");
  for (const auto& h : d.hypotheses)
    if (h.is_free(x)) throw CalculusError("generalize: x" + std::to_string(x) + " is free in a hypothesis");
  if (!d.conclusion().is_free(x))
    throw CalculusError("generalize: x" + std::to_string(x) + " is not free in the conclusion");

  Builder b(d.system, d.axioms, d.hypotheses);
  for (const auto& ln : d.lines) b.push(ln);
  std::vector<int> g(d.lines.size());
  for (size_t i = 0; i < d.lines.size(); ++i) {
    const Line& ln = d.lines[i];
    if (!ln.formula.is_free(x)) {
      g[i] = static_cast<int>(i);
      continue;
    }
    switch (ln.just.kind) {
      case Justification::Kind::Hyp: throw CalculusError("generalize: unreachable hypothesis case");
      case Justification::Kind::Axiom: {
        SchemeInstance inst = ln.just.inst;
        inst.foralls.insert(inst.foralls.begin(), x);
        g[i] = b.axiom(std::move(inst));
        break;
      }
      case Justification::Kind::AN: {
        SchemeInstance inst = ln.just.inst;
        Formula inner = check_instance(inst, d.axioms, d.system);
        inst.foralls.insert(inst.foralls.begin(), x);
        int boxed = b.an(std::move(inst));
        int cbf = b.axiom(make_instance(SchemeId::AxCBF, {{"x", F::var(x)}, {"phi", inner}}));
        g[i] = b.mp(boxed, cbf);
        break;
      }
      case Justification::Kind::MP: {
        size_t j = static_cast<size_t>(ln.just.j);
        size_t k = static_cast<size_t>(ln.just.k);
        const Formula& pj = d.lines[j].formula;
        if (pj.is_free(x)) {
          int distr = b.axiom(make_instance(SchemeId::AxDistr, {{"x", F::var(x)}, {"phi", pj}, {"psi", ln.formula}}));
          int step = b.mp(g[k], distr);
          g[i] = b.mp(g[j], step);
        } else {
          int vac = b.axiom(make_instance(SchemeId::AxVac, {{"x", F::var(x)}, {"phi", pj}, {"psi", ln.formula}}));
          int step = b.mp(g[k], vac);
          g[i] = b.mp(g[j], step);
        }
        break;
      }
    }
  }
  int last = g.back();
  if (last != b.size() - 1) b.infer({last}, b.formula(last));
  return std::move(b).finish();
}

Derivation necessitate(const Derivation& d) {
  require_valid(d, "necessitate");
  if (d.system < 4) throw CalculusError("necessitate: necessitation is not available in S3");
  if (!d.hypotheses.empty()) throw CalculusError("necessitate: derivation must have no hypotheses");
  Builder b(d.system, d.axioms);
  std::vector<int> n(d.lines.size());
  for (size_t i = 0; i < d.lines.size(); ++i) {
    const Line& ln = d.lines[i];
    switch (ln.just.kind) {
      case Justification::Kind::Hyp: throw CalculusError("necessitate: unexpected hypothesis line");
      case Justification::Kind::Axiom: n[i] = b.an(ln.just.inst); break;
      case Justification::Kind::AN: {
        int l = b.push(ln);
        Formula inner = ln.formula.lhs();
        int four = b.axiom(make_instance(SchemeId::Ax4, {{"phi", inner}}));
        n[i] = b.mp(l, four);
        break;
      }
      case Justification::Kind::MP: {
        size_t j = static_cast<size_t>(ln.just.j);
        size_t k = static_cast<size_t>(ln.just.k);
        int kk = b.axiom(make_instance(SchemeId::AxK, {{"phi", d.lines[j].formula}, {"psi", ln.formula}}));
        int step = b.mp(n[k], kk);
        n[i] = b.mp(n[j], step);
        break;
      }
    }
  }
  return std::move(b).finish();
}

Derivation eliminate_constant(const Derivation& d, int c, uint32_t y) {
  require_valid(d, "eliminate_constant");
  if (static_cast<int64_t>(y) <= derivation_max_var(d))
    throw CalculusError("eliminate_constant: x" + std::to_string(y) + " is not above every variable of the derivation");
  F vy = F::var(y);
  const Substitution sub = Substitution::single_const(c, vy);
  // Hypotheses are the substitution instances; inner lines use the literal
  // replacement and are bridged where the two differ by bound variables.
  std::vector<Formula> hyps;
  for (const auto& h : d.hypotheses) hyps.push_back(apply(h, sub));
  Builder b(d.system, d.axioms, hyps);
  std::vector<int> at(d.lines.size());
  for (size_t i = 0; i < d.lines.size(); ++i) {
    const Line& ln = d.lines[i];
    Formula target = replace_const(ln.formula, c, vy);
    switch (ln.just.kind) {
      case Justification::Kind::Hyp: {
        int l = b.hyp(ln.just.hyp);
        at[i] = b.formula(l) == target ? l : b.alpha_bridge(l, target);
        break;
      }
      case Justification::Kind::MP:
        at[i] = b.mp(at[static_cast<size_t>(ln.just.j)], at[static_cast<size_t>(ln.just.k)]);
        break;
      case Justification::Kind::Axiom:
      case Justification::Kind::AN: {
        bool an = ln.just.kind == Justification::Kind::AN;
        SchemeInstance inst = ln.just.inst;
        for (auto& [role, w] : inst.witnesses) w = replace_const(w, c, vy);
        int l = an ? b.an(inst) : b.axiom(inst);
        if (b.formula(l) != target) {
          if (!alpha_eq(b.formula(l), target))
            throw CalculusError("eliminate_constant: transformed instance is not alpha-congruent to the line");
          l = b.alpha_bridge(l, target);
        }
        at[i] = l;
        break;
      }
    }
  }
  Formula exact = apply(d.conclusion(), sub);
  int fin = b.alpha_bridge(at.back(), exact);
  if (fin != b.size() - 1) b.infer({fin}, exact);
  return std::move(b).finish();
}

Derivation generalize_constant(const Derivation& d, int c, const Formula& phi, uint32_t x) {
  require_valid(d, "generalize_constant");
  if (phi.has_const(c)) throw CalculusError("generalize_constant: constant occurs in phi");
  for (const auto& h : d.hypotheses)
    if (h.has_const(c)) throw CalculusError("generalize_constant: constant occurs in a hypothesis");
  if (!phi.is_free(x)) throw CalculusError("generalize_constant: x must be free in phi");
  if (d.conclusion() != subst(phi, x, F::constant(c)))
    throw CalculusError("generalize_constant: conclusion is not phi[x:=c]");
  int64_t m = std::max({derivation_max_var(d), phi.max_var(), static_cast<int64_t>(x)});
  uint32_t y = static_cast<uint32_t>(m + 1);
  Derivation e = eliminate_constant(d, c, y);
  Derivation g = generalize(e, y);
  Builder b(g.system, g.axioms, g.hypotheses);
  for (auto& ln : g.lines) b.push(ln);
  Formula target = F::forall(x, phi);
  int last = b.alpha_bridge(b.size() - 1, target);
  if (last != b.size() - 1) b.infer({last}, target);
  return std::move(b).finish();
}

// ------------------------------------------------------------ generators

Formula strict_eq(const Formula& a, const Formula& b) {
  return F::conj(F::box(F::imp(a, b)), F::box(F::imp(b, a)));
}

Derivation generate_rigidity(const Formula& phi, const Formula& psi) {
  Builder b(3, AxiomSet::Full);
  uint32_t x = static_cast<uint32_t>(std::max(phi.max_var(), psi.max_var()) + 1);
  F X = F::var(x);
  F E = F::id(phi, psi);
  int l0 = b.axiom(make_instance(SchemeId::AxIdCong,
                                 {{"x", X}, {"phi", F::id(phi, X)}, {"psi", phi}, {"psi2", psi}}));
  const F& pq = b.formula(l0).rhs();  // P == Q
  F P = pq.lhs();
  F Q = pq.rhs();
  int l1 = b.axiom(make_instance(SchemeId::AxIdCong, {{"x", X}, {"phi", F::box(X)}, {"psi", P}, {"psi2", Q}}));
  F bPQ = b.formula(l1).rhs();  // []P == []Q
  int l2 = b.infer({l0, l1}, F::imp(E, bPQ));
  int l3 = b.axiom(make_instance(SchemeId::AxIdImp, {{"phi", bPQ.lhs()}, {"psi", bPQ.rhs()}}));
  int l4 = b.infer({l2, l3}, F::imp(E, F::imp(bPQ.lhs(), bPQ.rhs())));
  const F& hatphi = P.lhs();
  int l5 = b.an(make_instance(SchemeId::AxAlpha, {{"phi", hatphi}, {"psi", phi}}));
  int l6 = b.infer({l5, l4}, F::imp(E, bPQ.rhs()));
  F target = F::imp(E, F::box(E));
  int last = b.alpha_bridge(l6, target);
  if (last != b.size() - 1) b.infer({last}, target);
  return std::move(b).finish();
}

namespace {

// Helpers for the pure S3 library; every step uses schemes (i)-(iv), MP and AN.
struct S3 {
  Builder b{3, AxiomSet::Full};

  // Derives box a -> box c from the tautology a -> c.
  int box_mono(const F& a, const F& c) {
    int n = b.an(make_instance(SchemeId::AxTaut, {{"phi", F::imp(a, c)}}));
    int k = b.axiom(make_instance(SchemeId::AxK, {{"phi", a}, {"psi", c}}));
    return b.mp(n, k);
  }

  // Derives (box a & box c) -> box(a & c).
  int box_conj(const F& a, const F& c) {
    F ac = F::conj(a, c);
    F c_ac = F::imp(c, ac);
    int n = b.an(make_instance(SchemeId::AxTaut, {{"phi", F::imp(a, c_ac)}}));
    int k1 = b.axiom(make_instance(SchemeId::AxK, {{"phi", a}, {"psi", c_ac}}));
    int s1 = b.mp(n, k1);  // box a -> box(c -> ac)
    int k2 = b.axiom(make_instance(SchemeId::AxK, {{"phi", c}, {"psi", ac}}));
    return b.infer({s1, k2}, F::imp(F::conj(F::box(a), F::box(c)), F::box(ac)));
  }

  // Derives box(a -> c) -> box(box a -> box c).
  int k4(const F& a, const F& c) {
    return b.axiom(make_instance(SchemeId::AxK4strict, {{"phi", a}, {"psi", c}}));
  }

  // From lines p -> q and q -> r derives p -> r.
  int chain(int i, int j) {
    const F& pq = b.formula(i);
    const F& qr = b.formula(j);
    return b.infer({i, j}, F::imp(pq.lhs(), qr.rhs()));
  }
};

// One direction of a binary congruence: from box(l1 -> r1) & box(l2 -> r2)
// derives box(target) where (l1 -> r1) & (l2 -> r2) -> target is a tautology.
int binary_direction(S3& s, const F& i1, const F& i2, const F& target) {
  int conj = s.box_conj(i1, i2);
  int mono = s.box_mono(F::conj(i1, i2), target);
  return s.chain(conj, mono);
}

}  // namespace

std::vector<Derivation> generate_strict_identity_library(const Formula& phi, const Formula& psi,
                                                         const Formula& phi2, const Formula& psi2) {
  for (const F* f : {&phi, &psi, &phi2, &psi2})
    if (!in_fragment(*f, Fragment::Fm_m)) throw CalculusError("strict identity library: inputs must be in Fm_m");
  std::vector<Derivation> out;
  F a = phi, c = psi, a2 = phi2, c2 = psi2;
  F E1 = strict_eq(a, c);
  F E2 = strict_eq(a2, c2);
  F E12 = F::conj(E1, E2);

  {  // (a == c) -> (~a == ~c)
    S3 s;
    int d1 = s.box_mono(F::imp(a, c), F::imp(F::neg(c), F::neg(a)));
    int d2 = s.box_mono(F::imp(c, a), F::imp(F::neg(a), F::neg(c)));
    s.b.infer({d1, d2}, F::imp(E1, strict_eq(F::neg(a), F::neg(c))));
    out.push_back(std::move(s.b).finish());
  }

  auto binary = [&](auto mk, bool antitone_left) {
    S3 s;
    F L = mk(a, a2);
    F R = mk(c, c2);
    // forward: L -> R ; backward: R -> L
    F fw1 = antitone_left ? F::imp(c, a) : F::imp(a, c);
    F bw1 = antitone_left ? F::imp(a, c) : F::imp(c, a);
    int fw = binary_direction(s, fw1, F::imp(a2, c2), F::imp(L, R));
    int bw = binary_direction(s, bw1, F::imp(c2, a2), F::imp(R, L));
    s.b.infer({fw, bw}, F::imp(E12, strict_eq(L, R)));
    out.push_back(std::move(s.b).finish());
  };
  binary([](const F& p, const F& q) { return F::imp(p, q); }, true);
  binary([](const F& p, const F& q) { return F::conj(p, q); }, false);
  binary([](const F& p, const F& q) { return F::disj(p, q); }, false);

  {  // ((a == c) & (a2 == c2)) -> ((a == a2) == (c == c2))
    S3 s;
    F i1 = F::imp(a, c), i2 = F::imp(c, a), i3 = F::imp(a2, c2), i4 = F::imp(c2, a2);
    F X = F::conj(F::conj(i1, i2), F::conj(i3, i4));
    // box(X) from the four boxed implications
    int c12 = s.box_conj(i1, i2);
    int c34 = s.box_conj(i3, i4);
    int cx = s.box_conj(F::conj(i1, i2), F::conj(i3, i4));
    int boxX = s.b.infer({c12, c34, cx}, F::imp(E12, F::box(X)));

    auto one_way = [&](const F& p, const F& p2, const F& q, const F& q2) {
      // box X -> box(S(p,p2) -> S(q,q2))
      F u1 = F::imp(p, p2), v1 = F::imp(q, q2);
      F u2 = F::imp(p2, p), v2 = F::imp(q2, q);
      int m1 = s.box_mono(X, F::imp(u1, v1));
      int k1 = s.k4(u1, v1);
      int h1 = s.chain(m1, k1);  // box X -> box(box u1 -> box v1)
      int m2 = s.box_mono(X, F::imp(u2, v2));
      int k2 = s.k4(u2, v2);
      int h2 = s.chain(m2, k2);
      F w1 = F::imp(F::box(u1), F::box(v1));
      F w2 = F::imp(F::box(u2), F::box(v2));
      int cw = s.box_conj(w1, w2);
      int pair = s.b.infer({h1, h2, cw}, F::imp(F::box(X), F::box(F::conj(w1, w2))));
      int mono = s.box_mono(F::conj(w1, w2), F::imp(strict_eq(p, p2), strict_eq(q, q2)));
      return s.chain(pair, mono);
    };
    int fw = one_way(a, a2, c, c2);
    int bw = one_way(c, c2, a, a2);
    s.b.infer({boxX, fw, bw}, F::imp(E12, strict_eq(strict_eq(a, a2), strict_eq(c, c2))));
    out.push_back(std::move(s.b).finish());
  }

  {  // (a == c) -> ([]a == []c)
    S3 s;
    int k1 = s.k4(a, c);
    int k2 = s.k4(c, a);
    s.b.infer({k1, k2}, F::imp(E1, strict_eq(F::box(a), F::box(c))));
    out.push_back(std::move(s.b).finish());
  }
  return out;
}

}  // namespace nfk
