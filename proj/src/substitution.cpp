#include "nfk/substitution.hpp"

#include <algorithm>

namespace nfk {

Substitution Substitution::single(uint32_t x, Formula f) {
  Substitution s;
  s.bind_var(x, std::move(f));
  return s;
}

Substitution Substitution::single_const(int c, Formula f) {
  Substitution s;
  s.bind(Symbol::con(c), std::move(f));
  return s;
}

void Substitution::bind(Symbol s, Formula f) { map_[s] = std::move(f); }

Formula Substitution::lookup_var(uint32_t x) const {
  auto it = map_.find(Symbol::var(x));
  return it == map_.end() ? Formula::var(x) : it->second;
}

Formula Substitution::lookup_const(int c) const {
  auto it = map_.find(Symbol::con(c));
  return it == map_.end() ? Formula::constant(c) : it->second;
}

bool Substitution::touches_constants() const {
  return std::any_of(map_.begin(), map_.end(), [](const auto& kv) { return kv.first.is_const; });
}

Substitution Substitution::updated(Symbol s, Formula f) const {
  Substitution out = *this;
  out.bind(s, std::move(f));
  return out;
}

bool Substitution::operator==(const Substitution& o) const { return map_ == o.map_; }

namespace {

// Largest index in the union of fvar(s(u)) over the free symbols of f, or -1.
int64_t constraint_max(const Formula& f, const Substitution& s) {
  int64_t m = -1;
  for (uint32_t u : f.fvars()) {
    Formula t = s.lookup_var(u);
    if (!t.fvars().empty()) m = std::max<int64_t>(m, t.fvars().back());
  }
  for (int c : f.consts()) {
    Formula t = s.lookup_const(c);
    if (!t.fvars().empty()) m = std::max<int64_t>(m, t.fvars().back());
  }
  return m;
}

Formula apply_rec(const Formula& f, const Substitution& s) {
  switch (f.op()) {
    case Op::Var: return s.lookup_var(f.var_index());
    case Op::Const: return s.lookup_const(f.const_id());
    case Op::Neg: return Formula::neg(apply_rec(f.lhs(), s));
    case Op::Box: return Formula::box(apply_rec(f.lhs(), s));
    case Op::Or: return Formula::disj(apply_rec(f.lhs(), s), apply_rec(f.rhs(), s));
    case Op::And: return Formula::conj(apply_rec(f.lhs(), s), apply_rec(f.rhs(), s));
    case Op::Imp: return Formula::imp(apply_rec(f.lhs(), s), apply_rec(f.rhs(), s));
    case Op::Id: return Formula::id(apply_rec(f.lhs(), s), apply_rec(f.rhs(), s));
    case Op::Forall: {
      uint32_t y = static_cast<uint32_t>(constraint_max(f, s) + 1);
      Substitution inner = s.updated(Symbol::var(f.var_index()), Formula::var(y));
      return Formula::forall(y, apply_rec(f.lhs(), inner));
    }
  }
  return f;
}

}  // namespace

Formula apply(const Formula& f, const Substitution& s) { return apply_rec(f, s); }

Formula subst(const Formula& f, uint32_t x, const Formula& g) {
  return apply(f, Substitution::single(x, g));
}

bool alpha_eq(const Formula& f, const Formula& g) {
  if (f == g) return true;
  Substitution eps;
  return apply(f, eps) == apply(g, eps);
}

Substitution compose(const Substitution& s1, const Substitution& s2) {
  Substitution out;
  for (const auto& [sym, _] : s2.bindings()) {
    Formula base = sym.is_const ? s1.lookup_const(static_cast<int>(sym.index)) : s1.lookup_var(sym.index);
    out.bind(sym, apply(base, s2));
  }
  for (const auto& [sym, f] : s1.bindings()) out.bind(sym, apply(f, s2));
  return out;
}

Substitution parse_substitution(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Substitution s;
  for (const auto& [target, text] : pairs) {
    Formula t = parse(target);
    Formula value = parse(text);
    if (t.op() == Op::Var) s.bind_var(t.var_index(), value);
    else if (t.op() == Op::Const) s.bind(Symbol::con(t.const_id()), value);
    else throw ParseError("substitution target must be a variable or constant", 0);
  }
  return s;
}

}  // namespace nfk
