#pragma once
// Straightforward reference implementations used as test oracles. They follow
// the definitions directly and share no code paths with the library beyond
// the formula and structure types.

#include <functional>
#include <map>
#include <set>
#include <vector>

#include "nfk/formula.hpp"
#include "nfk/kripke.hpp"
#include "nfk/model.hpp"
#include "nfk/prealgebra.hpp"

namespace oracle {

using nfk::Formula;
using nfk::Op;

// Value of f in m; gamma maps variables, unmentioned ones denote bot.
inline int eval(const nfk::ModalModel& m, std::map<uint32_t, int> g, const Formula& f) {
  const int n = m.ops.n;
  auto get = [&](uint32_t x) {
    auto it = g.find(x);
    return it == g.end() ? m.ops.bot : it->second;
  };
  switch (f.op()) {
    case Op::Var: return get(f.var_index());
    case Op::Const: {
      if (f.const_id() == nfk::kBot) return m.ops.bot;
      if (f.const_id() == nfk::kTop) return m.ops.top;
      return m.gamma.at(nfk::constant_name(f.const_id()));
    }
    case Op::Neg: return m.ops.neg[static_cast<size_t>(eval(m, g, f.lhs()))];
    case Op::Box: return m.box[static_cast<size_t>(eval(m, g, f.lhs()))];
    case Op::Or: return m.ops.or_[static_cast<size_t>(eval(m, g, f.lhs()) * n + eval(m, g, f.rhs()))];
    case Op::And: return m.ops.and_[static_cast<size_t>(eval(m, g, f.lhs()) * n + eval(m, g, f.rhs()))];
    case Op::Imp: return m.ops.imp[static_cast<size_t>(eval(m, g, f.lhs()) * n + eval(m, g, f.rhs()))];
    case Op::Id: return m.id[static_cast<size_t>(eval(m, g, f.lhs()) * n + eval(m, g, f.rhs()))];
    case Op::Forall: {
      uint64_t code = 0, pw = 1;
      for (int a = 0; a < n; ++a, pw *= static_cast<uint64_t>(n)) {
        auto h = g;
        h[f.var_index()] = a;
        code += pw * static_cast<uint64_t>(eval(m, h, f.lhs()));
      }
      return m.forall_tab[static_cast<size_t>(code)];
    }
  }
  return -1;
}

// Worlds (as a std::set) where f holds.
inline std::set<int> denote(const nfk::KripkeFrame& fr, std::map<uint32_t, std::set<int>> g, const Formula& f) {
  const int N = fr.size();
  std::set<int> W;
  for (int w = 0; w < N; ++w) W.insert(w);
  auto succ = [&](int w) {
    std::set<int> s;
    for (int v = 0; v < N; ++v)
      if ((fr.R[static_cast<size_t>(w)] >> v) & 1u) s.insert(v);
    return s;
  };
  auto as_set = [&](nfk::Subset s) {
    std::set<int> out;
    for (int w = 0; w < N; ++w)
      if ((s >> w) & 1u) out.insert(w);
    return out;
  };
  switch (f.op()) {
    case Op::Var: return g.count(f.var_index()) ? g[f.var_index()] : std::set<int>{};
    case Op::Const:
      if (f.const_id() == nfk::kBot) return {};
      return W;  // only bot/top are used with this oracle
    case Op::Neg: {
      auto a = denote(fr, g, f.lhs());
      std::set<int> out;
      for (int w : W)
        if (!a.count(w)) out.insert(w);
      return out;
    }
    case Op::Box: {
      auto a = denote(fr, g, f.lhs());
      std::set<int> out;
      for (int w : W) {
        if (!((fr.normal >> w) & 1u)) continue;
        bool all = true;
        for (int v : succ(w)) all = all && a.count(v);
        if (all) out.insert(w);
      }
      return out;
    }
    case Op::Or:
    case Op::And:
    case Op::Imp:
    case Op::Id: {
      auto a = denote(fr, g, f.lhs());
      auto b = denote(fr, g, f.rhs());
      std::set<int> out;
      for (int w : W) {
        bool in = false;
        if (f.op() == Op::Or) in = a.count(w) || b.count(w);
        if (f.op() == Op::And) in = a.count(w) && b.count(w);
        if (f.op() == Op::Imp) in = !a.count(w) || b.count(w);
        if (f.op() == Op::Id) {
          in = true;
          for (int v : succ(w)) in = in && (a.count(v) == b.count(v));
        }
        if (in) out.insert(w);
      }
      return out;
    }
    case Op::Forall: {
      std::set<int> out = W;
      for (nfk::Subset p : fr.props) {
        auto h = g;
        h[f.var_index()] = as_set(p);
        auto a = denote(fr, h, f.lhs());
        std::set<int> keep;
        for (int w : out)
          if (a.count(w)) keep.insert(w);
        out = keep;
      }
      return out;
    }
  }
  return {};
}

// Truth-table tautology test: maximal non-Boolean subformulas are atoms.
inline bool tautology(const Formula& f) {
  std::vector<Formula> atoms;
  std::function<void(const Formula&)> collect = [&](const Formula& h) {
    switch (h.op()) {
      case Op::Neg: collect(h.lhs()); return;
      case Op::Or:
      case Op::And:
      case Op::Imp: collect(h.lhs()); collect(h.rhs()); return;
      case Op::Const:
        if (h.const_id() == nfk::kBot || h.const_id() == nfk::kTop) return;
        [[fallthrough]];
      default:
        for (const auto& a : atoms)
          if (a == h) return;
        atoms.push_back(h);
    }
  };
  collect(f);
  if (atoms.size() > 20) return false;
  for (uint32_t v = 0; v < (1u << atoms.size()); ++v) {
    std::function<bool(const Formula&)> val = [&](const Formula& h) -> bool {
      switch (h.op()) {
        case Op::Neg: return !val(h.lhs());
        case Op::Or: return val(h.lhs()) || val(h.rhs());
        case Op::And: return val(h.lhs()) && val(h.rhs());
        case Op::Imp: return !val(h.lhs()) || val(h.rhs());
        case Op::Const:
          if (h.const_id() == nfk::kBot) return false;
          if (h.const_id() == nfk::kTop) return true;
          [[fallthrough]];
        default:
          for (size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i] == h) return (v >> i) & 1u;
      }
      return false;
    };
    if (!val(f)) return false;
  }
  return true;
}

// Filters straight from the definition, by brute force over all subsets.
inline std::vector<nfk::Subset> filters(const nfk::PreAlgebra& p) {
  const int n = p.n();
  std::vector<nfk::Subset> out;
  for (nfk::Subset s = 1; s < (nfk::Subset{1} << n); ++s) {
    bool ok = !((s >> p.ops.bot) & 1u);
    for (int a = 0; a < n && ok; ++a) {
      if (!((s >> a) & 1u)) continue;
      for (int b = 0; b < n && ok; ++b) {
        if (p.leq[static_cast<size_t>(a * n + b)] && !((s >> b) & 1u)) ok = false;
        if (((s >> b) & 1u) && !((s >> p.ops.and_[static_cast<size_t>(a * n + b)]) & 1u)) ok = false;
      }
    }
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace oracle
