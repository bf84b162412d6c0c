#include "nfk/kripke.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <unordered_map>

namespace nfk {

using nlohmann::json;
using F = Formula;

int KripkeFrame::prop_index(Subset p) const {
  auto it = std::lower_bound(props.begin(), props.end(), p);
  return it != props.end() && *it == p ? static_cast<int>(it - props.begin()) : -1;
}

Subset Valuation::get(uint32_t x) const {
  auto it = vars.find(x);
  return it == vars.end() ? 0 : it->second;
}

Subset box_set(const KripkeFrame& fr, Subset a) {
  Subset out = 0;
  for (int w = 0; w < fr.size(); ++w)
    if (contains(fr.normal, w) && (fr.R[static_cast<size_t>(w)] & ~a) == 0) out |= singleton(w);
  return out;
}

Subset id_set(const KripkeFrame& fr, Subset a, Subset b) {
  Subset out = 0;
  for (int w = 0; w < fr.size(); ++w)
    if (((a ^ b) & fr.R[static_cast<size_t>(w)]) == 0) out |= singleton(w);
  return out;
}

ValidationReport validate_frame(const KripkeFrame& fr) {
  ValidationReport r;
  int n = fr.size();
  if (n < 1 || n > 64) {
    r.fail("frame needs 1..64 worlds");
    return r;
  }
  if (fr.R.size() != static_cast<size_t>(n)) {
    r.fail("relation has the wrong size");
    return r;
  }
  if (fr.kind < 3 || fr.kind > 5) r.fail("kind must be 3, 4 or 5");
  if (fr.normal == 0) r.fail("no normal world");
  if ((fr.normal & ~fr.all()) != 0) r.fail("normal worlds out of range");
  if (!r.ok) return r;
  for (int w = 0; w < n; ++w) {
    Subset Rw = fr.R[static_cast<size_t>(w)];
    if (!contains(Rw, w)) r.fail("R not reflexive at " + fr.worlds[static_cast<size_t>(w)]);
    for (int v = 0; v < n; ++v)
      if (contains(Rw, v) && (fr.R[static_cast<size_t>(v)] & ~Rw) != 0)
        r.fail("R not transitive at " + fr.worlds[static_cast<size_t>(w)]);
    if (!contains(fr.normal, w) && Rw != singleton(w))
      r.fail("non-normal world " + fr.worlds[static_cast<size_t>(w)] + " sees another world");
    if (fr.kind == 5)
      for (int v = 0; v < n; ++v)
        if (contains(Rw, v) && !contains(fr.R[static_cast<size_t>(v)], w)) r.fail("kind 5 needs a symmetric R");
  }
  if (fr.kind >= 4 && fr.normal != fr.all()) r.fail("kind 4 and 5 frames have only normal worlds");
  if (!r.ok) return r;
  if (!std::is_sorted(fr.props.begin(), fr.props.end()) ||
      std::adjacent_find(fr.props.begin(), fr.props.end()) != fr.props.end())
    r.fail("props must be sorted and distinct");
  if (fr.prop_index(0) < 0 || fr.prop_index(fr.all()) < 0) r.fail("P must contain the empty set and W");
  if (!r.ok) return r;
  for (Subset a : fr.props) {
    if (fr.prop_index(fr.all() & ~a) < 0) r.fail("P not closed under complement");
    if (fr.prop_index(box_set(fr, a)) < 0) r.fail("P not closed under box");
    for (Subset b : fr.props) {
      if (fr.prop_index(a | b) < 0) r.fail("P not closed under union");
      if (fr.prop_index(a & b) < 0) r.fail("P not closed under intersection");
      if (fr.prop_index(id_set(fr, a, b)) < 0) r.fail("P not closed under identity");
      if (!r.ok) return r;
    }
  }
  return r;
}

namespace {

Subset denote_rec(const KripkeFrame& fr, std::map<uint32_t, Subset>& env, const Valuation& g, const F& f) {
  Subset W = fr.all();
  switch (f.op()) {
    case Op::Var: {
      auto it = env.find(f.var_index());
      return it == env.end() ? g.get(f.var_index()) : it->second;
    }
    case Op::Const: {
      if (f.const_id() == kBot) return 0;
      if (f.const_id() == kTop) return W;
      auto it = g.consts.find(constant_name(f.const_id()));
      if (it == g.consts.end()) throw ModelError("unbound constant #" + constant_name(f.const_id()));
      return it->second;
    }
    case Op::Neg: return W & ~denote_rec(fr, env, g, f.lhs());
    case Op::Box: return box_set(fr, denote_rec(fr, env, g, f.lhs()));
    case Op::Or: return denote_rec(fr, env, g, f.lhs()) | denote_rec(fr, env, g, f.rhs());
    case Op::And: return denote_rec(fr, env, g, f.lhs()) & denote_rec(fr, env, g, f.rhs());
    case Op::Imp: return (W & ~denote_rec(fr, env, g, f.lhs())) | denote_rec(fr, env, g, f.rhs());
    case Op::Id: return id_set(fr, denote_rec(fr, env, g, f.lhs()), denote_rec(fr, env, g, f.rhs()));
    case Op::Forall: {
      uint32_t x = f.var_index();
      auto saved = env.find(x) == env.end() ? std::optional<Subset>() : std::optional<Subset>(env[x]);
      Subset acc = W;
      for (Subset p : fr.props) {
        env[x] = p;
        acc &= denote_rec(fr, env, g, f.lhs());
      }
      if (saved) env[x] = *saved;
      else env.erase(x);
      return acc;
    }
  }
  return 0;
}

}  // namespace

Subset denote(const KripkeFrame& fr, const Valuation& g, const Formula& f) {
  std::map<uint32_t, Subset> env;
  return denote_rec(fr, env, g, f);
}

bool ksat(const KripkeFrame& fr, int w, const Valuation& g, const Formula& f) {
  return contains(denote(fr, g, f), w);
}

std::vector<KripkeFrame> enumerate_frames(int n_max, int kind) {
  std::vector<KripkeFrame> out;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<std::pair<int, int>> off;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        if (a != b) off.push_back({a, b});
    std::vector<Subset> props;
    for (Subset p = 0; p <= full_set(n); ++p) props.push_back(p);
    for (uint64_t bits = 0; bits < (uint64_t{1} << off.size()); ++bits) {
      std::vector<Subset> R(static_cast<size_t>(n));
      for (int a = 0; a < n; ++a) R[static_cast<size_t>(a)] = singleton(a);
      for (size_t i = 0; i < off.size(); ++i)
        if ((bits >> i) & 1u) R[static_cast<size_t>(off[i].first)] |= singleton(off[i].second);
      bool ok = true;
      for (int a = 0; a < n && ok; ++a)
        for (int b = 0; b < n && ok; ++b)
          if (contains(R[static_cast<size_t>(a)], b)) {
            if ((R[static_cast<size_t>(b)] & ~R[static_cast<size_t>(a)]) != 0) ok = false;
            if (kind == 5 && !contains(R[static_cast<size_t>(b)], a)) ok = false;
          }
      if (!ok) continue;
      for (Subset N = 1; N <= full_set(n); ++N) {
        if (kind >= 4 && N != full_set(n)) continue;
        bool fine = true;
        for (int a = 0; a < n; ++a)
          if (!contains(N, a) && R[static_cast<size_t>(a)] != singleton(a)) fine = false;
        if (!fine) continue;
        KripkeFrame fr;
        for (int a = 0; a < n; ++a) fr.worlds.push_back("w" + std::to_string(a));
        fr.normal = N;
        fr.R = R;
        fr.props = props;
        fr.kind = kind;
        out.push_back(std::move(fr));
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ world to model

WorldModel world_to_model(const KripkeFrame& fr, int w, const Valuation& g, bool enriched) {
  if (w < 0 || w >= fr.size()) throw ModelError("world out of range");
  const Subset Rw = fr.R[static_cast<size_t>(w)];
  WorldModel out;
  std::set<Subset> uni;
  for (Subset p : fr.props) uni.insert(p & Rw);
  out.universe.assign(uni.begin(), uni.end());
  int n = static_cast<int>(out.universe.size());
  if (n > kMaxForallN) throw ModelError("constructed universe has more than " + std::to_string(kMaxForallN) + " elements");
  auto index = [&](Subset s) {
    auto it = std::lower_bound(out.universe.begin(), out.universe.end(), s);
    if (it == out.universe.end() || *it != s)
      throw ModelError("induced operation leaves the universe: frame not closed under formulas");
    return static_cast<int>(it - out.universe.begin());
  };
  for (Subset p : fr.props) out.rho.push_back(index(p & Rw));

  BoolOps o;
  o.n = n;
  o.bot = index(0);
  o.top = index(Rw);
  for (int a = 0; a < n; ++a) o.neg.push_back(static_cast<uint8_t>(index(Rw & ~out.universe[static_cast<size_t>(a)])));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Subset A = out.universe[static_cast<size_t>(a)], B = out.universe[static_cast<size_t>(b)];
      o.or_.push_back(static_cast<uint8_t>(index(A | B)));
      o.and_.push_back(static_cast<uint8_t>(index(A & B)));
      o.imp.push_back(static_cast<uint8_t>(index((Rw & ~A) | B)));
    }
  ModalModel& m = out.m;
  m.ops = o;
  // box and id through every representative; disagreement means the
  // induced operation is not well defined.
  m.box.assign(static_cast<size_t>(n), 0);
  std::vector<int> box_seen(static_cast<size_t>(n), -1);
  for (size_t i = 0; i < fr.props.size(); ++i) {
    int a = out.rho[i];
    int v = index(box_set(fr, fr.props[i]) & Rw);
    if (box_seen[static_cast<size_t>(a)] >= 0 && box_seen[static_cast<size_t>(a)] != v)
      throw ModelError("box is not well defined on the constructed universe");
    box_seen[static_cast<size_t>(a)] = v;
    m.box[static_cast<size_t>(a)] = static_cast<uint8_t>(v);
  }
  m.id.assign(static_cast<size_t>(n * n), 0);
  std::vector<int> id_seen(static_cast<size_t>(n * n), -1);
  for (size_t i = 0; i < fr.props.size(); ++i)
    for (size_t j = 0; j < fr.props.size(); ++j) {
      size_t cell = static_cast<size_t>(out.rho[i] * n + out.rho[j]);
      int v = index(id_set(fr, fr.props[i], fr.props[j]) & Rw);
      if (id_seen[cell] >= 0 && id_seen[cell] != v)
        throw ModelError("identity is not well defined on the constructed universe");
      id_seen[cell] = v;
      m.id[cell] = static_cast<uint8_t>(v);
    }
  for (int a = 0; a < n; ++a) {
    if (contains(out.universe[static_cast<size_t>(a)], w)) m.truth |= singleton(a);
    if (contains(fr.normal, w) && (Rw & ~out.universe[static_cast<size_t>(a)]) == 0) m.nec |= singleton(a);
  }
  m.forall_tab = meet_forall_table(o);
  if (enriched)
    for (size_t i = 0; i < fr.props.size(); ++i) m.gamma["p" + std::to_string(i)] = out.rho[i];
  for (const auto& [name, s] : g.consts) m.gamma[name] = index(s & Rw);
  for (const auto& [x, s] : g.vars) out.gamma.set(x, index(s & Rw));
  return out;
}

// ------------------------------------------------------------ model to frame

UltrafilterFrame model_to_kripke(const ModalModel& m, const Assignment& g, int system) {
  if (system == 3) throw ModelError("the ultrafilter construction is only established for S4 and S5 models");
  if (system != 4 && system != 5) throw ModelError("system must be 4 or 5");
  ModelReport rep = validate_modal_model(m, system);
  if (!rep.ok) throw ModelError("invalid model: " + rep.violated);
  int n = m.n();
  PreAlgebra p{m.ops, std::vector<uint8_t>(static_cast<size_t>(n * n))};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) p.leq[static_cast<size_t>(a * n + b)] = m.le(a, b);
  UltrafilterFrame uf;
  uf.ultrafilters = filters(p).ultra;
  std::sort(uf.ultrafilters.begin(), uf.ultrafilters.end());
  int k = static_cast<int>(uf.ultrafilters.size());
  if (k > 64) throw ModelError("too many ultrafilters");
  KripkeFrame& fr = uf.fr;
  fr.kind = system;
  std::vector<Subset> nec_t;
  for (int i = 0; i < k; ++i) {
    fr.worlds.push_back("T" + std::to_string(i));
    Subset s = 0;
    for (int a = 0; a < n; ++a)
      if (contains(uf.ultrafilters[static_cast<size_t>(i)], m.Box(a))) s |= singleton(a);
    nec_t.push_back(s);
  }
  fr.normal = full_set(k);
  fr.R.assign(static_cast<size_t>(k), 0);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if ((nec_t[static_cast<size_t>(i)] & ~uf.ultrafilters[static_cast<size_t>(j)]) == 0)
        fr.R[static_cast<size_t>(i)] |= singleton(j);
  std::vector<Subset> ext(static_cast<size_t>(n), 0);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < k; ++i)
      if (contains(uf.ultrafilters[static_cast<size_t>(i)], a)) ext[static_cast<size_t>(a)] |= singleton(i);
  std::set<Subset> ps(ext.begin(), ext.end());
  fr.props.assign(ps.begin(), ps.end());
  for (int a = 0; a < n; ++a) uf.prop_of.push_back(fr.prop_index(ext[static_cast<size_t>(a)]));
  for (const auto& [x, v] : g.values()) uf.g.vars[x] = ext[static_cast<size_t>(v)];
  auto it = std::find(uf.ultrafilters.begin(), uf.ultrafilters.end(), m.truth);
  if (it == uf.ultrafilters.end()) throw ModelError("TRUE is not among the ultrafilters");
  uf.w0 = static_cast<int>(it - uf.ultrafilters.begin());

  uf.reflexive = uf.transitive = uf.equivalence = true;
  uf.all_normal = std::all_of(nec_t.begin(), nec_t.end(), [](Subset s) { return s != 0; });
  for (int i = 0; i < k; ++i) {
    Subset Ri = fr.R[static_cast<size_t>(i)];
    if (!contains(Ri, i)) uf.reflexive = false;
    for (int j = 0; j < k; ++j) {
      if (!contains(Ri, j)) continue;
      if ((fr.R[static_cast<size_t>(j)] & ~Ri) != 0) uf.transitive = false;
      if (!contains(fr.R[static_cast<size_t>(j)], i)) uf.equivalence = false;
    }
  }
  uf.equivalence = uf.equivalence && uf.reflexive && uf.transitive;
  return uf;
}

// ------------------------------------------------------------ agreement

namespace {

struct Cls {
  uint8_t flags = 0;            // bit i: x_i free
  std::vector<uint8_t> mf;      // a0 * n + a1
  std::vector<Subset> kf;       // i0 * |P| + i1
  F witness;
};

std::string key_of(const Cls& c) {
  std::string k(1, static_cast<char>(c.flags));
  k.append(reinterpret_cast<const char*>(c.mf.data()), c.mf.size());
  k.append(reinterpret_cast<const char*>(c.kf.data()), c.kf.size() * sizeof(Subset));
  return k;
}

std::string describe(const F& f, const std::array<int, 4>& p, const KripkeFrame& fr, int world) {
  return render(f) + " with x0=" + std::to_string(p[0]) + ", x1=" + std::to_string(p[1]) + " / props " +
         std::to_string(p[2]) + "," + std::to_string(p[3]) + " at " + fr.worlds[static_cast<size_t>(world)];
}

}  // namespace

AgreementReport agreement_check(const ModalModel& m, const KripkeFrame& fr, const AgreementSpec& spec,
                                int depth, Fragment frag) {
  AgreementReport rep;
  const int n = m.n();
  const int np = static_cast<int>(fr.props.size());
  const Subset W = fr.all();
  const BoolOps& o = m.ops;
  const bool allow_box = frag != Fragment::Fm_p;
  const bool allow_full = frag == Fragment::Full;

  std::unordered_map<std::string, size_t> seen;
  std::vector<Cls> all;
  std::vector<size_t> level, next;

  auto check = [&](const Cls& c) {
    for (const auto& p : spec.pairs) {
      int v = c.mf[static_cast<size_t>(p[0] * n + p[1])];
      Subset s = c.kf[static_cast<size_t>(p[2] * np + p[3])];
      for (const auto& [world, truth] : spec.worlds) {
        ++rep.checks;
        if (contains(truth, v) != contains(s, world))
          rep.fail("disagreement on " + describe(c.witness, p, fr, world) + ": model " +
                   (contains(truth, v) ? "true" : "false") + ", frame " + (contains(s, world) ? "true" : "false"));
      }
    }
  };
  auto insert = [&](Cls&& c) {
    std::string k = key_of(c);
    if (seen.count(k)) return;
    seen.emplace(std::move(k), all.size());
    check(c);
    next.push_back(all.size());
    all.push_back(std::move(c));
  };

  auto atom = [&](uint8_t flags, auto mval, auto kval, F w) {
    Cls c;
    c.flags = flags;
    c.witness = w;
    c.mf.resize(static_cast<size_t>(n * n));
    c.kf.resize(static_cast<size_t>(np * np));
    for (int a0 = 0; a0 < n; ++a0)
      for (int a1 = 0; a1 < n; ++a1) c.mf[static_cast<size_t>(a0 * n + a1)] = static_cast<uint8_t>(mval(a0, a1));
    for (int i0 = 0; i0 < np; ++i0)
      for (int i1 = 0; i1 < np; ++i1) c.kf[static_cast<size_t>(i0 * np + i1)] = kval(i0, i1);
    insert(std::move(c));
  };
  atom(1, [](int a0, int) { return a0; }, [&](int i0, int) { return fr.props[static_cast<size_t>(i0)]; }, F::var(0));
  atom(2, [](int, int a1) { return a1; }, [&](int, int i1) { return fr.props[static_cast<size_t>(i1)]; }, F::var(1));
  atom(0, [&](int, int) { return o.bot; }, [](int, int) { return Subset{0}; }, F::bot());
  atom(0, [&](int, int) { return o.top; }, [&](int, int) { return W; }, F::top());

  auto unary = [&](const Cls& a, auto mop, auto kop, F w) {
    Cls c;
    c.flags = a.flags;
    c.witness = w;
    c.mf.resize(a.mf.size());
    c.kf.resize(a.kf.size());
    for (size_t i = 0; i < a.mf.size(); ++i) c.mf[i] = static_cast<uint8_t>(mop(a.mf[i]));
    for (size_t i = 0; i < a.kf.size(); ++i) c.kf[i] = kop(a.kf[i]);
    insert(std::move(c));
  };
  auto binary = [&](const Cls& a, const Cls& b, auto mop, auto kop, F w) {
    Cls c;
    c.flags = a.flags | b.flags;
    c.witness = w;
    c.mf.resize(a.mf.size());
    c.kf.resize(a.kf.size());
    for (size_t i = 0; i < a.mf.size(); ++i) c.mf[i] = static_cast<uint8_t>(mop(a.mf[i], b.mf[i]));
    for (size_t i = 0; i < a.kf.size(); ++i) c.kf[i] = kop(a.kf[i], b.kf[i]);
    insert(std::move(c));
  };
  auto bind = [&](const Cls& a, int x) {
    Cls c;
    c.flags = static_cast<uint8_t>(a.flags & ~(1u << x));
    c.witness = F::forall(static_cast<uint32_t>(x), a.witness);
    c.mf.resize(a.mf.size());
    c.kf.resize(a.kf.size());
    for (int keep = 0; keep < n; ++keep) {
      uint64_t code = 0, pw = 1;
      for (int z = 0; z < n; ++z, pw *= static_cast<uint64_t>(n))
        code += pw * (x == 0 ? a.mf[static_cast<size_t>(z * n + keep)] : a.mf[static_cast<size_t>(keep * n + z)]);
      int v = m.Forall(code);
      for (int z = 0; z < n; ++z) c.mf[static_cast<size_t>(x == 0 ? z * n + keep : keep * n + z)] = static_cast<uint8_t>(v);
    }
    for (int keep = 0; keep < np; ++keep) {
      Subset acc = W;
      for (int z = 0; z < np; ++z)
        acc &= x == 0 ? a.kf[static_cast<size_t>(z * np + keep)] : a.kf[static_cast<size_t>(keep * np + z)];
      for (int z = 0; z < np; ++z) c.kf[static_cast<size_t>(x == 0 ? z * np + keep : keep * np + z)] = acc;
    }
    insert(std::move(c));
  };

  // Classes are stored up to depth - 1. A formula of the last level is an
  // operator applied to stored classes, and under a fixed related pair its
  // value on both sides depends only on the operands' values there, except
  // for the quantifier, which is applied to whole classes.
  for (int d = 1; d < depth; ++d) {
    level.swap(next);
    next.clear();
    size_t prior = all.size();
    for (size_t li : level) {
      // `all` grows during the loop; copy the class first.
      const Cls a = all[li];
      unary(a, [&](int v) { return o.Neg(v); }, [&](Subset s) { return W & ~s; }, F::neg(a.witness));
      if (allow_box) unary(a, [&](int v) { return m.Box(v); }, [&](Subset s) { return box_set(fr, s); }, F::box(a.witness));
      if (allow_full)
        for (int x = 0; x < 2; ++x)
          if ((a.flags >> x) & 1u) bind(a, x);
      for (size_t j = 0; j < prior; ++j) {
        const Cls b = all[j];
        for (int dir = 0; dir < 2; ++dir) {
          const Cls& l = dir == 0 ? a : b;
          const Cls& r = dir == 0 ? b : a;
          binary(l, r, [&](int u, int v) { return o.Or(u, v); }, [](Subset s, Subset t) { return s | t; },
                 F::disj(l.witness, r.witness));
          binary(l, r, [&](int u, int v) { return o.And(u, v); }, [](Subset s, Subset t) { return s & t; },
                 F::conj(l.witness, r.witness));
          binary(l, r, [&](int u, int v) { return o.Imp(u, v); }, [&](Subset s, Subset t) { return (W & ~s) | t; },
                 F::imp(l.witness, r.witness));
          if (allow_full)
            binary(l, r, [&](int u, int v) { return m.Id(u, v); }, [&](Subset s, Subset t) { return id_set(fr, s, t); },
                   F::id(l.witness, r.witness));
        }
      }
    }
  }
  rep.classes = all.size();

  // Per related pair: every (model value, frame set) realised by a formula of
  // depth <= depth, with one witness each.
  using Val = std::pair<int, Subset>;
  std::vector<std::map<Val, F>> realised(spec.pairs.size());
  auto at = [&](const Cls& c, const std::array<int, 4>& p) {
    return Val{c.mf[static_cast<size_t>(p[0] * n + p[1])], c.kf[static_cast<size_t>(p[2] * np + p[3])]};
  };
  auto check_val = [&](const Val& v, const F& w, const std::array<int, 4>& p) {
    for (const auto& [world, truth] : spec.worlds) {
      ++rep.checks;
      if (contains(truth, v.first) != contains(v.second, world))
        rep.fail("disagreement on " + describe(w, p, fr, world) + ": model " +
                 (contains(truth, v.first) ? "true" : "false") + ", frame " +
                 (contains(v.second, world) ? "true" : "false"));
    }
  };
  for (size_t pi = 0; pi < spec.pairs.size(); ++pi)
    for (const Cls& c : all) realised[pi].emplace(at(c, spec.pairs[pi]), c.witness);
  std::vector<std::vector<std::pair<Val, F>>> bases;
  for (const auto& r : realised) bases.emplace_back(r.begin(), r.end());

  if (depth >= 1) {
    // Quantifier on the newest stored level (older ones were bound already).
    if (allow_full)
      for (size_t li : next) {
        const Cls a = all[li];
        for (int x = 0; x < 2; ++x) {
          if (!((a.flags >> x) & 1u)) continue;
          size_t before = all.size();
          bind(a, x);
          if (all.size() == before) continue;
          for (size_t pi = 0; pi < spec.pairs.size(); ++pi)
            realised[pi].emplace(at(all.back(), spec.pairs[pi]), all.back().witness);
          ++rep.classes;
          all.pop_back();
        }
      }
    for (size_t pi = 0; pi < spec.pairs.size(); ++pi) {
      const auto& p = spec.pairs[pi];
      const auto& base = bases[pi];
      auto emit = [&](Val v, F w) {
        check_val(v, w, p);
        realised[pi].emplace(v, std::move(w));
      };
      for (const auto& [v, w] : base) {
        emit({o.Neg(v.first), W & ~v.second}, F::neg(w));
        if (allow_box) emit({m.Box(v.first), box_set(fr, v.second)}, F::box(w));
      }
      for (const auto& [u, wu] : base)
        for (const auto& [v, wv] : base) {
          emit({o.Or(u.first, v.first), u.second | v.second}, F::disj(wu, wv));
          emit({o.And(u.first, v.first), u.second & v.second}, F::conj(wu, wv));
          emit({o.Imp(u.first, v.first), (W & ~u.second) | v.second}, F::imp(wu, wv));
          if (allow_full) emit({m.Id(u.first, v.first), id_set(fr, u.second, v.second)}, F::id(wu, wv));
        }
    }
  }

  if (spec.strict_identity && !spec.worlds.empty()) {
    const auto& [world, truth] = spec.worlds.front();
    for (size_t pi = 0; pi < spec.pairs.size(); ++pi)
      for (const auto& [u, wu] : realised[pi])
        for (const auto& [v, wv] : realised[pi]) {
          if (!contains(truth, m.Id(u.first, v.first))) continue;
          Subset iff = ((W & ~u.second) | v.second) & ((W & ~v.second) | u.second);
          ++rep.checks;
          if (!contains(box_set(fr, iff), world))
            rep.fail("identity without strict equivalence: " + render(F::id(wu, wv)) + " under " +
                     describe(F::id(wu, wv), spec.pairs[pi], fr, world));
        }
  }
  return rep;
}
AgreementReport agreement_check(const ModalModel& m, const Assignment& gamma, const KripkeFrame& fr, int w,
                                const Valuation& g, int depth, Fragment frag, bool strict_identity) {
  AgreementSpec spec;
  int i0 = fr.prop_index(g.get(0)), i1 = fr.prop_index(g.get(1));
  if (i0 < 0 || i1 < 0) throw ModelError("valuation values must be propositions of the frame");
  spec.pairs.push_back({gamma.get(0, m), gamma.get(1, m), i0, i1});
  spec.worlds.push_back({w, m.truth});
  spec.strict_identity = strict_identity;
  return agreement_check(m, fr, spec, depth, frag);
}

AgreementReport agreement_800(const WorldModel& wm, const KripkeFrame& fr, int w, int depth, Fragment frag) {
  AgreementSpec spec;
  int np = static_cast<int>(fr.props.size());
  for (int i0 = 0; i0 < np; ++i0)
    for (int i1 = 0; i1 < np; ++i1)
      spec.pairs.push_back({wm.rho[static_cast<size_t>(i0)], wm.rho[static_cast<size_t>(i1)], i0, i1});
  spec.worlds.push_back({w, wm.m.truth});
  return agreement_check(wm.m, fr, spec, depth, frag);
}

AgreementReport agreement_820(const ModalModel& m, const UltrafilterFrame& uf, int depth) {
  AgreementSpec spec;
  int n = m.n();
  for (int a0 = 0; a0 < n; ++a0)
    for (int a1 = 0; a1 < n; ++a1)
      spec.pairs.push_back({a0, a1, uf.prop_of[static_cast<size_t>(a0)], uf.prop_of[static_cast<size_t>(a1)]});
  spec.worlds.push_back({uf.w0, uf.ultrafilters[static_cast<size_t>(uf.w0)]});
  for (int i = 0; i < uf.fr.size(); ++i)
    if (i != uf.w0) spec.worlds.push_back({i, uf.ultrafilters[static_cast<size_t>(i)]});
  spec.strict_identity = true;
  return agreement_check(m, uf.fr, spec, depth, Fragment::Fm_m);
}

// ------------------------------------------------------------ conservativity

namespace {

std::string frame_text(const KripkeFrame& fr) {
  std::string s = "W=" + std::to_string(fr.size()) + " N={";
  for (int w = 0; w < fr.size(); ++w)
    if (contains(fr.normal, w)) s += fr.worlds[static_cast<size_t>(w)] + " ";
  s += "} R={";
  for (int w = 0; w < fr.size(); ++w)
    for (int v = 0; v < fr.size(); ++v)
      if (contains(fr.R[static_cast<size_t>(w)], v)) s += "(" + fr.worlds[static_cast<size_t>(w)] + "," + fr.worlds[static_cast<size_t>(v)] + ")";
  return s + "}";
}

// A normal world and valuation falsifying f, if any.
std::optional<std::string> frame_counter(const KripkeFrame& fr, const F& f) {
  const auto& fv = f.fvars();
  size_t np = fr.props.size();
  uint64_t total = ipow(np, static_cast<unsigned>(fv.size()));
  for (uint64_t code = 0; code < total; ++code) {
    Valuation g;
    uint64_t c = code;
    for (uint32_t x : fv) {
      g.vars[x] = fr.props[c % np];
      c /= np;
    }
    Subset bad = fr.normal & ~denote(fr, g, f);
    if (bad) {
      std::string s = frame_text(fr) + " at " + fr.worlds[static_cast<size_t>(std::countr_zero(bad))];
      for (const auto& [x, p] : g.vars) s += " x" + std::to_string(x) + "=" + std::to_string(p);
      return s;
    }
  }
  return std::nullopt;
}

std::optional<std::string> model_counter(const ModalModel& m, const F& f) {
  const auto& fv = f.fvars();
  uint64_t total = ipow(static_cast<uint64_t>(m.n()), static_cast<unsigned>(fv.size()));
  for (uint64_t code = 0; code < total; ++code) {
    Assignment g;
    uint64_t c = code;
    for (uint32_t x : fv) {
      g.set(x, static_cast<int>(c % static_cast<uint64_t>(m.n())));
      c /= static_cast<uint64_t>(m.n());
    }
    if (!satisfies(m, g, f)) return "model " + to_json(m).dump() + " assignment " + to_json(g).dump();
  }
  return std::nullopt;
}

}  // namespace

ProbeReport conservativity_probe(int system, const std::vector<CorpusItem>& corpus, int n_max, int model_n_max) {
  ProbeReport rep;
  std::vector<KripkeFrame> frames = enumerate_frames(n_max, system);
  std::vector<ModalModel> models;
  if (model_n_max >= 2)
    enumerate_models(model_n_max, system, EnumConstraints{}, [&](const ModalModel& m, const ModelReport&) {
      if (m.normal()) models.push_back(m);
      return true;
    });
  rep.frames = frames.size();
  rep.models = models.size();
  for (const auto& item : corpus) {
    ProbeResult r;
    r.f = item.f;
    r.expect = item.expect;
    std::optional<std::string> counter;
    for (const auto& fr : frames) {
      if ((counter = frame_counter(fr, item.f))) {
        counter = "frame " + *counter;
        break;
      }
    }
    if (!counter)
      for (const auto& m : models)
        if ((counter = model_counter(m, item.f))) break;
    if (item.expect == Expect::Theorem) {
      r.status = counter ? "unexpected-countermodel" : "valid";
      r.as_expected = !counter;
    } else {
      r.status = counter ? "countermodel" : "inconclusive";
      r.as_expected = counter.has_value();
    }
    if (counter) r.witness = *counter;
    rep.ok = rep.ok && r.as_expected;
    rep.results.push_back(std::move(r));
  }
  return rep;
}

// ------------------------------------------------------------ JSON

json to_json(const KripkeFrame& fr) {
  json j;
  j["worlds"] = fr.worlds;
  auto names = [&](Subset s) {
    json a = json::array();
    for (int w = 0; w < fr.size(); ++w)
      if (contains(s, w)) a.push_back(fr.worlds[static_cast<size_t>(w)]);
    return a;
  };
  j["normal"] = names(fr.normal);
  json rel = json::array();
  for (int w = 0; w < fr.size(); ++w)
    for (int v = 0; v < fr.size(); ++v)
      if (contains(fr.R[static_cast<size_t>(w)], v)) rel.push_back({fr.worlds[static_cast<size_t>(w)], fr.worlds[static_cast<size_t>(v)]});
  j["rel"] = rel;
  json props = json::array();
  for (Subset p : fr.props) props.push_back(names(p));
  j["props"] = props;
  j["kind"] = fr.kind;
  return j;
}

KripkeFrame frame_from_json(const json& j) {
  KripkeFrame fr;
  try {
    fr.worlds = j.at("worlds").get<std::vector<std::string>>();
    if (fr.worlds.empty() || fr.worlds.size() > 64) throw ModelError("frame needs 1..64 worlds");
    std::map<std::string, int> idx;
    for (size_t i = 0; i < fr.worlds.size(); ++i)
      if (!idx.emplace(fr.worlds[i], static_cast<int>(i)).second) throw ModelError("duplicate world " + fr.worlds[i]);
    auto world = [&](const json& v) {
      auto it = idx.find(v.get<std::string>());
      if (it == idx.end()) throw ModelError("unknown world " + v.get<std::string>());
      return it->second;
    };
    for (const auto& v : j.at("normal")) fr.normal |= singleton(world(v));
    fr.R.assign(fr.worlds.size(), 0);
    for (const auto& e : j.at("rel")) {
      if (!e.is_array() || e.size() != 2) throw ModelError("rel entries must be [from, to]");
      fr.R[static_cast<size_t>(world(e[0]))] |= singleton(world(e[1]));
    }
    std::set<Subset> ps;
    for (const auto& p : j.at("props")) {
      Subset s = 0;
      for (const auto& v : p) s |= singleton(world(v));
      ps.insert(s);
    }
    fr.props.assign(ps.begin(), ps.end());
    fr.kind = j.value("kind", 3);
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed frame file: ") + e.what());
  }
  return fr;
}

json valuation_json(const KripkeFrame& fr, const Valuation& g) {
  json j = json::object();
  for (const auto& [x, s] : g.vars) j["x" + std::to_string(x)] = fr.prop_index(s);
  for (const auto& [name, s] : g.consts) j["#" + name] = fr.prop_index(s);
  return j;
}

Valuation valuation_from_json(const KripkeFrame& fr, const json& j) {
  Valuation g;
  if (!j.is_object()) throw ModelError("valuation must be an object");
  for (const auto& [key, v] : j.items()) {
    int i = v.get<int>();
    if (i < 0 || i >= static_cast<int>(fr.props.size())) throw ModelError("valuation index out of range for " + key);
    if (!key.empty() && key[0] == '#')
      g.consts[key.substr(1)] = fr.props[static_cast<size_t>(i)];
    else if (key.size() >= 2 && key[0] == 'x')
      g.vars[static_cast<uint32_t>(std::stoul(key.substr(1)))] = fr.props[static_cast<size_t>(i)];
    else
      throw ModelError("valuation key '" + key + "' is neither a variable nor #constant");
  }
  return g;
}

}  // namespace nfk
