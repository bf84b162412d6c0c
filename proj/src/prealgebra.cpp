#include "nfk/prealgebra.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <set>

namespace nfk {

using nlohmann::json;

void check_shape(const BoolOps& ops) {
  int n = ops.n;
  if (n < 1 || n > 64) throw ModelError("universe size must be in 1..64");
  auto nn = static_cast<size_t>(n) * static_cast<size_t>(n);
  if (ops.neg.size() != static_cast<size_t>(n) || ops.or_.size() != nn || ops.and_.size() != nn ||
      ops.imp.size() != nn)
    throw ModelError("operation table has the wrong size");
  auto in = [n](int v) { return v >= 0 && v < n; };
  if (!in(ops.bot) || !in(ops.top)) throw ModelError("bot/top out of range");
  for (const auto* t : {&ops.neg, &ops.or_, &ops.and_, &ops.imp})
    for (uint8_t v : *t)
      if (v >= n) throw ModelError("operation table entry out of range");
}

bool is_boolean_algebra(const BoolOps& o) {
  int n = o.n;
  for (int a = 0; a < n; ++a) {
    if (o.Or(a, o.bot) != a || o.And(a, o.top) != a) return false;
    if (o.Or(a, o.Neg(a)) != o.top || o.And(a, o.Neg(a)) != o.bot) return false;
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

ValidationReport validate_prealgebra(const PreAlgebra& p) {
  ValidationReport r;
  try {
    check_shape(p.ops);
  } catch (const ModelError& e) {
    r.fail(std::string("shape: ") + e.what());
    return r;
  }
  int n = p.n();
  if (p.leq.size() != static_cast<size_t>(n * n)) {
    r.fail("shape: leq table has the wrong size");
    return r;
  }
  const BoolOps& o = p.ops;
  for (int a = 0; a < n; ++a)
    if (!p.le(a, a)) {
      r.fail("reflexivity");
      return r;
    }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        if (p.le(a, b) && p.le(b, c) && !p.le(a, c)) {
          r.fail("transitivity");
          return r;
        }
  for (int a = 0; a < n; ++a)
    for (int a2 = 0; a2 < n; ++a2) {
      if (!p.eqv(a, a2)) continue;
      if (!p.eqv(o.Neg(a), o.Neg(a2))) {
        r.fail("congruence: neg");
        return r;
      }
      for (int b = 0; b < n; ++b)
        for (int b2 = 0; b2 < n; ++b2) {
          if (!p.eqv(b, b2)) continue;
          if (!p.eqv(o.Or(a, b), o.Or(a2, b2))) r.fail("congruence: or");
          if (!p.eqv(o.And(a, b), o.And(a2, b2))) r.fail("congruence: and");
          if (!p.eqv(o.Imp(a, b), o.Imp(a2, b2))) r.fail("congruence: imp");
          if (!r.ok) return r;
        }
    }
  for (int a = 0; a < n; ++a) {
    if (!p.le(o.bot, a) || !p.le(a, o.top)) r.fail("quotient: bounds");
    if (!p.eqv(o.Or(a, o.Neg(a)), o.top)) r.fail("quotient: complement join");
    if (!p.eqv(o.And(a, o.Neg(a)), o.bot)) r.fail("quotient: complement meet");
    if (!r.ok) return r;
    for (int b = 0; b < n; ++b) {
      if (!p.le(a, o.Or(a, b)) || !p.le(b, o.Or(a, b))) r.fail("quotient: join upper bound");
      if (!p.le(o.And(a, b), a) || !p.le(o.And(a, b), b)) r.fail("quotient: meet lower bound");
      if (!p.eqv(o.Imp(a, b), o.Or(o.Neg(a), b))) r.fail("quotient: implication");
      if (!r.ok) return r;
      for (int c = 0; c < n; ++c) {
        if (p.le(a, c) && p.le(b, c) && !p.le(o.Or(a, b), c)) r.fail("quotient: least upper bound");
        if (p.le(c, a) && p.le(c, b) && !p.le(c, o.And(a, b))) r.fail("quotient: greatest lower bound");
        if (!p.eqv(o.And(a, o.Or(b, c)), o.Or(o.And(a, b), o.And(a, c)))) r.fail("quotient: distributivity");
        if (!r.ok) return r;
      }
    }
  }
  return r;
}

bool is_filter(const PreAlgebra& p, Subset f) {
  int n = p.n();
  if (f == 0 || contains(f, p.ops.bot)) return false;
  for (int a = 0; a < n; ++a) {
    if (!contains(f, a)) continue;
    for (int b = 0; b < n; ++b) {
      if (p.le(a, b) && !contains(f, b)) return false;
      if (contains(f, b) && !contains(f, p.ops.And(a, b))) return false;
    }
  }
  return true;
}

namespace {

std::vector<Subset> eqv_classes(const PreAlgebra& p) {
  std::vector<Subset> classes;
  Subset seen = 0;
  for (int a = 0; a < p.n(); ++a) {
    if (contains(seen, a)) continue;
    Subset c = 0;
    for (int b = 0; b < p.n(); ++b)
      if (p.eqv(a, b)) c |= singleton(b);
    seen |= c;
    classes.push_back(c);
  }
  return classes;
}

std::vector<Subset> maximal(const std::vector<Subset>& sets) {
  std::vector<Subset> out;
  for (Subset s : sets) {
    bool is_max = true;
    for (Subset t : sets)
      if (t != s && (s & t) == s) is_max = false;
    if (is_max) out.push_back(s);
  }
  return out;
}

}  // namespace

FilterReport filters(const PreAlgebra& p) {
  std::vector<Subset> classes = eqv_classes(p);
  if (classes.size() > 20) throw ModelError("filters: quotient too large to enumerate");
  FilterReport fr;
  uint32_t k = static_cast<uint32_t>(classes.size());
  for (uint32_t m = 1; m < (1u << k); ++m) {
    Subset s = 0;
    for (uint32_t i = 0; i < k; ++i)
      if ((m >> i) & 1u) s |= classes[i];
    if (is_filter(p, s)) fr.all.push_back(s);
  }
  std::sort(fr.all.begin(), fr.all.end());
  if (fr.all.empty()) throw ModelError("filters: no filter exists (internal error)");
  fr.ultra = maximal(fr.all);
  fr.smallest = full_set(p.n());
  for (Subset s : fr.all) fr.smallest &= s;

  Subset top_class = 0;
  for (int a = 0; a < p.n(); ++a)
    if (p.eqv(a, p.ops.top)) top_class |= singleton(a);
  auto characterizes = [&](Subset f) {
    for (int a = 0; a < p.n(); ++a)
      for (int b = 0; b < p.n(); ++b)
        if (p.le(a, b) != contains(f, p.ops.Imp(a, b))) return false;
    return true;
  };
  int count_iii = 0;
  bool smallest_iii = false;
  for (Subset f : fr.all) {
    if (characterizes(f)) {
      ++count_iii;
      if (f == fr.smallest) smallest_iii = true;
    }
  }
  fr.characterizations_agree = fr.smallest == top_class && smallest_iii && count_iii == 1;
  return fr;
}

std::vector<Subset> filters_bruteforce(const PreAlgebra& p) {
  if (p.n() > 20) throw ModelError("filters_bruteforce: universe too large");
  std::vector<Subset> out;
  for (Subset s = 1; s <= full_set(p.n()); ++s)
    if (is_filter(p, s)) out.push_back(s);
  return out;
}

std::vector<uint8_t> pinned_identity(const PreAlgebra& p) {
  Subset f = filters(p).smallest;
  std::vector<int> elems;
  for (int a = 0; a < p.n(); ++a)
    if (contains(f, a)) elems.push_back(a);
  int n = p.n();
  std::vector<uint8_t> id(static_cast<size_t>(n * n), static_cast<uint8_t>(p.ops.bot));
  for (int a = 0; a < n; ++a)
    id[static_cast<size_t>(a * n + a)] = static_cast<uint8_t>(elems[static_cast<size_t>(a) % elems.size()]);
  return id;
}

namespace {

bool sci_conditions(const BoolOps& o, Subset t, const std::vector<uint8_t>& id, std::string* why) {
  auto T = [t](int a) { return contains(t, a); };
  auto bad = [why](const char* w) {
    if (why) *why = w;
    return false;
  };
  if (T(o.bot) || !T(o.top)) return bad("(ii)(a) bot/top truth");
  int n = o.n;
  for (int a = 0; a < n; ++a) {
    if (T(o.Neg(a)) == T(a)) return bad("(ii)(c) negation");
    for (int b = 0; b < n; ++b) {
      if (T(o.Imp(a, b)) != (!T(a) || T(b))) return bad("(ii)(b) implication");
      if (T(o.And(a, b)) != (T(a) && T(b))) return bad("(ii)(d) conjunction");
      if (T(o.Or(a, b)) != (T(a) || T(b))) return bad("(ii)(e) disjunction");
      if (T(id[static_cast<size_t>(a * n + b)]) != (a == b)) return bad("(ii)(g) identity");
    }
  }
  return true;
}

}  // namespace

ValidationReport validate_sci(const SciModel& s) {
  ValidationReport r;
  try {
    check_shape(s.ops);
  } catch (const ModelError& e) {
    r.fail(std::string("shape: ") + e.what());
    return r;
  }
  if (s.id.size() != static_cast<size_t>(s.n() * s.n())) {
    r.fail("shape: id table has the wrong size");
    return r;
  }
  for (uint8_t v : s.id)
    if (v >= s.n()) {
      r.fail("shape: id entry out of range");
      return r;
    }
  if ((s.truth & ~full_set(s.n())) != 0) {
    r.fail("shape: TRUE out of range");
    return r;
  }
  std::string why;
  if (!sci_conditions(s.ops, s.truth, s.id, &why)) r.fail(why);
  return r;
}

SciModel sci_from_prealgebra(const PreAlgebra& p, int ultra_index, const std::optional<std::vector<uint8_t>>& id_table) {
  ValidationReport v = validate_prealgebra(p);
  if (!v.ok) throw ModelError("sci_from_prealgebra: invalid prealgebra: " + v.violated);
  FilterReport fr = filters(p);
  if (ultra_index < 0 || ultra_index >= static_cast<int>(fr.ultra.size()))
    throw ModelError("sci_from_prealgebra: ultrafilter index out of range");
  SciModel s;
  s.ops = p.ops;
  s.truth = fr.ultra[static_cast<size_t>(ultra_index)];
  s.id = id_table ? *id_table : pinned_identity(p);
  ValidationReport sv = validate_sci(s);
  if (!sv.ok) throw ModelError("sci_from_prealgebra: identity table violates " + sv.violated);
  return s;
}

SciToPre prealgebra_from_sci(const SciModel& s) {
  ValidationReport v = validate_sci(s);
  if (!v.ok) throw ModelError("prealgebra_from_sci: invalid SCI-model: " + v.violated);
  int n = s.n();
  if (n > 20) throw ModelError("prealgebra_from_sci: universe too large");
  SciToPre out;
  Subset f = full_set(n);
  for (Subset t = 0; t <= full_set(n); ++t) {
    if (!contains(t, s.ops.top) || contains(t, s.ops.bot)) continue;
    if (sci_conditions(s.ops, t, s.id, nullptr)) {
      out.admissible.push_back(t);
      f &= t;
    }
  }
  out.F = f;
  out.p.ops = s.ops;
  out.p.leq.assign(static_cast<size_t>(n * n), 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out.p.leq[static_cast<size_t>(a * n + b)] = contains(f, s.ops.Imp(a, b)) ? 1 : 0;
  ValidationReport pv = validate_prealgebra(out.p);
  if (!pv.ok) throw ModelError("prealgebra_from_sci: derived structure is not a prealgebra: " + pv.violated);
  FilterReport fr = filters(out.p);
  out.ts_are_ultrafilters = std::all_of(out.admissible.begin(), out.admissible.end(), [&](Subset t) {
    return std::find(fr.ultra.begin(), fr.ultra.end(), t) != fr.ultra.end();
  });
  out.f_is_smallest = fr.smallest == out.F;
  return out;
}

PreAlgebra prealgebra_from_sci_simple(const SciModel& s) {
  int n = s.n();
  PreAlgebra p;
  p.ops = s.ops;
  p.leq.assign(static_cast<size_t>(n * n), 0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) p.leq[static_cast<size_t>(a * n + b)] = contains(s.truth, s.ops.Imp(a, b)) ? 1 : 0;
  return p;
}

bool filter_meet_of_ultrafilters(const PreAlgebra& p, Subset f) {
  if (!is_filter(p, f)) throw ModelError("filter_meet_of_ultrafilters: not a filter");
  FilterReport fr = filters(p);
  Subset meet = full_set(p.n());
  for (Subset u : fr.ultra)
    if ((u & f) == f) meet &= u;
  return meet == f;
}

// ------------------------------------------------------------ enumeration

namespace {

struct Lift {
  BoolOps ops;
  std::vector<int> pi;
  int k = 0;
};

// Calls emit for each Boolean part rep o f_B o pi over universe n.
void for_each_lift(int n, bool per_op_sections, const std::function<void(const Lift&)>& emit) {
  for (int k = 1; (1 << k) <= n; ++k) {
    int s = 1 << k;
    int btop = s - 1;
    std::vector<int> pi(static_cast<size_t>(n), 0);
    pi[static_cast<size_t>(n - 1)] = btop;
    // Free positions 1..n-2 range over B.
    int free = std::max(0, n - 2);
    long long combos = 1;
    for (int i = 0; i < free; ++i) combos *= s;
    for (long long code = 0; code < combos; ++code) {
      long long c = code;
      for (int i = 1; i <= free; ++i) {
        pi[static_cast<size_t>(i)] = static_cast<int>(c % s);
        c /= s;
      }
      std::vector<std::vector<int>> fibre(static_cast<size_t>(s));
      for (int a = 0; a < n; ++a) fibre[static_cast<size_t>(pi[static_cast<size_t>(a)])].push_back(a);
      if (std::any_of(fibre.begin(), fibre.end(), [](const auto& f) { return f.empty(); })) continue;
      // Enumerate sections as mixed-radix counters.
      long long sections = 1;
      for (const auto& f : fibre) sections *= static_cast<long long>(f.size());
      int nops = per_op_sections ? 4 : 1;
      long long total = 1;
      for (int i = 0; i < nops; ++i) total *= sections;
      for (long long sc = 0; sc < total; ++sc) {
        std::array<std::vector<int>, 4> rep;
        long long rest = sc;
        for (int op = 0; op < nops; ++op) {
          long long local = rest % sections;
          rest /= sections;
          rep[static_cast<size_t>(op)].resize(static_cast<size_t>(s));
          for (int b = 0; b < s; ++b) {
            const auto& f = fibre[static_cast<size_t>(b)];
            rep[static_cast<size_t>(op)][static_cast<size_t>(b)] = f[static_cast<size_t>(local % static_cast<long long>(f.size()))];
            local /= static_cast<long long>(f.size());
          }
        }
        for (int op = nops; op < 4; ++op) rep[static_cast<size_t>(op)] = rep[0];
        Lift l;
        l.k = k;
        l.pi = pi;
        BoolOps& o = l.ops;
        o.n = n;
        o.bot = 0;
        o.top = n - 1;
        o.neg.resize(static_cast<size_t>(n));
        o.or_.resize(static_cast<size_t>(n * n));
        o.and_.resize(static_cast<size_t>(n * n));
        o.imp.resize(static_cast<size_t>(n * n));
        for (int a = 0; a < n; ++a) {
          int pa = pi[static_cast<size_t>(a)];
          o.neg[static_cast<size_t>(a)] = static_cast<uint8_t>(rep[0][static_cast<size_t>(~pa & btop)]);
          for (int b = 0; b < n; ++b) {
            int pb = pi[static_cast<size_t>(b)];
            size_t ix = static_cast<size_t>(a * n + b);
            o.or_[ix] = static_cast<uint8_t>(rep[1][static_cast<size_t>(pa | pb)]);
            o.and_[ix] = static_cast<uint8_t>(rep[2][static_cast<size_t>(pa & pb)]);
            o.imp[ix] = static_cast<uint8_t>(rep[3][static_cast<size_t>((~pa | pb) & btop)]);
          }
        }
        emit(l);
      }
    }
  }
}

std::string ops_key(const BoolOps& o) {
  std::string k;
  for (const auto* t : {&o.neg, &o.or_, &o.and_, &o.imp}) k.append(t->begin(), t->end());
  return k;
}

}  // namespace

std::vector<BoolOps> enumerate_bool_parts(int n, bool per_op_sections) {
  std::vector<BoolOps> out;
  std::set<std::string> seen;
  if (n < 2) return out;
  for_each_lift(n, per_op_sections, [&](const Lift& l) {
    if (seen.insert(ops_key(l.ops)).second) out.push_back(l.ops);
  });
  return out;
}

std::vector<PreAlgebra> enumerate_prealgebras(int n_max) {
  std::vector<PreAlgebra> out;
  std::set<std::string> seen;
  for (int n = 2; n <= n_max; ++n) {
    for_each_lift(n, true, [&](const Lift& l) {
      int btop = (1 << l.k) - 1;
      // Filters of B are the principal filters up(c), c != 0.
      for (int c = 1; c <= btop; ++c) {
        PreAlgebra p;
        p.ops = l.ops;
        p.leq.assign(static_cast<size_t>(n * n), 0);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            int v = (~l.pi[static_cast<size_t>(a)] | l.pi[static_cast<size_t>(b)]) & btop;
            p.leq[static_cast<size_t>(a * n + b)] = (c & ~v) == 0 ? 1 : 0;
          }
        std::string key = ops_key(p.ops) + std::string(p.leq.begin(), p.leq.end());
        if (seen.insert(key).second) out.push_back(std::move(p));
      }
    });
  }
  return out;
}

// ------------------------------------------------------------ JSON

json table2(const std::vector<uint8_t>& t, int n) {
  json rows = json::array();
  for (int a = 0; a < n; ++a) {
    json row = json::array();
    for (int b = 0; b < n; ++b) row.push_back(t[static_cast<size_t>(a * n + b)]);
    rows.push_back(row);
  }
  return rows;
}

std::vector<uint8_t> read_table2(const json& j, int n, const char* field) {
  if (!j.contains(field)) throw ModelError(std::string("missing field '") + field + "'");
  const json& rows = j.at(field);
  if (!rows.is_array() || rows.size() != static_cast<size_t>(n))
    throw ModelError(std::string("field '") + field + "' must be an n x n array");
  std::vector<uint8_t> t;
  for (const auto& row : rows) {
    if (!row.is_array() || row.size() != static_cast<size_t>(n))
      throw ModelError(std::string("field '") + field + "' must be an n x n array");
    for (const auto& v : row) {
      int x = v.get<int>();
      if (x < 0 || x >= 256) throw ModelError(std::string("field '") + field + "' has an out-of-range entry");
      t.push_back(static_cast<uint8_t>(x));
    }
  }
  return t;
}

json subset_json(Subset s, int n) {
  json a = json::array();
  for (int i = 0; i < n; ++i)
    if (contains(s, i)) a.push_back(i);
  return a;
}

Subset subset_from_json(const json& j, int n, const char* field) {
  if (!j.contains(field)) throw ModelError(std::string("missing field '") + field + "'");
  Subset s = 0;
  for (const auto& v : j.at(field)) {
    int x = v.get<int>();
    if (x < 0 || x >= n) throw ModelError(std::string("field '") + field + "' has an out-of-range element");
    s |= singleton(x);
  }
  return s;
}

void write_bool_ops(json& j, const BoolOps& o) {
  j["n"] = o.n;
  j["bot"] = o.bot;
  j["top"] = o.top;
  j["neg"] = o.neg;
  j["and"] = table2(o.and_, o.n);
  j["or"] = table2(o.or_, o.n);
  j["imp"] = table2(o.imp, o.n);
}

BoolOps bool_ops_from_json(const json& j) {
  BoolOps o;
  try {
    o.n = j.at("n").get<int>();
    if (o.n < 1 || o.n > 64) throw ModelError("n must be in 1..64");
    o.bot = j.at("bot").get<int>();
    o.top = j.at("top").get<int>();
    for (const auto& v : j.at("neg")) o.neg.push_back(static_cast<uint8_t>(v.get<int>()));
    o.and_ = read_table2(j, o.n, "and");
    o.or_ = read_table2(j, o.n, "or");
    o.imp = read_table2(j, o.n, "imp");
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  }
  check_shape(o);
  return o;
}

json to_json(const PreAlgebra& p) {
  json j;
  write_bool_ops(j, p.ops);
  j["leq"] = table2(p.leq, p.n());
  return j;
}

json to_json(const SciModel& s) {
  json j;
  write_bool_ops(j, s.ops);
  j["true"] = subset_json(s.truth, s.n());
  j["id"] = table2(s.id, s.n());
  return j;
}

PreAlgebra prealgebra_from_json(const json& j) {
  PreAlgebra p;
  p.ops = bool_ops_from_json(j);
  p.leq = read_table2(j, p.n(), "leq");
  for (auto& v : p.leq)
    if (v > 1) throw ModelError("leq entries must be 0 or 1");
  return p;
}

SciModel sci_from_json(const json& j) {
  SciModel s;
  s.ops = bool_ops_from_json(j);
  s.truth = subset_from_json(j, s.n(), "true");
  s.id = read_table2(j, s.n(), "id");
  return s;
}

}  // namespace nfk
