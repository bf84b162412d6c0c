#include "nfk/model.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <deque>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "nfk/calculus.hpp"
#include "nfk/random.hpp"
#include "nfk/substitution.hpp"

namespace nfk {

using nlohmann::json;
using F = Formula;

// ------------------------------------------------------------ basics

uint64_t ipow(uint64_t b, unsigned e) {
  uint64_t r = 1;
  while (e--) r *= b;
  return r;
}

uint64_t encode_unary(const std::vector<uint8_t>& t, int n) {
  uint64_t code = 0, p = 1;
  for (uint8_t v : t) {
    code += v * p;
    p *= static_cast<uint64_t>(n);
  }
  return code;
}

std::vector<uint8_t> decode_unary(uint64_t code, int n) {
  std::vector<uint8_t> t(static_cast<size_t>(n));
  for (int a = 0; a < n; ++a) {
    t[static_cast<size_t>(a)] = static_cast<uint8_t>(code % static_cast<uint64_t>(n));
    code /= static_cast<uint64_t>(n);
  }
  return t;
}

std::vector<uint8_t> meet_forall_table(const BoolOps& ops) {
  int n = ops.n;
  if (n > kMaxForallN) throw ModelError("quantifier table needs n <= " + std::to_string(kMaxForallN));
  // Large tables are rebuilt often for the same operations (one per valuation
  // in the frame sweeps), so the most recent one is kept.
  static std::mutex mu;
  static BoolOps last_ops;
  static std::vector<uint8_t> last_tab;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (!last_tab.empty() && last_ops == ops) return last_tab;
  }
  uint64_t total = ipow(static_cast<uint64_t>(n), static_cast<unsigned>(n));
  std::vector<uint8_t> tab(total);
  // Left fold top & t(0) & ... & t(n-1), sharing prefixes.
  std::function<void(int, int, uint64_t, uint64_t)> fill = [&](int a, int acc, uint64_t code, uint64_t pw) {
    if (a == n) {
      tab[code] = static_cast<uint8_t>(acc);
      return;
    }
    for (int v = 0; v < n; ++v) fill(a + 1, ops.And(acc, v), code + pw * static_cast<uint64_t>(v), pw * static_cast<uint64_t>(n));
  };
  fill(0, ops.top, 0, 1);
  if (n >= 6) {
    std::lock_guard<std::mutex> lock(mu);
    last_ops = ops;
    last_tab = tab;
  }
  return tab;
}

bool forall_is_meet(const ModalModel& m) { return m.forall_tab == meet_forall_table(m.ops); }

int ModalModel::constant(int const_id) const {
  if (const_id == kBot) return ops.bot;
  if (const_id == kTop) return ops.top;
  auto it = gamma.find(constant_name(const_id));
  if (it == gamma.end()) throw ModelError("unknown constant #" + constant_name(const_id));
  return it->second;
}

void check_model_shape(const ModalModel& m) {
  check_shape(m.ops);
  int n = m.n();
  if (n > kMaxForallN) throw ModelError("models need n <= " + std::to_string(kMaxForallN));
  if (m.id.size() != static_cast<size_t>(n * n)) throw ModelError("id table has the wrong size");
  if (m.box.size() != static_cast<size_t>(n)) throw ModelError("box table has the wrong size");
  if (m.forall_tab.size() != ipow(static_cast<uint64_t>(n), static_cast<unsigned>(n)))
    throw ModelError("forall table has the wrong size");
  for (const auto* t : {&m.id, &m.box, &m.forall_tab})
    for (uint8_t v : *t)
      if (v >= n) throw ModelError("table entry out of range");
  if ((m.truth | m.nec) & ~full_set(n)) throw ModelError("TRUE/NEC out of range");
  for (const auto& [name, v] : m.gamma)
    if (v < 0 || v >= n) throw ModelError("gamma value out of range for #" + name);
}

int Assignment::get(uint32_t x, const ModalModel& m) const {
  auto it = v_.find(x);
  return it == v_.end() ? m.ops.bot : it->second;
}

Assignment Assignment::updated(uint32_t x, int a) const {
  Assignment g = *this;
  g.v_[x] = a;
  return g;
}

// ------------------------------------------------------------ evaluation

namespace {

struct Evaluator {
  const ModalModel& m;
  std::vector<int> env;
  std::vector<uint64_t> pw;

  Evaluator(const ModalModel& mm, const Assignment& g, const F& f) : m(mm) {
    size_t size = static_cast<size_t>(std::max<int64_t>(f.max_var(), 0) + 1);
    for (const auto& [x, v] : g.values()) size = std::max(size, static_cast<size_t>(x) + 1);
    env.assign(size, m.ops.bot);
    for (const auto& [x, v] : g.values()) env[x] = v;
    pw.resize(static_cast<size_t>(m.n()));
    for (int a = 0; a < m.n(); ++a) pw[static_cast<size_t>(a)] = ipow(static_cast<uint64_t>(m.n()), static_cast<unsigned>(a));
  }

  int run(const F& f) {
    const BoolOps& o = m.ops;
    switch (f.op()) {
      case Op::Var: return env[f.var_index()];
      case Op::Const: return m.constant(f.const_id());
      case Op::Neg: return o.Neg(run(f.lhs()));
      case Op::Box: return m.Box(run(f.lhs()));
      case Op::Or: {
        int a = run(f.lhs());
        return o.Or(a, run(f.rhs()));
      }
      case Op::And: {
        int a = run(f.lhs());
        return o.And(a, run(f.rhs()));
      }
      case Op::Imp: {
        int a = run(f.lhs());
        return o.Imp(a, run(f.rhs()));
      }
      case Op::Id: {
        int a = run(f.lhs());
        return m.Id(a, run(f.rhs()));
      }
      case Op::Forall: {
        uint32_t x = f.var_index();
        int saved = env[x];
        uint64_t code = 0;
        for (int z = 0; z < m.n(); ++z) {
          env[x] = z;
          code += static_cast<uint64_t>(run(f.lhs())) * pw[static_cast<size_t>(z)];
        }
        env[x] = saved;
        return m.Forall(code);
      }
    }
    return 0;
  }
};

}  // namespace

int eval(const ModalModel& m, const Assignment& g, const Formula& f) {
  Evaluator ev(m, g, f);
  return ev.run(f);
}

bool satisfies(const ModalModel& m, const Assignment& g, const Formula& f) {
  return contains(m.truth, eval(m, g, f));
}

bool consequence_over(const std::vector<std::pair<ModalModel, Assignment>>& models,
                      const std::vector<Formula>& premises, const Formula& f) {
  for (const auto& [m, g] : models)
    if (!m.normal()) throw ModelError("consequence is defined over normal models only");
  for (const auto& [m, g] : models) {
    bool all = std::all_of(premises.begin(), premises.end(), [&](const F& p) { return satisfies(m, g, p); });
    if (all && !satisfies(m, g, f)) return false;
  }
  return true;
}

// ------------------------------------------------------------ definable closure

namespace {

class ClosureOverflow : public std::exception {};

struct Key {
  uint64_t code;
  uint32_t mask;
  bool operator==(const Key&) const = default;
};
struct KeyHash {
  size_t operator()(const Key& k) const { return std::hash<uint64_t>()(k.code * 0x9E3779B97F4A7C15ull + k.mask); }
};

struct Closure {
  const ModalModel& m;
  int n;
  int K;
  size_t max_states;
  size_t max_unary_states;
  std::vector<std::deque<DefinableSet::Entry>> store;
  std::vector<std::unordered_set<Key, KeyHash>> index;
  std::vector<size_t> processed;
  std::vector<uint64_t> rows;  // n^k

  Closure(const ModalModel& mm, int k, const ClosureBudget& b)
      : m(mm), n(mm.n()), K(k), max_states(b.max_states), max_unary_states(b.max_unary_states) {
    store.resize(static_cast<size_t>(K + 1));
    index.resize(static_cast<size_t>(K + 1));
    processed.assign(static_cast<size_t>(K + 1), 0);
    for (int i = 0; i <= K; ++i) rows.push_back(ipow(static_cast<uint64_t>(n), static_cast<unsigned>(i)));
  }

  template <class W>
  void add(int k, const std::vector<uint8_t>& table, uint32_t mask, W&& witness) {
    uint64_t code = 0, p = 1;
    for (uint8_t v : table) {
      code += v * p;
      p *= static_cast<uint64_t>(n);
    }
    auto ku = static_cast<size_t>(k);
    if (!index[ku].insert(Key{code, mask}).second) return;
    if (store[ku].size() >= (k > 1 ? max_states : max_unary_states)) throw ClosureOverflow();
    store[ku].push_back({table, mask, witness()});
  }

  void seed() {
    for (int k = 0; k <= K; ++k) {
      size_t R = rows[static_cast<size_t>(k)];
      std::vector<std::pair<int, F>> consts = {{m.ops.bot, F::bot()}, {m.ops.top, F::top()}};
      for (const auto& [name, v] : m.gamma) consts.push_back({v, F::constant(name)});
      for (const auto& [v, w] : consts) add(k, std::vector<uint8_t>(R, static_cast<uint8_t>(v)), 0, [w = w] { return w; });
      for (int i = 0; i < k; ++i) {
        std::vector<uint8_t> t(R);
        for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>((r / rows[static_cast<size_t>(i)]) % static_cast<size_t>(n));
        add(k, t, 1u << i, [i] { return F::var(static_cast<uint32_t>(i)); });
      }
    }
  }

  void process(int k, size_t e) {
    const size_t R = rows[static_cast<size_t>(k)];
    auto& S = store[static_cast<size_t>(k)];
    const DefinableSet::Entry& E = S[e];  // deque: stable under push_back
    const std::vector<uint8_t>& a = E.table;
    const uint32_t am = E.mask;
    const BoolOps& o = m.ops;

    std::vector<uint8_t> t(R);
    for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>(o.Neg(a[r]));
    add(k, t, am, [&] { return F::neg(E.witness); });
    for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>(m.Box(a[r]));
    add(k, t, am, [&] { return F::box(E.witness); });

    size_t count = S.size();
    for (size_t j = 0; j < count; ++j) {
      const DefinableSet::Entry& G = S[j];
      const uint32_t mask = am | G.mask;
      for (int dir = 0; dir < 2; ++dir) {
        const DefinableSet::Entry& X = dir == 0 ? E : G;
        const DefinableSet::Entry& Y = dir == 0 ? G : E;
        const auto& x = X.table;
        const auto& y = Y.table;
        for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>(o.Or(x[r], y[r]));
        add(k, t, mask, [&] { return F::disj(X.witness, Y.witness); });
        for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>(o.And(x[r], y[r]));
        add(k, t, mask, [&] { return F::conj(X.witness, Y.witness); });
        for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>(o.Imp(x[r], y[r]));
        add(k, t, mask, [&] { return F::imp(X.witness, Y.witness); });
        for (size_t r = 0; r < R; ++r) t[r] = static_cast<uint8_t>(m.Id(x[r], y[r]));
        add(k, t, mask, [&] { return F::id(X.witness, Y.witness); });
      }
    }

    // Lift into arity k+1 by inserting a dummy argument at each position.
    if (k < K) {
      size_t R1 = rows[static_cast<size_t>(k + 1)];
      std::vector<uint8_t> lifted(R1);
      for (int p = 0; p <= k; ++p) {
        for (size_t r = 0; r < R1; ++r) {
          size_t low = r % rows[static_cast<size_t>(p)];
          size_t high = r / rows[static_cast<size_t>(p + 1)];
          lifted[r] = a[low + high * rows[static_cast<size_t>(p)]];
        }
        uint32_t low_mask = am & ((1u << p) - 1);
        uint32_t mask = low_mask | ((am >> p) << (p + 1));
        add(k + 1, lifted, mask, [&] {
          Substitution s;
          for (int j = k - 1; j >= p; --j) s.bind_var(static_cast<uint32_t>(j), F::var(static_cast<uint32_t>(j + 1)));
          return apply(E.witness, s);
        });
      }
    }

    // Bind the last argument.
    if (k >= 1 && ((am >> (k - 1)) & 1u)) {
      size_t R0 = rows[static_cast<size_t>(k - 1)];
      std::vector<uint8_t> bound(R0);
      for (size_t r = 0; r < R0; ++r) {
        uint64_t code = 0, p = 1;
        for (int z = 0; z < n; ++z, p *= static_cast<uint64_t>(n))
          code += static_cast<uint64_t>(a[r + static_cast<size_t>(z) * R0]) * p;
        bound[r] = static_cast<uint8_t>(m.Forall(code));
      }
      add(k - 1, bound, am & ~(1u << (k - 1)), [&] { return F::forall(static_cast<uint32_t>(k - 1), E.witness); });
    }
  }

  void run() {
    seed();
    bool progress = true;
    while (progress) {
      progress = false;
      for (int k = K; k >= 0; --k) {
        auto ku = static_cast<size_t>(k);
        while (processed[ku] < store[ku].size()) {
          process(k, processed[ku]++);
          progress = true;
        }
      }
    }
  }
};

DefinableSet collect(const ModalModel& m, Closure& c, int requested) {
  int n = m.n();
  int k = c.K;
  DefinableSet d;
  d.arity_requested = requested;
  d.arity = k;
  for (auto& dq : c.store) d.by_arity.emplace_back(std::make_move_iterator(dq.begin()), std::make_move_iterator(dq.end()));
  std::unordered_set<uint64_t> seen;
  for (int a = 1; a <= k; ++a) {
    uint64_t R = ipow(static_cast<uint64_t>(n), static_cast<unsigned>(a));
    for (const auto& e : d.by_arity[static_cast<size_t>(a)]) {
      for (int i = 0; i < a; ++i) {
        if (!((e.mask >> i) & 1u)) continue;
        uint64_t stride = ipow(static_cast<uint64_t>(n), static_cast<unsigned>(i));
        // Rows with argument i fixed to 0 enumerate the parameter choices.
        for (uint64_t r = 0; r < R; ++r) {
          if ((r / stride) % static_cast<uint64_t>(n) != 0) continue;
          std::vector<uint8_t> t(static_cast<size_t>(n));
          for (int z = 0; z < n; ++z) t[static_cast<size_t>(z)] = e.table[r + static_cast<uint64_t>(z) * stride];
          if (!seen.insert(encode_unary(t, n)).second) continue;
          UnaryDef u;
          u.table = std::move(t);
          u.phi = e.witness;
          u.x = static_cast<uint32_t>(i);
          uint64_t rr = r;
          for (int j = 0; j < a; ++j, rr /= static_cast<uint64_t>(n))
            if (j != i) u.g.set(static_cast<uint32_t>(j), static_cast<int>(rr % static_cast<uint64_t>(n)));
          d.unary.push_back(std::move(u));
        }
      }
    }
  }
  std::set<int> sent;
  for (const auto& e : d.by_arity[0])
    if (sent.insert(e.table[0]).second) d.sentence_witness.push_back(e.witness);
  d.sentences.assign(sent.begin(), sent.end());
  return d;
}

}  // namespace

DefinableSet definable_closure(const ModalModel& m, int K, const ClosureBudget& budget) {
  if (K < 1) throw ModelError("arity bound must be at least 1");
  check_model_shape(m);
  int n = m.n();
  {
    // When every unary function is already definable at arity 1, larger
    // bounds add neither unary definables nor sentence denotations.
    Closure c(m, 1, budget);
    try {
      c.run();
    } catch (const ClosureOverflow&) {
      throw ClosureTooLarge("definable set exceeds " + std::to_string(budget.max_unary_states) +
                            " unary entries");
    }
    DefinableSet d = collect(m, c, K);
    if (K == 1) return d;
    if (d.unary.size() == ipow(static_cast<uint64_t>(n), static_cast<unsigned>(n))) {
      d.saturated = true;
      d.arity = K;
      return d;
    }
  }
  int k = K;
  // Function tables must fit a 64-bit code.
  while (k > 1 && static_cast<double>(ipow(static_cast<uint64_t>(n), static_cast<unsigned>(k))) * std::log2(n) >= 62.0) --k;
  for (;; --k) {
    Closure c(m, k, budget);
    try {
      c.run();
    } catch (const ClosureOverflow&) {
      if (k > 1) continue;
      throw ClosureTooLarge("definable set too large");
    }
    return collect(m, c, K);
  }
}

// ------------------------------------------------------------ validation

namespace {

uint64_t code_of(const std::vector<uint8_t>& t, int n) { return encode_unary(t, n); }

}  // namespace

namespace {

ModelReport validate_impl(const ModalModel& m, int system, const DefinableSet* defs);

}  // namespace

ModelReport validate_modal_model(const ModalModel& m, int system, int K) {
  try {
    check_model_shape(m);
  } catch (const ModelError& e) {
    ModelReport r;
    r.fail(std::string("shape: ") + e.what());
    return r;
  }
  std::optional<DefinableSet> defs;
  try {
    defs = definable_closure(m, K);
  } catch (const ClosureTooLarge&) {
    if (!forall_is_meet(m)) {
      ModelReport r;
      r.fail("definable set too large to enumerate and the quantifier is not the meet");
      return r;
    }
  }
  return validate_impl(m, system, defs ? &*defs : nullptr);
}

ModelReport validate_modal_model(const ModalModel& m, int system, const DefinableSet& defs) {
  return validate_impl(m, system, &defs);
}

ModelReport certify_modal_model(const ModalModel& m, int system) {
  if (!forall_is_meet(m)) {
    ModelReport r;
    r.fail("the certificate needs the meet quantifier");
    return r;
  }
  return validate_impl(m, system, nullptr);
}

namespace {

// Checks over every unary function, for models whose quantifier is the meet
// fold. Each routine tracks the reachable fold accumulators position by position.
struct MeetCertificate {
  const ModalModel& m;
  int n;
  explicit MeetCertificate(const ModalModel& mm) : m(mm), n(mm.n()) {}

  int And(int a, int b) const { return m.ops.And(a, b); }

  // All images restricted to `allowed`; returns the reachable folds.
  Subset folds(Subset allowed) const {
    Subset acc = singleton(m.ops.top);
    for (int pos = 0; pos < n; ++pos) {
      Subset next = 0;
      for (int a = 0; a < n; ++a)
        if (contains(acc, a))
          for (int u = 0; u < n; ++u)
            if (contains(allowed, u)) next |= singleton(And(a, u));
      acc = next;
    }
    return acc;
  }

  // States (l, x, y): l folds op(t1,t2), x folds t1, y folds t2.
  template <class Op, class Check>
  bool pairs(Op op, Check check) const {
    size_t N3 = static_cast<size_t>(n * n * n);
    std::vector<char> cur(N3, 0), nxt(N3, 0);
    int top = m.ops.top;
    cur[static_cast<size_t>((top * n + top) * n + top)] = 1;
    for (int pos = 0; pos < n; ++pos) {
      std::fill(nxt.begin(), nxt.end(), 0);
      for (size_t s = 0; s < N3; ++s) {
        if (!cur[s]) continue;
        int l = static_cast<int>(s) / (n * n), x = (static_cast<int>(s) / n) % n, y = static_cast<int>(s) % n;
        for (int u = 0; u < n; ++u)
          for (int v = 0; v < n; ++v)
            nxt[static_cast<size_t>((And(l, op(u, v)) * n + And(x, u)) * n + And(y, v))] = 1;
      }
      std::swap(cur, nxt);
    }
    for (size_t s = 0; s < N3; ++s)
      if (cur[s] && !check(static_cast<int>(s) / (n * n), (static_cast<int>(s) / n) % n, static_cast<int>(s) % n))
        return false;
    return true;
  }

  // States (f, g): f folds t, g folds h(t).
  template <class H, class Check>
  bool mapped(H h, Check check) const {
    size_t N2 = static_cast<size_t>(n * n);
    std::vector<char> cur(N2, 0), nxt(N2, 0);
    cur[static_cast<size_t>(m.ops.top * n + m.ops.top)] = 1;
    for (int pos = 0; pos < n; ++pos) {
      std::fill(nxt.begin(), nxt.end(), 0);
      for (size_t s = 0; s < N2; ++s) {
        if (!cur[s]) continue;
        int f = static_cast<int>(s) / n, g = static_cast<int>(s) % n;
        for (int u = 0; u < n; ++u) nxt[static_cast<size_t>(And(f, u) * n + And(g, h(u)))] = 1;
      }
      std::swap(cur, nxt);
    }
    for (size_t s = 0; s < N2; ++s)
      if (cur[s] && !check(static_cast<int>(s) / n, static_cast<int>(s) % n)) return false;
    return true;
  }

  // (iv)(h): the fold is below t(a) for every position a.
  bool below_each() const {
    for (int at = 0; at < n; ++at) {
      size_t N2 = static_cast<size_t>(n * n);
      std::vector<char> cur(N2, 0), nxt(N2, 0);
      for (int v = 0; v < n; ++v) cur[static_cast<size_t>(m.ops.top * n + v)] = 1;
      for (int pos = 0; pos < n; ++pos) {
        std::fill(nxt.begin(), nxt.end(), 0);
        for (size_t s = 0; s < N2; ++s) {
          if (!cur[s]) continue;
          int f = static_cast<int>(s) / n, v = static_cast<int>(s) % n;
          if (pos == at)
            nxt[static_cast<size_t>(And(f, v) * n + v)] = 1;
          else
            for (int u = 0; u < n; ++u) nxt[static_cast<size_t>(And(f, u) * n + v)] = 1;
        }
        std::swap(cur, nxt);
      }
      for (size_t s = 0; s < N2; ++s)
        if (cur[s] && !m.le(static_cast<int>(s) / n, static_cast<int>(s) % n)) return false;
    }
    return true;
  }
};

// (iv)(c) via compatibility of id with every operation (induction on the
// defining formula), the rest over all functions.
void certify_functions(const ModalModel& m, const MeetCertificate& cert, ModelReport& r) {
  const int n = m.n();
  const BoolOps& o = m.ops;
  for (int u = 0; u < n && r.ok; ++u)
    for (int u2 = 0; u2 < n && r.ok; ++u2) {
      int e = m.Id(u, u2);
      if (!m.le(e, m.Id(o.Neg(u), o.Neg(u2))) || !m.le(e, m.Id(m.Box(u), m.Box(u2))))
        r.fail("(iv)(c) certificate: id not compatible with a unary operation");
      for (int v = 0; v < n && r.ok; ++v)
        for (int v2 = 0; v2 < n && r.ok; ++v2) {
          int both = o.And(e, m.Id(v, v2));
          if (!m.le(both, m.Id(o.Or(u, v), o.Or(u2, v2))) || !m.le(both, m.Id(o.And(u, v), o.And(u2, v2))) ||
              !m.le(both, m.Id(o.Imp(u, v), o.Imp(u2, v2))) || !m.le(both, m.Id(m.Id(u, v), m.Id(u2, v2))))
            r.fail("(iv)(c) certificate: id not compatible with a binary operation");
        }
    }
  if (!r.ok) return;
  auto id_op = [&](int u, int v) { return m.Id(u, v); };
  auto imp_op = [&](int u, int v) { return o.Imp(u, v); };
  if (!cert.below_each()) r.fail("(iv)(h) over all functions");
  else if (!cert.pairs(id_op, [&](int l, int x, int y) { return m.le(l, m.Id(x, y)); }))
    r.fail("(iv)(g) over all function pairs");
  else if (!cert.pairs(imp_op, [&](int l, int x, int y) { return m.le(l, o.Imp(x, y)); }))
    r.fail("(iv)(i) over all function pairs");
  if (!r.ok) return;
  for (int b = 0; b < n && r.ok; ++b)
    if (!cert.mapped([&](int u) { return o.Imp(b, u); }, [&](int f, int g) { return m.le(g, o.Imp(b, f)); }))
      r.fail("(iv)(j) over all functions");
  if (!r.ok) return;
  if (!cert.mapped([&](int u) { return m.Box(u); }, [&](int f, int g) { return m.eqv(m.Box(f), g); }))
    r.fail("(iv)(k) over all functions");
  else if ((cert.folds(m.nec) & ~m.nec) != 0)
    r.fail("(iv)(l) over all functions");
}

ModelReport validate_impl(const ModalModel& m, int system, const DefinableSet* defs) {
  ModelReport r;
  if (system < 3 || system > 5) {
    r.fail("system must be 3, 4 or 5");
    return r;
  }
  try {
    check_model_shape(m);
  } catch (const ModelError& e) {
    r.fail(std::string("shape: ") + e.what());
    return r;
  }
  r.normal = m.normal();
  if (!defs) {
    r.notes.push_back("definable set too large to enumerate; conditions certified over all functions");
  } else {
    r.arity = defs->arity;
    r.definable_unary = defs->unary.size();
    if (defs->saturated)
      r.notes.push_back("every unary function is definable; verified for all arities");
    else
      r.notes.push_back("verified up to free-variable arity " + std::to_string(defs->arity));
  }
  const int n = m.n();
  const BoolOps& o = m.ops;
  auto T = [&](int a) { return contains(m.truth, a); };
  auto N = [&](int a) { return contains(m.nec, a); };
  auto fa = [&](const std::vector<uint8_t>& t) { return m.Forall(code_of(t, n)); };

  if (T(o.bot) || !T(o.top)) r.fail("(ii)(a)");
  for (int a = 0; a < n && r.ok; ++a) {
    if (T(o.Neg(a)) == T(a)) r.fail("(ii)(c)");
    if (T(m.Box(a)) != N(a)) r.fail("(ii)(f)");
    for (int b = 0; b < n && r.ok; ++b) {
      if (T(o.Imp(a, b)) != (!T(a) || T(b))) r.fail("(ii)(b)");
      if (T(o.And(a, b)) != (T(a) && T(b))) r.fail("(ii)(d)");
      if (T(o.Or(a, b)) != (T(a) || T(b))) r.fail("(ii)(e)");
      if (T(m.Id(a, b)) != (a == b)) r.fail("(ii)(g)");
    }
  }
  if (!r.ok) return r;
  const MeetCertificate cert(m);
  if (!defs) {
    Subset f = cert.folds(m.truth);
    if ((f & ~m.truth) != 0) r.fail("(ii)(h) over all functions");
  }
  for (const auto& u : defs ? defs->unary : std::vector<UnaryDef>{}) {
    bool im = std::all_of(u.table.begin(), u.table.end(), [&](uint8_t v) { return T(v); });
    if (im && !T(fa(u.table))) {
      r.fail("(ii)(h) witness " + render(u.phi) + " in x" + std::to_string(u.x));
      return r;
    }
  }

  if (!m.normal()) {
    r.notes.push_back("non-normal: conditions (i), (iii), (iv) skipped");
    if (system >= 4) r.fail("S4 and S5 models are normal");
    return r;
  }

  PreAlgebra p{o, std::vector<uint8_t>(static_cast<size_t>(n * n))};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) p.leq[static_cast<size_t>(a * n + b)] = m.le(a, b) ? 1 : 0;
  ValidationReport pr = validate_prealgebra(p);
  if (!pr.ok) {
    r.fail("(i) " + pr.violated);
    return r;
  }
  if ((m.nec & ~m.truth) != 0) r.fail("(iii) NEC not contained in TRUE");
  for (int a = 0; a < n && r.ok; ++a)
    for (int b = 0; b < n && r.ok; ++b) {
      if (N(a) && m.le(a, b) && !N(b)) r.fail("(iii)(a)");
      if (N(a) && N(b) && !N(o.And(a, b))) r.fail("(iii)(b)");
    }
  if (!r.ok) return r;

  bool d_ok = true, e_ok = true, f_ok = true;
  for (int a = 0; a < n && r.ok; ++a) {
    if (!m.le(o.top, m.Id(a, a))) r.fail("(iv)(a)");
    if (!m.le(m.Box(a), a)) d_ok = false;
    for (int b = 0; b < n && r.ok; ++b) {
      if (!m.le(m.Id(a, b), o.Imp(a, b))) r.fail("(iv)(b)");
      int bi = m.Box(o.Imp(a, b));
      if (!m.le(bi, o.Imp(m.Box(a), m.Box(b)))) e_ok = false;
      if (!m.le(bi, m.Box(o.Imp(m.Box(a), m.Box(b))))) f_ok = false;
    }
  }
  if (!r.ok) return r;
  if (!d_ok) r.fail("(iv)(d)");
  else if (!f_ok) r.fail("(iv)(f)");
  else if (!e_ok) r.fail("(iv)(e) fails although (iv)(d) and (iv)(f) hold: redundancy cross-test");
  if (!r.ok) return r;

  if (!defs) {
    certify_functions(m, cert, r);
    if (!r.ok) return r;
  }
  static const DefinableSet kEmpty;
  const DefinableSet& ds = defs ? *defs : kEmpty;
  const auto& D = ds.unary;
  std::vector<int> fav(D.size());
  for (size_t i = 0; i < D.size(); ++i) fav[i] = fa(D[i].table);
  auto wit = [&](size_t i) { return render(D[i].phi) + " in x" + std::to_string(D[i].x); };

  for (size_t i = 0; i < D.size() && r.ok; ++i) {
    const auto& t = D[i].table;
    for (int a = 0; a < n && r.ok; ++a) {
      if (!m.le(fav[i], t[static_cast<size_t>(a)])) r.fail("(iv)(h) witness " + wit(i));
      for (int b = 0; b < n && r.ok; ++b)
        if (!m.le(m.Id(a, b), m.Id(t[static_cast<size_t>(a)], t[static_cast<size_t>(b)])))
          r.fail("(iv)(c) witness " + wit(i));
    }
  }
  if (!r.ok) return r;

  std::vector<uint8_t> t(static_cast<size_t>(n));
  for (size_t i = 0; i < D.size() && r.ok; ++i)
    for (size_t j = 0; j < D.size() && r.ok; ++j) {
      const auto& t1 = D[i].table;
      const auto& t2 = D[j].table;
      for (int a = 0; a < n; ++a) t[static_cast<size_t>(a)] = static_cast<uint8_t>(m.Id(t1[static_cast<size_t>(a)], t2[static_cast<size_t>(a)]));
      if (!m.le(fa(t), m.Id(fav[i], fav[j]))) r.fail("(iv)(g) witnesses " + wit(i) + " / " + wit(j));
      for (int a = 0; a < n; ++a) t[static_cast<size_t>(a)] = static_cast<uint8_t>(o.Imp(t1[static_cast<size_t>(a)], t2[static_cast<size_t>(a)]));
      if (!m.le(fa(t), o.Imp(fav[i], fav[j]))) r.fail("(iv)(i) witnesses " + wit(i) + " / " + wit(j));
    }
  if (!r.ok) return r;

  for (int b : ds.sentences)
    for (size_t i = 0; i < D.size() && r.ok; ++i) {
      for (int a = 0; a < n; ++a) t[static_cast<size_t>(a)] = static_cast<uint8_t>(o.Imp(b, D[i].table[static_cast<size_t>(a)]));
      if (!m.le(fa(t), o.Imp(b, fav[i]))) r.fail("(iv)(j) witness " + wit(i));
    }
  if (!r.ok) return r;

  bool k_ok = true, l_ok = true;
  std::string k_wit, l_wit;
  for (size_t i = 0; i < D.size(); ++i) {
    for (int a = 0; a < n; ++a) t[static_cast<size_t>(a)] = static_cast<uint8_t>(m.Box(D[i].table[static_cast<size_t>(a)]));
    if (k_ok && !m.eqv(m.Box(fav[i]), fa(t))) {
      k_ok = false;
      k_wit = wit(i);
    }
    bool im = std::all_of(D[i].table.begin(), D[i].table.end(), [&](uint8_t v) { return N(v); });
    if (l_ok && im && !N(fav[i])) {
      l_ok = false;
      l_wit = wit(i);
    }
  }
  if (!k_ok) r.fail("(iv)(k) witness " + k_wit);
  else if (!l_ok) r.fail("(iv)(l) fails although (iv)(k), (ii)(f), (ii)(h) hold: redundancy cross-test, witness " + l_wit);
  if (!r.ok) return r;

  if (system >= 4)
    for (int a = 0; a < n; ++a)
      if (!m.le(m.Box(a), m.Box(m.Box(a)))) {
        r.fail("S4 clause");
        return r;
      }
  if (system == 5)
    for (int a = 0; a < n; ++a) {
      int nb = o.Neg(m.Box(a));
      if (!m.le(nb, m.Box(nb))) {
        r.fail("S5 clause");
        return r;
      }
    }
  return r;
}

}  // namespace

// ------------------------------------------------------------ collapse

CollapseReport collapse_diagnostics(const ModalModel& m) {
  if (!m.normal()) throw ModelError("collapse diagnostics need a normal model");
  CollapseReport c;
  int n = m.n();
  c.boolean_algebra = is_boolean_algebra(m.ops);
  c.collapse_axiom = std::popcount(m.nec) == 1;
  c.leq_antisymmetric = true;
  c.strict_equals_identity = true;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a != b && m.eqv(a, b)) c.leq_antisymmetric = false;
      if (m.eqv(a, b) != (a == b)) c.strict_equals_identity = false;
    }
  bool c1 = c.boolean_algebra && c.collapse_axiom;
  bool c2 = c.boolean_algebra && m.nec == singleton(m.ops.top);
  c.all_equivalent = c1 == c2 && c2 == c.leq_antisymmetric && c.leq_antisymmetric == c.strict_equals_identity;
  return c;
}

// ------------------------------------------------------------ constructors

namespace {

std::vector<uint8_t> discriminator(const BoolOps& o) {
  std::vector<uint8_t> id(static_cast<size_t>(o.n * o.n));
  for (int a = 0; a < o.n; ++a)
    for (int b = 0; b < o.n; ++b) id[static_cast<size_t>(a * o.n + b)] = static_cast<uint8_t>(a == b ? o.top : o.bot);
  return id;
}

}  // namespace

ModalModel boolean_model(int k, Subset truth, Subset nec, const std::vector<uint8_t>& box) {
  int n = 1 << k;
  BoolOps o;
  o.n = n;
  o.bot = 0;
  o.top = n - 1;
  for (int a = 0; a < n; ++a) o.neg.push_back(static_cast<uint8_t>((n - 1) & ~a));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      o.or_.push_back(static_cast<uint8_t>(a | b));
      o.and_.push_back(static_cast<uint8_t>(a & b));
      o.imp.push_back(static_cast<uint8_t>(((n - 1) & ~a) | b));
    }
  ModalModel m;
  m.ops = o;
  m.truth = truth;
  m.nec = nec;
  m.id = discriminator(o);
  m.box = box;
  m.forall_tab = meet_forall_table(o);
  return m;
}

ModalModel canonical_model() { return boolean_model(1, singleton(1), singleton(1), {0, 1}); }

// ------------------------------------------------------------ enumeration

bool isomorphic(const ModalModel& a, const ModalModel& b) {
  if (a.n() != b.n() || a.gamma.size() != b.gamma.size()) return false;
  int n = a.n();
  std::vector<int> p(static_cast<size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  auto P = [&](int x) { return p[static_cast<size_t>(x)]; };
  auto map_set = [&](Subset s) {
    Subset out = 0;
    for (int x = 0; x < n; ++x)
      if (contains(s, x)) out |= singleton(P(x));
    return out;
  };
  uint64_t total = a.forall_tab.size();
  do {
    if (P(a.ops.bot) != b.ops.bot || P(a.ops.top) != b.ops.top) continue;
    if (map_set(a.truth) != b.truth || map_set(a.nec) != b.nec) continue;
    bool ok = true;
    for (int x = 0; x < n && ok; ++x) {
      if (P(a.ops.Neg(x)) != b.ops.Neg(P(x)) || P(a.Box(x)) != b.Box(P(x))) ok = false;
      for (int y = 0; y < n && ok; ++y) {
        if (P(a.ops.Or(x, y)) != b.ops.Or(P(x), P(y)) || P(a.ops.And(x, y)) != b.ops.And(P(x), P(y)) ||
            P(a.ops.Imp(x, y)) != b.ops.Imp(P(x), P(y)) || P(a.Id(x, y)) != b.Id(P(x), P(y)))
          ok = false;
      }
    }
    for (const auto& [name, v] : a.gamma) {
      auto it = b.gamma.find(name);
      if (it == b.gamma.end() || it->second != P(v)) ok = false;
    }
    for (uint64_t code = 0; code < total && ok; ++code) {
      std::vector<uint8_t> t = decode_unary(code, n), u(static_cast<size_t>(n));
      for (int x = 0; x < n; ++x) u[static_cast<size_t>(P(x))] = static_cast<uint8_t>(P(t[static_cast<size_t>(x)]));
      if (P(a.Forall(code)) != b.Forall(encode_unary(u, n))) ok = false;
    }
    if (ok) return true;
  } while (std::next_permutation(p.begin(), p.end()));
  return false;
}

EnumStats enumerate_models(int n_max, int system, const EnumConstraints& c,
                           const std::function<bool(const ModalModel&, const ModelReport&)>& yield) {
  EnumStats st;
  auto start = std::chrono::steady_clock::now();
  auto out_of_time = [&] {
    if (c.budget_ms <= 0) return false;
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    return ms > c.budget_ms;
  };
  for (int n = 2; n <= std::min(n_max, kMaxForallN); ++n) {
    std::vector<ModalModel> kept;
    for (const BoolOps& o : enumerate_bool_parts(n, false)) {
      if (c.non_boolean && is_boolean_algebra(o)) continue;
      ModalModel base;
      base.ops = o;
      base.id = discriminator(o);
      base.forall_tab = meet_forall_table(o);
      for (Subset T = 0; T <= full_set(n); ++T) {
        if (contains(T, o.bot) || !contains(T, o.top)) continue;
        bool truth_ok = true;
        for (int a = 0; a < n && truth_ok; ++a) {
          if (contains(T, o.Neg(a)) == contains(T, a)) truth_ok = false;
          for (int b = 0; b < n && truth_ok; ++b)
            if (contains(T, o.Imp(a, b)) != (!contains(T, a) || contains(T, b)) ||
                contains(T, o.And(a, b)) != (contains(T, a) && contains(T, b)) ||
                contains(T, o.Or(a, b)) != (contains(T, a) || contains(T, b)))
              truth_ok = false;
        }
        if (!truth_ok) continue;
        // NEC ranges over subsets of TRUE, including the empty set.
        for (Subset N = T;; N = (N - 1) & T) {
          bool normal = N != 0;
          bool wanted = c.non_normal ? !normal : true;
          if (c.nec_at_least_two && std::popcount(N) < 2) wanted = false;
          if (system >= 4 && !normal) wanted = false;
          ModalModel m = base;
          m.truth = T;
          m.nec = N;
          if (wanted && normal) {
            PreAlgebra p{o, std::vector<uint8_t>(static_cast<size_t>(n * n))};
            for (int a = 0; a < n; ++a)
              for (int b = 0; b < n; ++b) p.leq[static_cast<size_t>(a * n + b)] = m.le(a, b);
            if (!validate_prealgebra(p).ok) wanted = false;
            for (int a = 0; a < n && wanted; ++a)
              for (int b = 0; b < n && wanted; ++b)
                if ((contains(N, a) && m.le(a, b) && !contains(N, b)) ||
                    (contains(N, a) && contains(N, b) && !contains(N, o.And(a, b))))
                  wanted = false;
          }
          if (wanted) {
            // Per-element candidates for box: (ii)(f), and (iv)(d) when normal.
            std::vector<std::vector<uint8_t>> cand(static_cast<size_t>(n));
            for (int a = 0; a < n; ++a)
              for (int v = 0; v < n; ++v) {
                if (contains(T, v) != contains(N, a)) continue;
                if (normal && !m.le(v, a)) continue;
                cand[static_cast<size_t>(a)].push_back(static_cast<uint8_t>(v));
              }
            bool empty = std::any_of(cand.begin(), cand.end(), [](const auto& v) { return v.empty(); });
            std::vector<size_t> pos(static_cast<size_t>(n), 0);
            m.box.assign(static_cast<size_t>(n), 0);
            while (!empty) {
              for (int a = 0; a < n; ++a) m.box[static_cast<size_t>(a)] = cand[static_cast<size_t>(a)][pos[static_cast<size_t>(a)]];
              bool quick = true;
              if (normal)
                for (int a = 0; a < n && quick; ++a) {
                  if (system >= 4 && !m.le(m.Box(a), m.Box(m.Box(a)))) quick = false;
                  if (system == 5 && !m.le(o.Neg(m.Box(a)), m.Box(o.Neg(m.Box(a))))) quick = false;
                  for (int b = 0; b < n && quick; ++b) {
                    int bi = m.Box(o.Imp(a, b));
                    if (!m.le(bi, m.Box(o.Imp(m.Box(a), m.Box(b))))) quick = false;
                  }
                }
              if (quick) {
                ++st.candidates;
                ModelReport rep = validate_modal_model(m, system, c.arity);
                bool dup = false;
                if (rep.ok && c.dedupe && n <= 4)
                  dup = std::any_of(kept.begin(), kept.end(), [&](const ModalModel& k) { return isomorphic(k, m); });
                if (rep.ok && !dup) {
                  if (c.dedupe) kept.push_back(m);
                  ++st.yielded;
                  if (!yield(m, rep)) return st;
                }
                if (out_of_time()) {
                  st.truncated = true;
                  return st;
                }
              }
              size_t i = 0;
              for (; i < pos.size(); ++i) {
                if (++pos[i] < cand[i].size()) break;
                pos[i] = 0;
              }
              if (i == pos.size()) break;
            }
          }
          if (N == 0) break;
        }
      }
    }
  }
  return st;
}

// ------------------------------------------------------------ admissibility

AdmissibleReport check_admissible_simple(const ModalModel& m, int depth, int samples, uint64_t seed, int K) {
  AdmissibleReport rep;
  check_model_shape(m);
  rep.normal = m.normal();
  Rng rng(seed);
  int n = m.n();
  const BoolOps& o = m.ops;
  auto T = [&](int a) { return contains(m.truth, a); };
  auto N = [&](int a) { return contains(m.nec, a); };
  std::uniform_int_distribution<int> elem(0, n - 1);

  FormulaGen fg;
  fg.depth = depth;
  fg.num_vars = 3;
  for (const auto& [name, v] : m.gamma) fg.consts.push_back(intern_constant(name));
  auto random_assignment = [&] {
    Assignment g;
    for (uint32_t x = 0; x < 4; ++x) g.set(x, elem(rng));
    return g;
  };

  // (i)
  if (T(o.bot) || !T(o.top)) rep.fail("truth condition (i)");
  // (ii)-(vii) and (ix) on all elements.
  for (int a = 0; a < n; ++a) {
    if (T(o.Neg(a)) == T(a)) rep.fail("truth condition (iii) at element " + std::to_string(a));
    if (T(m.Box(a)) != N(a)) rep.fail("truth condition (vi) at element " + std::to_string(a));
    for (int b = 0; b < n; ++b) {
      if (T(o.Imp(a, b)) != (!T(a) || T(b))) rep.fail("truth condition (ii) at elements " + std::to_string(a) + "," + std::to_string(b));
      if (T(o.And(a, b)) != (T(a) && T(b))) rep.fail("truth condition (iv) at elements " + std::to_string(a) + "," + std::to_string(b));
      if (T(o.Or(a, b)) != (T(a) || T(b))) rep.fail("truth condition (v) at elements " + std::to_string(a) + "," + std::to_string(b));
      if (T(m.Id(a, b)) != (a == b)) rep.fail("truth condition (vii) at elements " + std::to_string(a) + "," + std::to_string(b));
      if (N(o.Imp(a, b)) && !N(o.Imp(m.Box(a), m.Box(b))))
        rep.fail("truth condition (ix) at elements " + std::to_string(a) + "," + std::to_string(b));
    }
  }
  // (x) and (viii) over definable functions.
  DefinableSet defs = definable_closure(m, K);
  for (const auto& u : defs.unary) {
    int v = m.Forall(encode_unary(u.table, n));
    bool im_nec = std::all_of(u.table.begin(), u.table.end(), [&](uint8_t x) { return N(x); });
    bool im_true = std::all_of(u.table.begin(), u.table.end(), [&](uint8_t x) { return T(x); });
    if (N(v) && !im_nec) rep.fail("truth condition (x) for " + render(u.phi) + " in x" + std::to_string(u.x));
    if (T(v) != im_true) rep.fail("truth condition (viii) for " + render(u.phi) + " in x" + std::to_string(u.x));
  }

  for (int s = 0; s < samples; ++s) {
    F phi = random_formula(rng, fg);
    F psi = random_formula(rng, fg);
    Assignment g = random_assignment();
    ++rep.triples;
    // Sampled truth conditions.
    int a = eval(m, g, phi), b = eval(m, g, psi);
    if (T(eval(m, g, F::imp(phi, psi))) != (!T(a) || T(b))) rep.fail("truth condition (ii) on " + render(phi));
    if (T(eval(m, g, F::neg(phi))) == T(a)) rep.fail("truth condition (iii) on " + render(phi));
    if (T(eval(m, g, F::conj(phi, psi))) != (T(a) && T(b))) rep.fail("truth condition (iv) on " + render(phi));
    if (T(eval(m, g, F::disj(phi, psi))) != (T(a) || T(b))) rep.fail("truth condition (v) on " + render(phi));
    if (T(eval(m, g, F::box(phi))) != N(a)) rep.fail("truth condition (vi) on " + render(phi));
    if (T(eval(m, g, F::id(phi, psi))) != (a == b)) rep.fail("truth condition (vii) on " + render(phi));
    for (uint32_t x : phi.fvars()) {
      F q = F::forall(x, phi);
      bool all_true = true, all_nec = true;
      for (int z = 0; z < n; ++z) {
        int v = eval(m, g.updated(x, z), phi);
        all_true = all_true && T(v);
        all_nec = all_nec && N(v);
      }
      int qv = eval(m, g, q);
      if (T(qv) != all_true) rep.fail("truth condition (viii) on " + render(q));
      if (N(qv) && !all_nec) rep.fail("truth condition (x) on " + render(q));
    }
    if (N(eval(m, g, F::imp(phi, psi))) && !N(eval(m, g, F::imp(F::box(phi), F::box(psi)))))
      rep.fail("truth condition (ix) on " + render(phi) + " / " + render(psi));

    // Coincidence: vary every variable that is not free.
    for (uint32_t x = 0; x < 4; ++x) {
      if (phi.is_free(x)) continue;
      for (int z = 0; z < n; ++z)
        if (eval(m, g.updated(x, z), phi) != a) rep.fail("coincidence on " + render(phi));
    }
    // Substitution.
    Substitution sigma = random_substitution(rng, FormulaGen{std::max(1, depth - 1), 3, 0, true, true, true, true, fg.consts});
    Assignment gs = g;
    for (uint32_t x = 0; x < 4; ++x) gs.set(x, eval(m, g, sigma.lookup_var(x)));
    if (eval(m, g, apply(phi, sigma)) != eval(m, gs, phi)) rep.fail("substitution on " + render(phi));

    // Admissibility: AX- instances land in NEC. Vacuous when NEC is empty.
    if (!rep.normal) continue;
    SchemeInstance inst = random_axiom(rng, AxiomSet::Minus, 3, fg, depth);
    F ax = check_instance(inst, AxiomSet::Minus, 3);
    ++rep.instances;
    if (!N(eval(m, g, ax))) rep.fail("axiom instance outside NEC: " + render(ax));
  }
  return rep;
}

// ------------------------------------------------------------ JSON

json to_json(const ModalModel& m) {
  json j;
  write_bool_ops(j, m.ops);
  int n = m.n();
  j["true"] = subset_json(m.truth, n);
  j["nec"] = subset_json(m.nec, n);
  j["id"] = table2(m.id, n);
  j["box"] = m.box;
  if (forall_is_meet(m)) {
    j["forall"] = "meet";
  } else {
    json f = json::object();
    for (uint64_t code = 0; code < m.forall_tab.size(); ++code) {
      std::vector<uint8_t> t = decode_unary(code, n);
      std::string key;
      for (int a = 0; a < n; ++a) key += (a ? "," : "") + std::to_string(t[static_cast<size_t>(a)]);
      f[key] = m.forall_tab[code];
    }
    j["forall"] = f;
  }
  j["gamma"] = m.gamma;
  return j;
}

ModalModel modal_model_from_json(const json& j) {
  ModalModel m;
  m.ops = bool_ops_from_json(j);
  int n = m.n();
  if (n > kMaxForallN) throw ModelError("models need n <= " + std::to_string(kMaxForallN));
  try {
    m.truth = subset_from_json(j, n, "true");
    m.nec = subset_from_json(j, n, "nec");
    m.id = read_table2(j, n, "id");
    for (const auto& v : j.at("box")) m.box.push_back(static_cast<uint8_t>(v.get<int>()));
    const json& f = j.at("forall");
    if (f.is_string()) {
      if (f.get<std::string>() != "meet") throw ModelError("forall must be \"meet\" or a table");
      m.forall_tab = meet_forall_table(m.ops);
    } else {
      m.forall_tab.assign(ipow(static_cast<uint64_t>(n), static_cast<unsigned>(n)), static_cast<uint8_t>(m.ops.top));
      std::vector<bool> seen(m.forall_tab.size(), false);
      for (const auto& [key, val] : f.items()) {
        std::vector<uint8_t> t;
        std::stringstream ss(key);
        std::string part;
        while (std::getline(ss, part, ',')) {
          int v = std::stoi(part);
          if (v < 0 || v >= n) throw ModelError("forall key '" + key + "' out of range");
          t.push_back(static_cast<uint8_t>(v));
        }
        if (t.size() != static_cast<size_t>(n)) throw ModelError("forall key '" + key + "' has the wrong length");
        uint64_t code = encode_unary(t, n);
        m.forall_tab[code] = static_cast<uint8_t>(val.get<int>());
        seen[code] = true;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ModelError("forall table must list all n^n functions");
    }
    if (j.contains("gamma"))
      for (const auto& [name, v] : j.at("gamma").items()) m.gamma[name] = v.get<int>();
  } catch (const json::exception& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ModelError("malformed forall key");
  }
  check_model_shape(m);
  return m;
}

json to_json(const Assignment& g) {
  json j = json::object();
  for (const auto& [x, v] : g.values()) j["x" + std::to_string(x)] = v;
  return j;
}

Assignment assignment_from_json(const json& j) {
  Assignment g;
  if (!j.is_object()) throw ModelError("assignment must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key.size() < 2 || key[0] != 'x') throw ModelError("assignment key '" + key + "' is not a variable");
    g.set(static_cast<uint32_t>(std::stoul(key.substr(1))), v.get<int>());
  }
  return g;
}

}  // namespace nfk
