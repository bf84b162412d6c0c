#include "nfk/formula.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <unordered_map>

namespace nfk {

namespace {

struct ConstantTable {
  std::mutex mu;
  std::vector<std::string> names{"bot", "top"};
  std::unordered_map<std::string, int> ids{{"bot", kBot}, {"top", kTop}};
};

ConstantTable& constant_table() {
  static ConstantTable t;
  return t;
}

size_t mix(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

template <class T>
std::vector<T> merged(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

int intern_constant(std::string_view name) {
  auto& t = constant_table();
  std::lock_guard lock(t.mu);
  std::string key(name);
  auto it = t.ids.find(key);
  if (it != t.ids.end()) return it->second;
  int id = static_cast<int>(t.names.size());
  t.names.push_back(key);
  t.ids.emplace(key, id);
  return id;
}

const std::string& constant_name(int id) {
  auto& t = constant_table();
  std::lock_guard lock(t.mu);
  if (id < 0 || id >= static_cast<int>(t.names.size()))
    throw std::out_of_range("unknown constant id " + std::to_string(id));
  return t.names[static_cast<size_t>(id)];
}

struct Node {
  Op op;
  uint32_t var = 0;
  int con = 0;
  Formula a, b;
  size_t hash = 0;
  std::vector<uint32_t> fv;
  std::vector<int> cs;
  int64_t max_var = -1;
  int depth = 0;
  size_t size = 1;
};

Formula Formula::make(Node&& n) {
  size_t h = static_cast<size_t>(n.op) * 1315423911u;
  h = mix(h, n.var);
  h = mix(h, static_cast<size_t>(n.con));
  if (n.a.valid()) h = mix(h, n.a.hash());
  if (n.b.valid()) h = mix(h, n.b.hash());
  n.hash = h;
  return Formula(std::make_shared<const Node>(std::move(n)));
}

Formula Formula::var(uint32_t index) {
  Node n{Op::Var};
  n.var = index;
  n.fv = {index};
  n.max_var = index;
  return make(std::move(n));
}

Formula Formula::constant(int id) {
  Node n{Op::Const};
  n.con = id;
  n.cs = {id};
  return make(std::move(n));
}

namespace {
Node unary(Op op, Formula a) {
  Node n{op};
  n.fv = a.fvars();
  n.cs = a.consts();
  n.max_var = a.max_var();
  n.depth = a.depth() + 1;
  n.size = a.size() + 1;
  n.a = std::move(a);
  return n;
}

Node binary(Op op, Formula a, Formula b) {
  Node n{op};
  n.fv = merged(a.fvars(), b.fvars());
  n.cs = merged(a.consts(), b.consts());
  n.max_var = std::max(a.max_var(), b.max_var());
  n.depth = std::max(a.depth(), b.depth()) + 1;
  n.size = a.size() + b.size() + 1;
  n.a = std::move(a);
  n.b = std::move(b);
  return n;
}
}  // namespace

Formula Formula::neg(Formula a) { return make(unary(Op::Neg, std::move(a))); }
Formula Formula::box(Formula a) { return make(unary(Op::Box, std::move(a))); }
Formula Formula::disj(Formula a, Formula b) { return make(binary(Op::Or, std::move(a), std::move(b))); }
Formula Formula::conj(Formula a, Formula b) { return make(binary(Op::And, std::move(a), std::move(b))); }
Formula Formula::imp(Formula a, Formula b) { return make(binary(Op::Imp, std::move(a), std::move(b))); }
Formula Formula::id(Formula a, Formula b) { return make(binary(Op::Id, std::move(a), std::move(b))); }

Formula Formula::iff(Formula a, Formula b) { return conj(imp(a, b), imp(b, a)); }

Formula Formula::forall(uint32_t x, Formula body) {
  if (!body.is_free(x))
    throw std::invalid_argument("forall x" + std::to_string(x) + ": variable not free in body");
  Node n = unary(Op::Forall, std::move(body));
  n.var = x;
  n.fv.erase(std::find(n.fv.begin(), n.fv.end(), x));
  n.max_var = std::max<int64_t>(n.max_var, x);
  return make(std::move(n));
}

Op Formula::op() const { return p_->op; }
uint32_t Formula::var_index() const { return p_->var; }
int Formula::const_id() const { return p_->con; }
const Formula& Formula::lhs() const { return p_->a; }
const Formula& Formula::rhs() const { return p_->b; }
const std::vector<uint32_t>& Formula::fvars() const { return p_->fv; }
const std::vector<int>& Formula::consts() const { return p_->cs; }
int64_t Formula::max_var() const { return p_->max_var; }
int Formula::depth() const { return p_->depth; }
size_t Formula::hash() const { return p_->hash; }
size_t Formula::size() const { return p_->size; }

bool Formula::is_free(uint32_t x) const {
  return std::binary_search(p_->fv.begin(), p_->fv.end(), x);
}

bool Formula::has_const(int c) const {
  return std::binary_search(p_->cs.begin(), p_->cs.end(), c);
}

bool Formula::operator==(const Formula& o) const {
  if (p_ == o.p_) return true;
  if (!p_ || !o.p_) return false;
  const Node& x = *p_;
  const Node& y = *o.p_;
  if (x.hash != y.hash || x.op != y.op || x.var != y.var || x.con != y.con || x.size != y.size)
    return false;
  if (x.a.valid() && !(x.a == y.a)) return false;
  if (x.b.valid() && !(x.b == y.b)) return false;
  return true;
}

bool Formula::operator<(const Formula& o) const {
  if (p_ == o.p_) return false;
  const Node& x = *p_;
  const Node& y = *o.p_;
  if (x.op != y.op) return x.op < y.op;
  if (x.var != y.var) return x.var < y.var;
  if (x.con != y.con) return x.con < y.con;
  if (x.a.valid()) {
    if (x.a != y.a) return x.a < y.a;
  }
  if (x.b.valid()) {
    if (x.b != y.b) return x.b < y.b;
  }
  return false;
}

// ---------------------------------------------------------------- parsing

namespace {

enum class Tok { End, LParen, RParen, Dot, Neg, Box, Or, And, Imp, Iff, Id, Forall, Bot, Top, Var, Const };

struct Token {
  Tok kind;
  size_t pos;
  uint32_t var = 0;
  std::string name;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      if (i + 1 < s.size() && ident_start(s[i + 1])) {
        size_t j = i + 1;
        while (j < s.size() && ident_char(s[j])) ++j;
        out.push_back({Tok::Const, i, 0, std::string(s.substr(i + 1, j - i - 1))});
        i = j;
      } else {
        while (i < s.size() && s[i] != '\n') ++i;
      }
      continue;
    }
    auto starts = [&](std::string_view p) { return s.substr(i, p.size()) == p; };
    if (starts("<->")) { out.push_back({Tok::Iff, i}); i += 3; continue; }
    if (starts("->")) { out.push_back({Tok::Imp, i}); i += 2; continue; }
    if (starts("==")) { out.push_back({Tok::Id, i}); i += 2; continue; }
    if (starts("[]")) { out.push_back({Tok::Box, i}); i += 2; continue; }
    switch (c) {
      case '(': out.push_back({Tok::LParen, i}); ++i; continue;
      case ')': out.push_back({Tok::RParen, i}); ++i; continue;
      case '.': out.push_back({Tok::Dot, i}); ++i; continue;
      case '~': out.push_back({Tok::Neg, i}); ++i; continue;
      case '|': out.push_back({Tok::Or, i}); ++i; continue;
      case '&': out.push_back({Tok::And, i}); ++i; continue;
      default: break;
    }
    if (ident_start(c)) {
      size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      std::string_view w = s.substr(i, j - i);
      if (w == "forall") out.push_back({Tok::Forall, i});
      else if (w == "bot") out.push_back({Tok::Bot, i});
      else if (w == "top") out.push_back({Tok::Top, i});
      else if (w.size() >= 2 && w[0] == 'x' &&
               std::all_of(w.begin() + 1, w.end(), [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
        if (w.size() > 10) throw ParseError("variable index too large", i);
        unsigned long long v = std::stoull(std::string(w.substr(1)));
        if (v > 0xFFFFFFF0ULL) throw ParseError("variable index too large", i);
        out.push_back({Tok::Var, i, static_cast<uint32_t>(v)});
      } else {
        throw ParseError("unknown identifier '" + std::string(w) + "'", i);
      }
      i = j;
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", i);
  }
  out.push_back({Tok::End, s.size()});
  return out;
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Formula run() {
    Formula f = formula();
    if (peek().kind != Tok::End) throw ParseError("unexpected trailing input", peek().pos);
    return f;
  }

private:
  const Token& peek() const { return t_[i_]; }
  const Token& next() { return t_[i_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++i_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) throw ParseError(std::string("expected ") + what, peek().pos);
  }

  Formula formula() {
    if (peek().kind == Tok::Forall) {
      size_t at = next().pos;
      if (peek().kind != Tok::Var) throw ParseError("expected variable after forall", peek().pos);
      uint32_t x = next().var;
      expect(Tok::Dot, "'.'");
      Formula body = formula();
      if (!body.is_free(x))
        throw ParseError("bound variable x" + std::to_string(x) + " is not free in the body", at);
      return Formula::forall(x, body);
    }
    return iff();
  }

  Formula iff() {
    Formula f = imp();
    while (accept(Tok::Iff)) f = Formula::iff(f, imp());
    return f;
  }

  Formula imp() {
    Formula f = disj();
    if (accept(Tok::Imp)) return Formula::imp(f, imp());
    return f;
  }

  Formula disj() {
    Formula f = conj();
    while (accept(Tok::Or)) f = Formula::disj(f, conj());
    return f;
  }

  Formula conj() {
    Formula f = ident();
    while (accept(Tok::And)) f = Formula::conj(f, ident());
    return f;
  }

  Formula ident() {
    Formula f = unary();
    if (accept(Tok::Id)) {
      f = Formula::id(f, unary());
      if (peek().kind == Tok::Id) throw ParseError("'==' is not associative", peek().pos);
    }
    return f;
  }

  Formula unary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Neg: next(); return Formula::neg(unary());
      case Tok::Box: next(); return Formula::box(unary());
      case Tok::LParen: {
        next();
        Formula f = formula();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::Bot: next(); return Formula::bot();
      case Tok::Top: next(); return Formula::top();
      case Tok::Var: next(); return Formula::var(t.var);
      case Tok::Const: {
        std::string name = t.name;
        next();
        if (name == "bot" || name == "top") throw ParseError("reserved constant name", t.pos);
        return Formula::constant(name);
      }
      default: throw ParseError("expected a formula", t.pos);
    }
  }

  std::vector<Token> t_;
  size_t i_ = 0;
};

// Binding strength: 0 forall, 2 imp, 3 or, 4 and, 5 id, 6 unary.
int level(Op op) {
  switch (op) {
    case Op::Forall: return 0;
    case Op::Imp: return 2;
    case Op::Or: return 3;
    case Op::And: return 4;
    case Op::Id: return 5;
    default: return 6;
  }
}

void emit(const Formula& f, int ctx, std::string& out) {
  bool paren = level(f.op()) < ctx;
  if (paren) out += '(';
  switch (f.op()) {
    case Op::Var: out += 'x'; out += std::to_string(f.var_index()); break;
    case Op::Const:
      if (f.const_id() == kBot) out += "bot";
      else if (f.const_id() == kTop) out += "top";
      else { out += '#'; out += constant_name(f.const_id()); }
      break;
    case Op::Neg: out += '~'; emit(f.lhs(), 6, out); break;
    case Op::Box: out += "[]"; emit(f.lhs(), 6, out); break;
    case Op::Or: emit(f.lhs(), 3, out); out += " | "; emit(f.rhs(), 4, out); break;
    case Op::And: emit(f.lhs(), 4, out); out += " & "; emit(f.rhs(), 5, out); break;
    case Op::Imp: emit(f.lhs(), 3, out); out += " -> "; emit(f.rhs(), 2, out); break;
    case Op::Id: emit(f.lhs(), 6, out); out += " == "; emit(f.rhs(), 6, out); break;
    case Op::Forall:
      out += "forall x";
      out += std::to_string(f.var_index());
      out += ". ";
      emit(f.lhs(), 0, out);
      break;
  }
  if (paren) out += ')';
}

void collect_vars(const Formula& f, std::set<uint32_t>& vars, std::set<std::string>& cons) {
  switch (f.op()) {
    case Op::Var: vars.insert(f.var_index()); return;
    case Op::Const: cons.insert(constant_name(f.const_id())); return;
    case Op::Forall: vars.insert(f.var_index()); collect_vars(f.lhs(), vars, cons); return;
    case Op::Neg:
    case Op::Box: collect_vars(f.lhs(), vars, cons); return;
    default:
      collect_vars(f.lhs(), vars, cons);
      collect_vars(f.rhs(), vars, cons);
  }
}

}  // namespace

Formula parse(std::string_view text) { return Parser(lex(text)).run(); }

std::string render(const Formula& f) {
  std::string out;
  emit(f, 0, out);
  return out;
}

std::string to_string(Fragment f) {
  switch (f) {
    case Fragment::Full: return "Full";
    case Fragment::Fm_m: return "Fm_m";
    case Fragment::Fm_p: return "Fm_p";
  }
  return "?";
}

int qrank(const Formula& f) {
  switch (f.op()) {
    case Op::Var:
    case Op::Const: return 0;
    case Op::Neg:
    case Op::Box: return qrank(f.lhs());
    case Op::Forall: return 1 + qrank(f.lhs());
    default: return std::max(qrank(f.lhs()), qrank(f.rhs()));
  }
}

Fragment fragment_of(const Formula& f) {
  bool modal = false;
  bool ok = true;
  auto walk = [&](auto&& self, const Formula& g) -> void {
    if (!ok) return;
    switch (g.op()) {
      case Op::Var: return;
      case Op::Const:
        if (g.const_id() != kBot && g.const_id() != kTop) ok = false;
        return;
      case Op::Forall:
      case Op::Id: ok = false; return;
      case Op::Box: modal = true; self(self, g.lhs()); return;
      case Op::Neg: self(self, g.lhs()); return;
      default: self(self, g.lhs()); self(self, g.rhs());
    }
  };
  walk(walk, f);
  if (!ok) return Fragment::Full;
  return modal ? Fragment::Fm_m : Fragment::Fm_p;
}

bool in_fragment(const Formula& f, Fragment frag) {
  Fragment g = fragment_of(f);
  switch (frag) {
    case Fragment::Full: return true;
    case Fragment::Fm_m: return g != Fragment::Full;
    case Fragment::Fm_p: return g == Fragment::Fm_p;
  }
  return false;
}

Analysis analyze(const Formula& f) {
  Analysis a;
  collect_vars(f, a.vars, a.cons);
  a.fvars.insert(f.fvars().begin(), f.fvars().end());
  a.qrank = qrank(f);
  a.fragment = fragment_of(f);
  return a;
}

}  // namespace nfk
