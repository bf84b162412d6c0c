#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nfk/formula.hpp"

namespace nfk {

// A substitution target: a variable or a constant.
struct Symbol {
  bool is_const = false;
  uint32_t index = 0;  // variable index, or constant id when is_const

  static Symbol var(uint32_t x) { return {false, x}; }
  static Symbol con(int c) { return {true, static_cast<uint32_t>(c)}; }
  auto operator<=>(const Symbol&) const = default;
};

// Finite map on variables and constants; unbound symbols map to themselves.
class Substitution {
public:
  Substitution() = default;

  static Substitution single(uint32_t x, Formula f);
  static Substitution single_const(int c, Formula f);

  void bind(Symbol s, Formula f);
  void bind_var(uint32_t x, Formula f) { bind(Symbol::var(x), std::move(f)); }
  Formula lookup_var(uint32_t x) const;
  Formula lookup_const(int c) const;
  bool empty() const { return map_.empty(); }
  bool touches_constants() const;
  const std::map<Symbol, Formula>& bindings() const { return map_; }

  // Returns this substitution with s rebound to f.
  Substitution updated(Symbol s, Formula f) const;

  bool operator==(const Substitution& o) const;

private:
  std::map<Symbol, Formula> map_;
};

Formula apply(const Formula& f, const Substitution& s);
// f[x:=g]
Formula subst(const Formula& f, uint32_t x, const Formula& g);
bool alpha_eq(const Formula& f, const Formula& g);
// u -> s1(u)[s2]
Substitution compose(const Substitution& s1, const Substitution& s2);

// Parses "x0 := top, #c := x1 -> x2" style lists.
Substitution parse_substitution(const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace nfk
