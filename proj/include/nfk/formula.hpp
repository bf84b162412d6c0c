#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nfk {

enum class Op : uint8_t { Var, Const, Neg, Box, Or, And, Imp, Id, Forall };

// Constants are interned; ids 0 and 1 are the builtins bot and top.
constexpr int kBot = 0;
constexpr int kTop = 1;
int intern_constant(std::string_view name);
const std::string& constant_name(int id);

struct Node;

// Immutable formula handle with structural equality.
class Formula {
public:
  Formula() = default;

  static Formula var(uint32_t index);
  static Formula constant(int id);
  static Formula constant(std::string_view name) { return constant(intern_constant(name)); }
  static Formula bot() { return constant(kBot); }
  static Formula top() { return constant(kTop); }
  static Formula neg(Formula a);
  static Formula box(Formula a);
  static Formula disj(Formula a, Formula b);
  static Formula conj(Formula a, Formula b);
  static Formula imp(Formula a, Formula b);
  static Formula id(Formula a, Formula b);
  // Throws std::invalid_argument unless x is free in body.
  static Formula forall(uint32_t x, Formula body);
  // (a -> b) & (b -> a)
  static Formula iff(Formula a, Formula b);

  Op op() const;
  uint32_t var_index() const;  // Var, and the bound variable of Forall
  int const_id() const;
  const Formula& lhs() const;  // sole child for Neg, Box, Forall
  const Formula& rhs() const;

  // Sorted, duplicate free.
  const std::vector<uint32_t>& fvars() const;
  const std::vector<int>& consts() const;
  bool is_free(uint32_t x) const;
  bool has_const(int c) const;
  // Largest variable index occurring free or bound, or -1.
  int64_t max_var() const;
  int depth() const;
  size_t hash() const;
  size_t size() const;

  bool valid() const { return static_cast<bool>(p_); }
  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }
  // Total structural order, used for canonical containers.
  bool operator<(const Formula& o) const;

private:
  explicit Formula(std::shared_ptr<const Node> p) : p_(std::move(p)) {}
  static Formula make(Node&& n);
  std::shared_ptr<const Node> p_;
};

struct FormulaHash {
  size_t operator()(const Formula& f) const { return f.hash(); }
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, size_t pos)
      : std::runtime_error(msg + " at offset " + std::to_string(pos)), pos_(pos) {}
  size_t position() const { return pos_; }

private:
  size_t pos_;
};

Formula parse(std::string_view text);
std::string render(const Formula& f);

enum class Fragment { Full, Fm_m, Fm_p };
std::string to_string(Fragment f);

struct Analysis {
  std::set<uint32_t> vars;
  std::set<uint32_t> fvars;
  std::set<std::string> cons;
  int qrank = 0;
  Fragment fragment = Fragment::Full;
};

Analysis analyze(const Formula& f);
int qrank(const Formula& f);
Fragment fragment_of(const Formula& f);
bool in_fragment(const Formula& f, Fragment frag);

}  // namespace nfk
