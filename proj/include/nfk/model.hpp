#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nfk/formula.hpp"
#include "nfk/prealgebra.hpp"

namespace nfk {

// Finite propositional domain. forall_tab is indexed by the encoded unary
// function t: code(t) = sum_a t(a) * n^a.
struct ModalModel {
  BoolOps ops;
  Subset truth = 0;
  Subset nec = 0;
  std::vector<uint8_t> id;   // n*n
  std::vector<uint8_t> box;  // n
  std::vector<uint8_t> forall_tab;
  std::map<std::string, int> gamma;  // named constants besides bot/top

  int n() const { return ops.n; }
  int Box(int a) const { return box[static_cast<size_t>(a)]; }
  int Id(int a, int b) const { return id[static_cast<size_t>(a * ops.n + b)]; }
  int Forall(uint64_t code) const { return forall_tab[static_cast<size_t>(code)]; }
  bool normal() const { return nec != 0; }
  // a <= b iff imp(a,b) in NEC
  bool le(int a, int b) const { return contains(nec, ops.Imp(a, b)); }
  bool eqv(int a, int b) const { return le(a, b) && le(b, a); }
  int constant(int const_id) const;
  bool operator==(const ModalModel&) const = default;
};

constexpr int kMaxForallN = 8;

uint64_t ipow(uint64_t b, unsigned e);
uint64_t encode_unary(const std::vector<uint8_t>& t, int n);
std::vector<uint8_t> decode_unary(uint64_t code, int n);
// Dense table f(t) = t(0) & t(1) & ... & t(n-1), folded from top.
std::vector<uint8_t> meet_forall_table(const BoolOps& ops);
bool forall_is_meet(const ModalModel& m);
// Throws ModelError on malformed tables.
void check_model_shape(const ModalModel& m);

// Total assignment; unmentioned variables denote bot.
class Assignment {
public:
  Assignment() = default;
  explicit Assignment(std::map<uint32_t, int> v) : v_(std::move(v)) {}
  int get(uint32_t x, const ModalModel& m) const;
  void set(uint32_t x, int a) { v_[x] = a; }
  Assignment updated(uint32_t x, int a) const;
  const std::map<uint32_t, int>& values() const { return v_; }

private:
  std::map<uint32_t, int> v_;
};

int eval(const ModalModel& m, const Assignment& g, const Formula& f);
bool satisfies(const ModalModel& m, const Assignment& g, const Formula& f);
// Throws ModelError if any model is non-normal.
bool consequence_over(const std::vector<std::pair<ModalModel, Assignment>>& models,
                      const std::vector<Formula>& premises, const Formula& f);

// A definable unary function with its witness: t(a) = g_x^a(phi).
struct UnaryDef {
  std::vector<uint8_t> table;
  Formula phi;
  uint32_t x = 0;
  Assignment g;
};

struct DefinableSet {
  int arity_requested = 0;
  int arity = 0;  // effective bound after the budget fallback
  // Every unary function is definable; the result is exact for all bounds.
  bool saturated = false;
  // Per arity k, distinct tables M^k -> M (row index sum_i a_i n^i), each
  // with a witness formula over x0..x(k-1) and its free-argument mask.
  struct Entry {
    std::vector<uint8_t> table;
    uint32_t mask = 0;
    Formula witness;
  };
  std::vector<std::vector<Entry>> by_arity;  // computed arities only (just 0..1 when saturated)
  std::vector<UnaryDef> unary;     // distinct definable unary functions
  std::vector<int> sentences;      // denotations of sentences (sorted)
  std::vector<Formula> sentence_witness;
};

struct ClosureBudget {
  size_t max_states = 3000;        // per arity >= 2, before falling back to a smaller bound
  size_t max_unary_states = 4096;  // arity 0 and 1
};

class ClosureTooLarge : public ModelError {
public:
  using ModelError::ModelError;
};

// Throws ClosureTooLarge when even arity 1 exceeds the budget. validate_modal_model
// then certifies the conditions over all functions when the quantifier is the meet.
DefinableSet definable_closure(const ModalModel& m, int K, const ClosureBudget& budget = {});

struct ModelReport : ValidationReport {
  bool normal = false;
  int arity = 0;
  size_t definable_unary = 0;
};

ModelReport validate_modal_model(const ModalModel& m, int system, int K = 2);
// Same, reusing a precomputed closure.
ModelReport validate_modal_model(const ModalModel& m, int system, const DefinableSet& defs);
// Sufficient check for meet-quantifier models: conditions on definable
// functions are checked over all functions instead.
ModelReport certify_modal_model(const ModalModel& m, int system);

struct CollapseReport {
  bool boolean_algebra = false;
  bool collapse_axiom = false;
  bool leq_antisymmetric = false;
  bool strict_equals_identity = false;
  bool all_equivalent = false;
};
CollapseReport collapse_diagnostics(const ModalModel& m);

struct EnumConstraints {
  bool nec_at_least_two = false;
  bool non_boolean = false;
  bool non_normal = false;
  bool dedupe = false;
  int arity = 2;
  int64_t budget_ms = -1;  // stop early when positive and exceeded
};
struct EnumStats {
  size_t candidates = 0;
  size_t yielded = 0;
  bool truncated = false;
};
// Enumerates valid models with bot=0, top=n-1 over the shared-section
// Boolean parts, every TRUE/NEC pair and every box table, with the
// discriminator identity and the meet quantifier. The callback returns false to stop.
EnumStats enumerate_models(int n_max, int system, const EnumConstraints& c,
                           const std::function<bool(const ModalModel&, const ModelReport&)>& yield);
bool isomorphic(const ModalModel& a, const ModalModel& b);

// The two-element classical model.
ModalModel canonical_model();
// Boolean algebra of subsets of {0..k-1} (element = bitmask) with the
// discriminator identity and the meet quantifier.
ModalModel boolean_model(int k, Subset truth, Subset nec, const std::vector<uint8_t>& box);

struct AdmissibleReport {
  bool ok = true;
  bool normal = false;  // axiom instances are only sampled for normal models
  size_t instances = 0;
  size_t triples = 0;
  std::vector<std::string> counterexamples;
  void fail(std::string s) {
    ok = false;
    if (counterexamples.size() < 20) counterexamples.push_back(std::move(s));
  }
};
AdmissibleReport check_admissible_simple(const ModalModel& m, int depth, int samples, uint64_t seed,
                                         int K = 2);

// JSON
nlohmann::json to_json(const ModalModel& m);
ModalModel modal_model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Assignment& g);
Assignment assignment_from_json(const nlohmann::json& j);

}  // namespace nfk
