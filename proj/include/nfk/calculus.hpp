#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nfk/formula.hpp"
#include "nfk/substitution.hpp"

namespace nfk {

class CalculusError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class SchemeId {
  AxTaut,      // (i)
  AxT,         // (ii)
  AxK,         // (iii)
  AxK4strict,  // (iv)
  AxAlpha,     // (v)
  AxIdImp,     // (vi)
  AxIdCong,    // (vii)
  AxIdForall,  // (viii)
  AxInst,      // (ix)
  AxDistr,     // (x)
  AxVac,       // (xi)
  AxCBF,       // (xii)
  AxBarcan,    // (xiii)
  Ax4,
  Ax5,
};

const std::vector<SchemeId>& all_schemes();
std::string scheme_name(SchemeId s);
SchemeId scheme_from_name(const std::string& name);
// Witness roles in canonical order, e.g. {"x","phi","psi"}.
const std::vector<std::string>& scheme_roles(SchemeId s);

enum class AxiomSet { Full, Minus };
std::string to_string(AxiomSet a);
AxiomSet axiom_set_from_name(const std::string& name);

bool scheme_allowed(SchemeId s, AxiomSet set, int system);

struct SchemeInstance {
  SchemeId scheme = SchemeId::AxTaut;
  // Roles "x" hold a variable formula; all others hold arbitrary formulas.
  std::map<std::string, Formula> witnesses;
  // Leading universal closure, outermost first.
  std::vector<uint32_t> foralls;

  const Formula& at(const std::string& role) const;
};

SchemeInstance make_instance(SchemeId s, std::map<std::string, Formula> witnesses,
                             std::vector<uint32_t> foralls = {});

struct TautOptions {
  int max_atoms = 24;
};

// Decides whether f is a substitution instance of a propositional tautology.
// bot and top keep their truth values; other non-Boolean subformulas are atoms.
bool taut_instance(const Formula& f, const TautOptions& opt = {});

// Rebuilds the axiom formula from its witnesses; throws CalculusError on
// arity mismatch, side-condition violation or a scheme outside the set.
Formula check_instance(const SchemeInstance& inst, AxiomSet set, int system);

std::optional<SchemeInstance> recognize_axiom(const Formula& f, AxiomSet set, int system);

struct Justification {
  enum class Kind { Hyp, Axiom, AN, MP };
  Kind kind = Kind::Axiom;
  int hyp = 0;
  SchemeInstance inst;
  int j = 0, k = 0;

  static Justification hypothesis(int i) { return {Kind::Hyp, i, {}, 0, 0}; }
  static Justification axiom(SchemeInstance s) { return {Kind::Axiom, 0, std::move(s), 0, 0}; }
  static Justification an(SchemeInstance s) { return {Kind::AN, 0, std::move(s), 0, 0}; }
  static Justification mp(int j, int k) { return {Kind::MP, 0, {}, j, k}; }
};

struct Line {
  Formula formula;
  Justification just;
};

struct Derivation {
  int system = 3;
  AxiomSet axioms = AxiomSet::Full;
  std::vector<Formula> hypotheses;
  std::vector<Line> lines;

  const Formula& conclusion() const;
};

struct CheckReport {
  bool ok = true;
  int first_failure = -1;
  std::string message;
};

CheckReport check_derivation(const Derivation& d);
// Set of schemes used by axiom and AN lines.
std::vector<SchemeId> schemes_used(const Derivation& d);

// Incremental derivation writer used by the transformers and generators.
class Builder {
public:
  Builder(int system, AxiomSet set, std::vector<Formula> hyps = {});

  int hyp(int i);
  int axiom(SchemeInstance inst);
  int an(SchemeInstance inst);
  // k must hold line_j -> C; returns the index of C.
  int mp(int j, int k);
  int taut(const Formula& f);
  // From premises A1..An (line indices) and conclusion C, emits the tautology
  // A1 -> (A2 -> ... -> C) and the MP chain; returns the index of C.
  int infer(const std::vector<int>& premises, const Formula& c);
  // From line i holding A with alpha_eq(A, target), derives target via (v), (vi).
  int alpha_bridge(int i, const Formula& target);
  const Formula& formula(int i) const { return d_.lines.at(static_cast<size_t>(i)).formula; }
  int size() const { return static_cast<int>(d_.lines.size()); }
  int push(Line line);
  Derivation finish() &&;
  const Derivation& view() const { return d_; }

private:
  Derivation d_;
};

// Transformers. Each output passes check_derivation.
Derivation deduction(const Derivation& d, const Formula& phi);
Derivation generalize(const Derivation& d, uint32_t x);
Derivation necessitate(const Derivation& d);
Derivation eliminate_constant(const Derivation& d, int c, uint32_t y);
// d derives phi[x:=c] with c absent from the hypotheses and phi; yields forall x phi.
Derivation generalize_constant(const Derivation& d, int c, const Formula& phi, uint32_t x);

// Generators.
Derivation generate_rigidity(const Formula& phi, const Formula& psi);
// Strict equivalence box(a->b) & box(b->a).
Formula strict_eq(const Formula& a, const Formula& b);
// The six congruence theorems for the defined identity, in the order:
// negation, implication, conjunction, disjunction, identity, box.
std::vector<Derivation> generate_strict_identity_library(const Formula& phi, const Formula& psi,
                                                         const Formula& phi2, const Formula& psi2);

}  // namespace nfk
