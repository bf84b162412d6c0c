#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "nfk/calculus.hpp"
#include "nfk/formula.hpp"
#include "nfk/substitution.hpp"

namespace nfk {

using Rng = std::mt19937_64;

struct FormulaGen {
  int depth = 3;
  uint32_t num_vars = 2;  // variables x0..x(num_vars-1)
  uint32_t first_var = 0;
  bool box = true;
  bool identity = true;
  bool quantifiers = true;
  bool bot_top = true;
  std::vector<int> consts;  // named constants that may appear as leaves
};

// Random formula of depth <= g.depth.
Formula random_formula(Rng& rng, const FormulaGen& g);
// Binds each variable in x0..x(num_vars-1) (and the listed constants) with probability 1/2.
Substitution random_substitution(Rng& rng, const FormulaGen& g);
// Random instance of the scheme whose closed formula has depth <= max_depth;
// nullopt when no instance was found in a bounded number of tries.
std::optional<SchemeInstance> random_instance(Rng& rng, SchemeId s, AxiomSet set, int system,
                                              const FormulaGen& g, int max_depth);
// Random scheme from the allowed ones, then a random instance.
SchemeInstance random_axiom(Rng& rng, AxiomSet set, int system, const FormulaGen& g, int max_depth);

struct DerivationGen {
  int system = 3;
  AxiomSet set = AxiomSet::Full;
  int hypotheses = 0;
  int steps = 6;
  FormulaGen formulas{2, 2};
  // Hypotheses use the same generator but never mention this variable freely.
  std::optional<uint32_t> hyp_avoid_var;
  // When set, the conclusion has this variable free.
  std::optional<uint32_t> conclusion_var;
  // When set, this constant appears in the conclusion.
  std::optional<int> conclusion_const;
};

// A derivation that passes check_derivation; lines are hypotheses, axioms,
// AN lines and MP steps through propositional tautologies.
Derivation random_derivation(Rng& rng, const DerivationGen& g);

}  // namespace nfk
