#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nfk/formula.hpp"
#include "nfk/model.hpp"
#include "nfk/prealgebra.hpp"

namespace nfk {

// Worlds are 0..size()-1; sets of worlds are bitmasks.
struct KripkeFrame {
  std::vector<std::string> worlds;
  Subset normal = 0;
  std::vector<Subset> R;       // R[w] = successors of w
  std::vector<Subset> props;   // P, sorted and duplicate free
  int kind = 3;

  int size() const { return static_cast<int>(worlds.size()); }
  Subset all() const { return full_set(size()); }
  int prop_index(Subset p) const;  // -1 when p is not in P
};

// Unmentioned variables denote the empty set.
struct Valuation {
  std::map<uint32_t, Subset> vars;
  std::map<std::string, Subset> consts;
  Subset get(uint32_t x) const;
};

ValidationReport validate_frame(const KripkeFrame& fr);

Subset box_set(const KripkeFrame& fr, Subset a);
Subset id_set(const KripkeFrame& fr, Subset a, Subset b);
// The set of worlds where f holds under g.
Subset denote(const KripkeFrame& fr, const Valuation& g, const Formula& f);
bool ksat(const KripkeFrame& fr, int w, const Valuation& g, const Formula& f);

// Frames with P = powerset, every reflexive transitive R with non-normal
// worlds seeing only themselves; kind 4 requires N = W, kind 5 symmetric R.
std::vector<KripkeFrame> enumerate_frames(int n_max, int kind);

struct WorldModel {
  ModalModel m;
  Assignment gamma;
  std::vector<Subset> universe;  // element i is the set universe[i] of worlds
  std::vector<int> rho;          // per proposition index
};
// With enriched, every proposition p_i gets a named constant "p<i>".
WorldModel world_to_model(const KripkeFrame& fr, int w, const Valuation& g, bool enriched = false);

struct UltrafilterFrame {
  KripkeFrame fr;
  Valuation g;
  int w0 = 0;
  std::vector<Subset> ultrafilters;  // world i is ultrafilters[i]
  std::vector<int> prop_of;          // element -> index of |a| in fr.props
  bool reflexive = false, transitive = false, all_normal = false, equivalence = false;
};
// Throws ModelError for system 3 or an invalid model.
UltrafilterFrame model_to_kripke(const ModalModel& m, const Assignment& g, int system);

struct AgreementReport {
  bool ok = true;
  size_t classes = 0;  // semantic classes of formulas visited
  size_t checks = 0;
  std::vector<std::string> discrepancies;
  void fail(std::string s) {
    ok = false;
    if (discrepancies.size() < 20) discrepancies.push_back(std::move(s));
  }
};

// Formulas over x0, x1 are grouped by the pair (model function M^2 -> M,
// frame function P^2 -> sets of worlds) plus their free variables; every
// formula of depth <= d in the fragment belongs to one visited class.
struct AgreementSpec {
  // Related assignments: model values (a0, a1) and proposition indices (i0, i1).
  std::vector<std::array<int, 4>> pairs;
  // Frame worlds and the model truth set compared against them.
  std::vector<std::pair<int, Subset>> worlds;
  // Also check (phi == psi) => box(phi <-> psi) at the first world.
  bool strict_identity = false;
};
AgreementReport agreement_check(const ModalModel& m, const KripkeFrame& fr, const AgreementSpec& spec,
                                int depth, Fragment frag);
// Single pair (M, gamma) against (F, w, g).
AgreementReport agreement_check(const ModalModel& m, const Assignment& gamma, const KripkeFrame& fr, int w,
                                const Valuation& g, int depth, Fragment frag, bool strict_identity = false);
// world_to_model output against its frame under every valuation.
AgreementReport agreement_800(const WorldModel& wm, const KripkeFrame& fr, int w, int depth,
                              Fragment frag = Fragment::Full);
// Claim 9 at every world under every assignment, plus the identity implication at w0.
AgreementReport agreement_820(const ModalModel& m, const UltrafilterFrame& uf, int depth);

enum class Expect { Theorem, NonTheorem };
struct CorpusItem {
  Formula f;
  Expect expect = Expect::Theorem;
};
struct ProbeResult {
  Formula f;
  Expect expect = Expect::Theorem;
  std::string status;  // "valid", "countermodel", "inconclusive", "unexpected-countermodel"
  std::string witness;
  bool as_expected = false;
};
struct ProbeReport {
  bool ok = true;
  size_t frames = 0, models = 0;
  std::vector<ProbeResult> results;
};
// Theorems must hold at all normal worlds of all frames (|W| <= n_max) and in
// all enumerated models (n <= model_n_max); non-theorems need a countermodel.
ProbeReport conservativity_probe(int system, const std::vector<CorpusItem>& corpus, int n_max,
                                 int model_n_max = 3);

// JSON
nlohmann::json to_json(const KripkeFrame& fr);
KripkeFrame frame_from_json(const nlohmann::json& j);
nlohmann::json valuation_json(const KripkeFrame& fr, const Valuation& g);
Valuation valuation_from_json(const KripkeFrame& fr, const nlohmann::json& j);

}  // namespace nfk
