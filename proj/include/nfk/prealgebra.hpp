#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace nfk {

// Subsets of a finite universe {0..n-1}, n <= 64.
using Subset = uint64_t;

inline bool contains(Subset s, int a) { return (s >> a) & 1u; }
inline Subset singleton(int a) { return Subset{1} << a; }
inline Subset full_set(int n) { return n >= 64 ? ~Subset{0} : (Subset{1} << n) - 1; }

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ValidationReport {
  bool ok = true;
  std::string violated;  // first violated condition, empty when ok
  std::vector<std::string> notes;

  void fail(std::string what) {
    if (ok) violated = std::move(what);
    ok = false;
  }
};

// Shared operation tables of the Boolean part; binary tables are row-major n*n.
struct BoolOps {
  int n = 0;
  int bot = 0, top = 0;
  std::vector<uint8_t> neg, or_, and_, imp;

  int Neg(int a) const { return neg[static_cast<size_t>(a)]; }
  int Or(int a, int b) const { return or_[static_cast<size_t>(a * n + b)]; }
  int And(int a, int b) const { return and_[static_cast<size_t>(a * n + b)]; }
  int Imp(int a, int b) const { return imp[static_cast<size_t>(a * n + b)]; }
  bool operator==(const BoolOps&) const = default;
};

struct PreAlgebra {
  BoolOps ops;
  std::vector<uint8_t> leq;  // n*n, 1 when a <= b

  int n() const { return ops.n; }
  bool le(int a, int b) const { return leq[static_cast<size_t>(a * ops.n + b)] != 0; }
  bool eqv(int a, int b) const { return le(a, b) && le(b, a); }
  bool operator==(const PreAlgebra&) const = default;
};

struct SciModel {
  BoolOps ops;
  Subset truth = 0;
  std::vector<uint8_t> id;  // n*n

  int n() const { return ops.n; }
  int Id(int a, int b) const { return id[static_cast<size_t>(a * ops.n + b)]; }
  bool operator==(const SciModel&) const = default;
};

// Checks table sizes and ranges only.
void check_shape(const BoolOps& ops);

ValidationReport validate_prealgebra(const PreAlgebra& p);

struct FilterReport {
  std::vector<Subset> all;
  std::vector<Subset> ultra;
  Subset smallest = 0;
  // The three characterizations of the smallest filter coincide.
  bool characterizations_agree = false;
};

bool is_filter(const PreAlgebra& p, Subset f);
// Filters are unions of equivalence classes; enumerated via the quotient.
FilterReport filters(const PreAlgebra& p);
// Brute force over all subsets of the universe (n <= 20); used as a cross-check.
std::vector<Subset> filters_bruteforce(const PreAlgebra& p);

// The identity table id(a,b) = d(a) for a == b and bot otherwise, where the
// diagonal d cycles through the smallest filter. When the smallest filter is
// {top} this is the canonical discriminator.
std::vector<uint8_t> pinned_identity(const PreAlgebra& p);

ValidationReport validate_sci(const SciModel& s);
SciModel sci_from_prealgebra(const PreAlgebra& p, int ultra_index,
                             const std::optional<std::vector<uint8_t>>& id_table = std::nullopt);

struct SciToPre {
  PreAlgebra p;
  Subset F = 0;
  std::vector<Subset> admissible;  // every truth set T making the SCI conditions hold
  bool ts_are_ultrafilters = false;
  bool f_is_smallest = false;
};
// Truth-set candidates are enumerated over all subsets (n <= 20).
SciToPre prealgebra_from_sci(const SciModel& s);
// leq'(a,b) iff imp(a,b) in TRUE.
PreAlgebra prealgebra_from_sci_simple(const SciModel& s);

bool filter_meet_of_ultrafilters(const PreAlgebra& p, Subset f);

// Boolean parts used by the enumerators: every op table factors as
// rep o f_B o pi for a surjection pi onto a Boolean algebra B of size 2^k <= n
// and a section rep of pi. With per_op_sections each operation picks its own section.
std::vector<BoolOps> enumerate_bool_parts(int n, bool per_op_sections);
// Prealgebras over enumerate_bool_parts(n, true) with every preorder induced by
// a filter of B. Exact duplicates are removed.
std::vector<PreAlgebra> enumerate_prealgebras(int n_max);

// Outright Boolean algebra check of the tables (lattice order from or/and).
bool is_boolean_algebra(const BoolOps& ops);

// JSON
nlohmann::json to_json(const PreAlgebra& p);
nlohmann::json to_json(const SciModel& s);
nlohmann::json subset_json(Subset s, int n);
PreAlgebra prealgebra_from_json(const nlohmann::json& j);
SciModel sci_from_json(const nlohmann::json& j);
BoolOps bool_ops_from_json(const nlohmann::json& j);
void write_bool_ops(nlohmann::json& j, const BoolOps& ops);
Subset subset_from_json(const nlohmann::json& j, int n, const char* field);
nlohmann::json table2(const std::vector<uint8_t>& t, int n);
std::vector<uint8_t> read_table2(const nlohmann::json& j, int n, const char* field);

}  // namespace nfk
