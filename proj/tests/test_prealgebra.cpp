#include "doctest.h"
#include "nfk/prealgebra.hpp"
#include "oracles.hpp"

using namespace nfk;

namespace {

// Subsets of {0..k-1} as elements, lattice order.
PreAlgebra boolean_algebra(int k) {
  int n = 1 << k;
  PreAlgebra p;
  p.ops.n = n;
  p.ops.bot = 0;
  p.ops.top = n - 1;
  for (int a = 0; a < n; ++a) p.ops.neg.push_back(static_cast<uint8_t>((n - 1) & ~a));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      p.ops.or_.push_back(static_cast<uint8_t>(a | b));
      p.ops.and_.push_back(static_cast<uint8_t>(a & b));
      p.ops.imp.push_back(static_cast<uint8_t>(((n - 1) & ~a) | b));
      p.leq.push_back((a & ~b) == 0);
    }
  return p;
}

// Four elements over the two-element algebra: classes {0,1} and {2,3}.
PreAlgebra doubled() {
  auto pi = [](int a) { return a / 2; };
  auto rep = [](int c) { return c ? 3 : 0; };
  PreAlgebra p;
  p.ops.n = 4;
  p.ops.bot = 0;
  p.ops.top = 3;
  for (int a = 0; a < 4; ++a) p.ops.neg.push_back(static_cast<uint8_t>(rep(1 - pi(a))));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      p.ops.or_.push_back(static_cast<uint8_t>(rep(pi(a) | pi(b))));
      p.ops.and_.push_back(static_cast<uint8_t>(rep(pi(a) & pi(b))));
      p.ops.imp.push_back(static_cast<uint8_t>(rep((1 - pi(a)) | pi(b))));
      p.leq.push_back(pi(a) <= pi(b));
    }
  return p;
}

std::vector<Subset> sorted(std::vector<Subset> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<Subset> maximal(const std::vector<Subset>& all) {
  std::vector<Subset> out;
  for (Subset f : all) {
    bool max = true;
    for (Subset g : all)
      if (g != f && (f & ~g) == 0) max = false;
    if (max) out.push_back(f);
  }
  return sorted(out);
}

}  // namespace

TEST_CASE("prealgebra validation") {
  CHECK(validate_prealgebra(boolean_algebra(1)).ok);
  CHECK(validate_prealgebra(boolean_algebra(2)).ok);
  CHECK(validate_prealgebra(doubled()).ok);
  PreAlgebra p = boolean_algebra(2);
  // 1 <= 3 and 3 <= 2 but not 1 <= 2
  p.leq[3 * 4 + 2] = 1;
  ValidationReport r = validate_prealgebra(p);
  CHECK(!r.ok);
  CHECK(r.violated.find("transitiv") != std::string::npos);
}

TEST_CASE("filters match the brute-force definition") {
  for (const PreAlgebra& p : {boolean_algebra(1), boolean_algebra(2), boolean_algebra(3), doubled()}) {
    FilterReport f = filters(p);
    auto expected = oracle::filters(p);
    CHECK(sorted(f.all) == sorted(expected));
    CHECK(sorted(f.ultra) == maximal(expected));
    Subset meet = ~Subset{0};
    for (Subset s : expected) meet &= s;
    CHECK(f.smallest == meet);
    CHECK(f.characterizations_agree);
    for (Subset s : expected) CHECK(contains(s, p.ops.top));
  }
  CHECK(filters(boolean_algebra(1)).ultra == std::vector<Subset>{0b10});
  CHECK(filters(boolean_algebra(2)).ultra.size() == 2);
  CHECK(filters(boolean_algebra(2)).smallest == singleton(3));
  CHECK(filters(doubled()).smallest == (singleton(2) | singleton(3)));
}

TEST_CASE("SCI models from prealgebras and back") {
  PreAlgebra p = boolean_algebra(2);
  auto ultra = filters(p).ultra;
  SciModel a = sci_from_prealgebra(p, 0), b = sci_from_prealgebra(p, 1);
  CHECK(validate_sci(a).ok);
  CHECK(validate_sci(b).ok);
  CHECK(a.truth != b.truth);
  for (int u = 0; u < 2; ++u) CHECK(prealgebra_from_sci(sci_from_prealgebra(p, u)).p == p);
  PreAlgebra d = doubled();
  for (size_t u = 0; u < filters(d).ultra.size(); ++u) CHECK(prealgebra_from_sci(sci_from_prealgebra(d, static_cast<int>(u))).p == d);

  std::vector<uint8_t> bad(16, 0);
  for (int x = 0; x < 4; ++x) bad[static_cast<size_t>(x * 5)] = 3;
  bad[1] = 3;  // id(0,1) true
  CHECK_THROWS(sci_from_prealgebra(p, 0, bad));
}

TEST_CASE("SCI to prealgebra on the classical model") {
  SciModel s = sci_from_prealgebra(boolean_algebra(1), 0);
  SciToPre r = prealgebra_from_sci(s);
  CHECK(r.p == boolean_algebra(1));
  CHECK(r.F == singleton(1));
  CHECK(r.ts_are_ultrafilters);
  CHECK(r.f_is_smallest);
}

TEST_CASE("simplified preorder has a two-element quotient") {
  SciModel s = sci_from_prealgebra(boolean_algebra(2), 0);
  PreAlgebra q = prealgebra_from_sci_simple(s);
  CHECK(validate_prealgebra(q).ok);
  int classes = 0;
  for (int a = 0; a < q.n(); ++a) {
    bool first = true;
    for (int b = 0; b < a; ++b)
      if (q.eqv(a, b)) first = false;
    classes += first;
  }
  CHECK(classes == 2);
}

TEST_CASE("filters are meets of ultrafilters") {
  for (const PreAlgebra& p : enumerate_prealgebras(4)) {
    REQUIRE(validate_prealgebra(p).ok);
    for (Subset f : filters(p).all) CHECK(filter_meet_of_ultrafilters(p, f));
  }
}

TEST_CASE("a Boolean algebra order refines any valid preorder on it") {
  PreAlgebra p = boolean_algebra(2);
  // coarser preorder induced by the filter {1, 3}: a <= b iff imp(a,b) in F
  Subset F = singleton(1) | singleton(3);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) p.leq[static_cast<size_t>(a * 4 + b)] = contains(F, p.ops.Imp(a, b));
  REQUIRE(validate_prealgebra(p).ok);
  CHECK(is_boolean_algebra(p.ops));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      if ((a & ~b) == 0) CHECK(p.le(a, b));
}

TEST_CASE("prealgebra JSON round trip") {
  PreAlgebra p = doubled();
  CHECK(prealgebra_from_json(nlohmann::json::parse(to_json(p).dump())) == p);
  SciModel s = sci_from_prealgebra(p, 0);
  CHECK(sci_from_json(nlohmann::json::parse(to_json(s).dump())) == s);
}
