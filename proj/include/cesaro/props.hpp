#pragma once

#include <string>

#include "cesaro/density.hpp"
#include "cesaro/corpus.hpp"

namespace cesaro::fixtures {

struct PropOutcome {
  bool evaluated = false;  // every participating charge was available
  bool ok = true;
  std::string failure;
};

inline SetExpr random_null(Corpus& c) {
  switch (c.uniform(0, 4)) {
    case 0: return sets::finite({c.uniform(1, 50), c.uniform(51, 500)});
    case 1: return sets::squares();
    case 2: return sets::cubes();
    case 3: return sets::powers(c.uniform(2, 5));
    default: return sets::primes();
  }
}

// The charge axioms as exact identities on one random triple of residue
// combinations plus a null set.
inline PropOutcome prop_case(Corpus& c, int depth = 2, std::uint64_t max_mod = 30) {
  PropOutcome out;
  SetExpr a = c.residue_algebra(depth, max_mod);
  SetExpr b = c.residue_algebra(depth, max_mod);
  SetExpr d = c.residue_algebra(depth, max_mod);
  SetExpr z = random_null(c);

  auto nu = [&](const SetExpr& e) { return exact_charge(e); };
  auto na = nu(a), nb = nu(b), nd = nu(d);
  auto nu_ = nu(a | b), ni = nu(a & b), nc = nu(~a), nbd = nu((a | b) - a);
  auto nabs = nu(z | d);
  auto p1 = nu(a & b), p2 = nu(a - b), p3 = nu(b - a), p4 = nu(~(a | b));
  if (!na || !nb || !nd || !nu_ || !ni || !nc || !nbd || !nabs || !p1 || !p2 || !p3 || !p4) return out;
  out.evaluated = true;

  auto fail = [&](const std::string& what) {
    if (out.ok) out.failure = what + " for A = " + dsl::print(a) + ", B = " + dsl::print(b);
    out.ok = false;
  };
  auto empty = nu(sets::empty()), all = nu(sets::naturals());
  if (!empty || empty->value != Rational(0) || !all || all->value != Rational(1)) fail("empty and full charges");
  if (nc->value != Rational(1) - na->value) fail("complement");
  if (nu_->value != na->value + nb->value - ni->value) fail("inclusion-exclusion");
  if (nu_->value > na->value + nb->value) fail("subadditivity");
  if (na->value > nu_->value || nbd->value != nu_->value - na->value) fail("monotone difference");
  if (nabs->value != nd->value) fail("null absorption");
  if (p1->value + p2->value + p3->value + p4->value != Rational(1)) fail("four-cell partition");
  return out;
}

}  // namespace cesaro::fixtures
