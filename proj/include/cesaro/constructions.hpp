#pragma once

#include <map>
#include <string>
#include <vector>

#include "cesaro/density.hpp"
#include "cesaro/dsl.hpp"

namespace cesaro {

inline constexpr std::uint64_t kDefaultVerifyHorizon = 100000;

inline SetExpr greedy_target(const Rational& s) { return sets::greedy(Target(s)); }
inline SetExpr greedy_target(const Target& s) { return sets::greedy(s); }

// Parses a target such as "1/3", "1/sqrt(2)" or "1 - 1/pi".
inline Target parse_target(std::string_view text) {
  SetExpr g = dsl::parse("greedy(" + std::string(text) + ")");
  return static_cast<const GreedyNode&>(g.node()).target();
}

// D_k = {2^k m : m odd, m >= 3}
inline SetExpr dk_family(unsigned k) {
  if (k > 62) throw SemanticError("D_k needs k <= 62");
  return sets::dilate(1ull << k, sets::difference(sets::odds(), sets::finite({1})));
}

// ∪_{j <= k} D_j
inline SetExpr dk_partial_union(unsigned k) {
  std::vector<SetExpr> parts;
  for (unsigned j = 0; j <= k; ++j) parts.push_back(dk_family(j));
  return sets::union_all(parts);
}

struct MidpointResult {
  SetExpr set;
  std::optional<Rational> expected_charge;  // (ν(B)+ν(C))/2 when both are exact
};

// B plus every second element of C \ B. Requires B ⊆ C up to `verify`.
inline MidpointResult midpoint_set(const SetExpr& b, const SetExpr& c,
                                   std::uint64_t verify = kDefaultVerifyHorizon) {
  if (!symbolic_subset(b, c)) {
    auto r = subset_upto(b, c, verify);
    if (!r.holds)
      throw PreconditionError("midpoint set needs B ⊆ C; first violation at n = " +
                                  std::to_string(*r.counterexample),
                              *r.counterexample);
  }
  auto cb = exact_charge(b);
  auto cc = exact_charge(c);
  if (cb && cc && cb->value > cc->value)
    throw PreconditionError("midpoint set needs ν(B) <= ν(C)", 0);
  MidpointResult out{sets::midpoint(b, c), std::nullopt};
  if (cb && cc) out.expected_charge = (cb->value + cc->value) / Rational(2);
  return out;
}

// ---------------------------------------------------------------------------
// Catalog

struct CatalogEntry {
  std::string name;
  std::string description;
  SetExpr set;
  // closed-form upper/lower limits when known
  std::optional<Rational> upper;
  std::optional<Rational> lower;
};

inline SetExpr geometric_blocks() { return sets::blocks(BlockSpec::geometric(1, 2)); }

// B = evens, C = interleave(blocks 2^(n-1))
inline SetExpr set_B() { return sets::evens(); }
inline SetExpr set_C() { return sets::interleave(geometric_blocks()); }

inline std::vector<CatalogEntry> paper_example_catalog() {
  std::vector<CatalogEntry> out;
  auto add = [&](std::string name, std::string desc, SetExpr s) {
    auto c = exact_charge(s);
    std::optional<Rational> hi, lo;
    if (c) hi = lo = c->value;
    out.push_back({std::move(name), std::move(desc), std::move(s), hi, lo});
  };
  for (std::int64_t m = 1; m <= 12; ++m)
    add("D_" + std::to_string(m), "multiples of " + std::to_string(m), sets::multiples(static_cast<std::uint64_t>(m)));
  {
    SetExpr g = geometric_blocks();
    auto [hi, lo] = static_cast<const BlocksNode&>(g.node()).spec().limits();
    out.push_back({"blocks-geometric", "run lengths z_n = 2^(n-1)", g, hi, lo});
  }
  add("B", "even numbers", set_B());
  add("C", "one of {2k-1, 2k}: 2k exactly when k is in blocks-geometric", set_C());
  out.push_back({"B∩C", "B ∩ C = 2A for A = blocks-geometric; no Cesàro limit", set_B() & set_C(),
                 Rational(1, 3), Rational(1, 6)});
  for (unsigned q = 1; q <= 3; ++q)
    add("blocks-power-" + std::to_string(q), "run lengths z_n = n^" + std::to_string(q),
        sets::blocks(BlockSpec::power(q)));
  add("squares", "perfect squares", sets::squares());
  add("cubes", "perfect cubes", sets::cubes());
  add("powers-2", "powers of 2", sets::powers(2));
  add("primes", "prime numbers", sets::primes());
  for (unsigned k = 0; k <= 20; ++k)
    add("D^" + std::to_string(k), "2^" + std::to_string(k) + " times odd numbers >= 3", dk_family(k));
  return out;
}

inline const CatalogEntry& catalog_lookup(const std::vector<CatalogEntry>& cat, std::string_view name) {
  for (const auto& e : cat)
    if (e.name == name) return e;
  throw PreconditionError("unknown catalog entry '" + std::string(name) + "'", 0);
}

}  // namespace cesaro
