#pragma once

#include <optional>
#include <vector>

#include "cesaro/density.hpp"

namespace cesaro {

// Output of the null-modification stream on a set A: A = A' ⊔ F with
// ν_N(A') <= target for every N.
struct NullModResult {
  SetExpr source;
  SetExpr a_prime;
  SetExpr f;
  Rational target;
  // false when the target is not known to equal ν⁺(A); nullity of F is then
  // only advisory
  bool exact_target = false;
  std::uint64_t horizon_verified = 0;
};

// N ∈ A goes to F when keeping it would give ν_N(A') > target.
inline NullModResult algorithm1(const SetExpr& a, const Rational& target,
                                std::optional<bool> exact_target = std::nullopt) {
  if (target < Rational(0) || target > Rational(1))
    throw SemanticError("null-modification target " + target.str() + " outside [0,1]");
  SetExpr kept = sets::nullmod_kept(a, target);
  SetExpr removed = sets::nullmod_removed(kept);
  bool exact;
  if (exact_target) {
    exact = *exact_target;
  } else {
    auto c = exact_charge(a);
    exact = c && c->value == target;
  }
  return {a, kept, removed, target, exact, 0};
}

// Uses the exact charge when available, otherwise the profile's upper
// estimate (flagged as not exact).
inline NullModResult algorithm1_auto(const SetExpr& a, const EstimatorConfig& cfg = {}) {
  if (auto c = exact_charge(a)) return algorithm1(a, c->value, true);
  DensityProfile p = density_profile(a, cfg);
  return algorithm1(a, p.upper_est, false);
}

struct NullModReport {
  std::uint64_t horizon = 0;
  std::optional<std::uint64_t> disjointness_failure;  // n ∈ A' ∩ F
  std::optional<std::uint64_t> union_failure;         // A' ∪ F != A at n
  std::optional<std::uint64_t> domination_failure;    // ν_N(A') > target
  Rational f_upper_est;
  Rational tolerance;
  bool nullity_ok = false;
  bool nullity_advisory = false;  // target not known to be ν⁺(A)

  bool structural_ok() const {
    return !disjointness_failure && !union_failure && !domination_failure;
  }
  bool passed() const { return structural_ok() && nullity_ok; }
};

inline NullModReport verify_nullmod(NullModResult& r, std::uint64_t horizon, const Rational& tol,
                                    const EstimatorConfig& base = {}) {
  if (horizon == 0) throw PreconditionError("verification horizon must be >= 1");
  check_horizon(horizon);
  NullModReport rep;
  rep.horizon = horizon;
  rep.tolerance = tol;
  auto ca = r.source.cursor();
  auto ck = r.a_prime.cursor();
  auto cf = r.f.cursor();
  std::uint64_t kept = 0;
  const Rational& t = r.target;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    bool in_a = ca->next(), in_k = ck->next(), in_f = cf->next();
    if (in_k && in_f && !rep.disjointness_failure) rep.disjointness_failure = n;
    if ((in_k || in_f) != in_a && !rep.union_failure) rep.union_failure = n;
    kept += in_k ? 1 : 0;
    if (!rep.domination_failure && static_cast<i128>(kept) * t.den() > static_cast<i128>(n) * t.num())
      rep.domination_failure = n;
  }
  EstimatorConfig cfg = base;
  cfg.horizon = horizon;
  cfg.base_n = std::min(cfg.base_n, horizon);
  DensityProfile fp = density_profile(r.f, cfg);
  rep.f_upper_est = fp.upper_est;
  rep.nullity_ok = fp.upper_est <= tol;
  rep.nullity_advisory = !r.exact_target;
  if (rep.structural_ok()) r.horizon_verified = horizon;
  return rep;
}

// Least n <= horizon lying in two of the sets, with their indices.
struct DisjointnessWitness {
  std::uint64_t n;
  std::size_t first, second;
};

inline std::optional<DisjointnessWitness> find_overlap(const std::vector<SetExpr>& parts, std::uint64_t horizon) {
  std::vector<std::unique_ptr<Cursor>> cs;
  for (const auto& p : parts) cs.push_back(p.cursor());
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < cs.size(); ++i) {
      if (!cs[i]->next()) continue;
      if (hit) return DisjointnessWitness{n, *hit, i};
      hit = i;
    }
  }
  return std::nullopt;
}

// One-sided modification of an increasing chain E_1 ⊆ ... ⊆ E_K with exact
// charges c_1 <= ... <= c_K. Step k runs the stream on E_k \ ψ(E_{k-1})
// with target c_k - c_{k-1}; ψ(E_k) = ψ(E_{k-1}) ∪ A'_k.
struct PsiResult {
  std::vector<SetExpr> images;        // ψ(E_k)
  std::vector<NullModResult> steps;   // per-step stream on the difference
};

inline PsiResult psi_chain(const std::vector<SetExpr>& chain, const std::vector<Rational>& charges) {
  if (chain.size() != charges.size()) throw PreconditionError("one charge per chain element is required");
  PsiResult out;
  std::optional<SetExpr> prev;
  Rational prev_charge(0);
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (charges[k] < prev_charge) throw PreconditionError("chain charges must be non-decreasing", k);
    SetExpr x = prev ? sets::difference(chain[k], *prev) : chain[k];
    NullModResult r = algorithm1(x, charges[k] - prev_charge, true);
    SetExpr img = prev ? sets::set_union(*prev, r.a_prime) : r.a_prime;
    out.steps.push_back(r);
    out.images.push_back(img);
    prev = img;
    prev_charge = charges[k];
  }
  return out;
}

// Pairwise-disjoint sets with exact charges: ψ applied to the partial unions.
// The k-th result's kept part is A'_k = ψ(B_k) \ ψ(B_{k-1}).
inline std::vector<NullModResult> nullmod_sequence(const std::vector<SetExpr>& disjoint, std::uint64_t horizon) {
  if (auto w = find_overlap(disjoint, horizon))
    throw PreconditionError("sets " + std::to_string(w->first) + " and " + std::to_string(w->second) +
                                " overlap at n = " + std::to_string(w->n),
                            w->n);
  std::vector<SetExpr> unions;
  std::vector<Rational> charges;
  Rational total(0);
  for (std::size_t k = 0; k < disjoint.size(); ++k) {
    auto c = exact_charge(disjoint[k]);
    if (!c) throw PreconditionError("set " + std::to_string(k) + " has no exact charge", k);
    total += c->value;
    charges.push_back(total);
    unions.push_back(k == 0 ? disjoint[0] : sets::set_union(unions.back(), disjoint[k]));
  }
  if (total > Rational(1)) throw PreconditionError("charges of disjoint sets sum above 1");
  return psi_chain(unions, charges).steps;
}

struct ChainModification {
  std::vector<SetExpr> elements;
  std::vector<Rational> charges;
  PsiResult outer;  // ψ on the complement chain
  PsiResult inner;  // ψ' on the complemented images
};

// φ'(E) = ψ'(ψ(E^c)^c) for a finite increasing chain with exact charges.
inline ChainModification nullmod_chain_two_sided(const std::vector<SetExpr>& chain,
                                                 const std::vector<Rational>& charges) {
  if (chain.size() != charges.size()) throw PreconditionError("one charge per chain element is required");
  const std::size_t k = chain.size();
  // complements, listed increasing: E_K^c ⊆ ... ⊆ E_1^c
  std::vector<SetExpr> comp;
  std::vector<Rational> comp_charges;
  for (std::size_t i = k; i-- > 0;) {
    comp.push_back(sets::complement(chain[i]));
    comp_charges.push_back(Rational(1) - charges[i]);
  }
  ChainModification out;
  out.outer = psi_chain(comp, comp_charges);
  std::vector<SetExpr> lifted;  // ψ(E_i^c)^c, increasing in i
  for (std::size_t i = 0; i < k; ++i) lifted.push_back(sets::complement(out.outer.images[k - 1 - i]));
  out.inner = psi_chain(lifted, charges);
  out.elements = out.inner.images;
  out.charges = charges;
  return out;
}

struct ChainDominationReport {
  std::optional<std::pair<std::size_t, std::uint64_t>> domination_failure;  // (element, N)
  std::optional<std::pair<std::size_t, std::uint64_t>> order_failure;       // (pair index, n)
  bool passed() const { return !domination_failure && !order_failure; }
};

// ν_N(E_i) <= c_i for all N <= horizon and E_i ⊆ E_{i+1} up to the horizon.
inline ChainDominationReport verify_chain(const std::vector<SetExpr>& elems, const std::vector<Rational>& charges,
                                          std::uint64_t horizon) {
  ChainDominationReport rep;
  std::vector<std::unique_ptr<Cursor>> cs;
  for (const auto& e : elems) cs.push_back(e.cursor());
  std::vector<std::uint64_t> counts(elems.size(), 0);
  std::vector<bool> bits(elems.size());
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
      bits[i] = cs[i]->next();
      counts[i] += bits[i] ? 1 : 0;
      const Rational& c = charges[i];
      if (!rep.domination_failure && static_cast<i128>(counts[i]) * c.den() > static_cast<i128>(n) * c.num())
        rep.domination_failure = std::pair{i, n};
    }
    for (std::size_t i = 0; i + 1 < cs.size(); ++i)
      if (!rep.order_failure && bits[i] && !bits[i + 1]) rep.order_failure = std::pair{i, n};
  }
  return rep;
}

}  // namespace cesaro
