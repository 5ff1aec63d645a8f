#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cesaro/constructions.hpp"
#include "cesaro/nullmod.hpp"

namespace cesaro {

// ---------------------------------------------------------------------------
// a.e. equivalence: A ~ B iff A △ B is null

struct AeResult {
  enum class Verdict { EquivalentExact, EquivalentEmpirical, NotEquivalent, Inconclusive };
  Verdict verdict;
  Rational value;  // exact ν(A△B), or the empirical upper estimate
  std::optional<Provenance> provenance;

  bool equivalent() const {
    return verdict == Verdict::EquivalentExact || verdict == Verdict::EquivalentEmpirical;
  }
  std::string str() const {
    switch (verdict) {
      case Verdict::EquivalentExact: return "equivalent(exact)";
      case Verdict::EquivalentEmpirical: return "equivalent(empirical, bound " + value.str() + ")";
      case Verdict::NotEquivalent: return "not-equivalent(witness " + value.str() + ")";
      case Verdict::Inconclusive: return "inconclusive(upper estimate " + value.str() + ")";
    }
    return {};
  }
};

inline AeResult ae_equivalent(const SetExpr& a, const SetExpr& b, const EstimatorConfig& cfg = {}) {
  SetExpr d = sets::symm_diff(a, b);
  if (auto c = exact_charge(d)) {
    if (c->value == Rational(0)) return {AeResult::Verdict::EquivalentExact, c->value, c->provenance};
    return {AeResult::Verdict::NotEquivalent, c->value, c->provenance};
  }
  DensityProfile p = density_profile(d, cfg);
  if (p.upper_est <= cfg.tolerance) return {AeResult::Verdict::EquivalentEmpirical, p.upper_est, std::nullopt};
  return {AeResult::Verdict::Inconclusive, p.upper_est, std::nullopt};
}

// ---------------------------------------------------------------------------
// Generated fields

inline constexpr std::size_t kMaxGenerators = 12;

struct FieldOfSets {
  std::vector<SetExpr> generators;
  std::vector<SetExpr> atoms;
  std::vector<std::uint32_t> patterns;  // bit i set: atom lies inside generator i
  std::vector<std::optional<Rational>> charges;
  std::uint64_t horizon = 0;

  bool all_charges() const {
    return std::all_of(charges.begin(), charges.end(), [](const auto& c) { return c.has_value(); });
  }
  // Charge of the union of the atoms selected by `mask`.
  std::optional<Rational> charge_of(std::uint64_t mask) const {
    Rational sum(0);
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (!((mask >> i) & 1u)) continue;
      if (!charges[i]) return std::nullopt;
      sum += *charges[i];
    }
    return sum;
  }
  SetExpr element(std::uint64_t mask) const {
    std::vector<SetExpr> parts;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if ((mask >> i) & 1u) parts.push_back(atoms[i]);
    return sets::union_all(parts);
  }
};

// Atoms are the sign-pattern intersections realized by some n <= horizon.
// One joint pass over the generators assigns every n its pattern, so the
// atoms are disjoint and cover 1..horizon by construction.
inline FieldOfSets generate_field(const std::vector<SetExpr>& gens, std::uint64_t horizon = kDefaultVerifyHorizon) {
  if (gens.size() > kMaxGenerators)
    throw PreconditionError("at most " + std::to_string(kMaxGenerators) + " generators are supported");
  check_horizon(horizon);
  FieldOfSets f;
  f.generators = gens;
  f.horizon = horizon;
  std::vector<bool> seen(std::size_t{1} << gens.size(), false);
  std::vector<std::unique_ptr<Cursor>> cs;
  for (const auto& g : gens) cs.push_back(g.cursor());
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < cs.size(); ++i) m |= cs[i]->next() ? 1u << i : 0u;
    seen[m] = true;
  }
  for (std::uint32_t m = 0; m < seen.size(); ++m) {
    if (!seen[m]) continue;
    std::optional<SetExpr> atom;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      SetExpr lit = ((m >> i) & 1u) ? gens[i] : sets::complement(gens[i]);
      atom = atom ? sets::intersection(*atom, lit) : lit;
    }
    SetExpr a = atom ? *atom : sets::naturals();
    f.atoms.push_back(a);
    f.patterns.push_back(m);
    auto c = exact_charge(a);
    f.charges.push_back(c ? std::optional<Rational>(c->value) : std::nullopt);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Countable partitions

struct PartitionSpec {
  std::vector<SetExpr> parts;
  std::vector<Rational> charges;
  Rational tail_mass;  // 1 - Σ charges
};

inline PartitionSpec make_partition(const std::vector<SetExpr>& parts, std::uint64_t horizon = kDefaultVerifyHorizon) {
  if (auto w = find_overlap(parts, horizon))
    throw PreconditionError("partition parts " + std::to_string(w->first) + " and " + std::to_string(w->second) +
                                " overlap at n = " + std::to_string(w->n),
                            w->n);
  PartitionSpec p;
  p.parts = parts;
  Rational sum(0);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto c = exact_charge(parts[i]);
    if (!c) throw PreconditionError("partition part " + std::to_string(i) + " has no exact charge", i);
    p.charges.push_back(c->value);
    sum += c->value;
  }
  if (sum > Rational(1)) throw PreconditionError("partition charges sum above 1");
  p.tail_mass = Rational(1) - sum;
  return p;
}

struct Classification {
  enum class Kind { MeasureSpace, ChargeOnly };
  Kind kind;
  Rational tail_mass;               // at the truncation level
  std::vector<Rational> tail_trend; // tail mass after 1, 2, ..., K parts
  bool decreasing = false;
  Rational decay_ratio;             // largest tail ratio over the second half of the trend

  std::string str() const {
    if (kind == Kind::MeasureSpace) return "MeasureSpace(tailMass " + tail_mass.str() + ")";
    return "ChargeOnly(deficit " + tail_mass.str() + ")";
  }
};

// MeasureSpace when the tail mass is 0, or when it decreases strictly along
// the truncation with tail ratios bounded by ρ < 1 over the second half of
// the trend (geometric decay to 0). Otherwise the deficit is reported.
inline Classification classify_measure_space(const PartitionSpec& p, const Rational& rho = Rational(9, 10)) {
  Classification c;
  c.tail_mass = p.tail_mass;
  Rational remaining(1);
  for (const auto& ch : p.charges) {
    remaining -= ch;
    c.tail_trend.push_back(remaining);
  }
  if (p.tail_mass == Rational(0)) {
    c.kind = Classification::Kind::MeasureSpace;
    c.decreasing = true;
    return c;
  }
  const auto& t = c.tail_trend;
  c.decreasing = t.size() >= 2;
  for (std::size_t i = 1; i < t.size(); ++i) c.decreasing = c.decreasing && t[i] < t[i - 1];
  if (c.decreasing) {
    Rational worst(0);
    for (std::size_t i = std::max<std::size_t>(1, t.size() / 2); i < t.size(); ++i)
      worst = std::max(worst, t[i] / t[i - 1]);
    c.decay_ratio = worst;
  } else {
    c.decay_ratio = Rational(1);
  }
  c.kind = c.decreasing && c.decay_ratio <= rho ? Classification::Kind::MeasureSpace
                                                : Classification::Kind::ChargeOnly;
  return c;
}

// ---------------------------------------------------------------------------
// Measurable form h = Σ a_j I_{A_j} + g

struct MeasurableForm {
  std::vector<std::pair<Rational, SetExpr>> terms;
  std::optional<SetExpr> perturbation_support;  // support of g
};

struct FormCheckReport {
  bool in_field = true;
  bool positive_charges = true;
  bool null_perturbation = true;
  bool disjoint_supports = true;
  bool empirical = false;  // some clause used a profile estimate
  std::vector<std::string> failures;

  bool passed() const { return in_field && positive_charges && null_perturbation && disjoint_supports; }
};

inline FormCheckReport measurable_form_check(const MeasurableForm& h, const PartitionSpec& p,
                                             std::uint64_t horizon = kDefaultVerifyHorizon,
                                             const EstimatorConfig& base = {}) {
  FormCheckReport rep;
  EstimatorConfig cfg = base;
  cfg.horizon = horizon;
  cfg.base_n = std::min(cfg.base_n, horizon);

  // A_j must be a union of cells: the parts plus the uncovered remainder.
  const std::size_t cells = p.parts.size() + 1;
  std::vector<std::unique_ptr<Cursor>> pc;
  for (const auto& part : p.parts) pc.push_back(part.cursor());
  std::vector<std::unique_ptr<Cursor>> tc;
  for (const auto& [a, s] : h.terms) tc.push_back(s.cursor());
  std::unique_ptr<Cursor> gc = h.perturbation_support ? h.perturbation_support->cursor() : nullptr;
  // per term and cell: 1 = seen inside, 2 = seen outside
  std::vector<std::vector<std::uint8_t>> seen(h.terms.size(), std::vector<std::uint8_t>(cells, 0));
  std::vector<bool> term_failed(h.terms.size(), false);
  std::vector<bool> in_term(h.terms.size());
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    std::size_t cell = cells - 1;
    for (std::size_t i = 0; i < pc.size(); ++i)
      if (pc[i]->next()) cell = i;
    bool in_g = gc && gc->next();
    std::size_t hits = in_g ? 1 : 0;
    for (std::size_t j = 0; j < tc.size(); ++j) {
      in_term[j] = tc[j]->next();
      hits += in_term[j] ? 1 : 0;
      seen[j][cell] |= in_term[j] ? 1 : 2;
      if (seen[j][cell] == 3 && !term_failed[j]) {
        term_failed[j] = true;
        rep.in_field = false;
        rep.failures.push_back("term " + std::to_string(j) + " splits a partition cell at n = " + std::to_string(n));
      }
    }
    if (hits > 1 && rep.disjoint_supports) {
      rep.disjoint_supports = false;
      rep.failures.push_back("supports overlap at n = " + std::to_string(n));
    }
  }

  for (std::size_t j = 0; j < h.terms.size(); ++j) {
    const SetExpr& s = h.terms[j].second;
    if (auto c = exact_charge(s)) {
      if (c->value <= Rational(0)) {
        rep.positive_charges = false;
        rep.failures.push_back("term " + std::to_string(j) + " has charge 0");
      }
    } else {
      rep.empirical = true;
      DensityProfile prof = density_profile(s, cfg);
      if (prof.lower_est <= Rational(0)) {
        rep.positive_charges = false;
        rep.failures.push_back("term " + std::to_string(j) + " shows no positive lower estimate");
      }
    }
  }

  if (h.perturbation_support) {
    if (auto c = exact_charge(*h.perturbation_support)) {
      if (c->value != Rational(0)) {
        rep.null_perturbation = false;
        rep.failures.push_back("perturbation support has charge " + c->value.str());
      }
    } else {
      rep.empirical = true;
      DensityProfile prof = density_profile(*h.perturbation_support, cfg);
      if (prof.upper_est > cfg.tolerance) {
        rep.null_perturbation = false;
        rep.failures.push_back("perturbation support upper estimate " + prof.upper_est.str());
      }
    }
  }
  return rep;
}

}  // namespace cesaro
