#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cesaro/set_expr.hpp"

namespace cesaro {

enum class Provenance { ClosedForm, PeriodCount, RegisteredNull, BlockFormula, DerivedRule };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::PeriodCount: return "period-count";
    case Provenance::RegisteredNull: return "registered-null";
    case Provenance::BlockFormula: return "block-formula";
    case Provenance::DerivedRule: return "derived-rule";
  }
  return "unknown";
}

struct Charge {
  Rational value;
  Provenance provenance;
};

// ν_N(A) = |A ∩ {1..N}| / N
inline Rational partial_average(const SetExpr& e, std::uint64_t n) {
  if (n == 0) throw PreconditionError("partial averages need N >= 1");
  return Rational::ratio(e.count(n), n);
}

std::optional<Charge> exact_charge(const SetExpr& e);

namespace detail {

inline bool is_registered_null(const SetExpr& e);

inline bool same_target_as_charge(const Rational& target, const SetExpr& source) {
  auto c = exact_charge(source);
  return c && c->value == target;
}

inline bool is_registered_null(const SetExpr& e) {
  switch (e.kind()) {
    case Kind::Finite:
    case Kind::NullFamily:
      return true;
    case Kind::Dilate:
      return is_registered_null(static_cast<const DilateNode&>(e.node()).inner());
    case Kind::NullModRemoved: {
      // F is null when the target is the upper limit of the source
      const auto& r = static_cast<const NullModRemovedNode&>(e.node());
      return same_target_as_charge(r.target(), r.source());
    }
    case Kind::Intersection: {
      const auto& b = static_cast<const BinaryNode&>(e.node());
      return is_registered_null(b.left()) || is_registered_null(b.right());
    }
    case Kind::Union:
    case Kind::SymmDiff: {
      const auto& b = static_cast<const BinaryNode&>(e.node());
      return is_registered_null(b.left()) && is_registered_null(b.right());
    }
    case Kind::Difference:
      return is_registered_null(static_cast<const BinaryNode&>(e.node()).left());
    default:
      return false;
  }
}

inline bool is_empty_literal(const SetExpr& e) {
  return e.kind() == Kind::Finite && static_cast<const FiniteNode&>(e.node()).elements().empty();
}

// Replaces registered-null subterms of the Boolean/dilation skeleton by ∅ and
// folds the resulting identities. The result differs from `e` by a null set.
inline SetExpr strip_nulls(const SetExpr& e, bool& changed) {
  if (is_registered_null(e)) {
    if (!is_empty_literal(e)) changed = true;
    return sets::empty();
  }
  switch (e.kind()) {
    case Kind::Complement: {
      bool c = false;
      SetExpr in = strip_nulls(static_cast<const ComplementNode&>(e.node()).inner(), c);
      if (!c) return e;
      changed = true;
      return sets::complement(in);
    }
    case Kind::Dilate: {
      const auto& d = static_cast<const DilateNode&>(e.node());
      bool c = false;
      SetExpr in = strip_nulls(d.inner(), c);
      if (!c) return e;
      changed = true;
      if (is_empty_literal(in)) return in;
      return sets::dilate(d.factor(), in);
    }
    case Kind::Union:
    case Kind::Intersection:
    case Kind::Difference:
    case Kind::SymmDiff: {
      const auto& b = static_cast<const BinaryNode&>(e.node());
      bool c = false;
      SetExpr l = strip_nulls(b.left(), c);
      SetExpr r = strip_nulls(b.right(), c);
      if (!c) return e;
      changed = true;
      bool le = is_empty_literal(l), re = is_empty_literal(r);
      switch (e.kind()) {
        case Kind::Union:
        case Kind::SymmDiff:
          if (le) return r;
          if (re) return l;
          break;
        case Kind::Intersection:
          if (le) return l;
          if (re) return r;
          break;
        default:
          if (le) return l;
          if (re) return l;
          break;
      }
      return sets::binary(e.kind(), l, r);
    }
    default:
      return e;
  }
}

// Maximal non-Boolean subterms, deduplicated up to structural equality.
inline void collect_atoms(const SetExpr& e, std::vector<SetExpr>& atoms) {
  if (is_binary(e.kind())) {
    const auto& b = static_cast<const BinaryNode&>(e.node());
    collect_atoms(b.left(), atoms);
    collect_atoms(b.right(), atoms);
    return;
  }
  if (e.kind() == Kind::Complement) {
    collect_atoms(static_cast<const ComplementNode&>(e.node()).inner(), atoms);
    return;
  }
  for (const auto& a : atoms)
    if (structurally_equal(a, e)) return;
  atoms.push_back(e);
}

inline bool eval_formula(const SetExpr& e, const std::vector<SetExpr>& atoms, std::uint32_t mask) {
  if (is_binary(e.kind())) {
    const auto& b = static_cast<const BinaryNode&>(e.node());
    return b.apply(eval_formula(b.left(), atoms, mask), eval_formula(b.right(), atoms, mask));
  }
  if (e.kind() == Kind::Complement)
    return !eval_formula(static_cast<const ComplementNode&>(e.node()).inner(), atoms, mask);
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (structurally_equal(atoms[i], e)) return (mask >> i) & 1u;
  return false;
}

// Propositional shortcut: a formula that is constant, or equivalent to a
// single atom or its negation, over its maximal subterms.
inline std::optional<Charge> propositional_charge(const SetExpr& e) {
  std::vector<SetExpr> atoms;
  collect_atoms(e, atoms);
  if (atoms.size() > 12) return std::nullopt;
  std::uint32_t rows = 1u << atoms.size();
  std::vector<bool> truth(rows);
  for (std::uint32_t m = 0; m < rows; ++m) truth[m] = eval_formula(e, atoms, m);
  if (std::all_of(truth.begin(), truth.end(), [](bool b) { return b; }))
    return Charge{Rational(1), Provenance::DerivedRule};
  if (std::none_of(truth.begin(), truth.end(), [](bool b) { return b; }))
    return Charge{Rational(0), Provenance::DerivedRule};
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    bool same = true, negated = true;
    for (std::uint32_t m = 0; m < rows; ++m) {
      bool bit = (m >> i) & 1u;
      same = same && truth[m] == bit;
      negated = negated && truth[m] != bit;
    }
    if (same || negated) {
      auto c = exact_charge(atoms[i]);
      if (!c) return std::nullopt;
      return Charge{same ? c->value : Rational(1) - c->value, Provenance::DerivedRule};
    }
  }
  return std::nullopt;
}

// Membership bits of 1..p for an expression whose period divides p. Residue
// leaves and Boolean nodes work a word at a time; anything else is streamed.
inline std::vector<std::uint64_t> period_bits(const SetExpr& e, std::uint64_t p) {
  const std::size_t words = (p + 63) / 64;
  std::vector<std::uint64_t> out(words, 0);
  auto mask_tail = [&](std::vector<std::uint64_t>& v) {
    if (p % 64) v.back() &= (1ull << (p % 64)) - 1;
  };
  if (e.kind() == Kind::Residue) {
    const auto& r = static_cast<const ResidueNode&>(e.node());
    std::uint64_t m = r.modulus();
    for (std::uint64_t n = r.residue() == 0 ? m : r.residue(); n <= p; n += m) out[(n - 1) / 64] |= 1ull << ((n - 1) % 64);
    return out;
  }
  if (e.kind() == Kind::Complement) {
    out = period_bits(static_cast<const ComplementNode&>(e.node()).inner(), p);
    for (auto& w : out) w = ~w;
    mask_tail(out);
    return out;
  }
  if (is_binary(e.kind())) {
    const auto& b = static_cast<const BinaryNode&>(e.node());
    out = period_bits(b.left(), p);
    auto r = period_bits(b.right(), p);
    for (std::size_t i = 0; i < words; ++i) {
      switch (e.kind()) {
        case Kind::Union: out[i] |= r[i]; break;
        case Kind::Intersection: out[i] &= r[i]; break;
        case Kind::Difference: out[i] &= ~r[i]; break;
        default: out[i] ^= r[i]; break;
      }
    }
    return out;
  }
  auto c = e.cursor();
  for (std::uint64_t n = 0; n < p; ++n)
    if (c->next()) out[n / 64] |= 1ull << (n % 64);
  return out;
}

inline Rational period_average(const SetExpr& e) {
  std::uint64_t p = *e.node().period();
  std::uint64_t k = 0;
  for (auto w : period_bits(e, p)) k += static_cast<std::uint64_t>(__builtin_popcountll(w));
  return Rational::ratio(k, p);
}

inline std::optional<Charge> binary_charge(const SetExpr& e) {
  const auto& b = static_cast<const BinaryNode&>(e.node());
  if (b.period()) return Charge{period_average(e), Provenance::PeriodCount};
  if (auto c = propositional_charge(e)) return c;

  if (e.kind() == Kind::Intersection) {
    if (symbolic_subset(b.left(), b.right())) return exact_charge(b.left());
    if (symbolic_subset(b.right(), b.left())) return exact_charge(b.right());
    return std::nullopt;
  }
  // inclusion-exclusion
  auto ca = exact_charge(b.left());
  if (!ca) return std::nullopt;
  auto cb = exact_charge(b.right());
  if (!cb && e.kind() != Kind::Difference) return std::nullopt;
  auto ci = exact_charge(sets::intersection(b.left(), b.right()));
  if (!ci) return std::nullopt;
  switch (e.kind()) {
    case Kind::Union: return Charge{ca->value + cb->value - ci->value, Provenance::DerivedRule};
    case Kind::SymmDiff:
      return Charge{ca->value + cb->value - Rational(2) * ci->value, Provenance::DerivedRule};
    default: return Charge{ca->value - ci->value, Provenance::DerivedRule};
  }
}

}  // namespace detail

// Exact ν(A) from the rule system, or nullopt when no rule applies. Never
// estimates.
inline std::optional<Charge> exact_charge(const SetExpr& e) {
  if (detail::is_registered_null(e)) return Charge{Rational(0), Provenance::RegisteredNull};

  switch (e.kind()) {
    case Kind::Complement:
    case Kind::Dilate:
    case Kind::Union:
    case Kind::Intersection:
    case Kind::Difference:
    case Kind::SymmDiff: {
      bool changed = false;
      SetExpr s = detail::strip_nulls(e, changed);
      if (changed) {
        if (detail::is_empty_literal(s)) return Charge{Rational(0), Provenance::RegisteredNull};
        auto c = exact_charge(s);
        if (c && c->provenance != Provenance::PeriodCount) c->provenance = Provenance::RegisteredNull;
        return c;
      }
      break;
    }
    default:
      break;
  }

  switch (e.kind()) {
    case Kind::Residue:
      return Charge{Rational(1, static_cast<std::int64_t>(static_cast<const ResidueNode&>(e.node()).modulus())),
                    Provenance::ClosedForm};
    case Kind::Complement: {
      auto c = exact_charge(static_cast<const ComplementNode&>(e.node()).inner());
      if (!c) return std::nullopt;
      return Charge{Rational(1) - c->value, c->provenance == Provenance::PeriodCount ? Provenance::PeriodCount
                                                                                  : Provenance::DerivedRule};
    }
    case Kind::Union:
    case Kind::Intersection:
    case Kind::Difference:
    case Kind::SymmDiff:
      return detail::binary_charge(e);
    case Kind::Blocks: {
      auto [hi, lo] = static_cast<const BlocksNode&>(e.node()).spec().limits();
      if (hi != lo) return std::nullopt;
      return Charge{hi, Provenance::BlockFormula};
    }
    case Kind::Dilate: {
      const auto& d = static_cast<const DilateNode&>(e.node());
      auto c = exact_charge(d.inner());
      if (!c) return std::nullopt;
      return Charge{c->value / Rational(static_cast<std::int64_t>(d.factor())), Provenance::DerivedRule};
    }
    case Kind::Interleave:
      return Charge{Rational(1, 2), Provenance::ClosedForm};
    case Kind::Greedy: {
      const auto& t = static_cast<const GreedyNode&>(e.node()).target();
      if (!t.is_exact()) return std::nullopt;
      return Charge{t.exact(), Provenance::ClosedForm};
    }
    case Kind::NullModKept: {
      const auto& k = static_cast<const NullModKeptNode&>(e.node());
      auto c = exact_charge(k.source());
      if (!c || c->value != k.target()) return std::nullopt;
      return Charge{c->value, Provenance::DerivedRule};
    }
    case Kind::Midpoint: {
      const auto& m = static_cast<const MidpointNode&>(e.node());
      auto cb = exact_charge(m.lower());
      auto cc = exact_charge(m.upper());
      if (!cb || !cc) return std::nullopt;
      return Charge{(cb->value + cc->value) / Rational(2), Provenance::DerivedRule};
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Profiles

struct EstimatorConfig {
  std::uint64_t base_n = 64;
  Rational growth_ratio{5, 4};
  Rational burn_in_fraction{1, 5};
  std::size_t trailing_window = 20;
  Rational tolerance{1, 1000};
  std::uint64_t horizon = 1000000;
  bool include_structural_checkpoints = true;

  void validate() const {
    if (growth_ratio <= Rational(1)) throw PreconditionError("growth ratio must exceed 1");
    if (burn_in_fraction < Rational(0) || burn_in_fraction >= Rational(1))
      throw PreconditionError("burn-in fraction must lie in [0,1)");
    if (base_n < 1) throw PreconditionError("base checkpoint must be >= 1");
    if (horizon < base_n) throw PreconditionError("horizon must be >= the base checkpoint");
    if (trailing_window < 1) throw PreconditionError("trailing window must hold at least one checkpoint");
    check_horizon(horizon);
  }
};

struct DensityProfile {
  std::vector<std::uint64_t> checkpoints;
  std::vector<std::uint64_t> counts;
  std::vector<Rational> values;
  Rational lower_est;
  Rational upper_est;
  std::uint64_t argmin = 0;  // checkpoint attaining lower_est
  std::uint64_t argmax = 0;  // checkpoint attaining upper_est
  Rational oscillation;
  bool converged = false;
  std::uint64_t horizon = 0;
  std::uint64_t burn_in = 0;  // first horizon counted in the estimates
  bool heuristic = true;
  std::optional<Charge> exact;
};

// Geometric checkpoints base, base*r, ... (strictly increasing) plus the horizon.
inline std::vector<std::uint64_t> geometric_schedule(const EstimatorConfig& cfg) {
  cfg.validate();
  std::vector<std::uint64_t> out;
  const auto num = static_cast<u128>(cfg.growth_ratio.num());
  const auto den = static_cast<u128>(cfg.growth_ratio.den());
  u128 n = cfg.base_n;
  while (n < cfg.horizon) {
    out.push_back(static_cast<std::uint64_t>(n));
    u128 next = n * num / den;
    n = next > n ? next : n + 1;
  }
  out.push_back(cfg.horizon);
  return out;
}

inline std::vector<std::uint64_t> profile_schedule(const SetExpr& e, const EstimatorConfig& cfg) {
  auto pts = geometric_schedule(cfg);
  if (cfg.include_structural_checkpoints) {
    auto s = structural_points(e, cfg.horizon);
    pts.insert(pts.end(), s.begin(), s.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  }
  return pts;
}

// Prefix counts at increasing checkpoints: per-point fast counts when the
// variant has them, otherwise one streaming pass.
inline std::vector<std::uint64_t> counts_at(const SetExpr& e, const std::vector<std::uint64_t>& pts) {
  std::vector<std::uint64_t> out;
  out.reserve(pts.size());
  if (pts.empty()) return out;
  if (e.node().has_fast_count()) {
    for (auto p : pts) out.push_back(e.count(p));
    return out;
  }
  check_horizon(pts.back());
  auto c = e.cursor();
  std::uint64_t n = 0, total = 0;
  for (auto p : pts) {
    for (; n < p; ++n) total += c->next() ? 1 : 0;
    out.push_back(total);
  }
  return out;
}

inline DensityProfile profile_from_counts(std::vector<std::uint64_t> pts, std::vector<std::uint64_t> counts,
                                          const EstimatorConfig& cfg) {
  DensityProfile p;
  p.checkpoints = std::move(pts);
  p.counts = std::move(counts);
  p.horizon = p.checkpoints.back();
  p.values.reserve(p.checkpoints.size());
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i)
    p.values.push_back(Rational::ratio(p.counts[i], p.checkpoints[i]));

  // post-burn-in: N >= burnIn * horizon
  const Rational& f = cfg.burn_in_fraction;
  i128 threshold = (static_cast<i128>(f.num()) * p.horizon + f.den() - 1) / f.den();
  p.burn_in = static_cast<std::uint64_t>(threshold);
  bool first = true;
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i) {
    if (p.checkpoints[i] < p.burn_in) continue;
    const Rational& v = p.values[i];
    if (first || v > p.upper_est) {
      p.upper_est = v;
      p.argmax = p.checkpoints[i];
    }
    if (first || v < p.lower_est) {
      p.lower_est = v;
      p.argmin = p.checkpoints[i];
    }
    first = false;
  }

  std::size_t w = std::min(cfg.trailing_window, p.values.size());
  auto begin = p.values.end() - static_cast<std::ptrdiff_t>(w);
  auto [lo, hi] = std::minmax_element(begin, p.values.end());
  p.oscillation = *hi - *lo;
  p.converged = p.oscillation < cfg.tolerance;
  return p;
}

inline DensityProfile density_profile(const SetExpr& e, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  auto pts = profile_schedule(e, cfg);
  auto counts = counts_at(e, pts);
  DensityProfile p = profile_from_counts(std::move(pts), std::move(counts), cfg);
  p.exact = exact_charge(e);
  p.heuristic = !p.exact.has_value();
  return p;
}

// ---------------------------------------------------------------------------
// Gap functions

struct Gap {
  enum class Status { Found, Infinite, Exhausted };
  Status status;
  std::uint64_t value = 0;  // k when Found; searched distance when Exhausted

  bool found() const noexcept { return status == Status::Found; }
  std::string str() const {
    switch (status) {
      case Status::Found: return std::to_string(value);
      case Status::Infinite: return "inf";
      case Status::Exhausted: return "exhausted(" + std::to_string(value) + ")";
    }
    return {};
  }
};

inline constexpr std::uint64_t kDefaultLookahead = 1ull << 26;

namespace detail {

// least k > 0 with I_A(N+k) == want
inline Gap gap_search(const SetExpr& e, std::uint64_t n, bool want, std::uint64_t lookahead) {
  if (n == 0) throw PreconditionError("gap functions need N >= 1");
  check_horizon(n);
  if (e.kind() == Kind::Complement)
    return gap_search(static_cast<const ComplementNode&>(e.node()).inner(), n, !want, lookahead);
  if (want && e.kind() == Kind::Finite) {
    const auto& xs = static_cast<const FiniteNode&>(e.node()).elements();
    auto it = std::upper_bound(xs.begin(), xs.end(), n);
    if (it == xs.end()) return {Gap::Status::Infinite, 0};
    return {Gap::Status::Found, *it - n};
  }
  // A period L settles the question within L steps.
  std::uint64_t limit = lookahead;
  bool conclusive = false;
  if (auto p = e.node().period(); p && *p <= lookahead) {
    limit = *p;
    conclusive = true;
  }
  for (std::uint64_t k = 1; k <= limit; ++k) {
    if (n > kMaxHorizon - k) return {Gap::Status::Exhausted, k - 1};
    if (e.contains(n + k) == want) return {Gap::Status::Found, k};
  }
  if (conclusive) return {Gap::Status::Infinite, 0};
  return {Gap::Status::Exhausted, limit};
}

}  // namespace detail

// P_A(N): distance to the next member after N.
inline Gap gap_function_P(const SetExpr& e, std::uint64_t n, std::uint64_t lookahead = kDefaultLookahead) {
  return detail::gap_search(e, n, true, lookahead);
}

// Q_A(N): distance to the next non-member after N.
inline Gap gap_function_Q(const SetExpr& e, std::uint64_t n, std::uint64_t lookahead = kDefaultLookahead) {
  return detail::gap_search(e, n, false, lookahead);
}

// ---------------------------------------------------------------------------
// Dilation law

struct DilateCheckReport {
  bool passed = true;
  std::vector<std::uint64_t> checkpoints;
  std::optional<std::uint64_t> first_failure;  // N where ν_{kN}(kA) != ν_N(A)/k
};

// Compares ν_{kN}(kA) with ν_N(A)/k at every schedule checkpoint N <= horizon.
// The left side is counted by streaming the dilated set, the right side by
// the inner set's own count.
inline DilateCheckReport dilate_density_check(const SetExpr& a, std::uint64_t k, std::uint64_t horizon,
                                              const EstimatorConfig& base = {}) {
  if (k == 0) throw SemanticError("dilation factor must be >= 1");
  EstimatorConfig cfg = base;
  cfg.horizon = horizon;
  cfg.base_n = std::min(cfg.base_n, horizon);
  DilateCheckReport r;
  r.checkpoints = profile_schedule(a, cfg);
  SetExpr ka = sets::dilate(k, a);
  auto c = ka.cursor();
  std::uint64_t n = 0, total = 0;
  for (auto p : r.checkpoints) {
    auto kn = arith::mul_checked(k, p);
    if (!kn) throw HorizonOverflow("k*N exceeds the 63-bit limit");
    for (; n < *kn; ++n) total += c->next() ? 1 : 0;
    Rational lhs = Rational::ratio(total, *kn);
    Rational rhs = partial_average(a, p) / Rational(static_cast<std::int64_t>(k));
    if (lhs != rhs) {
      r.passed = false;
      r.first_failure = p;
      break;
    }
  }
  return r;
}

}  // namespace cesaro
