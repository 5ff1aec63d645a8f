#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "cesaro/quotient.hpp"

namespace cesaro {

// h = Σ c_k I_{A_k}
struct SimpleSequence {
  std::vector<std::pair<Rational, SetExpr>> terms;
  bool partition = false;  // terms are pairwise disjoint and cover ℕ

  Rational value(std::uint64_t n) const {
    Rational v(0);
    for (const auto& [c, s] : terms)
      if (s.contains(n)) v += c;
    return v;
  }

  // Σ_{n<=N} h(n), from the term counts.
  Rational partial_sum(std::uint64_t n) const {
    Rational s(0);
    for (const auto& [c, set] : terms) s += c * Rational(static_cast<std::int64_t>(set.count(n)));
    return s;
  }

  std::vector<std::uint64_t> structural_points(std::uint64_t horizon) const {
    std::vector<std::uint64_t> out;
    for (const auto& [c, s] : terms) {
      auto p = cesaro::structural_points(s, horizon);
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }

  SimpleSequence scaled(const Rational& k) const {
    SimpleSequence out = *this;
    for (auto& t : out.terms) t.first *= k;
    return out;
  }
  friend SimpleSequence operator+(const SimpleSequence& a, const SimpleSequence& b) {
    SimpleSequence out = a;
    out.partition = false;
    out.terms.insert(out.terms.end(), b.terms.begin(), b.terms.end());
    return out;
  }
  friend SimpleSequence operator-(const SimpleSequence& a, const SimpleSequence& b) {
    return a + b.scaled(Rational(-1));
  }
};

// Checks disjointness and cover up to the horizon and marks the partition flag.
inline SimpleSequence make_partition_sequence(std::vector<std::pair<Rational, SetExpr>> terms,
                                              std::uint64_t horizon = kDefaultVerifyHorizon) {
  std::vector<SetExpr> sets_only;
  for (const auto& t : terms) sets_only.push_back(t.second);
  if (auto w = find_overlap(sets_only, horizon))
    throw PreconditionError("partition terms overlap at n = " + std::to_string(w->n), w->n);
  std::vector<std::unique_ptr<Cursor>> cs;
  for (const auto& s : sets_only) cs.push_back(s.cursor());
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    bool any = false;
    for (auto& c : cs) any = c->next() || any;
    if (!any) throw PreconditionError("partition terms miss n = " + std::to_string(n), n);
  }
  return {std::move(terms), true};
}

// g(m²) = m, g(n) = 0 off the squares.
struct AnomalySequence {
  Rational value(std::uint64_t n) const {
    auto r = arith::isqrt(n);
    return r * r == n ? Rational(static_cast<std::int64_t>(r)) : Rational(0);
  }
  // Σ_{m² <= N} m = M(M+1)/2
  Rational partial_sum(std::uint64_t n) const {
    i128 m = arith::isqrt(n);
    return Rational::from_i128(m * (m + 1) / 2, 1);
  }
  std::vector<std::uint64_t> structural_points(std::uint64_t horizon) const {
    return cesaro::structural_points(sets::squares(), horizon);
  }
  SetExpr support() const { return sets::squares(); }
};

// Arbitrary rational-valued sequence, summed by streaming.
struct FunctionSequence {
  std::string name;
  std::function<Rational(std::uint64_t)> fn;

  Rational value(std::uint64_t n) const { return fn(n); }
  Rational partial_sum(std::uint64_t n) const {
    Rational s(0);
    for (std::uint64_t i = 1; i <= n; ++i) s += fn(i);
    return s;
  }
  std::vector<std::uint64_t> structural_points(std::uint64_t) const { return {}; }
};

// ν_N(h) = (1/N) Σ_{n<=N} h(n)
template <class Seq>
Rational seq_partial_average(const Seq& h, std::uint64_t n) {
  if (n == 0) throw PreconditionError("partial averages need N >= 1");
  check_horizon(n);
  return h.partial_sum(n) / Rational(static_cast<std::int64_t>(n));
}

// ---------------------------------------------------------------------------
// Atoms and exact integrals

struct ValuedAtom {
  SetExpr set;
  Rational value;
  Rational charge;
};

// The partition on which h is constant, with the charge of every atom where
// h is non-zero.
inline std::vector<ValuedAtom> valued_atoms(const SimpleSequence& h, std::uint64_t horizon = kDefaultVerifyHorizon) {
  std::vector<ValuedAtom> out;
  if (h.partition) {
    for (std::size_t k = 0; k < h.terms.size(); ++k) {
      auto c = exact_charge(h.terms[k].second);
      if (!c) throw PreconditionError("term " + std::to_string(k) + " has no exact charge", k);
      out.push_back({h.terms[k].second, h.terms[k].first, c->value});
    }
    return out;
  }
  std::vector<SetExpr> gens;
  for (const auto& t : h.terms) gens.push_back(t.second);
  FieldOfSets f = generate_field(gens, horizon);
  for (std::size_t i = 0; i < f.atoms.size(); ++i) {
    Rational v(0);
    for (std::size_t k = 0; k < h.terms.size(); ++k)
      if ((f.patterns[i] >> k) & 1u) v += h.terms[k].first;
    if (v == Rational(0)) continue;
    if (!f.charges[i]) throw PreconditionError("atom " + std::to_string(i) + " has no exact charge", i);
    out.push_back({f.atoms[i], v, *f.charges[i]});
  }
  return out;
}

// ν(h) = Σ c_k ν(A_k)
inline Rational cesaro_integral(const SimpleSequence& h) {
  Rational s(0);
  for (std::size_t k = 0; k < h.terms.size(); ++k) {
    auto c = exact_charge(h.terms[k].second);
    if (!c) throw PreconditionError("term " + std::to_string(k) + " has no exact charge", k);
    s += h.terms[k].first * c->value;
  }
  return s;
}

namespace detail {

inline std::optional<std::int64_t> exact_root(std::int64_t x, std::int64_t b) {
  if (x < 0) return std::nullopt;
  if (x < 2 || b == 1) return x;
  auto r = static_cast<std::int64_t>(std::llround(std::pow(static_cast<long double>(x), 1.0L / b)));
  for (std::int64_t c = std::max<std::int64_t>(0, r - 1); c <= r + 1; ++c) {
    auto p = arith::pow_checked(static_cast<std::uint64_t>(c), static_cast<unsigned>(b));
    if (p && *p == static_cast<std::uint64_t>(x)) return c;
  }
  return std::nullopt;
}

// |v|^p for rational p = a/b, exact when |v| is a perfect b-th power.
inline std::optional<Rational> exact_rational_power(const Rational& v, const Rational& p) {
  Rational a = v.abs();
  if (p.den() == 1) return a.pow(static_cast<unsigned>(p.num()));
  auto rn = exact_root(a.num(), p.den());
  auto rd = exact_root(a.den(), p.den());
  if (!rn || !rd) return std::nullopt;
  return Rational(*rn, *rd).pow(static_cast<unsigned>(p.num()));
}

}  // namespace detail

struct KpNorm {
  Rational p;
  std::optional<Rational> pth_power;  // ν(|h|^p) when exact
  long double pth_power_approx = 0;
  long double norm = 0;               // (ν(|h|^p))^{1/p}
  bool exact_norm = false;            // the root itself is exact (p = 1)
};

// ‖h‖_p = (ν(|h|^p))^{1/p} over the atoms of h.
inline KpNorm kp_norm(const SimpleSequence& h, const Rational& p, std::uint64_t horizon = kDefaultVerifyHorizon) {
  if (p < Rational(1)) throw PreconditionError("K_p norms need p >= 1");
  KpNorm out;
  out.p = p;
  auto atoms = valued_atoms(h, horizon);
  Rational sum(0);
  long double approx = 0;
  bool exact = true;
  for (const auto& a : atoms) {
    long double pw = std::pow(static_cast<long double>(a.value.abs().to_double()), p.to_double());
    approx += pw * a.charge.to_double();
    if (!exact) continue;
    if (a.charge == Rational(0)) continue;
    auto e = detail::exact_rational_power(a.value, p);
    if (!e) {
      exact = false;
      continue;
    }
    sum += *e * a.charge;
  }
  if (exact) {
    out.pth_power = sum;
    approx = sum.to_double();
  }
  out.pth_power_approx = approx;
  out.norm = std::pow(approx, 1.0L / p.to_double());
  out.exact_norm = exact && p == Rational(1);
  return out;
}

// ---------------------------------------------------------------------------
// Streaming profiles of sequences

struct SequenceProfile {
  std::vector<std::uint64_t> checkpoints;
  std::vector<Rational> values;
  Rational upper_est, lower_est;
};

template <class SumFn>
SequenceProfile sequence_profile(SumFn partial_sum, std::vector<std::uint64_t> extra, const EstimatorConfig& cfg) {
  auto pts = geometric_schedule(cfg);
  if (cfg.include_structural_checkpoints) {
    for (auto e : extra)
      if (e >= 1 && e <= cfg.horizon) pts.push_back(e);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  }
  SequenceProfile sp;
  sp.checkpoints = pts;
  const Rational& f = cfg.burn_in_fraction;
  i128 burn = (static_cast<i128>(f.num()) * cfg.horizon + f.den() - 1) / f.den();
  bool first = true;
  for (auto n : pts) {
    Rational v = partial_sum(n) / Rational(static_cast<std::int64_t>(n));
    sp.values.push_back(v);
    if (static_cast<i128>(n) < burn) continue;
    if (first || v > sp.upper_est) sp.upper_est = v;
    if (first || v < sp.lower_est) sp.lower_est = v;
    first = false;
  }
  return sp;
}

struct IntegralCheck {
  Rational integral;  // Σ c_k ν(A_k)
  std::vector<std::uint64_t> checkpoints;
  std::vector<Rational> values;  // ν_N(h)
  Rational final_difference;     // |ν_horizon(h) - integral|
  bool decreasing_trend = false;
  bool passed = false;
};

// Streaming ν_N(h) against the exact integral: passes when the difference
// at the horizon is below tolerance and the worst difference over the later
// half of the checkpoints does not exceed that over the earlier half.
inline IntegralCheck cesaro_integral_check(const SimpleSequence& h, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  IntegralCheck r;
  r.integral = cesaro_integral(h);
  auto sp = sequence_profile([&](std::uint64_t n) { return h.partial_sum(n); }, h.structural_points(cfg.horizon), cfg);
  r.checkpoints = sp.checkpoints;
  r.values = sp.values;
  r.final_difference = (r.values.back() - r.integral).abs();
  std::size_t half = r.values.size() / 2;
  Rational early(0), late(0);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    Rational d = (r.values[i] - r.integral).abs();
    if (i < half) early = std::max(early, d);
    else late = std::max(late, d);
  }
  r.decreasing_trend = late <= early;
  r.passed = r.final_difference < cfg.tolerance && r.decreasing_trend;
  return r;
}

// ν(c f + d g) = c ν(f) + d ν(g), exactly, both for the integrals and for
// the partial averages at N.
inline bool linearity_holds(const SimpleSequence& f, const SimpleSequence& g, const Rational& c, const Rational& d,
                            std::uint64_t n) {
  SimpleSequence comb = f.scaled(c) + g.scaled(d);
  bool integral = cesaro_integral(comb) == c * cesaro_integral(f) + d * cesaro_integral(g);
  bool partial = seq_partial_average(comb, n) == c * seq_partial_average(f, n) + d * seq_partial_average(g, n);
  return integral && partial;
}

// ---------------------------------------------------------------------------
// Tail condition: ν⁺(|h|^p I_{|h|^p > y^p}) < ε

struct TailResult {
  enum class Verdict { Satisfied, Violated };
  Verdict verdict;
  Rational y;
  bool exact = false;
  std::vector<std::pair<Rational, Rational>> estimates;  // (y, upper estimate of the tail)

  std::string str() const {
    return verdict == Verdict::Satisfied ? "Satisfied(y = " + y.str() + ")" : "Violated";
  }
};

// Bounded simple sequences: any y above sup|h| leaves an empty tail.
inline TailResult kp_tail_condition(const SimpleSequence& h, const Rational& p, const Rational& eps) {
  if (p < Rational(1)) throw PreconditionError("K_p conditions need p >= 1");
  if (eps <= Rational(0)) throw PreconditionError("ε must be positive");
  Rational bound(0);
  if (h.partition) {
    for (const auto& t : h.terms) bound = std::max(bound, t.first.abs());
  } else {
    for (const auto& t : h.terms) bound += t.first.abs();
  }
  Rational y = bound + Rational(1);
  return {TailResult::Verdict::Satisfied, y, true, {{y, Rational(0)}}};
}

inline const std::vector<Rational>& default_tail_grid() {
  static const std::vector<Rational> grid{Rational(1), Rational(10), Rational(100)};
  return grid;
}

// Unbounded sequences: the tail's upper estimate on each y of the grid;
// Violated when every estimate stays >= ε.
inline TailResult kp_tail_condition(const AnomalySequence& g, const Rational& p, const Rational& eps,
                                    const EstimatorConfig& cfg = {},
                                    const std::vector<Rational>& ys = default_tail_grid()) {
  if (p < Rational(1) || p.den() != 1) throw PreconditionError("the anomaly tail needs an integer p >= 1");
  if (eps <= Rational(0)) throw PreconditionError("ε must be positive");
  auto q = static_cast<unsigned>(p.num());
  TailResult r{TailResult::Verdict::Violated, Rational(0), false, {}};
  for (const auto& y : ys) {
    // g(m²)^p > y^p  <=>  m > y; Σ_{y<m<=M} m^q by running totals.
    auto pts_profile = [&] {
      auto pts = geometric_schedule(cfg);
      auto extra = g.structural_points(cfg.horizon);
      pts.insert(pts.end(), extra.begin(), extra.end());
      std::sort(pts.begin(), pts.end());
      pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
      SequenceProfile sp;
      sp.checkpoints = pts;
      const Rational& f = cfg.burn_in_fraction;
      i128 burn = (static_cast<i128>(f.num()) * cfg.horizon + f.den() - 1) / f.den();
      i128 total = 0;
      std::uint64_t m = 0;
      bool first = true;
      for (auto n : pts) {
        while ((m + 1) * (m + 1) <= n) {
          ++m;
          if (Rational(static_cast<std::int64_t>(m)) > y) {
            i128 t = 1;
            for (unsigned i = 0; i < q; ++i) t *= m;
            total += t;
          }
        }
        Rational v = Rational::from_i128(total, n);
        sp.values.push_back(v);
        if (static_cast<i128>(n) < burn) continue;
        if (first || v > sp.upper_est) sp.upper_est = v;
        if (first || v < sp.lower_est) sp.lower_est = v;
        first = false;
      }
      return sp;
    };
    SequenceProfile sp = pts_profile();
    r.estimates.push_back({y, sp.upper_est});
    if (sp.upper_est < eps && r.verdict == TailResult::Verdict::Violated) {
      r.verdict = TailResult::Verdict::Satisfied;
      r.y = y;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// The anomaly report

struct AnomalyRow {
  std::uint64_t m;
  Rational at_square;          // ν_{m²}(g)
  Rational at_square_formula;  // m(m+1)/(2m²)
  Rational before_next;        // ν_{(m+1)²-1}(g)
  Rational before_next_formula;  // m(m+1)/(2((m+1)²-1))
};

struct AnomalyReport {
  std::vector<AnomalyRow> rows;
  bool formulas_match = true;
  Rational nu_f;                // ν(0) = 0
  std::uint64_t horizon = 0;
  Rational nu_g_at_horizon;     // ν_N(g) at the horizon
  AeResult support_vs_empty;    // support(g) = squares against ∅
};

inline AnomalyReport anomaly_demo(std::uint64_t max_m = 1000, std::uint64_t horizon = 1000000) {
  AnomalySequence g;
  AnomalyReport rep;
  for (std::uint64_t m = 1; m <= max_m; ++m) {
    auto mi = static_cast<std::int64_t>(m);
    AnomalyRow row;
    row.m = m;
    row.at_square = seq_partial_average(g, m * m);
    row.at_square_formula = Rational(mi * (mi + 1), 2 * mi * mi);
    row.before_next = seq_partial_average(g, (m + 1) * (m + 1) - 1);
    row.before_next_formula = Rational(mi * (mi + 1), 2 * ((mi + 1) * (mi + 1) - 1));
    rep.formulas_match = rep.formulas_match && row.at_square == row.at_square_formula &&
                         row.before_next == row.before_next_formula;
    rep.rows.push_back(row);
  }
  rep.nu_f = Rational(0);
  rep.horizon = horizon;
  rep.nu_g_at_horizon = seq_partial_average(g, horizon);
  rep.support_vs_empty = ae_equivalent(g.support(), sets::empty());
  return rep;
}

}  // namespace cesaro
