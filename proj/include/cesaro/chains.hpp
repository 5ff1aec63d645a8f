#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cesaro/constructions.hpp"
#include "cesaro/nullmod.hpp"

namespace cesaro {

struct OrderEvidence {
  enum class Kind { Symbolic, Verified };
  Kind kind;
  std::uint64_t horizon = 0;  // for Verified

  std::string str() const {
    return kind == Kind::Symbolic ? "symbolic" : "verified-to-" + std::to_string(horizon);
  }
};

inline OrderEvidence order_evidence(const SetExpr& a, const SetExpr& b, std::uint64_t horizon) {
  if (symbolic_subset(a, b)) return {OrderEvidence::Kind::Symbolic, 0};
  auto r = subset_upto(a, b, horizon);
  if (!r.holds)
    throw PreconditionError("chain order fails: n = " + std::to_string(*r.counterexample) +
                                " lies in the smaller set only",
                            *r.counterexample);
  return {OrderEvidence::Kind::Verified, horizon};
}

// Inclusion-ordered finite list of sets, optionally with the union and
// intersection of an infinite family it is a prefix of.
class Chain {
 public:
  Chain() = default;

  // Verifies every adjacent inclusion (symbolically when possible, else up
  // to `horizon`). Missing charges are filled from the exact rule system.
  static Chain build(std::vector<SetExpr> elems, std::uint64_t horizon = kDefaultVerifyHorizon,
                     std::vector<std::optional<Rational>> charges = {}) {
    Chain c;
    c.horizon_ = horizon;
    if (!charges.empty() && charges.size() != elems.size())
      throw PreconditionError("one charge slot per chain element is required");
    for (std::size_t i = 0; i < elems.size(); ++i) {
      std::optional<Rational> ch = charges.empty() ? std::nullopt : charges[i];
      if (!ch)
        if (auto x = exact_charge(elems[i])) ch = x->value;
      c.push_back(elems[i], ch);
    }
    return c;
  }

  const std::vector<SetExpr>& elements() const noexcept { return elems_; }
  const std::vector<OrderEvidence>& evidence() const noexcept { return evidence_; }
  const std::vector<std::optional<Rational>>& charges() const noexcept { return charges_; }
  std::size_t size() const noexcept { return elems_.size(); }
  bool empty() const noexcept { return elems_.empty(); }
  std::uint64_t horizon() const noexcept { return horizon_; }

  bool all_charges() const {
    return std::all_of(charges_.begin(), charges_.end(), [](const auto& c) { return c.has_value(); });
  }
  std::vector<Rational> exact_charges() const {
    std::vector<Rational> out;
    for (std::size_t i = 0; i < charges_.size(); ++i) {
      if (!charges_[i]) throw PreconditionError("chain element " + std::to_string(i) + " has no exact charge", i);
      out.push_back(*charges_[i]);
    }
    return out;
  }

  // Union / intersection of the infinite family the chain is a prefix of.
  std::optional<SetExpr> limit_union;
  std::optional<SetExpr> limit_intersection;

  void push_back(const SetExpr& e, std::optional<Rational> charge) {
    if (!elems_.empty()) {
      evidence_.push_back(order_evidence(elems_.back(), e, horizon_));
      if (charge && charges_.back() && *charge < *charges_.back())
        throw PreconditionError("chain charges must be non-decreasing", elems_.size());
    }
    elems_.push_back(e);
    charges_.push_back(charge);
  }

  void push_front(const SetExpr& e, std::optional<Rational> charge) {
    Chain c;
    c.horizon_ = horizon_;
    c.push_back(e, charge);
    for (std::size_t i = 0; i < elems_.size(); ++i) c.push_back(elems_[i], charges_[i]);
    c.limit_union = limit_union;
    c.limit_intersection = limit_intersection;
    *this = std::move(c);
  }

  // Inserts between positions i and i+1.
  void insert_after(std::size_t i, const SetExpr& e, std::optional<Rational> charge, OrderEvidence left,
                    OrderEvidence right) {
    elems_.insert(elems_.begin() + static_cast<std::ptrdiff_t>(i + 1), e);
    charges_.insert(charges_.begin() + static_cast<std::ptrdiff_t>(i + 1), charge);
    evidence_[i] = left;
    evidence_.insert(evidence_.begin() + static_cast<std::ptrdiff_t>(i + 1), right);
  }

 private:
  std::vector<SetExpr> elems_;
  std::vector<OrderEvidence> evidence_;
  std::vector<std::optional<Rational>> charges_;
  std::uint64_t horizon_ = kDefaultVerifyHorizon;
};

// Every adjacent pair checked by streaming up to the horizon.
inline std::optional<std::pair<std::size_t, std::uint64_t>> chain_order_failure(const Chain& c,
                                                                                std::uint64_t horizon) {
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    auto r = subset_upto(c.elements()[i], c.elements()[i + 1], horizon);
    if (!r.holds) return std::pair{i, *r.counterexample};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Named chains

// ∪_{j<=k} D_j for k < count; its union closure is ℕ minus the powers of 2.
inline Chain dk_partial_unions_chain(unsigned count, std::uint64_t horizon = kDefaultVerifyHorizon) {
  std::vector<SetExpr> elems;
  for (unsigned k = 0; k < count; ++k) elems.push_back(dk_partial_union(k));
  Chain c = Chain::build(elems, horizon);
  c.limit_union = sets::complement(sets::powers(2));
  return c;
}

// {n : n mod m ∈ {0..k-1}} for k = 1..m
inline Chain residue_cumulative_chain(std::uint64_t m, std::uint64_t horizon = kDefaultVerifyHorizon) {
  std::vector<SetExpr> elems;
  for (std::uint64_t k = 1; k <= m; ++k) {
    std::vector<SetExpr> parts;
    for (std::uint64_t r = 0; r < k; ++r) parts.push_back(sets::residue(r, m));
    elems.push_back(sets::union_all(parts));
  }
  return Chain::build(elems, horizon);
}

// ---------------------------------------------------------------------------
// Closures

struct ClosureSelector {
  bool unions = true;
  bool intersections = true;
};

// For a finite chain the prefix unions and suffix intersections are already
// members; only the limit elements of an infinite family can be new.
inline Chain chain_closures(const Chain& c, ClosureSelector sel) {
  Chain out = c;
  if (c.empty()) return out;
  if (sel.unions && c.limit_union) {
    bool present = std::any_of(c.elements().begin(), c.elements().end(),
                               [&](const SetExpr& e) { return structurally_equal(e, *c.limit_union); });
    if (!present) {
      std::optional<Rational> ch;
      if (auto x = exact_charge(*c.limit_union)) ch = x->value;
      out.push_back(*c.limit_union, ch);
    }
  }
  if (sel.intersections && c.limit_intersection) {
    bool present = std::any_of(c.elements().begin(), c.elements().end(), [&](const SetExpr& e) {
      return structurally_equal(e, *c.limit_intersection);
    });
    if (!present) {
      std::optional<Rational> ch;
      if (auto x = exact_charge(*c.limit_intersection)) ch = x->value;
      out.push_front(*c.limit_intersection, ch);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform convergence

struct CertificateFailure {
  std::size_t element;
  std::uint64_t n;
  Rational deviation;
};

struct UniformCertificate {
  bool found = false;
  std::uint64_t n_star = 0;
  std::uint64_t horizon = 0;
  std::uint64_t latest_allowed = 0;  // N* must not exceed burnIn * horizon
  Rational epsilon;
  std::vector<std::uint64_t> checkpoints;
  std::optional<CertificateFailure> failure;  // last offending pair
  // The check covers schedule checkpoints in [N*, horizon] only.
  static constexpr const char* kScope = "VERIFIED-TO-HORIZON";
};

// Least checkpoint N* after which every element satisfies |ν_N - ν| < ε at
// every checkpoint up to the horizon. A certificate needs N* <= burnIn *
// horizon so that the verified stretch is not vanishingly short.
inline UniformCertificate uniform_convergence_certificate(const std::vector<SetExpr>& elems,
                                                          const std::vector<Rational>& charges,
                                                          const Rational& eps, const EstimatorConfig& cfg = {}) {
  cfg.validate();
  if (elems.size() != charges.size()) throw PreconditionError("one charge per chain element is required");
  UniformCertificate cert;
  cert.horizon = cfg.horizon;
  cert.epsilon = eps;
  auto pts = geometric_schedule(cfg);
  if (cfg.include_structural_checkpoints) {
    for (const auto& e : elems) {
      auto s = structural_points(e, cfg.horizon);
      pts.insert(pts.end(), s.begin(), s.end());
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  }
  cert.checkpoints = pts;
  std::optional<std::size_t> last_bad;
  for (std::size_t i = 0; i < elems.size(); ++i) {
    auto counts = counts_at(elems[i], pts);
    for (std::size_t j = pts.size(); j-- > 0;) {
      if (last_bad && j <= *last_bad) break;
      Rational dev = (Rational::ratio(counts[j], pts[j]) - charges[i]).abs();
      if (dev >= eps) {
        last_bad = j;
        cert.failure = CertificateFailure{i, pts[j], dev};
        break;
      }
    }
  }
  const Rational& f = cfg.burn_in_fraction;
  cert.latest_allowed =
      static_cast<std::uint64_t>(static_cast<i128>(f.num()) * cfg.horizon / f.den());
  if (!last_bad) {
    cert.n_star = pts.front();
  } else if (*last_bad + 1 < pts.size()) {
    cert.n_star = pts[*last_bad + 1];
  } else {
    cert.n_star = 0;
    return cert;
  }
  cert.found = cert.n_star <= cert.latest_allowed;
  if (cert.found) cert.failure.reset();
  return cert;
}

inline UniformCertificate uniform_convergence_certificate(const Chain& c, const Rational& eps,
                                                          const EstimatorConfig& cfg = {}) {
  return uniform_convergence_certificate(c.elements(), c.exact_charges(), eps, cfg);
}

// ---------------------------------------------------------------------------
// Densification

// Adjoins ∅ and ℕ when missing, then inserts midpoint sets into every gap
// wider than ε.
inline Chain densify_range(const Chain& input, const Rational& eps) {
  if (eps <= Rational(0)) throw PreconditionError("densification needs ε > 0");
  Chain c = input;
  c.exact_charges();
  if (c.empty() || *c.charges().front() != Rational(0)) c.push_front(sets::empty(), Rational(0));
  if (*c.charges().back() != Rational(1)) c.push_back(sets::naturals(), Rational(1));
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      Rational lo = *c.charges()[i], hi = *c.charges()[i + 1];
      if (hi - lo <= eps) continue;
      SetExpr m = sets::midpoint(c.elements()[i], c.elements()[i + 1]);
      OrderEvidence sym{OrderEvidence::Kind::Symbolic, 0};
      c.insert_after(i, m, (lo + hi) / Rational(2), sym, sym);
      changed = true;
      ++i;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Pseudo-metric

struct Distance {
  Rational value;
  bool exact = false;
  std::optional<Provenance> provenance;
};

// d_ν(A, B) = ν⁺(A △ B)
inline Distance d_nu(const SetExpr& a, const SetExpr& b, const EstimatorConfig& cfg = {}) {
  SetExpr d = sets::symm_diff(a, b);
  if (auto c = exact_charge(d)) return {c->value, true, c->provenance};
  DensityProfile p = density_profile(d, cfg);
  return {p.upper_est, false, std::nullopt};
}

// ---------------------------------------------------------------------------
// Saturation

struct SaturationItem {
  std::size_t pair;    // between elements pair and pair+1
  std::size_t added;   // number of elements of C \ B adjoined
  std::uint64_t last;  // the most recently adjoined integer
  SetExpr set;
};

// Lazily enumerates B ∪ {x_1}, B ∪ {x_1, x_2}, ... for each adjacent pair
// B ⊆ C, where x_1 < x_2 < ... list C \ B; at most `budget` sets per pair.
class Saturation {
 public:
  Saturation(Chain chain, std::size_t budget, std::uint64_t scan_limit = kDefaultVerifyHorizon)
      : chain_(std::move(chain)), budget_(budget), scan_limit_(scan_limit) {}

  std::optional<SaturationItem> next() {
    while (pair_ + 1 < chain_.size()) {
      if (emitted_ < budget_) {
        if (!cursor_) start_pair();
        if (auto x = next_difference()) {
          added_.push_back(*x);
          ++emitted_;
          SetExpr s = sets::set_union(chain_.elements()[pair_], sets::finite(added_));
          return SaturationItem{pair_, added_.size(), *x, s};
        }
      }
      ++pair_;
      emitted_ = 0;
      cursor_.reset();
    }
    return std::nullopt;
  }

 private:
  void start_pair() {
    diff_ = sets::difference(chain_.elements()[pair_ + 1], chain_.elements()[pair_]);
    cursor_ = diff_->cursor();
    n_ = 0;
    emitted_ = 0;
    added_.clear();
  }
  std::optional<std::uint64_t> next_difference() {
    while (n_ < scan_limit_) {
      ++n_;
      if (cursor_->next()) return n_;
    }
    return std::nullopt;
  }

  Chain chain_;
  std::size_t budget_;
  std::uint64_t scan_limit_;
  std::size_t pair_ = 0;
  std::size_t emitted_ = 0;
  std::uint64_t n_ = 0;
  std::optional<SetExpr> diff_;
  std::unique_ptr<Cursor> cursor_;
  std::vector<std::uint64_t> added_;
};

inline Saturation saturate_chain(const Chain& c, std::size_t budget, std::uint64_t scan_limit = kDefaultVerifyHorizon) {
  return Saturation(c, budget, scan_limit);
}

// Two-sided null modification of a chain with exact charges.
inline ChainModification nullmod_chain_two_sided(const Chain& c) {
  return nullmod_chain_two_sided(c.elements(), c.exact_charges());
}

}  // namespace cesaro
