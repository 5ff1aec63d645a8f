#pragma once

// CSV and JSON forms of SetExpr trees and of the module reports.
// Rationals travel as exact strings ("3/7"); floats only appear in
// fields named "approx".

#include <json.hpp>
#include <ostream>

#include "cesaro/chains.hpp"
#include "cesaro/kp.hpp"

namespace cesaro::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "1";

inline json rational(const Rational& r) { return r.str(); }

inline json optional_rational(const std::optional<Rational>& r) { return r ? json(r->str()) : json(nullptr); }

// ---------------------------------------------------------------------------
// SetExpr trees

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Finite: return "finite";
    case Kind::Residue: return "residue";
    case Kind::Blocks: return "blocks";
    case Kind::Greedy: return "greedy";
    case Kind::NullFamily: return "null-family";
    case Kind::Interleave: return "interleave";
    case Kind::Dilate: return "dilate";
    case Kind::Union: return "union";
    case Kind::Intersection: return "intersection";
    case Kind::Difference: return "difference";
    case Kind::SymmDiff: return "symm-diff";
    case Kind::Complement: return "complement";
    case Kind::Midpoint: return "midpoint";
    case Kind::NullModKept: return "nullmod-kept";
    case Kind::NullModRemoved: return "nullmod-removed";
    case Kind::Predicate: return "predicate";
  }
  return "unknown";
}

inline json to_json(const SetExpr& e) {
  const Node& n = e.node();
  json j{{"kind", kind_name(e.kind())}};
  switch (e.kind()) {
    case Kind::Finite: j["elements"] = static_cast<const FiniteNode&>(n).elements(); break;
    case Kind::Residue: {
      const auto& r = static_cast<const ResidueNode&>(n);
      j["residue"] = r.residue();
      j["modulus"] = r.modulus();
      break;
    }
    case Kind::Blocks: j["spec"] = static_cast<const BlocksNode&>(n).spec().str(); break;
    case Kind::Greedy: j["target"] = static_cast<const GreedyNode&>(n).target().text(); break;
    case Kind::NullFamily: j["family"] = dsl::print(e); break;
    case Kind::Interleave: j["inner"] = to_json(static_cast<const InterleaveNode&>(n).inner()); break;
    case Kind::Dilate: {
      const auto& d = static_cast<const DilateNode&>(n);
      j["factor"] = d.factor();
      j["inner"] = to_json(d.inner());
      break;
    }
    case Kind::Midpoint: {
      const auto& m = static_cast<const MidpointNode&>(n);
      j["lower"] = to_json(m.lower());
      j["upper"] = to_json(m.upper());
      break;
    }
    case Kind::NullModKept: {
      const auto& k = static_cast<const NullModKeptNode&>(n);
      j["source"] = to_json(k.source());
      j["target"] = k.target().str();
      break;
    }
    case Kind::NullModRemoved: {
      const auto& k = static_cast<const NullModRemovedNode&>(n);
      j["source"] = to_json(k.source());
      j["target"] = k.target().str();
      break;
    }
    case Kind::Predicate: j["name"] = static_cast<const PredicateNode&>(n).name(); break;
    case Kind::Complement: j["inner"] = to_json(static_cast<const ComplementNode&>(n).inner()); break;
    case Kind::Union:
    case Kind::Intersection:
    case Kind::Difference:
    case Kind::SymmDiff: {
      const auto& b = static_cast<const BinaryNode&>(n);
      j["left"] = to_json(b.left());
      j["right"] = to_json(b.right());
      break;
    }
  }
  return j;
}

// Inverse of to_json. Leaves go back through the DSL so the validation
// rules stay in one place; predicates need their oracle in `opts`.
inline SetExpr from_json(const json& j, const dsl::ParseOptions& opts = {}) {
  if (!j.is_object() || !j.contains("kind")) throw SemanticError("set JSON needs a \"kind\" field");
  const std::string k = j.at("kind").get<std::string>();
  auto leaf = [&](const std::string& text) { return dsl::parse(text, opts); };
  try {
    if (k == "finite") return sets::finite(j.at("elements").get<std::vector<std::uint64_t>>());
    if (k == "residue")
      return sets::residue(j.at("residue").get<std::uint64_t>(), j.at("modulus").get<std::uint64_t>());
    if (k == "blocks") return leaf("blocks(" + j.at("spec").get<std::string>() + ")");
    if (k == "greedy") return leaf("greedy(" + j.at("target").get<std::string>() + ")");
    if (k == "null-family") return leaf(j.at("family").get<std::string>());
    if (k == "predicate") return leaf("predicate(" + j.at("name").get<std::string>() + ")");
    if (k == "interleave") return sets::interleave(from_json(j.at("inner"), opts));
    if (k == "dilate") return sets::dilate(j.at("factor").get<std::uint64_t>(), from_json(j.at("inner"), opts));
    if (k == "complement") return sets::complement(from_json(j.at("inner"), opts));
    if (k == "midpoint") return sets::midpoint(from_json(j.at("lower"), opts), from_json(j.at("upper"), opts));
    if (k == "nullmod-kept" || k == "nullmod-removed") {
      SetExpr kept = sets::nullmod_kept(from_json(j.at("source"), opts), Rational::parse(j.at("target").get<std::string>()));
      return k == "nullmod-kept" ? kept : sets::nullmod_removed(kept);
    }
    const std::pair<const char*, Kind> ops[] = {{"union", Kind::Union},
                                                {"intersection", Kind::Intersection},
                                                {"difference", Kind::Difference},
                                                {"symm-diff", Kind::SymmDiff}};
    for (const auto& [name, op] : ops)
      if (k == name) return sets::binary(op, from_json(j.at("left"), opts), from_json(j.at("right"), opts));
  } catch (const json::exception& e) {
    throw SemanticError("malformed set JSON: " + std::string(e.what()));
  }
  throw SemanticError("unknown set kind '" + k + "'");
}

// ---------------------------------------------------------------------------
// Density

inline json charge_json(const std::optional<Charge>& c) {
  if (!c) return nullptr;
  return {{"value", c->value.str()}, {"provenance", to_string(c->provenance)}, {"approx", c->value.to_double()}};
}

// "limit" when exact or converged, "no-limit" when the estimates are
// separated by more than the tolerance, otherwise "undecided".
inline const char* verdict(const DensityProfile& p, const Rational& tol) {
  if (p.exact || p.converged) return "limit";
  return p.oscillation > tol ? "no-limit" : "undecided";
}

inline json profile_json(const SetExpr& e, const DensityProfile& p, const EstimatorConfig& cfg) {
  json pts = json::array();
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i)
    pts.push_back({{"N", p.checkpoints[i]}, {"count", p.counts[i]}, {"nu_N", p.values[i].str()}});
  return {{"schema", "density-report"},
          {"version", kSchemaVersion},
          {"expr", dsl::print(e)},
          {"tree", to_json(e)},
          {"exact", charge_json(p.exact)},
          {"horizon", p.horizon},
          {"burn_in", p.burn_in},
          {"estimates",
           {{"upper", p.upper_est.str()},
            {"lower", p.lower_est.str()},
            {"upper_approx", p.upper_est.to_double()},
            {"lower_approx", p.lower_est.to_double()},
            {"argmax", p.argmax},
            {"argmin", p.argmin},
            {"oscillation", p.oscillation.str()},
            {"converged", p.converged},
            {"heuristic", p.heuristic}}},
          {"verdict", verdict(p, cfg.tolerance)},
          {"checkpoints", pts}};
}

inline void profile_csv(std::ostream& os, const DensityProfile& p) {
  os << "N,count,nu_N\n";
  for (std::size_t i = 0; i < p.checkpoints.size(); ++i)
    os << p.checkpoints[i] << ',' << p.counts[i] << ',' << p.values[i].str() << '\n';
}

// ---------------------------------------------------------------------------
// Null modification

inline void nullmod_csv(std::ostream& os, const NullModResult& r, std::uint64_t horizon) {
  check_horizon(horizon);
  os << "N,in_A,in_Aprime,in_F,nu_N_Aprime\n";
  auto ca = r.source.cursor(), ck = r.a_prime.cursor(), cf = r.f.cursor();
  std::uint64_t kept = 0;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    bool a = ca->next(), k = ck->next(), f = cf->next();
    kept += k ? 1 : 0;
    os << n << ',' << a << ',' << k << ',' << f << ',' << Rational::ratio(kept, n).str() << '\n';
  }
}

inline json nullmod_json(const NullModResult& r, const NullModReport& rep, std::size_t list_limit = 100) {
  json removed = json::array();
  auto cf = r.f.cursor();
  for (std::uint64_t n = 1; n <= rep.horizon && removed.size() < list_limit; ++n)
    if (cf->next()) removed.push_back(n);
  auto opt = [](const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); };
  return {{"schema", "nullmod-report"},
          {"version", kSchemaVersion},
          {"source", dsl::print(r.source)},
          {"target", r.target.str()},
          {"exact_target", r.exact_target},
          {"horizon", rep.horizon},
          {"removed_prefix", removed},
          {"disjointness_failure", opt(rep.disjointness_failure)},
          {"union_failure", opt(rep.union_failure)},
          {"domination_failure", opt(rep.domination_failure)},
          {"f_upper_estimate", rep.f_upper_est.str()},
          {"tolerance", rep.tolerance.str()},
          {"nullity_ok", rep.nullity_ok},
          {"nullity_advisory", rep.nullity_advisory},
          {"passed", rep.passed()}};
}

// ---------------------------------------------------------------------------
// Chains

inline json chain_json(const Chain& c) {
  json elems = json::array();
  for (std::size_t i = 0; i < c.size(); ++i) {
    json e{{"expr", dsl::print(c.elements()[i])}, {"charge", optional_rational(c.charges()[i])}};
    e["order_evidence"] = i == 0 ? json(nullptr) : json(c.evidence()[i - 1].str());
    elems.push_back(e);
  }
  return elems;
}

inline json certificate_json(const Chain& c, const UniformCertificate& cert) {
  json j{{"schema", "certificate"},
         {"version", kSchemaVersion},
         {"scope", UniformCertificate::kScope},
         {"epsilon", cert.epsilon.str()},
         {"horizon", cert.horizon},
         {"found", cert.found},
         {"n_star", cert.found ? json(cert.n_star) : json(nullptr)},
         {"latest_allowed", cert.latest_allowed},
         {"checkpoint_count", cert.checkpoints.size()},
         {"elements", chain_json(c)}};
  if (cert.failure)
    j["failure"] = {{"element", cert.failure->element}, {"N", cert.failure->n}, {"deviation", cert.failure->deviation.str()}};
  else
    j["failure"] = nullptr;
  return j;
}

// One CSV for a whole chain: profile rows tagged with the element index.
inline void chain_profiles_csv(std::ostream& os, const Chain& c, const EstimatorConfig& cfg) {
  os << "element,N,count,nu_N\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    DensityProfile p = density_profile(c.elements()[i], cfg);
    for (std::size_t k = 0; k < p.checkpoints.size(); ++k)
      os << i << ',' << p.checkpoints[k] << ',' << p.counts[k] << ',' << p.values[k].str() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Fields and partitions

inline json field_json(const FieldOfSets& f) {
  json atoms = json::array();
  for (std::size_t i = 0; i < f.atoms.size(); ++i) {
    json inside = json::array();
    for (std::size_t g = 0; g < f.generators.size(); ++g)
      if ((f.patterns[i] >> g) & 1u) inside.push_back(g);
    atoms.push_back({{"pattern", inside}, {"expr", dsl::print(f.atoms[i])}, {"charge", optional_rational(f.charges[i])}});
  }
  json gens = json::array();
  for (const auto& g : f.generators) gens.push_back(dsl::print(g));
  return {{"schema", "field-report"},
          {"version", kSchemaVersion},
          {"generators", gens},
          {"horizon", f.horizon},
          {"atoms", atoms},
          {"element_count", std::to_string(std::uint64_t{1} << f.atoms.size())},
          {"all_charges", f.all_charges()}};
}

inline json classification_json(const PartitionSpec& p, const Classification& c) {
  json parts = json::array();
  for (std::size_t i = 0; i < p.parts.size(); ++i)
    parts.push_back({{"expr", dsl::print(p.parts[i])}, {"charge", p.charges[i].str()}});
  json trend = json::array();
  for (const auto& t : c.tail_trend) trend.push_back(t.str());
  return {{"schema", "classify-report"},
          {"version", kSchemaVersion},
          {"kind", c.kind == Classification::Kind::MeasureSpace ? "MeasureSpace" : "ChargeOnly"},
          {"summary", c.str()},
          {"tail_mass", c.tail_mass.str()},
          {"decreasing", c.decreasing},
          {"decay_ratio", c.decay_ratio.str()},
          {"tail_trend", trend},
          {"parts", parts}};
}

// ---------------------------------------------------------------------------
// K_p

// {"terms": [{"coef": "3/2", "set": "<DSL>"}, ...], "partition": false}
inline SimpleSequence sequence_from_json(const json& j, const dsl::ParseOptions& opts = {}) {
  try {
    std::vector<std::pair<Rational, SetExpr>> terms;
    for (const auto& t : j.at("terms")) {
      const json& s = t.at("set");
      SetExpr set = s.is_string() ? dsl::parse(s.get<std::string>(), opts) : from_json(s, opts);
      const json& c = t.at("coef");
      Rational coef = c.is_number_integer() ? Rational(c.get<std::int64_t>()) : Rational::parse(c.get<std::string>());
      terms.push_back({coef, set});
    }
    if (j.value("partition", false)) return make_partition_sequence(std::move(terms));
    return {std::move(terms), false};
  } catch (const json::exception& e) {
    throw SemanticError("malformed sequence JSON: " + std::string(e.what()));
  }
}

inline json sequence_json(const SimpleSequence& h) {
  json terms = json::array();
  for (const auto& [c, s] : h.terms) terms.push_back({{"coef", c.str()}, {"set", dsl::print(s)}});
  return {{"terms", terms}, {"partition", h.partition}};
}

inline json norm_json(const SimpleSequence& h, const KpNorm& n) {
  return {{"schema", "kp-report"},
          {"version", kSchemaVersion},
          {"operation", "norm"},
          {"sequence", sequence_json(h)},
          {"p", n.p.str()},
          {"pth_power", optional_rational(n.pth_power)},
          {"pth_power_approx", static_cast<double>(n.pth_power_approx)},
          {"norm_approx", static_cast<double>(n.norm)},
          {"norm", n.exact_norm && n.pth_power ? json(n.pth_power->str()) : json(nullptr)}};
}

inline json integral_json(const SimpleSequence& h, const IntegralCheck& c) {
  return {{"schema", "kp-report"},
          {"version", kSchemaVersion},
          {"operation", "integral"},
          {"sequence", sequence_json(h)},
          {"integral", c.integral.str()},
          {"final_difference", c.final_difference.str()},
          {"decreasing_trend", c.decreasing_trend},
          {"passed", c.passed}};
}

inline void trajectory_csv(std::ostream& os, const std::vector<std::uint64_t>& pts, const std::vector<Rational>& vals) {
  os << "N,nu_N_h\n";
  for (std::size_t i = 0; i < pts.size(); ++i) os << pts[i] << ',' << vals[i].str() << '\n';
}

inline json tail_json(const std::string& sequence, const Rational& p, const Rational& eps, const TailResult& t) {
  json est = json::array();
  for (const auto& [y, e] : t.estimates) est.push_back({{"y", y.str()}, {"upper_estimate", e.str()}});
  return {{"schema", "kp-report"},
          {"version", kSchemaVersion},
          {"operation", "tail"},
          {"sequence", sequence},
          {"p", p.str()},
          {"epsilon", eps.str()},
          {"verdict", t.verdict == TailResult::Verdict::Satisfied ? "Satisfied" : "Violated"},
          {"y", t.verdict == TailResult::Verdict::Satisfied ? json(t.y.str()) : json(nullptr)},
          {"exact", t.exact},
          {"estimates", est}};
}

inline json anomaly_json(const AnomalyReport& r, const TailResult& tail, std::size_t rows_shown = 10) {
  json rows = json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i >= rows_shown && i + 1 != r.rows.size()) continue;
    const auto& x = r.rows[i];
    rows.push_back({{"m", x.m},
                    {"nu_at_square", x.at_square.str()},
                    {"nu_before_next_square", x.before_next.str()}});
  }
  return {{"schema", "anomaly-report"},
          {"version", kSchemaVersion},
          {"formulas_match", r.formulas_match},
          {"rows_checked", r.rows.size()},
          {"rows", rows},
          {"horizon", r.horizon},
          {"nu_g_at_horizon", r.nu_g_at_horizon.str()},
          {"nu_f", r.nu_f.str()},
          {"support_vs_empty", r.support_vs_empty.str()},
          {"tail", tail_json("g", Rational(1), Rational(1, 10), tail)}};
}

}  // namespace cesaro::io
