// cesaro: command-line front end over the library.
// Exit codes: 0 ok, 2 parse, 3 evaluation, 4 unknown name, 5 check failed.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cesaro/cesaro.hpp"
#include "cesaro/io.hpp"
#include "cesaro/props.hpp"

using namespace cesaro;
using io::json;

namespace {

enum Exit { kOk = 0, kParse = 2, kEval = 3, kUnknown = 4, kCheck = 5 };

struct ExitWith {
  int code;
  std::string message;
};

struct RunConfig {
  std::uint64_t horizon = 1000000;
  std::string eps = "1/20";
  std::string tol = "1/1000";
  std::string format = "json";
  std::string out;
  std::uint64_t seed = 1;
  std::uint64_t schedule_base = 64;
  std::string schedule_ratio = "5/4";

  Rational rational(const std::string& flag, const std::string& text) const {
    try {
      return Rational::parse(text);
    } catch (const Error& e) {
      throw ExitWith{kParse, "error: " + flag + " expects a rational, got '" + text + "'"};
    }
  }
  Rational epsilon() const { return rational("--eps", eps); }

  EstimatorConfig estimator() const {
    EstimatorConfig c;
    c.horizon = horizon;
    c.base_n = std::min(schedule_base, horizon);
    c.growth_ratio = rational("--schedule-ratio", schedule_ratio);
    c.tolerance = rational("--tol", tol);
    c.validate();
    return c;
  }
  bool csv() const { return format == "csv"; }
};

// Caret diagnostic under the offending column.
std::string caret(const std::string& text, const ParseError& e) {
  std::istringstream is(text);
  std::string line;
  for (std::size_t i = 0; i < e.line() && std::getline(is, line); ++i) {
  }
  return "error: " + e.detail() + " at line " + std::to_string(e.line()) + ", column " + std::to_string(e.column()) +
         "\n  " + line + "\n  " + std::string(e.column() > 0 ? e.column() - 1 : 0, ' ') + "^";
}

SetExpr parse_expr(const std::string& text) {
  try {
    return dsl::parse(text);
  } catch (const ParseError& e) {
    throw ExitWith{kParse, caret(text, e)};
  } catch (const SemanticError& e) {
    throw ExitWith{kParse, "error: " + std::string(e.what()) + "\n  " + text};
  }
}

std::vector<SetExpr> parse_all(const std::vector<std::string>& texts) {
  std::vector<SetExpr> out;
  for (const auto& t : texts) out.push_back(parse_expr(t));
  return out;
}

// Named item with an optional ":N" parameter, e.g. "dk-partial-unions:8".
std::pair<std::string, std::optional<std::uint64_t>> split_name(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) return {s, std::nullopt};
  try {
    return {s.substr(0, colon), std::stoull(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw ExitWith{kParse, "error: bad parameter in '" + s + "'"};
  }
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw ExitWith{kEval, "error: cannot write " + path};
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }
  void put(const json& j) { stream() << j.dump(2) << '\n'; }

 private:
  std::ofstream file_;
};

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const RunConfig& rc, const std::string& text) {
  SetExpr e = parse_expr(text);
  EstimatorConfig cfg = rc.estimator();
  DensityProfile p = density_profile(e, cfg);
  Output out(rc.out);
  if (rc.csv())
    io::profile_csv(out.stream(), p);
  else
    out.put(io::profile_json(e, p, cfg));
  return kOk;
}

// ---------------------------------------------------------------------------
// examples

json dk_report(const RunConfig& rc, bool& ok) {
  EstimatorConfig cfg = rc.estimator();
  json rows = json::array();
  Rational sum(0);
  const unsigned top = 20;
  for (unsigned k = 0; k <= top; ++k) {
    SetExpr d = dk_family(k);
    auto c = exact_charge(d);
    Rational want(1, std::int64_t{1} << (k + 1));
    bool row_ok = c && c->value == want;
    ok = ok && row_ok;
    if (c) sum += c->value;
    rows.push_back({{"k", k},
                    {"expr", dsl::print(d)},
                    {"charge", c ? json(c->value.str()) : json(nullptr)},
                    {"expected", want.str()},
                    {"nu_at_horizon", partial_average(d, cfg.horizon).str()},
                    {"passed", row_ok}});
  }
  Rational sum_want = Rational(1) - Rational(1, std::int64_t{1} << (top + 1));
  ok = ok && sum == sum_want;
  return {{"schema", "dk-report"},
          {"version", io::kSchemaVersion},
          {"rows", rows},
          {"sum", sum.str()},
          {"sum_expected", sum_want.str()},
          {"passed", ok}};
}

json anomaly_report(bool& ok) {
  AnomalyReport r = anomaly_demo();
  TailResult t = kp_tail_condition(AnomalySequence{}, Rational(1), Rational(1, 10));
  ok = ok && r.formulas_match && r.nu_g_at_horizon == Rational(5005, 10000) &&
       t.verdict == TailResult::Verdict::Violated;
  json j = io::anomaly_json(r, t);
  j["passed"] = ok;
  return j;
}

// Exact entries must reproduce their frozen charge; the others must land
// within the tolerance of both frozen limits.
json catalog_row(const CatalogEntry& e, const EstimatorConfig& cfg) {
  auto c = exact_charge(e.set);
  DensityProfile p = density_profile(e.set, cfg);
  bool ok;
  std::string method;
  if (c) {
    ok = e.upper && e.lower && c->value == *e.upper && c->value == *e.lower;
    method = "exact";
  } else {
    ok = e.upper && e.lower && (p.upper_est - *e.upper).abs() <= cfg.tolerance &&
         (p.lower_est - *e.lower).abs() <= cfg.tolerance;
    method = "profile";
  }
  return {{"name", e.name},
          {"description", e.description},
          {"expr", dsl::print(e.set)},
          {"expected_upper", io::optional_rational(e.upper)},
          {"expected_lower", io::optional_rational(e.lower)},
          {"method", method},
          {"upper_estimate", p.upper_est.str()},
          {"lower_estimate", p.lower_est.str()},
          {"passed", ok}};
}

int cmd_examples(const RunConfig& rc, const std::string& name) {
  auto cat = paper_example_catalog();
  Output out(rc.out);
  bool ok = true;
  if (name == "names") {
    json names = json::array();
    for (const auto& e : cat) names.push_back(e.name);
    for (const char* extra : {"anomaly", "dk", "all"}) names.push_back(extra);
    if (rc.csv()) {
      out.stream() << "name\n";
      for (const auto& n : names) out.stream() << n.get<std::string>() << '\n';
    } else {
      out.put({{"schema", "examples-names"}, {"version", io::kSchemaVersion}, {"names", names}});
    }
    return kOk;
  }
  if (name == "anomaly") {
    json j = anomaly_report(ok);
    if (rc.csv()) {
      out.stream() << "m,nu_at_square,nu_before_next_square\n";
      for (const auto& r : anomaly_demo().rows)
        out.stream() << r.m << ',' << r.at_square.str() << ',' << r.before_next.str() << '\n';
    } else {
      out.put(j);
    }
    return ok ? kOk : kCheck;
  }
  if (name == "dk") {
    json j = dk_report(rc, ok);
    if (rc.csv()) {
      out.stream() << "k,charge,expected,nu_at_horizon\n";
      for (const auto& r : j["rows"])
        out.stream() << r["k"].get<unsigned>() << ',' << r["charge"].get<std::string>() << ','
                     << r["expected"].get<std::string>() << ',' << r["nu_at_horizon"].get<std::string>() << '\n';
      out.stream() << "sum," << j["sum"].get<std::string>() << ',' << j["sum_expected"].get<std::string>() << ",\n";
    } else {
      out.put(j);
    }
    return ok ? kOk : kCheck;
  }

  EstimatorConfig cfg = rc.estimator();
  json rows = json::array();
  if (name == "all") {
    for (const auto& e : cat) rows.push_back(catalog_row(e, cfg));
  } else {
    const CatalogEntry* hit = nullptr;
    for (const auto& e : cat)
      if (e.name == name) hit = &e;
    if (!hit) throw ExitWith{kUnknown, "error: unknown example '" + name + "' (try: examples names)"};
    rows.push_back(catalog_row(*hit, cfg));
  }
  for (const auto& r : rows) ok = ok && r["passed"].get<bool>();
  json report{{"schema", "examples-report"}, {"version", io::kSchemaVersion}, {"horizon", cfg.horizon},
              {"tolerance", cfg.tolerance.str()}, {"entries", rows}};
  if (name == "all") {
    bool a_ok = true, d_ok = true;
    report["anomaly"] = anomaly_report(a_ok);
    report["dk"] = dk_report(rc, d_ok);
    ok = ok && a_ok && d_ok;
  }
  report["passed"] = ok;
  if (rc.csv()) {
    out.stream() << "name,expected_upper,expected_lower,method,upper_estimate,lower_estimate,passed\n";
    auto cell = [](const json& v) { return v.is_null() ? std::string() : v.get<std::string>(); };
    for (const auto& r : rows)
      out.stream() << r["name"].get<std::string>() << ',' << cell(r["expected_upper"]) << ','
                   << cell(r["expected_lower"]) << ',' << r["method"].get<std::string>() << ','
                   << r["upper_estimate"].get<std::string>() << ',' << r["lower_estimate"].get<std::string>() << ','
                   << (r["passed"].get<bool>() ? "true" : "false") << '\n';
  } else {
    out.put(report);
  }
  return ok ? kOk : kCheck;
}

// ---------------------------------------------------------------------------
// nullmod

int cmd_nullmod(const RunConfig& rc, const std::string& text, const std::string& target) {
  SetExpr a = parse_expr(text);
  EstimatorConfig cfg = rc.estimator();
  NullModResult r = target.empty() ? algorithm1_auto(a, cfg) : algorithm1(a, rc.rational("--target", target));
  NullModReport rep = verify_nullmod(r, rc.horizon, cfg.tolerance, cfg);
  Output out(rc.out);
  if (rc.csv())
    io::nullmod_csv(out.stream(), r, rc.horizon);
  else
    out.put(io::nullmod_json(r, rep));
  return rep.structural_ok() ? kOk : kCheck;
}

// ---------------------------------------------------------------------------
// chain

Chain chain_from(const RunConfig& rc, const std::vector<std::string>& items) {
  if (items.size() == 1) {
    auto [name, param] = split_name(items[0]);
    std::uint64_t verify = std::min<std::uint64_t>(rc.horizon, kDefaultVerifyHorizon);
    if (name == "dk-partial-unions") return dk_partial_unions_chain(static_cast<unsigned>(param.value_or(11)), verify);
    if (name == "residue-cumulative") return residue_cumulative_chain(param.value_or(10), verify);
  }
  return Chain::build(parse_all(items), std::min<std::uint64_t>(rc.horizon, kDefaultVerifyHorizon));
}

int cmd_chain_certify(const RunConfig& rc, const std::vector<std::string>& items) {
  Chain c = chain_from(rc, items);
  EstimatorConfig cfg = rc.estimator();
  UniformCertificate cert = uniform_convergence_certificate(c, rc.epsilon(), cfg);
  Output out(rc.out);
  if (rc.csv())
    io::chain_profiles_csv(out.stream(), c, cfg);
  else
    out.put(io::certificate_json(c, cert));
  return cert.found ? kOk : kCheck;
}

int cmd_chain_densify(const RunConfig& rc, const std::vector<std::string>& items) {
  Chain c = densify_range(chain_from(rc, items), rc.epsilon());
  Output out(rc.out);
  if (rc.csv()) {
    out.stream() << "index,expr,charge\n";
    for (std::size_t i = 0; i < c.size(); ++i)
      out.stream() << i << ",\"" << dsl::print(c.elements()[i]) << "\","
                   << (c.charges()[i] ? c.charges()[i]->str() : "") << '\n';
  } else {
    out.put({{"schema", "chain-report"},
             {"version", io::kSchemaVersion},
             {"epsilon", rc.epsilon().str()},
             {"elements", io::chain_json(c)}});
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// field / classify

int cmd_field(const RunConfig& rc, const std::vector<std::string>& items) {
  FieldOfSets f = generate_field(parse_all(items), std::min<std::uint64_t>(rc.horizon, kDefaultVerifyHorizon));
  Output out(rc.out);
  if (rc.csv()) {
    out.stream() << "pattern,expr,charge\n";
    for (std::size_t i = 0; i < f.atoms.size(); ++i)
      out.stream() << f.patterns[i] << ",\"" << dsl::print(f.atoms[i]) << "\","
                   << (f.charges[i] ? f.charges[i]->str() : "") << '\n';
  } else {
    out.put(io::field_json(f));
  }
  return kOk;
}

int cmd_classify(const RunConfig& rc, const std::vector<std::string>& items) {
  std::vector<SetExpr> parts;
  auto [name, param] = split_name(items[0]);
  if (items.size() == 1 && name == "dk") {
    for (unsigned j = 0; j < param.value_or(20); ++j) parts.push_back(dk_family(j));
  } else if (items.size() == 1 && name == "singletons") {
    for (std::uint64_t k = 1; k <= param.value_or(20); ++k) parts.push_back(sets::finite({k}));
  } else {
    parts = parse_all(items);
  }
  PartitionSpec p = make_partition(parts, std::min<std::uint64_t>(rc.horizon, kDefaultVerifyHorizon));
  Classification c = classify_measure_space(p);
  Output out(rc.out);
  if (rc.csv()) {
    out.stream() << "parts,tail_mass\n";
    for (std::size_t i = 0; i < c.tail_trend.size(); ++i) out.stream() << i + 1 << ',' << c.tail_trend[i].str() << '\n';
  } else {
    out.put(io::classification_json(p, c));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// kp

SimpleSequence load_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ExitWith{kEval, "error: cannot read " + path};
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ExitWith{kParse, "error: " + path + ": " + e.what()};
  }
  try {
    return io::sequence_from_json(j);
  } catch (const ParseError& e) {
    throw ExitWith{kParse, "error: " + path + ": " + e.what()};
  } catch (const SemanticError& e) {
    throw ExitWith{kParse, "error: " + path + ": " + e.what()};
  }
}

int cmd_kp_norm(const RunConfig& rc, const std::string& path, const std::string& p) {
  SimpleSequence h = load_sequence(path);
  KpNorm n = kp_norm(h, rc.rational("--p", p), std::min<std::uint64_t>(rc.horizon, kDefaultVerifyHorizon));
  Output out(rc.out);
  if (rc.csv()) {
    out.stream() << "p,pth_power,norm_approx\n"
                 << n.p.str() << ',' << (n.pth_power ? n.pth_power->str() : "") << ',' << io::json(static_cast<double>(n.norm)).dump()
                 << '\n';
  } else {
    out.put(io::norm_json(h, n));
  }
  return kOk;
}

int cmd_kp_integral(const RunConfig& rc, const std::string& path) {
  SimpleSequence h = load_sequence(path);
  IntegralCheck c = cesaro_integral_check(h, rc.estimator());
  Output out(rc.out);
  if (rc.csv())
    io::trajectory_csv(out.stream(), c.checkpoints, c.values);
  else
    out.put(io::integral_json(h, c));
  return c.passed ? kOk : kCheck;
}

int cmd_kp_tail(const RunConfig& rc, const std::string& path, const std::string& p) {
  Rational pr = rc.rational("--p", p);
  TailResult t;
  std::string label = path;
  if (path == "anomaly") {
    t = kp_tail_condition(AnomalySequence{}, pr, rc.epsilon(), rc.estimator());
    label = "g";
  } else {
    t = kp_tail_condition(load_sequence(path), pr, rc.epsilon());
  }
  Output out(rc.out);
  if (rc.csv()) {
    out.stream() << "y,upper_estimate\n";
    for (const auto& [y, e] : t.estimates) out.stream() << y.str() << ',' << e.str() << '\n';
  } else {
    out.put(io::tail_json(label, pr, rc.epsilon(), t));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// props

int cmd_props(const RunConfig& rc, std::uint64_t cases) {
  fixtures::Corpus c(rc.seed);
  std::uint64_t evaluated = 0, skipped = 0;
  json failures = json::array();
  Output out(rc.out);
  if (rc.csv()) out.stream() << "case,evaluated,ok\n";
  while (evaluated < cases) {
    fixtures::PropOutcome r = fixtures::prop_case(c);
    if (!r.evaluated) {
      ++skipped;
      continue;
    }
    ++evaluated;
    if (rc.csv()) out.stream() << evaluated << ",true," << (r.ok ? "true" : "false") << '\n';
    if (!r.ok) failures.push_back({{"case", evaluated}, {"failure", r.failure}});
  }
  if (!rc.csv())
    out.put({{"schema", "props-report"},
             {"version", io::kSchemaVersion},
             {"seed", rc.seed},
             {"cases", evaluated},
             {"skipped", skipped},
             {"failures", failures},
             {"passed", failures.empty()}});
  return failures.empty() ? kOk : kCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cesaro limits, charges and null modification on subsets of N"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;
  app.add_option("--horizon", rc.horizon, "largest N examined")->envname("CESARO_HORIZON")->check(CLI::PositiveNumber);
  app.add_option("--eps", rc.eps, "epsilon for certificates, densification and tails");
  app.add_option("--tol", rc.tol, "convergence tolerance");
  app.add_option("--format", rc.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", rc.out, "output file (default stdout)");
  app.add_option("--seed", rc.seed, "random seed for property corpora");
  app.add_option("--schedule-base", rc.schedule_base, "first checkpoint")->check(CLI::PositiveNumber);
  app.add_option("--schedule-ratio", rc.schedule_ratio, "checkpoint growth ratio");

  std::function<int()> run;

  auto* eval = app.add_subcommand("eval", "exact charge and density profile of a DSL expression");
  std::string expr;
  eval->add_option("expr", expr)->required();
  eval->callback([&] { run = [&] { return cmd_eval(rc, expr); }; });

  auto* ex = app.add_subcommand("examples", "run catalog examples against their frozen values");
  std::string ex_name = "all";
  ex->add_option("name", ex_name, "catalog name, anomaly, dk, all or names");
  ex->callback([&] { run = [&] { return cmd_examples(rc, ex_name); }; });

  auto* nm = app.add_subcommand("nullmod", "online null-modification stream");
  std::string nm_target;
  nm->add_option("expr", expr)->required();
  nm->add_option("--target", nm_target, "target charge (default: exact charge or upper estimate)");
  nm->callback([&] { run = [&] { return cmd_nullmod(rc, expr, nm_target); }; });

  std::vector<std::string> items;
  auto* ch = app.add_subcommand("chain", "chain operations");
  ch->require_subcommand(1);
  auto* cert = ch->add_subcommand("certify", "uniform-convergence certificate");
  cert->add_option("items", items, "DSL expressions, dk-partial-unions[:K] or residue-cumulative[:M]")->required();
  cert->callback([&] { run = [&] { return cmd_chain_certify(rc, items); }; });
  auto* dens = ch->add_subcommand("densify", "insert midpoints until gaps are <= eps");
  dens->add_option("items", items)->required();
  dens->callback([&] { run = [&] { return cmd_chain_densify(rc, items); }; });

  auto* fd = app.add_subcommand("field", "atoms and charges of the generated field");
  fd->add_option("generators", items)->required();
  fd->callback([&] { run = [&] { return cmd_field(rc, items); }; });

  auto* cl = app.add_subcommand("classify", "measure-space classification of a partition");
  cl->add_option("parts", items, "DSL parts, dk[:K] or singletons[:K]")->required();
  cl->callback([&] { run = [&] { return cmd_classify(rc, items); }; });

  auto* kp = app.add_subcommand("kp", "K_p operations on simple sequences");
  kp->require_subcommand(1);
  std::string spec_path, p = "1";
  auto* norm = kp->add_subcommand("norm", "K_p pseudonorm");
  norm->add_option("spec", spec_path, "sequence JSON")->required();
  norm->add_option("--p", p);
  norm->callback([&] { run = [&] { return cmd_kp_norm(rc, spec_path, p); }; });
  auto* integ = kp->add_subcommand("integral", "Cesaro integral against the profile");
  integ->add_option("spec", spec_path)->required();
  integ->callback([&] { run = [&] { return cmd_kp_integral(rc, spec_path); }; });
  auto* tail = kp->add_subcommand("tail", "tail condition");
  tail->add_option("spec", spec_path, "sequence JSON or 'anomaly'")->required();
  tail->add_option("--p", p);
  tail->callback([&] { run = [&] { return cmd_kp_tail(rc, spec_path, p); }; });

  auto* pr = app.add_subcommand("props", "randomized exact checks of the charge axioms");
  std::uint64_t cases = 1000;
  pr->add_option("--cases", cases, "cases with every charge available")->check(CLI::PositiveNumber);
  pr->callback([&] { run = [&] { return cmd_props(rc, cases); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    return run();
  } catch (const ExitWith& e) {
    std::cerr << e.message << '\n';
    return e.code;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEval;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kEval;
  }
}
