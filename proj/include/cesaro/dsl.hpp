#pragma once

// Text syntax for set expressions.
//
//   expr    := diff ( '|' diff )*
//   diff    := inter ( ('\' | '^') inter )*
//   inter   := unary ( '&' unary )*
//   unary   := '~' unary | primary
//   primary := '(' expr ')' | '{' [int (',' int)*] '}' | name | call
//
// Precedence is ~ > & > (\ ^) > |, all binary operators left-associative.
// The full list of names and calls lives in docs/grammar.md.

#include <cctype>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cesaro/set_expr.hpp"

namespace cesaro::dsl {

struct ParseOptions {
  // Oracles available to `predicate(name)`.
  std::map<std::string, std::function<bool(std::uint64_t)>> predicates;
};

namespace detail {

enum class Tok { Int, Decimal, Ident, Punct, End };

struct Token {
  Tok type;
  std::string text;
  std::size_t offset;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src_.size()) {
      char c = src_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      std::size_t start = i;
      if (std::isdigit(static_cast<unsigned char>(c))) {
        while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) ++i;
        if (i + 1 < src_.size() && src_[i] == '.' && std::isdigit(static_cast<unsigned char>(src_[i + 1]))) {
          ++i;
          while (i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]))) ++i;
          out.push_back({Tok::Decimal, std::string(src_.substr(start, i - start)), start});
        } else {
          out.push_back({Tok::Int, std::string(src_.substr(start, i - start)), start});
        }
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i])) || src_[i] == '_')) ++i;
        out.push_back({Tok::Ident, std::string(src_.substr(start, i - start)), start});
        continue;
      }
      static constexpr std::string_view kPunct = "(){}[],|&\\^~*/+-";
      if (kPunct.find(c) == std::string_view::npos)
        throw_at(start, std::string("unexpected character '") + c + "'");
      out.push_back({Tok::Punct, std::string(1, c), start});
      ++i;
    }
    out.push_back({Tok::End, "", src_.size()});
    return out;
  }

  [[noreturn]] void throw_at(std::size_t offset, const std::string& msg) const {
    auto [line, col] = position(src_, offset);
    throw ParseError(msg, line, col);
  }

  static std::pair<std::size_t, std::size_t> position(std::string_view src, std::size_t offset) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < src.size(); ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }

 private:
  std::string_view src_;
};

struct TargetValue {
  std::optional<Rational> exact;
  Real approx;
};

class Parser {
 public:
  Parser(std::string_view src, const ParseOptions& opts)
      : src_(src), opts_(opts), toks_(Lexer(src).run()) {}

  SetExpr parse_all() {
    SetExpr e = expr();
    if (peek().type != Tok::End) fail("unexpected '" + peek().text + "' after expression");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  bool is_punct(std::string_view p) const { return peek().type == Tok::Punct && peek().text == p; }
  bool is_ident(std::string_view p) const { return peek().type == Tok::Ident && peek().text == p; }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek().offset, msg); }
  [[noreturn]] void fail_at(std::size_t offset, const std::string& msg) const {
    auto [line, col] = Lexer::position(src_, offset);
    throw ParseError(msg, line, col);
  }
  [[noreturn]] void semantic_at(std::size_t offset, const std::string& msg) const {
    auto [line, col] = Lexer::position(src_, offset);
    throw SemanticError(msg + " at line " + std::to_string(line) + ", column " + std::to_string(col));
  }

  void expect(std::string_view p) {
    if (!is_punct(p)) {
      fail(peek().type == Tok::End ? "expected '" + std::string(p) + "' but input ended"
                                   : "expected '" + std::string(p) + "' but found '" + peek().text + "'");
    }
    ++pos_;
  }
  void expect_ident(std::string_view w) {
    if (!is_ident(w)) fail("expected '" + std::string(w) + "'");
    ++pos_;
  }

  std::uint64_t integer() {
    if (peek().type != Tok::Int) fail("expected an integer");
    const Token& t = take();
    if (t.text.size() > 19) fail_at(t.offset, "integer literal too large");
    unsigned long long v = std::stoull(t.text);
    if (v > kMaxHorizon) fail_at(t.offset, "integer literal exceeds the 63-bit limit");
    return v;
  }

  SetExpr expr() {
    SetExpr e = diff();
    while (is_punct("|")) {
      ++pos_;
      e = sets::set_union(e, diff());
    }
    return e;
  }
  SetExpr diff() {
    SetExpr e = inter();
    while (is_punct("\\") || is_punct("^")) {
      bool sym = take().text == "^";
      SetExpr r = inter();
      e = sym ? sets::symm_diff(e, r) : sets::difference(e, r);
    }
    return e;
  }
  SetExpr inter() {
    SetExpr e = unary();
    while (is_punct("&")) {
      ++pos_;
      e = sets::intersection(e, unary());
    }
    return e;
  }
  SetExpr unary() {
    if (is_punct("~")) {
      ++pos_;
      return sets::complement(unary());
    }
    return primary();
  }

  SetExpr primary() {
    const Token& t = peek();
    if (is_punct("(")) {
      ++pos_;
      SetExpr e = expr();
      expect(")");
      return e;
    }
    if (is_punct("{")) return finite_literal();
    if (t.type == Tok::End) fail("expected an expression but input ended");
    if (t.type != Tok::Ident) fail("expected an expression but found '" + t.text + "'");
    std::string name = take().text;
    std::size_t at = t.offset;
    try {
      return named(name, at);
    } catch (const SemanticError& e) {
      if (std::string(e.what()).find(" at line ") != std::string::npos) throw;
      semantic_at(at, e.what());
    }
  }

  SetExpr finite_literal() {
    std::size_t at = peek().offset;
    expect("{");
    std::vector<std::uint64_t> xs;
    if (!is_punct("}")) {
      xs.push_back(integer());
      while (is_punct(",")) {
        ++pos_;
        xs.push_back(integer());
      }
    }
    expect("}");
    try {
      return sets::finite(std::move(xs), false);
    } catch (const SemanticError& e) {
      semantic_at(at, e.what());
    }
  }

  SetExpr named(const std::string& name, std::size_t at) {
    if (name == "N" || name == "nat" || name == "naturals") return sets::naturals();
    if (name == "empty") return sets::empty();
    if (name == "evens") return sets::evens();
    if (name == "odds") return sets::odds();
    if (name == "squares") return sets::squares();
    if (name == "cubes") return sets::cubes();
    if (name == "primes") return sets::primes();
    if (!is_punct("(")) fail_at(at, "unknown set name '" + name + "'");
    expect("(");
    SetExpr out = call(name, at);
    expect(")");
    return out;
  }

  SetExpr call(const std::string& name, std::size_t at) {
    if (name == "residue") {
      std::uint64_t r = integer();
      expect_ident("mod");
      std::uint64_t m = integer();
      return sets::residue(r, m);
    }
    if (name == "multiples") return sets::multiples(integer());
    if (name == "powers") return sets::powers(integer());
    if (name == "dilate") {
      std::uint64_t k = integer();
      expect(",");
      return sets::dilate(k, expr());
    }
    if (name == "interleave") return sets::interleave(expr());
    if (name == "blocks") return sets::blocks(block_spec());
    if (name == "greedy") return sets::greedy(target());
    if (name == "midpoint") {
      SetExpr b = expr();
      expect(",");
      return sets::midpoint(b, expr());
    }
    if (name == "nullmod" || name == "nullmod_removed") {
      SetExpr a = expr();
      expect(",");
      Rational t = rational_literal();
      SetExpr kept = sets::nullmod_kept(a, t);
      return name == "nullmod" ? kept : sets::nullmod_removed(kept);
    }
    if (name == "dk") {
      std::uint64_t k = integer();
      if (k > 62) semantic_at(at, "dk(k) needs k <= 62");
      return sets::dilate(1ull << k, sets::difference(sets::odds(), sets::finite({1})));
    }
    if (name == "predicate") {
      if (peek().type != Tok::Ident) fail("expected a predicate name");
      std::string pname = take().text;
      auto it = opts_.predicates.find(pname);
      if (it == opts_.predicates.end()) semantic_at(at, "unregistered predicate '" + pname + "'");
      return sets::predicate(pname, it->second);
    }
    fail_at(at, "unknown function '" + name + "'");
  }

  Rational rational_literal() {
    bool neg = false;
    if (is_punct("-")) {
      ++pos_;
      neg = true;
    }
    const Token& t = peek();
    if (t.type == Tok::Decimal) {
      ++pos_;
      Rational r = Rational::parse(t.text);
      return neg ? -r : r;
    }
    std::int64_t n = static_cast<std::int64_t>(integer());
    std::int64_t d = 1;
    if (is_punct("/")) {
      ++pos_;
      std::size_t dat = peek().offset;
      d = static_cast<std::int64_t>(integer());
      if (d == 0) semantic_at(dat, "zero denominator");
    }
    return Rational(neg ? -n : n, d);
  }

  BlockSpec block_spec() {
    if (is_punct("[")) {
      ++pos_;
      std::vector<std::uint64_t> head, tail;
      auto list = [&](std::vector<std::uint64_t>& out) {
        if (peek().type != Tok::Int) return;
        out.push_back(integer());
        while (is_punct(",")) {
          ++pos_;
          out.push_back(integer());
        }
      };
      list(head);
      expect("|");
      list(tail);
      expect("]");
      return BlockSpec::explicit_list(std::move(head), std::move(tail));
    }
    if (is_ident("n")) {
      ++pos_;
      expect("^");
      std::uint64_t q = integer();
      return BlockSpec::power(static_cast<unsigned>(std::min<std::uint64_t>(q, 1000)));
    }
    std::uint64_t scale = 1;
    std::uint64_t base = integer();
    if (is_punct("*")) {
      ++pos_;
      scale = base;
      base = integer();
    }
    expect("^");
    expect("(");
    expect_ident("n");
    expect("-");
    std::size_t one_at = peek().offset;
    if (integer() != 1) fail_at(one_at, "geometric blocks use the exponent (n-1)");
    expect(")");
    return BlockSpec::geometric(scale, base);
  }

  // Arithmetic over rationals, pi, e and sqrt; exact when only rationals and
  // + - * / appear.
  Target target() {
    std::size_t start = peek().offset;
    TargetValue v = tsum();
    std::size_t end = peek().offset;
    std::string text(src_.substr(start, end - start));
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    if (v.exact) return Target(*v.exact);
    return Target::from_real(v.approx, text);
  }

  TargetValue tsum() {
    TargetValue v = tprod();
    while (is_punct("+") || is_punct("-")) {
      bool add = take().text == "+";
      TargetValue r = tprod();
      v.approx = add ? v.approx + r.approx : v.approx - r.approx;
      if (v.exact && r.exact) v.exact = add ? *v.exact + *r.exact : *v.exact - *r.exact;
      else v.exact.reset();
    }
    return v;
  }
  TargetValue tprod() {
    TargetValue v = tatom();
    while (is_punct("*") || is_punct("/")) {
      std::size_t at = peek().offset;
      bool mul = take().text == "*";
      TargetValue r = tatom();
      if (!mul && r.approx == 0) semantic_at(at, "division by zero in target");
      v.approx = mul ? v.approx * r.approx : v.approx / r.approx;
      if (v.exact && r.exact) v.exact = mul ? *v.exact * *r.exact : *v.exact / *r.exact;
      else v.exact.reset();
    }
    return v;
  }
  TargetValue tatom() {
    if (is_punct("-")) {
      ++pos_;
      TargetValue v = tatom();
      v.approx = -v.approx;
      if (v.exact) v.exact = -*v.exact;
      return v;
    }
    if (is_punct("(")) {
      ++pos_;
      TargetValue v = tsum();
      expect(")");
      return v;
    }
    const Token& t = peek();
    if (t.type == Tok::Int || t.type == Tok::Decimal) {
      ++pos_;
      TargetValue v;
      v.approx = Real(t.text);
      try {
        v.exact = Rational::parse(t.text);
      } catch (const ArithmeticOverflow&) {
        v.exact.reset();
      }
      return v;
    }
    if (t.type == Tok::Ident) {
      ++pos_;
      if (t.text == "pi") return {std::nullopt, boost::math::constants::pi<Real>()};
      if (t.text == "e") return {std::nullopt, boost::math::constants::e<Real>()};
      if (t.text == "sqrt") {
        expect("(");
        TargetValue a = tsum();
        expect(")");
        if (a.approx < 0) semantic_at(t.offset, "sqrt of a negative number");
        return {std::nullopt, boost::multiprecision::sqrt(a.approx)};
      }
      fail_at(t.offset, "unknown constant '" + t.text + "' in target");
    }
    fail("expected a number in target");
  }

  std::string_view src_;
  const ParseOptions& opts_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

inline int precedence(Kind k) {
  switch (k) {
    case Kind::Union: return 1;
    case Kind::Difference:
    case Kind::SymmDiff: return 2;
    case Kind::Intersection: return 3;
    case Kind::Complement: return 4;
    default: return 5;
  }
}

}  // namespace detail

inline SetExpr parse(std::string_view text, const ParseOptions& opts = {}) {
  return detail::Parser(text, opts).parse_all();
}

inline std::string print(const SetExpr& e) {
  const Node& n = e.node();
  switch (e.kind()) {
    case Kind::Finite: {
      const auto& xs = static_cast<const FiniteNode&>(n).elements();
      std::string s = "{";
      for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
      return s + "}";
    }
    case Kind::Residue: {
      const auto& r = static_cast<const ResidueNode&>(n);
      return "residue(" + std::to_string(r.residue()) + " mod " + std::to_string(r.modulus()) + ")";
    }
    case Kind::Blocks:
      return "blocks(" + static_cast<const BlocksNode&>(n).spec().str() + ")";
    case Kind::Greedy:
      return "greedy(" + static_cast<const GreedyNode&>(n).target().text() + ")";
    case Kind::NullFamily: {
      const auto& f = static_cast<const NullFamilyNode&>(n);
      switch (f.family()) {
        case NullKind::Squares: return "squares";
        case NullKind::Cubes: return "cubes";
        case NullKind::Primes: return "primes";
        case NullKind::Powers: return "powers(" + std::to_string(f.base()) + ")";
      }
      return {};
    }
    case Kind::Interleave:
      return "interleave(" + print(static_cast<const InterleaveNode&>(n).inner()) + ")";
    case Kind::Dilate: {
      const auto& d = static_cast<const DilateNode&>(n);
      return "dilate(" + std::to_string(d.factor()) + ", " + print(d.inner()) + ")";
    }
    case Kind::Midpoint: {
      const auto& m = static_cast<const MidpointNode&>(n);
      return "midpoint(" + print(m.lower()) + ", " + print(m.upper()) + ")";
    }
    case Kind::NullModKept: {
      const auto& k = static_cast<const NullModKeptNode&>(n);
      return "nullmod(" + print(k.source()) + ", " + k.target().str() + ")";
    }
    case Kind::NullModRemoved: {
      const auto& k = static_cast<const NullModRemovedNode&>(n);
      return "nullmod_removed(" + print(k.source()) + ", " + k.target().str() + ")";
    }
    case Kind::Predicate:
      return "predicate(" + static_cast<const PredicateNode&>(n).name() + ")";
    case Kind::Complement: {
      const auto& c = static_cast<const ComplementNode&>(n);
      std::string inner = print(c.inner());
      if (detail::precedence(c.inner().kind()) < detail::precedence(Kind::Complement))
        inner = "(" + inner + ")";
      return "~" + inner;
    }
    case Kind::Union:
    case Kind::Intersection:
    case Kind::Difference:
    case Kind::SymmDiff: {
      const auto& b = static_cast<const BinaryNode&>(n);
      int p = detail::precedence(e.kind());
      std::string l = print(b.left());
      std::string r = print(b.right());
      if (detail::precedence(b.left().kind()) < p) l = "(" + l + ")";
      if (detail::precedence(b.right().kind()) <= p) r = "(" + r + ")";
      const char* op = e.kind() == Kind::Union          ? " | "
                       : e.kind() == Kind::Intersection ? " & "
                       : e.kind() == Kind::Difference   ? " \\ "
                                                        : " ^ ";
      return l + op + r;
    }
  }
  return {};
}

}  // namespace cesaro::dsl
