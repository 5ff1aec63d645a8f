#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "cesaro/rational.hpp"

namespace cesaro {

using Real = boost::multiprecision::cpp_bin_float_50;

// A density target in [0,1]: either an exact rational or a real truncated to
// 120 fractional bits. Two real targets closer than 2^-120 are
// indistinguishable.
class Target {
 public:
  static constexpr int kFracBits = 120;

  Target() = default;
  explicit Target(Rational r) : value_(r) {
    if (r < Rational(0) || r > Rational(1))
      throw SemanticError("target " + r.str() + " outside [0,1]");
    text_ = r.str();
  }

  // `text` is kept verbatim for printing.
  static Target from_real(const Real& x, std::string text) {
    if (x < 0 || x > 1) throw SemanticError("target " + text + " outside [0,1]");
    Target t;
    Real scaled = boost::multiprecision::ldexp(x, kFracBits);
    boost::multiprecision::cpp_int i = scaled.convert_to<boost::multiprecision::cpp_int>();
    boost::multiprecision::cpp_int mask = (boost::multiprecision::cpp_int(1) << 64) - 1;
    auto lo = static_cast<std::uint64_t>(i & mask);
    auto hi = static_cast<std::uint64_t>(i >> 64);
    t.value_ = (static_cast<u128>(hi) << 64) | lo;
    t.text_ = std::move(text);
    return t;
  }

  bool is_exact() const noexcept { return std::holds_alternative<Rational>(value_); }
  const Rational& exact() const { return std::get<Rational>(value_); }
  const std::string& text() const noexcept { return text_; }

  // count/n < target, decided without floating point.
  bool exceeds(std::uint64_t count, std::uint64_t n) const {
    if (const auto* r = std::get_if<Rational>(&value_)) {
      return static_cast<i128>(count) * r->den() < static_cast<i128>(n) * r->num();
    }
    u128 frac = std::get<u128>(value_);
    // count * 2^120 < n * frac, both sides as 192-bit integers.
    U192 lhs{};
    lhs.w[1] = count << 56;
    lhs.w[2] = count >> 8;
    U192 rhs = mul_64x128(n, frac);
    return lhs < rhs;
  }

  // |count - target*n| as a long double, for diagnostics only.
  long double deviation(std::uint64_t count, std::uint64_t n) const {
    Real t = as_real();
    Real d = Real(count) - t * Real(n);
    return static_cast<long double>(boost::multiprecision::abs(d));
  }

  Real as_real() const {
    if (const auto* r = std::get_if<Rational>(&value_)) return Real(r->num()) / Real(r->den());
    u128 frac = std::get<u128>(value_);
    Real hi = Real(static_cast<std::uint64_t>(frac >> 64));
    Real lo = Real(static_cast<std::uint64_t>(frac));
    return boost::multiprecision::ldexp(hi, 64 - kFracBits) +
           boost::multiprecision::ldexp(lo, -kFracBits);
  }

  friend bool operator==(const Target& a, const Target& b) { return a.value_ == b.value_; }

 private:
  struct U192 {
    std::uint64_t w[3];  // little-endian limbs
    friend bool operator<(const U192& a, const U192& b) {
      for (int i = 2; i >= 0; --i)
        if (a.w[i] != b.w[i]) return a.w[i] < b.w[i];
      return false;
    }
  };

  static U192 mul_64x128(std::uint64_t a, u128 b) {
    u128 lo = static_cast<u128>(a) * static_cast<std::uint64_t>(b);
    u128 hi = static_cast<u128>(a) * static_cast<std::uint64_t>(b >> 64);
    U192 r{};
    r.w[0] = static_cast<std::uint64_t>(lo);
    u128 mid = (lo >> 64) + static_cast<std::uint64_t>(hi);
    r.w[1] = static_cast<std::uint64_t>(mid);
    r.w[2] = static_cast<std::uint64_t>((hi >> 64) + (mid >> 64));
    return r;
  }

  std::variant<Rational, u128> value_{Rational(0)};
  std::string text_ = "0";
};

}  // namespace cesaro
