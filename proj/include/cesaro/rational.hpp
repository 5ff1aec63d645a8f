#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "cesaro/error.hpp"

namespace cesaro {

using i128 = __int128;
using u128 = unsigned __int128;

inline constexpr std::uint64_t kMaxHorizon =
    static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());

inline void check_horizon(std::uint64_t n) {
  if (n > kMaxHorizon)
    throw HorizonOverflow("horizon " + std::to_string(n) +
                          " exceeds the 63-bit limit");
}

inline i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

inline std::string to_string128(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  std::string s;
  while (u != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  return {s.rbegin(), s.rend()};
}

// Exact rational with 64-bit numerator and denominator. Intermediate results
// are formed in 128 bits and reduced; anything that still does not fit throws
// ArithmeticOverflow.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT
  Rational(std::int64_t n, std::int64_t d) { *this = from_i128(n, d); }

  static Rational from_i128(i128 n, i128 d) {
    if (d == 0) throw EvaluationError("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    i128 g = gcd128(n, d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    constexpr i128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr i128 hi = std::numeric_limits<std::int64_t>::max();
    if (n < lo || n > hi || d > hi)
      throw ArithmeticOverflow("rational " + to_string128(n) + "/" +
                               to_string128(d) + " exceeds 64 bits");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  // count/N for prefix counts.
  static Rational ratio(std::uint64_t count, std::uint64_t n) {
    check_horizon(n);
    check_horizon(count);
    return from_i128(static_cast<i128>(count), static_cast<i128>(n));
  }

  constexpr std::int64_t num() const noexcept { return num_; }
  constexpr std::int64_t den() const noexcept { return den_; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return from_i128(static_cast<i128>(a.num_) * b.den_ +
                         static_cast<i128>(b.num_) * a.den_,
                     static_cast<i128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return from_i128(static_cast<i128>(a.num_) * b.den_ -
                         static_cast<i128>(b.num_) * a.den_,
                     static_cast<i128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return from_i128(static_cast<i128>(a.num_) * b.num_,
                     static_cast<i128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw EvaluationError("division by zero rational");
    return from_i128(static_cast<i128>(a.num_) * b.den_,
                     static_cast<i128>(a.den_) * b.num_);
  }
  Rational operator-() const { return from_i128(-static_cast<i128>(num_), den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    i128 l = static_cast<i128>(a.num_) * b.den_;
    i128 r = static_cast<i128>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less
                 : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  Rational abs() const { return num_ < 0 ? -*this : *this; }
  bool is_integer() const noexcept { return den_ == 1; }
  double to_double() const {
    return static_cast<double>(static_cast<long double>(num_) / den_);
  }
  long double to_long_double() const {
    return static_cast<long double>(num_) / den_;
  }

  Rational pow(unsigned e) const {
    Rational r(1);
    for (unsigned i = 0; i < e; ++i) r *= *this;
    return r;
  }

  std::string str() const {
    return den_ == 1 ? std::to_string(num_)
                     : std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p", "p/q", "-p/q" and finite decimals such as "0.125".
  static Rational parse(std::string_view text);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.str();
}

namespace detail {

inline bool parse_i128(std::string_view s, i128& out) {
  if (s.empty()) return false;
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) return false;
  i128 v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
    if (v > static_cast<i128>(std::numeric_limits<std::int64_t>::max()) * 10)
      throw ArithmeticOverflow("integer literal too large: " + std::string(s));
  }
  out = neg ? -v : v;
  return true;
}

}  // namespace detail

inline Rational Rational::parse(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    i128 n = 0, d = 0;
    if (!detail::parse_i128(text.substr(0, slash), n) ||
        !detail::parse_i128(text.substr(slash + 1), d))
      throw SemanticError("malformed rational '" + std::string(text) + "'");
    return from_i128(n, d);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string digits(text.substr(0, dot));
    std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 18)
      throw ArithmeticOverflow("decimal literal has more than 18 fractional digits");
    digits += frac;
    if (digits.empty() || digits == "-" || digits == "+")
      throw SemanticError("malformed decimal '" + std::string(text) + "'");
    i128 n = 0;
    if (!detail::parse_i128(digits, n))
      throw SemanticError("malformed decimal '" + std::string(text) + "'");
    i128 d = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) d *= 10;
    return from_i128(n, d);
  }
  i128 n = 0;
  if (!detail::parse_i128(text, n))
    throw SemanticError("malformed rational '" + std::string(text) + "'");
  return from_i128(n, 1);
}

}  // namespace cesaro
