#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "cesaro/rational.hpp"

namespace cesaro::arith {

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline std::uint64_t icbrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::cbrt(static_cast<long double>(n)));
  auto cube = [](std::uint64_t x) { return static_cast<u128>(x) * x * x; };
  while (r > 0 && cube(r) > n) --r;
  while (cube(r + 1) <= n) ++r;
  return r;
}

// a*b, or nullopt when the product exceeds the 63-bit horizon limit.
inline std::optional<std::uint64_t> mul_checked(std::uint64_t a, std::uint64_t b) {
  u128 p = static_cast<u128>(a) * b;
  if (p > kMaxHorizon) return std::nullopt;
  return static_cast<std::uint64_t>(p);
}

inline std::optional<std::uint64_t> add_checked(std::uint64_t a, std::uint64_t b) {
  u128 s = static_cast<u128>(a) + b;
  if (s > kMaxHorizon) return std::nullopt;
  return static_cast<std::uint64_t>(s);
}

inline std::optional<std::uint64_t> pow_checked(std::uint64_t base, unsigned e) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i) {
    auto next = mul_checked(r, base);
    if (!next) return std::nullopt;
    r = *next;
  }
  return r;
}

// lcm, or nullopt once it exceeds `cap`.
inline std::optional<std::uint64_t> lcm_capped(std::uint64_t a, std::uint64_t b,
                                               std::uint64_t cap) {
  std::uint64_t g = std::gcd(a, b);
  u128 l = static_cast<u128>(a / g) * b;
  if (l > cap) return std::nullopt;
  return static_cast<std::uint64_t>(l);
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e != 0) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Largest e with base^e <= n, for base >= 2 and n >= 1.
inline unsigned ilog(std::uint64_t n, std::uint64_t base) {
  unsigned e = 0;
  u128 p = base;
  while (p <= n) {
    ++e;
    p *= base;
  }
  return e;
}

}  // namespace cesaro::arith
