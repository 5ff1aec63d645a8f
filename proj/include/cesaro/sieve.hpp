#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "cesaro/arith.hpp"

namespace cesaro {

// Segmented sieve of Eratosthenes over odd numbers. Walks [1, limit] in
// fixed-size segments; base primes up to sqrt(limit) are grown on demand so
// the same object can stream without a known end.
class SegmentedSieve {
 public:
  static constexpr std::uint64_t kSegment = 1u << 18;

  SegmentedSieve() = default;

  // Number of primes <= n.
  static std::uint64_t count(std::uint64_t n) {
    if (n < 2) return 0;
    SegmentedSieve s;
    std::uint64_t total = 1;  // the prime 2
    std::uint64_t lo = 1;
    while (lo <= n) {
      std::uint64_t hi = std::min<std::uint64_t>(n, lo + kSegment - 1);
      s.sieve(lo, hi);
      for (std::uint64_t i = 0; i < s.flags_.size(); ++i) total += s.flags_[i];
      lo = hi + 1;
    }
    return total;
  }

  // Marks primality for every n in [lo, hi]; is_prime_in_segment(n) reads it.
  void sieve(std::uint64_t lo, std::uint64_t hi) {
    lo_ = lo;
    // flags_[i] describes lo + i but only odd n > 2 are flagged here; 2 is
    // handled by callers (count adds it; is_prime_in_segment special-cases).
    flags_.assign(hi - lo + 1, 1);
    grow_base(arith::isqrt(hi));
    for (std::uint64_t i = 0; i < flags_.size(); ++i) {
      std::uint64_t n = lo + i;
      if (n < 3 || n % 2 == 0) flags_[i] = 0;
    }
    for (std::uint64_t p : base_) {
      if (p == 2) continue;
      if (p * p > hi) break;
      std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
      if (start % 2 == 0) start += p;
      for (std::uint64_t m = start; m <= hi; m += 2 * p) flags_[m - lo] = 0;
    }
  }

  bool is_prime_in_segment(std::uint64_t n) const {
    return n == 2 || flags_[n - lo_] != 0;
  }

 private:
  void grow_base(std::uint64_t limit) {
    if (limit <= base_limit_) return;
    std::vector<char> small(limit + 1, 1);
    base_.clear();
    for (std::uint64_t i = 2; i <= limit; ++i) {
      if (!small[i]) continue;
      base_.push_back(i);
      for (std::uint64_t j = i * i; j <= limit; j += i) small[j] = 0;
    }
    base_limit_ = limit;
  }

  std::vector<std::uint64_t> base_;
  std::uint64_t base_limit_ = 0;
  std::uint64_t lo_ = 1;
  std::vector<char> flags_;
};

}  // namespace cesaro
