#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "cesaro/rational.hpp"

namespace cesaro {

// Memoized 0/1 decision stream I(1), I(2), ... produced by a stateful
// sequential step function. Growth happens in segments of 2^16 under an
// internal mutex, so a shared instance is safe to query from several threads
// and the stream is identical regardless of query order.
class MemoBits {
 public:
  static constexpr std::uint64_t kSegment = 1u << 16;

  // `step(n)` is called exactly once for n = 1, 2, 3, ... in order.
  explicit MemoBits(std::function<bool(std::uint64_t)> step) : step_(std::move(step)) {}

  MemoBits(const MemoBits&) = delete;
  MemoBits& operator=(const MemoBits&) = delete;

  bool get(std::uint64_t n) const {
    std::lock_guard lock(mu_);
    ensure(n);
    std::uint64_t i = n - 1;
    return (words_[i / 64] >> (i % 64)) & 1u;
  }

  // Number of set bits among 1..n.
  std::uint64_t count(std::uint64_t n) const {
    if (n == 0) return 0;
    std::lock_guard lock(mu_);
    ensure(n);
    std::uint64_t i = n - 1;
    std::uint64_t w = i / 64;
    unsigned bit = static_cast<unsigned>(i % 64);
    std::uint64_t mask = bit == 63 ? ~0ull : ((1ull << (bit + 1)) - 1);
    return cum_[w] + static_cast<std::uint64_t>(std::popcount(words_[w] & mask));
  }

  // Bits for n = 64*index + 1 ... 64*index + 64 (bit 0 is the smallest n).
  std::uint64_t word(std::uint64_t index) const {
    std::lock_guard lock(mu_);
    ensure(index * 64 + 64);
    return words_[index];
  }

  std::uint64_t computed() const {
    std::lock_guard lock(mu_);
    return size_;
  }

 private:
  void ensure(std::uint64_t n) const {
    check_horizon(n);
    if (n <= size_) return;
    std::uint64_t target = (n + kSegment - 1) / kSegment * kSegment;
    words_.resize(target / 64, 0);
    cum_.resize(target / 64, 0);
    for (std::uint64_t m = size_ + 1; m <= target; ++m) {
      std::uint64_t i = m - 1;
      std::uint64_t w = i / 64;
      if (i % 64 == 0 && w > 0)
        cum_[w] = cum_[w - 1] + static_cast<std::uint64_t>(std::popcount(words_[w - 1]));
      if (step_(m)) words_[w] |= 1ull << (i % 64);
    }
    size_ = target;
  }

  std::function<bool(std::uint64_t)> step_;
  mutable std::mutex mu_;
  mutable std::vector<std::uint64_t> words_;
  mutable std::vector<std::uint64_t> cum_;
  mutable std::uint64_t size_ = 0;
};

}  // namespace cesaro
