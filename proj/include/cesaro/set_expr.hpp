#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cesaro/arith.hpp"
#include "cesaro/block_spec.hpp"
#include "cesaro/error.hpp"
#include "cesaro/memo_bits.hpp"
#include "cesaro/rational.hpp"
#include "cesaro/sieve.hpp"
#include "cesaro/target.hpp"

namespace cesaro {

// Largest period used for exact period counting of residue-class algebras.
inline constexpr std::uint64_t kPeriodCap = 1000000;

enum class Kind {
  Finite,
  Residue,
  Blocks,
  Greedy,
  NullFamily,
  Interleave,
  Dilate,
  Union,
  Intersection,
  Difference,
  SymmDiff,
  Complement,
  Predicate,
  Midpoint,
  NullModKept,
  NullModRemoved,
};

enum class NullKind { Squares, Cubes, Powers, Primes };

// Sequential reader of an indicator sequence: the i-th call to next()
// returns I_A(i).
class Cursor {
 public:
  virtual ~Cursor() = default;
  virtual bool next() = 0;
};

class Node;

// Immutable, shareable handle to a symbolic subset of {1, 2, 3, ...}.
class SetExpr {
 public:
  explicit SetExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const noexcept { return *node_; }
  const std::shared_ptr<const Node>& ptr() const noexcept { return node_; }
  Kind kind() const;

  bool contains(std::uint64_t n) const;
  // |A ∩ {1..n}|
  std::uint64_t count(std::uint64_t n) const;
  std::unique_ptr<Cursor> cursor() const;

 private:
  std::shared_ptr<const Node> node_;
};

class Node : public std::enable_shared_from_this<Node> {
 public:
  virtual ~Node() = default;
  virtual Kind kind() const = 0;
  virtual bool contains(std::uint64_t n) const = 0;

  // True when count() avoids a full streaming pass.
  virtual bool has_fast_count() const { return false; }
  virtual std::uint64_t count(std::uint64_t n) const { return stream_count(n); }

  virtual std::unique_ptr<Cursor> cursor() const;

  // Least known period of the indicator sequence (capped at kPeriodCap).
  virtual std::optional<std::uint64_t> period() const { return std::nullopt; }

  // Horizons where the partial average is locally extremal (block
  // boundaries, squares, ...).
  virtual void structural_points(std::uint64_t /*horizon*/, std::vector<std::uint64_t>& /*out*/) const {}

  virtual std::vector<SetExpr> children() const { return {}; }

  // Compares node-local fields of two nodes of the same kind.
  virtual bool same_fields(const Node& other) const = 0;

  std::uint64_t stream_count(std::uint64_t n) const {
    check_horizon(n);
    auto c = cursor();
    std::uint64_t total = 0;
    for (std::uint64_t i = 1; i <= n; ++i) total += c->next() ? 1 : 0;
    return total;
  }
};

namespace detail {

class ContainsCursor final : public Cursor {
 public:
  explicit ContainsCursor(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  bool next() override { return node_->contains(++n_); }

 private:
  std::shared_ptr<const Node> node_;
  std::uint64_t n_ = 0;
};

class MemoCursor final : public Cursor {
 public:
  MemoCursor(std::shared_ptr<const Node> owner, const MemoBits& bits)
      : owner_(std::move(owner)), bits_(bits) {}
  bool next() override {
    if (pos_ % 64 == 0) word_ = bits_.word(pos_ / 64);
    bool b = (word_ >> (pos_ % 64)) & 1u;
    ++pos_;
    return b;
  }

 private:
  std::shared_ptr<const Node> owner_;  // keeps bits_ alive
  const MemoBits& bits_;
  std::uint64_t word_ = 0;
  std::uint64_t pos_ = 0;
};

}  // namespace detail

inline std::unique_ptr<Cursor> Node::cursor() const {
  return std::make_unique<detail::ContainsCursor>(shared_from_this());
}

inline Kind SetExpr::kind() const { return node_->kind(); }

inline bool SetExpr::contains(std::uint64_t n) const {
  if (n == 0) throw PreconditionError("membership queried at n = 0; indices start at 1");
  check_horizon(n);
  return node_->contains(n);
}

inline std::uint64_t SetExpr::count(std::uint64_t n) const {
  check_horizon(n);
  if (n == 0) return 0;
  return node_->count(n);
}

inline std::unique_ptr<Cursor> SetExpr::cursor() const { return node_->cursor(); }

// ---------------------------------------------------------------------------
// Leaf nodes

class FiniteNode final : public Node {
 public:
  explicit FiniteNode(std::vector<std::uint64_t> elems) : elems_(std::move(elems)) {
    for (std::size_t i = 0; i < elems_.size(); ++i) {
      if (elems_[i] == 0) throw SemanticError("finite sets hold positive integers");
      if (i > 0 && elems_[i] <= elems_[i - 1])
        throw SemanticError("finite set elements must be strictly increasing");
    }
  }
  Kind kind() const override { return Kind::Finite; }
  const std::vector<std::uint64_t>& elements() const noexcept { return elems_; }

  bool contains(std::uint64_t n) const override {
    return std::binary_search(elems_.begin(), elems_.end(), n);
  }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override {
    return static_cast<std::uint64_t>(std::upper_bound(elems_.begin(), elems_.end(), n) -
                                      elems_.begin());
  }
  std::optional<std::uint64_t> period() const override {
    if (elems_.empty()) return 1;
    return std::nullopt;
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::shared_ptr<const FiniteNode> self;
      std::size_t idx = 0;
      std::uint64_t n = 0;
      bool next() override {
        ++n;
        if (idx < self->elems_.size() && self->elems_[idx] == n) {
          ++idx;
          return true;
        }
        return false;
      }
    };
    auto c = std::make_unique<C>();
    c->self = std::static_pointer_cast<const FiniteNode>(shared_from_this());
    return c;
  }
  bool same_fields(const Node& o) const override {
    return elems_ == static_cast<const FiniteNode&>(o).elems_;
  }

 private:
  std::vector<std::uint64_t> elems_;
};

// {n : n ≡ r (mod m)}
class ResidueNode final : public Node {
 public:
  ResidueNode(std::uint64_t r, std::uint64_t m) : r_(r), m_(m) {
    if (m == 0) throw SemanticError("residue modulus must be >= 1");
    if (r >= m)
      throw SemanticError("residue " + std::to_string(r) + " must be < modulus " + std::to_string(m));
  }
  Kind kind() const override { return Kind::Residue; }
  std::uint64_t residue() const noexcept { return r_; }
  std::uint64_t modulus() const noexcept { return m_; }

  bool contains(std::uint64_t n) const override { return n % m_ == r_; }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override {
    if (r_ == 0) return n / m_;
    return n >= r_ ? (n - r_) / m_ + 1 : 0;
  }
  std::optional<std::uint64_t> period() const override {
    if (m_ > kPeriodCap) return std::nullopt;
    return m_;
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::uint64_t r, m, cur = 0;
      bool next() override {
        cur = cur + 1 == m ? 0 : cur + 1;
        return cur == r;
      }
    };
    auto c = std::make_unique<C>();
    c->r = r_;
    c->m = m_;
    c->cur = 0;
    return c;
  }
  bool same_fields(const Node& o) const override {
    const auto& x = static_cast<const ResidueNode&>(o);
    return r_ == x.r_ && m_ == x.m_;
  }

 private:
  std::uint64_t r_, m_;
};

class BlocksNode final : public Node {
 public:
  explicit BlocksNode(BlockSpec spec) : spec_(std::move(spec)) {}
  Kind kind() const override { return Kind::Blocks; }
  const BlockSpec& spec() const noexcept { return spec_; }

  bool contains(std::uint64_t n) const override { return spec_.contains(n); }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override { return spec_.count(n); }
  std::optional<std::uint64_t> period() const override {
    if (spec_.rule() == BlockSpec::Rule::Explicit && spec_.head().empty()) {
      std::uint64_t len = 0;
      for (auto z : spec_.tail()) len += z;
      if (spec_.tail().size() % 2 == 1) len *= 2;
      if (len <= kPeriodCap) return len;
    }
    if (spec_.rule() == BlockSpec::Rule::Geometric && spec_.base() == 1 && 2 * spec_.scale() <= kPeriodCap)
      return 2 * spec_.scale();
    return std::nullopt;
  }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    auto b = spec_.boundaries(horizon, 4096);
    out.insert(out.end(), b.begin(), b.end());
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::shared_ptr<const BlocksNode> self;
      std::uint64_t n = 0, block = 0, end = 0;
      bool next() override {
        ++n;
        while (n > end) {
          ++block;
          end += self->spec_.z(block);
        }
        return block % 2 == 0;
      }
    };
    auto c = std::make_unique<C>();
    c->self = std::static_pointer_cast<const BlocksNode>(shared_from_this());
    return c;
  }
  bool same_fields(const Node& o) const override {
    return spec_ == static_cast<const BlocksNode&>(o).spec_;
  }

 private:
  BlockSpec spec_;
};

// Registered null sets: squares, cubes, powers of a base (including b^0 = 1),
// and primes.
class NullFamilyNode final : public Node {
 public:
  NullFamilyNode(NullKind k, std::uint64_t base = 0) : kind_(k), base_(base) {
    if (k == NullKind::Powers && base < 2) throw SemanticError("powers(b) needs b >= 2");
    if (k != NullKind::Powers) base_ = 0;
  }
  Kind kind() const override { return Kind::NullFamily; }
  NullKind family() const noexcept { return kind_; }
  std::uint64_t base() const noexcept { return base_; }

  bool contains(std::uint64_t n) const override {
    switch (kind_) {
      case NullKind::Squares: {
        auto r = arith::isqrt(n);
        return r * r == n;
      }
      case NullKind::Cubes: {
        auto r = arith::icbrt(n);
        return r * r * r == n;
      }
      case NullKind::Powers:
        while (n % base_ == 0) n /= base_;
        return n == 1;
      case NullKind::Primes:
        return arith::is_prime(n);
    }
    return false;
  }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override {
    switch (kind_) {
      case NullKind::Squares: return arith::isqrt(n);
      case NullKind::Cubes: return arith::icbrt(n);
      case NullKind::Powers: return n == 0 ? 0 : arith::ilog(n, base_) + 1;
      case NullKind::Primes: return SegmentedSieve::count(n);
    }
    return 0;
  }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    switch (kind_) {
      case NullKind::Squares:
        for (std::uint64_t m = 1; m * m <= horizon && out.size() < 100000; ++m) out.push_back(m * m);
        break;
      case NullKind::Cubes:
        for (std::uint64_t m = 1; m * m * m <= horizon; ++m) out.push_back(m * m * m);
        break;
      case NullKind::Powers:
        for (u128 p = 1; p <= horizon; p *= base_) out.push_back(static_cast<std::uint64_t>(p));
        break;
      case NullKind::Primes:
        break;
    }
  }
  std::unique_ptr<Cursor> cursor() const override {
    if (kind_ == NullKind::Primes) {
      struct C final : Cursor {
        SegmentedSieve sieve;
        std::uint64_t n = 0, hi = 0;
        bool next() override {
          ++n;
          if (n > hi) {
            hi = n + SegmentedSieve::kSegment - 1;
            sieve.sieve(n, hi);
          }
          return sieve.is_prime_in_segment(n);
        }
      };
      return std::make_unique<C>();
    }
    struct C final : Cursor {
      std::shared_ptr<const NullFamilyNode> self;
      std::uint64_t n = 0, idx = 0, next_member = 1;
      bool next() override {
        ++n;
        if (n != next_member) return false;
        ++idx;
        next_member = self->member(idx + 1);
        return true;
      }
    };
    auto c = std::make_unique<C>();
    c->self = std::static_pointer_cast<const NullFamilyNode>(shared_from_this());
    return c;
  }
  bool same_fields(const Node& o) const override {
    const auto& x = static_cast<const NullFamilyNode&>(o);
    return kind_ == x.kind_ && base_ == x.base_;
  }

 private:
  // i-th member (1-based) for squares, cubes, powers; saturates.
  std::uint64_t member(std::uint64_t i) const {
    switch (kind_) {
      case NullKind::Squares: return arith::pow_checked(i, 2).value_or(kMaxHorizon);
      case NullKind::Cubes: return arith::pow_checked(i, 3).value_or(kMaxHorizon);
      case NullKind::Powers:
        return arith::pow_checked(base_, static_cast<unsigned>(std::min<std::uint64_t>(i - 1, 64)))
            .value_or(kMaxHorizon);
      case NullKind::Primes: break;
    }
    return kMaxHorizon;
  }

  NullKind kind_;
  std::uint64_t base_;
};

// Membership given by an opaque oracle declared pure; results are cached.
class PredicateNode final : public Node {
 public:
  PredicateNode(std::string name, std::function<bool(std::uint64_t)> fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}
  Kind kind() const override { return Kind::Predicate; }
  const std::string& name() const noexcept { return name_; }
  const std::function<bool(std::uint64_t)>& oracle() const noexcept { return fn_; }

  bool contains(std::uint64_t n) const override {
    {
      std::lock_guard lock(mu_);
      if (auto it = cache_.find(n); it != cache_.end()) return it->second;
    }
    bool v;
    try {
      v = fn_(n);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw EvaluationError("predicate '" + name_ + "' failed at n = " + std::to_string(n) + ": " +
                            e.what());
    }
    std::lock_guard lock(mu_);
    cache_.emplace(n, v);
    return v;
  }
  bool same_fields(const Node& o) const override {
    return name_ == static_cast<const PredicateNode&>(o).name_;
  }

 private:
  std::string name_;
  std::function<bool(std::uint64_t)> fn_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::uint64_t, bool> cache_;
};

// ---------------------------------------------------------------------------
// Combinators

// Exactly one of {2k-1, 2k} is a member: 2k when k ∈ A, 2k-1 otherwise.
class InterleaveNode final : public Node {
 public:
  explicit InterleaveNode(SetExpr inner) : inner_(std::move(inner)) {}
  Kind kind() const override { return Kind::Interleave; }
  const SetExpr& inner() const noexcept { return inner_; }

  bool contains(std::uint64_t n) const override {
    if (n % 2 == 0) return inner_.contains(n / 2);
    return !inner_.contains((n + 1) / 2);
  }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override {
    return n / 2 + ((n % 2 == 1 && !inner_.contains((n + 1) / 2)) ? 1 : 0);
  }
  std::optional<std::uint64_t> period() const override {
    auto p = inner_.node().period();
    if (!p || 2 * *p > kPeriodCap) return std::nullopt;
    return 2 * *p;
  }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    std::vector<std::uint64_t> in;
    inner_.node().structural_points(horizon / 2, in);
    for (auto p : in) out.push_back(2 * p);
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::unique_ptr<Cursor> inner;
      bool pending = false, have = false;
      bool next() override {
        if (have) {
          have = false;
          return pending;
        }
        pending = inner->next();
        have = true;
        return !pending;
      }
    };
    auto c = std::make_unique<C>();
    c->inner = inner_.cursor();
    return c;
  }
  std::vector<SetExpr> children() const override { return {inner_}; }
  bool same_fields(const Node&) const override { return true; }

 private:
  SetExpr inner_;
};

// {k·n : n ∈ A}
class DilateNode final : public Node {
 public:
  DilateNode(std::uint64_t k, SetExpr inner) : k_(k), inner_(std::move(inner)) {
    if (k == 0) throw SemanticError("dilation factor must be >= 1");
  }
  Kind kind() const override { return Kind::Dilate; }
  std::uint64_t factor() const noexcept { return k_; }
  const SetExpr& inner() const noexcept { return inner_; }

  bool contains(std::uint64_t n) const override { return n % k_ == 0 && inner_.contains(n / k_); }
  bool has_fast_count() const override { return inner_.node().has_fast_count(); }
  std::uint64_t count(std::uint64_t n) const override { return inner_.count(n / k_); }
  std::optional<std::uint64_t> period() const override {
    auto p = inner_.node().period();
    if (!p) return std::nullopt;
    auto kp = arith::mul_checked(k_, *p);
    if (!kp || *kp > kPeriodCap) return std::nullopt;
    return *kp;
  }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    std::vector<std::uint64_t> in;
    inner_.node().structural_points(horizon / k_, in);
    for (auto p : in) out.push_back(k_ * p);
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::unique_ptr<Cursor> inner;
      std::uint64_t k, phase = 0;
      bool next() override {
        if (++phase < k) return false;
        phase = 0;
        return inner->next();
      }
    };
    auto c = std::make_unique<C>();
    c->inner = inner_.cursor();
    c->k = k_;
    return c;
  }
  std::vector<SetExpr> children() const override { return {inner_}; }
  bool same_fields(const Node& o) const override { return k_ == static_cast<const DilateNode&>(o).k_; }

 private:
  std::uint64_t k_;
  SetExpr inner_;
};

class ComplementNode final : public Node {
 public:
  explicit ComplementNode(SetExpr inner) : inner_(std::move(inner)) {}
  Kind kind() const override { return Kind::Complement; }
  const SetExpr& inner() const noexcept { return inner_; }

  bool contains(std::uint64_t n) const override { return !inner_.contains(n); }
  bool has_fast_count() const override { return inner_.node().has_fast_count(); }
  std::uint64_t count(std::uint64_t n) const override { return n - inner_.count(n); }
  std::optional<std::uint64_t> period() const override { return inner_.node().period(); }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    inner_.node().structural_points(horizon, out);
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::unique_ptr<Cursor> inner;
      bool next() override { return !inner->next(); }
    };
    auto c = std::make_unique<C>();
    c->inner = inner_.cursor();
    return c;
  }
  std::vector<SetExpr> children() const override { return {inner_}; }
  bool same_fields(const Node&) const override { return true; }

 private:
  SetExpr inner_;
};

// Union / Intersection / Difference / SymmDiff. Counts use one streaming
// pass, or the exact period count when both operands are periodic.
class BinaryNode final : public Node {
 public:
  BinaryNode(Kind op, SetExpr left, SetExpr right)
      : op_(op), left_(std::move(left)), right_(std::move(right)) {
    auto pl = left_.node().period();
    auto pr = right_.node().period();
    if (pl && pr) period_ = arith::lcm_capped(*pl, *pr, kPeriodCap);
  }
  Kind kind() const override { return op_; }
  const SetExpr& left() const noexcept { return left_; }
  const SetExpr& right() const noexcept { return right_; }

  bool apply(bool a, bool b) const {
    switch (op_) {
      case Kind::Union: return a || b;
      case Kind::Intersection: return a && b;
      case Kind::Difference: return a && !b;
      default: return a != b;
    }
  }

  bool contains(std::uint64_t n) const override { return apply(left_.contains(n), right_.contains(n)); }
  bool has_fast_count() const override { return period_.has_value(); }
  std::uint64_t count(std::uint64_t n) const override {
    if (!period_) return stream_count(n);
    const auto& table = period_table();
    std::uint64_t p = *period_;
    return (n / p) * table[p] + table[n % p];
  }
  std::optional<std::uint64_t> period() const override { return period_; }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    left_.node().structural_points(horizon, out);
    right_.node().structural_points(horizon, out);
  }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::shared_ptr<const BinaryNode> self;
      std::unique_ptr<Cursor> l, r;
      bool next() override { return self->apply(l->next(), r->next()); }
    };
    auto c = std::make_unique<C>();
    c->self = std::static_pointer_cast<const BinaryNode>(shared_from_this());
    c->l = left_.cursor();
    c->r = right_.cursor();
    return c;
  }
  std::vector<SetExpr> children() const override { return {left_, right_}; }
  bool same_fields(const Node&) const override { return true; }

  // table[i] = members among 1..i, for i in [0, period].
  const std::vector<std::uint32_t>& period_table() const {
    std::call_once(table_once_, [this] {
      std::uint64_t p = *period_;
      table_.resize(p + 1);
      auto c = cursor();
      table_[0] = 0;
      for (std::uint64_t i = 1; i <= p; ++i) table_[i] = table_[i - 1] + (c->next() ? 1 : 0);
    });
    return table_;
  }

 private:
  Kind op_;
  SetExpr left_, right_;
  std::optional<std::uint64_t> period_;
  mutable std::once_flag table_once_;
  mutable std::vector<std::uint32_t> table_;
};

// ---------------------------------------------------------------------------
// Memoized stream nodes

// Greedy target-density construction: 1 is a member, and for N >= 2 the
// integer N+1 joins exactly when the running average at N is below the target.
class GreedyNode final : public Node {
 public:
  explicit GreedyNode(Target target)
      : target_(std::move(target)), bits_(make_step(target_)) {}
  Kind kind() const override { return Kind::Greedy; }
  const Target& target() const noexcept { return target_; }

  bool contains(std::uint64_t n) const override { return bits_.get(n); }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override { return bits_.count(n); }
  std::unique_ptr<Cursor> cursor() const override {
    return std::make_unique<detail::MemoCursor>(shared_from_this(), bits_);
  }
  bool same_fields(const Node& o) const override {
    return target_ == static_cast<const GreedyNode&>(o).target_;
  }

 private:
  static std::function<bool(std::uint64_t)> make_step(const Target& t) {
    auto count = std::make_shared<std::uint64_t>(0);
    return [t, count](std::uint64_t n) {
      bool member;
      if (n == 1) {
        member = true;
      } else if (n == 2) {
        member = false;  // no decision is taken at N = 1
      } else {
        member = t.exceeds(*count, n - 1);
      }
      if (member) ++*count;
      return member;
    };
  }

  Target target_;
  MemoBits bits_;
};

// B together with every second element (the 1st, 3rd, 5th, ...) of C \ B
// listed in increasing order.
class MidpointNode final : public Node {
 public:
  MidpointNode(SetExpr lower, SetExpr upper)
      : lower_(std::move(lower)), upper_(std::move(upper)), bits_(make_step(lower_, upper_)) {}
  Kind kind() const override { return Kind::Midpoint; }
  const SetExpr& lower() const noexcept { return lower_; }
  const SetExpr& upper() const noexcept { return upper_; }

  bool contains(std::uint64_t n) const override { return bits_.get(n); }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override { return bits_.count(n); }
  std::unique_ptr<Cursor> cursor() const override {
    return std::make_unique<detail::MemoCursor>(shared_from_this(), bits_);
  }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    lower_.node().structural_points(horizon, out);
    upper_.node().structural_points(horizon, out);
  }
  std::vector<SetExpr> children() const override { return {lower_, upper_}; }
  bool same_fields(const Node&) const override { return true; }

 private:
  static std::function<bool(std::uint64_t)> make_step(const SetExpr& b, const SetExpr& c) {
    struct State {
      std::unique_ptr<Cursor> lower, upper;
      bool take_next = true;
    };
    auto st = std::make_shared<State>();
    // Cursors are created lazily so construction stays cheap.
    return [st, b, c](std::uint64_t) {
      if (!st->lower) {
        st->lower = b.cursor();
        st->upper = c.cursor();
      }
      bool in_b = st->lower->next();
      bool in_c = st->upper->next();
      if (in_b) return true;
      if (!in_c) return false;
      bool take = st->take_next;
      st->take_next = !st->take_next;
      return take;
    };
  }

  SetExpr lower_, upper_;
  MemoBits bits_;
};

// The set A' kept by the null-modification stream: N ∈ A is kept unless
// keeping it would push the partial average of A' above the target.
class NullModKeptNode final : public Node {
 public:
  NullModKeptNode(SetExpr source, Rational target)
      : source_(std::move(source)), target_(target), bits_(make_step(source_, target_)) {
    if (target < Rational(0) || target > Rational(1))
      throw SemanticError("null-modification target " + target.str() + " outside [0,1]");
  }
  Kind kind() const override { return Kind::NullModKept; }
  const SetExpr& source() const noexcept { return source_; }
  const Rational& target() const noexcept { return target_; }

  bool contains(std::uint64_t n) const override { return bits_.get(n); }
  bool has_fast_count() const override { return true; }
  std::uint64_t count(std::uint64_t n) const override { return bits_.count(n); }
  std::unique_ptr<Cursor> cursor() const override {
    return std::make_unique<detail::MemoCursor>(shared_from_this(), bits_);
  }
  void structural_points(std::uint64_t horizon, std::vector<std::uint64_t>& out) const override {
    source_.node().structural_points(horizon, out);
  }
  std::vector<SetExpr> children() const override { return {source_}; }
  bool same_fields(const Node& o) const override {
    return target_ == static_cast<const NullModKeptNode&>(o).target_;
  }

 private:
  static std::function<bool(std::uint64_t)> make_step(const SetExpr& a, Rational t) {
    struct State {
      std::unique_ptr<Cursor> src;
      std::uint64_t kept = 0;
    };
    auto st = std::make_shared<State>();
    return [st, a, t](std::uint64_t n) {
      if (!st->src) st->src = a.cursor();
      if (!st->src->next()) return false;
      // keep n unless (kept + 1) / n > t
      i128 lhs = static_cast<i128>(st->kept + 1) * t.den();
      i128 rhs = static_cast<i128>(n) * t.num();
      if (lhs > rhs) return false;
      ++st->kept;
      return true;
    };
  }

  SetExpr source_;
  Rational target_;
  MemoBits bits_;
};

// F = A \ A', the part removed by the null-modification stream.
class NullModRemovedNode final : public Node {
 public:
  explicit NullModRemovedNode(SetExpr kept) : kept_(std::move(kept)) {
    if (kept_.kind() != Kind::NullModKept)
      throw SemanticError("removed-part node needs a kept-part node");
  }
  Kind kind() const override { return Kind::NullModRemoved; }
  const NullModKeptNode& kept_node() const { return static_cast<const NullModKeptNode&>(kept_.node()); }
  const SetExpr& kept() const noexcept { return kept_; }
  const SetExpr& source() const { return kept_node().source(); }
  const Rational& target() const { return kept_node().target(); }

  bool contains(std::uint64_t n) const override { return source().contains(n) && !kept_.contains(n); }
  bool has_fast_count() const override { return source().node().has_fast_count(); }
  std::uint64_t count(std::uint64_t n) const override { return source().count(n) - kept_.count(n); }
  std::unique_ptr<Cursor> cursor() const override {
    struct C final : Cursor {
      std::unique_ptr<Cursor> a, kept;
      bool next() override {
        bool in_a = a->next();
        bool in_k = kept->next();
        return in_a && !in_k;
      }
    };
    auto c = std::make_unique<C>();
    c->a = source().cursor();
    c->kept = kept_.cursor();
    return c;
  }
  std::vector<SetExpr> children() const override { return {source()}; }
  bool same_fields(const Node& o) const override {
    return target() == static_cast<const NullModRemovedNode&>(o).target();
  }

 private:
  SetExpr kept_;
};

// ---------------------------------------------------------------------------
// Factories

namespace sets {

inline SetExpr finite(std::vector<std::uint64_t> elems, bool normalize = true) {
  if (normalize) {
    std::sort(elems.begin(), elems.end());
    elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  }
  return SetExpr(std::make_shared<FiniteNode>(std::move(elems)));
}
inline SetExpr empty() { return finite({}); }
inline SetExpr residue(std::uint64_t r, std::uint64_t m) {
  return SetExpr(std::make_shared<ResidueNode>(r, m));
}
inline SetExpr naturals() { return residue(0, 1); }
inline SetExpr multiples(std::uint64_t m) { return residue(0, m); }
inline SetExpr evens() { return residue(0, 2); }
inline SetExpr odds() { return residue(1, 2); }
inline SetExpr blocks(BlockSpec spec) { return SetExpr(std::make_shared<BlocksNode>(std::move(spec))); }
inline SetExpr squares() { return SetExpr(std::make_shared<NullFamilyNode>(NullKind::Squares)); }
inline SetExpr cubes() { return SetExpr(std::make_shared<NullFamilyNode>(NullKind::Cubes)); }
inline SetExpr powers(std::uint64_t b) {
  return SetExpr(std::make_shared<NullFamilyNode>(NullKind::Powers, b));
}
inline SetExpr primes() { return SetExpr(std::make_shared<NullFamilyNode>(NullKind::Primes)); }
inline SetExpr interleave(SetExpr a) { return SetExpr(std::make_shared<InterleaveNode>(std::move(a))); }
inline SetExpr dilate(std::uint64_t k, SetExpr a) {
  return SetExpr(std::make_shared<DilateNode>(k, std::move(a)));
}
inline SetExpr complement(SetExpr a) { return SetExpr(std::make_shared<ComplementNode>(std::move(a))); }
inline SetExpr binary(Kind op, SetExpr a, SetExpr b) {
  return SetExpr(std::make_shared<BinaryNode>(op, std::move(a), std::move(b)));
}
inline SetExpr set_union(SetExpr a, SetExpr b) { return binary(Kind::Union, std::move(a), std::move(b)); }
inline SetExpr intersection(SetExpr a, SetExpr b) {
  return binary(Kind::Intersection, std::move(a), std::move(b));
}
inline SetExpr difference(SetExpr a, SetExpr b) {
  return binary(Kind::Difference, std::move(a), std::move(b));
}
inline SetExpr symm_diff(SetExpr a, SetExpr b) { return binary(Kind::SymmDiff, std::move(a), std::move(b)); }
inline SetExpr predicate(std::string name, std::function<bool(std::uint64_t)> fn) {
  return SetExpr(std::make_shared<PredicateNode>(std::move(name), std::move(fn)));
}
inline SetExpr greedy(Target t) { return SetExpr(std::make_shared<GreedyNode>(std::move(t))); }
inline SetExpr midpoint(SetExpr lower, SetExpr upper) {
  return SetExpr(std::make_shared<MidpointNode>(std::move(lower), std::move(upper)));
}
inline SetExpr nullmod_kept(SetExpr a, Rational target) {
  return SetExpr(std::make_shared<NullModKeptNode>(std::move(a), target));
}
inline SetExpr nullmod_removed(SetExpr kept) {
  return SetExpr(std::make_shared<NullModRemovedNode>(std::move(kept)));
}

// Union of a non-empty list, folded left.
inline SetExpr union_all(const std::vector<SetExpr>& parts) {
  if (parts.empty()) return empty();
  SetExpr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = set_union(acc, parts[i]);
  return acc;
}

}  // namespace sets

inline SetExpr operator|(const SetExpr& a, const SetExpr& b) { return sets::set_union(a, b); }
inline SetExpr operator&(const SetExpr& a, const SetExpr& b) { return sets::intersection(a, b); }
inline SetExpr operator-(const SetExpr& a, const SetExpr& b) { return sets::difference(a, b); }
inline SetExpr operator^(const SetExpr& a, const SetExpr& b) { return sets::symm_diff(a, b); }
inline SetExpr operator~(const SetExpr& a) { return sets::complement(a); }

// ---------------------------------------------------------------------------
// Queries

inline bool is_binary(Kind k) {
  return k == Kind::Union || k == Kind::Intersection || k == Kind::Difference || k == Kind::SymmDiff;
}

inline bool structurally_equal(const SetExpr& a, const SetExpr& b) {
  if (a.ptr() == b.ptr()) return true;
  if (a.kind() != b.kind()) return false;
  if (!a.node().same_fields(b.node())) return false;
  auto ca = a.node().children();
  auto cb = b.node().children();
  if (ca.size() != cb.size()) return false;
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (!structurally_equal(ca[i], cb[i])) return false;
  return true;
}

inline bool contains(const SetExpr& e, std::uint64_t n) { return e.contains(n); }

struct PrefixCount {
  std::uint64_t horizon;
  std::uint64_t count;
};

inline PrefixCount prefix_count(const SetExpr& e, std::uint64_t n) {
  if (n == 0) throw PreconditionError("prefix counts need a horizon >= 1");
  return {n, e.count(n)};
}

// Brute-force count through the cursor; the oracle for the fast paths.
inline std::uint64_t streaming_count(const SetExpr& e, std::uint64_t n) {
  return e.node().stream_count(n);
}

struct SubsetResult {
  bool holds;
  std::optional<std::uint64_t> counterexample;  // least n in A \ B
  explicit operator bool() const noexcept { return holds; }
};

// A ∩ {1..n} ⊆ B ∩ {1..n}
inline SubsetResult subset_upto(const SetExpr& a, const SetExpr& b, std::uint64_t n) {
  if (n == 0) throw PreconditionError("subset check needs a horizon >= 1");
  check_horizon(n);
  auto ca = a.cursor();
  auto cb = b.cursor();
  for (std::uint64_t i = 1; i <= n; ++i) {
    bool in_a = ca->next();
    bool in_b = cb->next();
    if (in_a && !in_b) return {false, i};
  }
  return {true, std::nullopt};
}

// Inclusion provable from structure alone (residue divisibility, finite
// lists, trivial bounds). False means "not proven", not "not a subset".
inline bool symbolic_subset(const SetExpr& a, const SetExpr& b) {
  if (structurally_equal(a, b)) return true;
  if (b.kind() == Kind::Residue && static_cast<const ResidueNode&>(b.node()).modulus() == 1) return true;
  switch (a.kind()) {
    case Kind::Finite: {
      const auto& fa = static_cast<const FiniteNode&>(a.node()).elements();
      if (fa.empty()) return true;
      if (b.kind() == Kind::Finite || b.kind() == Kind::Residue)
        return std::all_of(fa.begin(), fa.end(), [&](std::uint64_t x) { return b.contains(x); });
      break;
    }
    case Kind::Residue:
      if (b.kind() == Kind::Residue) {
        const auto& ra = static_cast<const ResidueNode&>(a.node());
        const auto& rb = static_cast<const ResidueNode&>(b.node());
        return ra.modulus() % rb.modulus() == 0 && ra.residue() % rb.modulus() == rb.residue();
      }
      break;
    // Shrinking the left side first: every rule below is sound, and the
    // union split is exact.
    case Kind::Union: {
      const auto& u = static_cast<const BinaryNode&>(a.node());
      return symbolic_subset(u.left(), b) && symbolic_subset(u.right(), b);
    }
    case Kind::Intersection: {
      const auto& u = static_cast<const BinaryNode&>(a.node());
      if (symbolic_subset(u.left(), b) || symbolic_subset(u.right(), b)) return true;
      break;
    }
    case Kind::Difference:
      if (symbolic_subset(static_cast<const BinaryNode&>(a.node()).left(), b)) return true;
      break;
    case Kind::NullModKept:
      if (symbolic_subset(static_cast<const NullModKeptNode&>(a.node()).source(), b)) return true;
      break;
    case Kind::NullModRemoved:
      if (symbolic_subset(static_cast<const NullModRemovedNode&>(a.node()).source(), b)) return true;
      break;
    case Kind::Midpoint: {
      // B ⊆ M ⊆ B ∪ C
      const auto& m = static_cast<const MidpointNode&>(a.node());
      if (symbolic_subset(m.lower(), b) && symbolic_subset(m.upper(), b)) return true;
      break;
    }
    case Kind::Dilate:
      if (b.kind() == Kind::Dilate) {
        const auto& da = static_cast<const DilateNode&>(a.node());
        const auto& db = static_cast<const DilateNode&>(b.node());
        if (da.factor() == db.factor() && symbolic_subset(da.inner(), db.inner())) return true;
      }
      break;
    default:
      break;
  }
  if (b.kind() == Kind::Union) {
    const auto& u = static_cast<const BinaryNode&>(b.node());
    return symbolic_subset(a, u.left()) || symbolic_subset(a, u.right());
  }
  if (b.kind() == Kind::Intersection) {
    const auto& u = static_cast<const BinaryNode&>(b.node());
    return symbolic_subset(a, u.left()) && symbolic_subset(a, u.right());
  }
  if (b.kind() == Kind::Midpoint) return symbolic_subset(a, static_cast<const MidpointNode&>(b.node()).lower());
  return false;
}

// Sorted, de-duplicated structural checkpoints up to the horizon.
inline std::vector<std::uint64_t> structural_points(const SetExpr& e, std::uint64_t horizon) {
  std::vector<std::uint64_t> pts;
  e.node().structural_points(horizon, pts);
  std::erase_if(pts, [&](std::uint64_t p) { return p == 0 || p > horizon; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace cesaro
