#pragma once

#include <random>
#include <vector>

#include "cesaro/dsl.hpp"
#include "cesaro/set_expr.hpp"

namespace cesaro::fixtures {

// Random structured expressions for oracle and round-trip checks.
class Corpus {
 public:
  explicit Corpus(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }

  SetExpr leaf() {
    switch (uniform(0, 11)) {
      case 0: {
        std::uint64_t m = uniform(1, 12);
        return sets::residue(uniform(0, m - 1), m);
      }
      case 1: {
        std::vector<std::uint64_t> xs;
        for (std::uint64_t i = uniform(0, 5); i > 0; --i) xs.push_back(uniform(1, 200));
        return sets::finite(xs);
      }
      case 2: return sets::blocks(BlockSpec::geometric(uniform(1, 3), uniform(1, 3)));
      case 3: return sets::blocks(BlockSpec::power(static_cast<unsigned>(uniform(1, 3))));
      case 4: return sets::blocks(BlockSpec::explicit_list({uniform(0, 3), uniform(1, 4)}, {uniform(1, 5), uniform(1, 5), uniform(1, 5)}));
      case 5: return sets::squares();
      case 6: return sets::cubes();
      case 7: return sets::powers(uniform(2, 3));
      case 8: return sets::primes();
      case 9: {
        std::int64_t d = static_cast<std::int64_t>(uniform(1, 9));
        return sets::greedy(Target(Rational(static_cast<std::int64_t>(uniform(0, static_cast<std::uint64_t>(d))), d)));
      }
      case 10: return sets::dilate(uniform(1, 4), sets::residue(uniform(0, 2), 3));
      default: return sets::interleave(sets::residue(0, uniform(1, 5)));
    }
  }

  SetExpr expr(int depth) {
    if (depth <= 0 || uniform(0, 3) == 0) return leaf();
    switch (uniform(0, 9)) {
      case 0: return sets::complement(expr(depth - 1));
      case 1: return sets::dilate(uniform(1, 3), expr(depth - 1));
      case 2: return sets::interleave(expr(depth - 1));
      case 3: {
        std::uint64_t m = uniform(1, 6);
        SetExpr c = sets::residue(0, m);
        return sets::midpoint(sets::residue(0, m * uniform(1, 3)), c);
      }
      case 4: return sets::nullmod_kept(expr(depth - 1), Rational(static_cast<std::int64_t>(uniform(1, 4)), 4));
      case 5: return sets::set_union(expr(depth - 1), expr(depth - 1));
      case 6: return sets::intersection(expr(depth - 1), expr(depth - 1));
      case 7: return sets::difference(expr(depth - 1), expr(depth - 1));
      case 8: return sets::symm_diff(expr(depth - 1), expr(depth - 1));
      default: return sets::nullmod_removed(sets::nullmod_kept(expr(depth - 1), Rational(1, 2)));
    }
  }

  // Random Boolean combination of residue classes with moduli <= max_mod.
  SetExpr residue_algebra(int depth, std::uint64_t max_mod) {
    if (depth <= 0 || uniform(0, 2) == 0) {
      std::uint64_t m = uniform(1, max_mod);
      return sets::residue(uniform(0, m - 1), m);
    }
    switch (uniform(0, 4)) {
      case 0: return sets::complement(residue_algebra(depth - 1, max_mod));
      case 1: return sets::set_union(residue_algebra(depth - 1, max_mod), residue_algebra(depth - 1, max_mod));
      case 2: return sets::intersection(residue_algebra(depth - 1, max_mod), residue_algebra(depth - 1, max_mod));
      case 3: return sets::difference(residue_algebra(depth - 1, max_mod), residue_algebra(depth - 1, max_mod));
      default: return sets::symm_diff(residue_algebra(depth - 1, max_mod), residue_algebra(depth - 1, max_mod));
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace cesaro::fixtures
