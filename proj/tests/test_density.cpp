#include <gtest/gtest.h>

#include "cesaro/constructions.hpp"
#include "cesaro/props.hpp"

using namespace cesaro;

TEST(PartialAverage, Examples) {
  EXPECT_EQ(partial_average(sets::residue(0, 3), 10), Rational(3, 10));
  EXPECT_EQ(partial_average(sets::odds(), 7), Rational(4, 7));
  SetExpr g = geometric_blocks();
  for (std::uint64_t n = 1; n <= 20; ++n) {
    std::uint64_t z2n = (1ull << (2 * n)) - 1;
    EXPECT_EQ(partial_average(g, z2n), Rational(2, 3) * Rational::ratio(z2n, z2n));
  }
  EXPECT_THROW(partial_average(sets::odds(), 0), PreconditionError);
}

TEST(ExactCharge, Examples) {
  auto c = exact_charge(sets::evens() | sets::multiples(3));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->value, Rational(2, 3));
  EXPECT_EQ(c->provenance, Provenance::PeriodCount);

  c = exact_charge(sets::blocks(BlockSpec::power(2)));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->value, Rational(1, 2));
  EXPECT_EQ(c->provenance, Provenance::BlockFormula);

  c = exact_charge(~sets::powers(2));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->value, Rational(1));
}

TEST(ExactCharge, RuleTable) {
  EXPECT_EQ(exact_charge(sets::finite({1, 5, 9}))->value, Rational(0));
  EXPECT_EQ(exact_charge(sets::residue(2, 7))->value, Rational(1, 7));
  for (auto n : {sets::squares(), sets::cubes(), sets::powers(3), sets::primes()}) {
    auto c = exact_charge(n);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->value, Rational(0));
    EXPECT_EQ(c->provenance, Provenance::RegisteredNull);
  }
  EXPECT_EQ(exact_charge(sets::dilate(3, sets::odds()))->value, Rational(1, 6));
  EXPECT_EQ(exact_charge(sets::evens() | sets::primes())->value, Rational(1, 2));
  EXPECT_EQ(exact_charge(sets::odds() - sets::squares())->value, Rational(1, 2));
  EXPECT_EQ(exact_charge(sets::interleave(geometric_blocks()))->value, Rational(1, 2));
  EXPECT_EQ(exact_charge(sets::greedy(Target(Rational(2, 5))))->value, Rational(2, 5));
}

TEST(ExactCharge, UnavailableNeverGuesses) {
  EXPECT_FALSE(exact_charge(geometric_blocks()));
  EXPECT_FALSE(exact_charge(set_B() & set_C()));
  EXPECT_FALSE(exact_charge(sets::greedy(parse_target("1/sqrt(2)"))));
  EXPECT_FALSE(exact_charge(sets::predicate("even", [](std::uint64_t n) { return n % 2 == 0; })));
}

TEST(ExactCharge, PropSuite) {
  fixtures::Corpus c(2026);
  int evaluated = 0;
  for (int i = 0; i < 2000; ++i) {
    auto r = fixtures::prop_case(c);
    if (!r.evaluated) continue;
    ++evaluated;
    ASSERT_TRUE(r.ok) << r.failure;
  }
  EXPECT_GT(evaluated, 1800);
}

TEST(ExactCharge, AgreesWithPeriodOracle) {
  // ν = count over one full period, computed by brute force
  fixtures::Corpus c(17);
  for (int i = 0; i < 200; ++i) {
    SetExpr e = c.residue_algebra(3, 12);
    auto ch = exact_charge(e);
    ASSERT_TRUE(ch);
    std::uint64_t l = 27720;  // lcm(1..12)
    std::uint64_t k = 0;
    for (std::uint64_t n = 1; n <= l; ++n) k += e.contains(n);
    EXPECT_EQ(ch->value, Rational::ratio(k, l)) << dsl::print(e);
  }
}

TEST(Profile, GeometricBlocks) {
  DensityProfile p = density_profile(geometric_blocks());
  EXPECT_TRUE(p.heuristic);
  EXPECT_GE(p.upper_est, Rational(66, 100));
  EXPECT_LE(p.upper_est, Rational(6675, 10000));
  EXPECT_GE(p.lower_est, Rational(3325, 10000));
  EXPECT_LE(p.lower_est, Rational(34, 100));
  EXPECT_FALSE(p.converged);
}

TEST(Profile, BlocksExtremaAtBoundaries) {
  for (auto spec : {BlockSpec::geometric(1, 2), BlockSpec::geometric(1, 3), BlockSpec::power(1)}) {
    SetExpr s = sets::blocks(spec);
    DensityProfile p = density_profile(s);
    auto bounds = static_cast<const BlocksNode&>(s.node()).spec().boundaries(p.horizon);
    auto at = [&](std::uint64_t n) { return std::find(bounds.begin(), bounds.end(), n) - bounds.begin(); };
    auto imax = at(p.argmax), imin = at(p.argmin);
    ASSERT_LT(static_cast<std::size_t>(imax), bounds.size());
    ASSERT_LT(static_cast<std::size_t>(imin), bounds.size());
    // bounds[i] = Z_{i+1}: even boundaries sit at odd i
    EXPECT_EQ(imax % 2, 1);
    EXPECT_EQ(imin % 2, 0);
  }
}

TEST(Profile, Squares) {
  EstimatorConfig cfg;
  cfg.burn_in_fraction = Rational(1, 4);
  DensityProfile p = density_profile(sets::squares(), cfg);
  EXPECT_LE(p.upper_est, Rational(2, 1000));
  EXPECT_FALSE(p.heuristic);
}

TEST(Profile, OddsConverged) {
  DensityProfile p = density_profile(sets::odds());
  EXPECT_TRUE(p.converged);
  EXPECT_LE((p.upper_est - Rational(1, 2)).abs(), Rational(1, 1000));
  EXPECT_LE((p.lower_est - Rational(1, 2)).abs(), Rational(1, 1000));
}

TEST(Profile, Invariants) {
  fixtures::Corpus c(5);
  EstimatorConfig cfg;
  cfg.horizon = 20000;
  for (int i = 0; i < 40; ++i) {
    SetExpr e = c.expr(3);
    DensityProfile p = density_profile(e, cfg);
    ASSERT_EQ(p.values.size(), p.checkpoints.size());
    for (std::size_t j = 0; j < p.checkpoints.size(); ++j) {
      if (j > 0) {
        EXPECT_LT(p.checkpoints[j - 1], p.checkpoints[j]);
      }
      EXPECT_EQ(p.values[j], Rational::ratio(prefix_count(e, p.checkpoints[j]).count, p.checkpoints[j]));
    }
    EXPECT_LE(p.lower_est, p.upper_est);
  }
}

TEST(Profile, EmpiricalSandwich) {
  auto cat = paper_example_catalog();
  EstimatorConfig cfg;
  for (const auto& e : cat) {
    auto ch = exact_charge(e.set);
    if (!ch || e.name == "primes") continue;
    DensityProfile p = density_profile(e.set, cfg);
    EXPECT_LE(p.lower_est - cfg.tolerance, ch->value) << e.name;
    EXPECT_GE(p.upper_est + cfg.tolerance, ch->value) << e.name;
  }
}

// π(N)/N ~ 1/ln N is still about 0.078 at 10^6: the primes are null but the
// horizon is far too short for a 10^-3 sandwich.
TEST(Profile, PrimesConvergeLogarithmically) {
  DensityProfile p = density_profile(sets::primes());
  EXPECT_EQ(p.values.back(), Rational(78498, 1000000));
  EXPECT_GT(p.lower_est, Rational(7, 100));
  EXPECT_LT(p.upper_est, Rational(9, 100));
  EXPECT_FALSE(p.heuristic);
}

TEST(Profile, SymmetricDifferenceBound) {
  fixtures::Corpus c(99);
  EstimatorConfig cfg;
  cfg.horizon = 50000;
  for (int i = 0; i < 30; ++i) {
    SetExpr a = c.expr(2), b = c.expr(2);
    auto pts = profile_schedule(a ^ b, cfg);
    auto d = counts_at(a ^ b, pts), ca = counts_at(a, pts), cb = counts_at(b, pts);
    for (std::size_t j = 0; j < pts.size(); ++j)
      EXPECT_GE(Rational::ratio(d[j], pts[j]),
                (Rational::ratio(ca[j], pts[j]) - Rational::ratio(cb[j], pts[j])).abs());
  }
}

TEST(Profile, ConfigValidation) {
  EstimatorConfig cfg;
  cfg.growth_ratio = Rational(1);
  EXPECT_THROW(density_profile(sets::odds(), cfg), PreconditionError);
  cfg = {};
  cfg.burn_in_fraction = Rational(1);
  EXPECT_THROW(density_profile(sets::odds(), cfg), PreconditionError);
  cfg = {};
  cfg.horizon = 10;
  EXPECT_THROW(density_profile(sets::odds(), cfg), PreconditionError);
}

TEST(Gap, Examples) {
  auto g = gap_function_P(sets::multiples(5), 7);
  ASSERT_TRUE(g.found());
  EXPECT_EQ(g.value, 3u);
  EXPECT_EQ(gap_function_Q(~sets::empty(), 12).status, Gap::Status::Infinite);
  EXPECT_EQ(gap_function_P(sets::finite({3, 9}), 9).status, Gap::Status::Infinite);
  EXPECT_EQ(gap_function_P(sets::residue(1, 6), 100).status, Gap::Status::Found);
  EXPECT_EQ(gap_function_Q(sets::naturals(), 100).status, Gap::Status::Infinite);
  EXPECT_EQ(gap_function_P(sets::squares(), 10, 3).status, Gap::Status::Exhausted);
}

TEST(Gap, PowerBlocks) {
  for (unsigned q = 1; q <= 3; ++q) {
    SetExpr s = sets::blocks(BlockSpec::power(q));
    auto bounds = static_cast<const BlocksNode&>(s.node()).spec().boundaries(1ull << 40);
    for (std::uint64_t n = 1; 2 * n <= bounds.size() && n <= 10; ++n) {
      auto g = gap_function_P(s, bounds[2 * n - 1]);
      ASSERT_TRUE(g.found());
      EXPECT_EQ(g.value, *arith::pow_checked(2 * n + 1, q) + 1);
    }
  }
}

TEST(Dilate, Law) {
  EXPECT_TRUE(dilate_density_check(sets::odds(), 2, 10000).passed);
  EXPECT_TRUE(dilate_density_check(sets::squares(), 3, 10000).passed);
  EXPECT_TRUE(dilate_density_check(geometric_blocks(), 2, 100000).passed);
  EXPECT_THROW(dilate_density_check(sets::odds(), 0, 100), SemanticError);
}
