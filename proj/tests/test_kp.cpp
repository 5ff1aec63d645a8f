#include <gtest/gtest.h>

#include <cmath>

#include "cesaro/kp.hpp"
#include "cesaro/corpus.hpp"

using namespace cesaro;

namespace {

SimpleSequence seq(std::vector<std::pair<Rational, SetExpr>> terms) { return {std::move(terms), false}; }

// Random simple sequence over the residue classes mod m.
SimpleSequence random_on_residues(fixtures::Corpus& c, std::uint64_t m) {
  std::vector<std::pair<Rational, SetExpr>> terms;
  for (std::uint64_t r = 0; r < m; ++r)
    terms.push_back({Rational(static_cast<std::int64_t>(c.uniform(0, 20)) - 10, static_cast<std::int64_t>(c.uniform(1, 4))),
                     sets::residue(r, m)});
  return make_partition_sequence(std::move(terms), 1000);
}

}  // namespace

TEST(PartialAverage, Examples) {
  SimpleSequence one = seq({{Rational(1), sets::naturals()}});
  for (std::uint64_t n : {1ull, 7ull, 1000ull}) EXPECT_EQ(seq_partial_average(one, n), Rational(1));

  AnomalySequence g;
  EXPECT_EQ(seq_partial_average(g, 9), Rational(2, 3));
  EXPECT_EQ(seq_partial_average(g, 1), Rational(1));

  SimpleSequence h = seq({{Rational(2), sets::evens()}, {Rational(-1), sets::odds()}});
  EXPECT_EQ(seq_partial_average(h, 4), Rational(1, 2));
  EXPECT_THROW(seq_partial_average(h, 0), PreconditionError);

  FunctionSequence f{"n mod 3", [](std::uint64_t n) { return Rational(static_cast<std::int64_t>(n % 3)); }};
  EXPECT_EQ(seq_partial_average(f, 6), Rational(1));
}

TEST(PartialAverage, MatchesPointwiseSum) {
  fixtures::Corpus c(3);
  for (int i = 0; i < 20; ++i) {
    SimpleSequence h = random_on_residues(c, c.uniform(2, 6));
    Rational s(0);
    for (std::uint64_t n = 1; n <= 500; ++n) {
      s += h.value(n);
      ASSERT_EQ(seq_partial_average(h, n), s / Rational(static_cast<std::int64_t>(n)));
    }
  }
}

TEST(PartitionSequence, Validation) {
  EXPECT_THROW(make_partition_sequence({{Rational(1), sets::evens()}, {Rational(1), sets::multiples(3)}}, 100),
               PreconditionError);
  try {
    make_partition_sequence({{Rational(1), sets::evens()}}, 100);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_EQ(e.witness(), 1u);
  }
  EXPECT_TRUE(make_partition_sequence({{Rational(1), sets::evens()}, {Rational(2), sets::odds()}}, 100).partition);
}

TEST(Norm, Examples) {
  KpNorm a = kp_norm(seq({{Rational(1), sets::evens()}}), Rational(2));
  ASSERT_TRUE(a.pth_power);
  EXPECT_EQ(*a.pth_power, Rational(1, 2));
  EXPECT_NEAR(static_cast<double>(a.norm), std::sqrt(0.5), 1e-12);

  SimpleSequence h = make_partition_sequence({{Rational(2), sets::multiples(3)}, {Rational(1), ~sets::multiples(3)}});
  KpNorm b = kp_norm(h, Rational(1));
  EXPECT_EQ(*b.pth_power, Rational(4, 3));
  EXPECT_TRUE(b.exact_norm);

  SimpleSequence h2 = seq({{Rational(2), sets::multiples(3)}, {Rational(1), ~sets::multiples(3)},
                           {Rational(7), sets::squares()}});
  KpNorm d = kp_norm(h - h2, Rational(1));
  EXPECT_EQ(*d.pth_power, Rational(0));
  EXPECT_EQ(d.norm, 0.0L);
}

TEST(Norm, RationalExponents) {
  SimpleSequence h = seq({{Rational(4), sets::evens()}});
  KpNorm r = kp_norm(h, Rational(3, 2));
  ASSERT_TRUE(r.pth_power);
  EXPECT_EQ(*r.pth_power, Rational(4));  // 4^{3/2} / 2
  KpNorm s = kp_norm(seq({{Rational(3), sets::evens()}}), Rational(3, 2));
  EXPECT_FALSE(s.pth_power);
  EXPECT_NEAR(static_cast<double>(s.pth_power_approx), std::pow(3.0, 1.5) / 2, 1e-9);
  EXPECT_THROW(kp_norm(h, Rational(1, 2)), PreconditionError);
  EXPECT_THROW(kp_norm(seq({{Rational(1), geometric_blocks()}}), Rational(1)), PreconditionError);
}

TEST(Norm, PseudonormAxioms) {
  fixtures::Corpus c(21);
  for (int i = 0; i < 40; ++i) {
    std::uint64_t m = c.uniform(2, 6);
    SimpleSequence h1 = random_on_residues(c, m), h2 = random_on_residues(c, m);
    Rational k(static_cast<std::int64_t>(c.uniform(0, 10)) - 5, 3);
    // p = 1: exact
    EXPECT_EQ(*kp_norm(h1.scaled(k), Rational(1)).pth_power, k.abs() * *kp_norm(h1, Rational(1)).pth_power);
    EXPECT_LE(*kp_norm(h1 + h2, Rational(1)).pth_power,
              *kp_norm(h1, Rational(1)).pth_power + *kp_norm(h2, Rational(1)).pth_power);
    // p = 2: numeric
    long double n1 = kp_norm(h1, Rational(2)).norm, n2 = kp_norm(h2, Rational(2)).norm;
    EXPECT_NEAR(static_cast<double>(kp_norm(h1.scaled(k), Rational(2)).norm),
                static_cast<double>(std::fabs(k.to_double()) * n1), 1e-9);
    EXPECT_LE(static_cast<double>(kp_norm(h1 + h2, Rational(2)).norm), static_cast<double>(n1 + n2) + 1e-9);
  }
}

TEST(Norm, NullPerturbation) {
  fixtures::Corpus c(31);
  for (int i = 0; i < 20; ++i) {
    SimpleSequence h = random_on_residues(c, c.uniform(2, 5));
    SimpleSequence p = h + seq({{Rational(static_cast<std::int64_t>(c.uniform(1, 9))), sets::squares()},
                                {Rational(-2), sets::primes()}});
    for (auto q : {Rational(1), Rational(2)}) {
      EXPECT_EQ(*kp_norm(h, q).pth_power, *kp_norm(p, q).pth_power);
      EXPECT_EQ(*kp_norm(h - p, q).pth_power, Rational(0));
    }
  }
}

TEST(Integral, Examples) {
  IntegralCheck a = cesaro_integral_check(seq({{Rational(3), sets::evens()}}));
  EXPECT_EQ(a.integral, Rational(3, 2));
  EXPECT_TRUE(a.passed);
  EXPECT_LT(a.final_difference, Rational(1, 1000));

  // power blocks converge like N^{-1/3}: about 0.0094 off at 10^6
  SimpleSequence h = seq({{Rational(4), sets::blocks(BlockSpec::power(2))}, {Rational(1), sets::odds()}});
  IntegralCheck b = cesaro_integral_check(h);
  EXPECT_EQ(b.integral, Rational(5, 2));
  EXPECT_TRUE(b.decreasing_trend);
  EXPECT_FALSE(b.passed);
  EstimatorConfig loose;
  loose.tolerance = Rational(1, 50);
  EXPECT_TRUE(cesaro_integral_check(h, loose).passed);
}

TEST(Integral, LinearityAndMonotonicity) {
  fixtures::Corpus c(55);
  SimpleSequence f = seq({{Rational(1), sets::multiples(3)}, {Rational(2), sets::blocks(BlockSpec::power(1))}});
  SimpleSequence g = seq({{Rational(5), sets::odds()}, {Rational(-1), sets::squares()}});
  EXPECT_TRUE(linearity_holds(f, g, Rational(2), Rational(3), 100000));
  EXPECT_EQ(cesaro_integral(f.scaled(Rational(2)) + g.scaled(Rational(3))),
            Rational(2) * cesaro_integral(f) + Rational(3) * cesaro_integral(g));
  for (int i = 0; i < 30; ++i) {
    std::uint64_t m = c.uniform(2, 6);
    SimpleSequence a = random_on_residues(c, m), b = random_on_residues(c, m);
    Rational x(static_cast<std::int64_t>(c.uniform(0, 8)) - 4, 2), y(static_cast<std::int64_t>(c.uniform(0, 8)) - 4, 3);
    EXPECT_TRUE(linearity_holds(a, b, x, y, c.uniform(1, 100000)));
    // coefficient-wise maximum dominates both
    SimpleSequence hi = a;
    for (std::size_t k = 0; k < hi.terms.size(); ++k) hi.terms[k].first = std::max(a.terms[k].first, b.terms[k].first);
    EXPECT_LE(cesaro_integral(a), cesaro_integral(hi));
    EXPECT_LE(cesaro_integral(b), cesaro_integral(hi));
  }
}

TEST(Tail, BoundedSatisfied) {
  SimpleSequence h = make_partition_sequence({{Rational(-3), sets::evens()}, {Rational(2), sets::odds()}}, 100);
  TailResult r = kp_tail_condition(h, Rational(1), Rational(1, 10));
  EXPECT_EQ(r.verdict, TailResult::Verdict::Satisfied);
  EXPECT_EQ(r.y, Rational(4));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.str(), "Satisfied(y = 4)");
}

TEST(Tail, AnomalyViolated) {
  TailResult r = kp_tail_condition(AnomalySequence{}, Rational(1), Rational(1, 10));
  EXPECT_EQ(r.verdict, TailResult::Verdict::Violated);
  ASSERT_EQ(r.estimates.size(), 3u);
  for (const auto& [y, est] : r.estimates) {
    EXPECT_GE(est, Rational(45, 100)) << y.str();
    EXPECT_LE(est, Rational(55, 100)) << y.str();
  }
}

TEST(Tail, AnomalyAgreesWithStreaming) {
  // the closed-form running totals against a direct streaming sum
  EstimatorConfig cfg;
  cfg.horizon = 20000;
  cfg.base_n = 16;
  TailResult r = kp_tail_condition(AnomalySequence{}, Rational(2), Rational(1, 10), cfg, {Rational(10)});
  FunctionSequence tail{"g^2 above 10", [](std::uint64_t n) {
                          auto m = arith::isqrt(n);
                          return m * m == n && m > 10 ? Rational(static_cast<std::int64_t>(m * m)) : Rational(0);
                        }};
  auto sp = sequence_profile([&](std::uint64_t n) { return tail.partial_sum(n); },
                             AnomalySequence{}.structural_points(cfg.horizon), cfg);
  EXPECT_EQ(r.estimates[0].second, sp.upper_est);
}

TEST(Anomaly, Report) {
  AnomalyReport rep = anomaly_demo();
  EXPECT_TRUE(rep.formulas_match);
  ASSERT_EQ(rep.rows.size(), 1000u);
  EXPECT_EQ(rep.rows[0].at_square, Rational(1));
  EXPECT_EQ(rep.rows[1].before_next, Rational(3, 8));
  EXPECT_EQ(rep.rows[999].at_square, Rational(5005, 10000));
  EXPECT_EQ(rep.nu_g_at_horizon, Rational(5005, 10000));
  EXPECT_GE(rep.nu_g_at_horizon - rep.nu_f, Rational(49, 100));
  EXPECT_EQ(rep.support_vs_empty.verdict, AeResult::Verdict::EquivalentExact);
}
