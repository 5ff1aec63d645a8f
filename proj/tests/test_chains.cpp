#include <gtest/gtest.h>

#include "cesaro/chains.hpp"

using namespace cesaro;

TEST(Chain, BuildAndEvidence) {
  Chain c = Chain::build({sets::multiples(4), sets::evens(), sets::naturals()});
  ASSERT_EQ(c.evidence().size(), 2u);
  EXPECT_EQ(c.evidence()[0].kind, OrderEvidence::Kind::Symbolic);
  EXPECT_EQ(c.exact_charges(), (std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(1)}));

  Chain v = Chain::build({sets::multiples(4), sets::midpoint(sets::multiples(4), sets::evens())}, 5000);
  EXPECT_EQ(v.evidence()[0].str(), "symbolic");
  Chain w = Chain::build({sets::finite({4, 8}), sets::predicate("even", [](std::uint64_t n) { return n % 2 == 0; })},
                         5000);
  EXPECT_EQ(w.evidence()[0].str(), "verified-to-5000");
}

TEST(Chain, OrderViolation) {
  try {
    Chain::build({sets::evens(), sets::multiples(4)});
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_EQ(e.witness(), 2u);
  }
  EXPECT_THROW(Chain::build({sets::evens(), sets::naturals()}, 100, {Rational(1, 2), Rational(1, 3)}),
               PreconditionError);
}

TEST(Closures, Examples) {
  Chain c = Chain::build({sets::multiples(4), sets::evens()});
  Chain u = chain_closures(c, {true, false});
  EXPECT_EQ(u.size(), 2u);

  Chain d = dk_partial_unions_chain(10);
  Chain du = chain_closures(d, {true, false});
  ASSERT_EQ(du.size(), 11u);
  EXPECT_EQ(*du.charges().back(), Rational(1));
  for (std::uint64_t n = 1; n <= 5000; ++n) EXPECT_EQ(du.elements().back().contains(n), (n & (n - 1)) != 0);
  EXPECT_FALSE(chain_order_failure(du, 100000));

  EXPECT_TRUE(chain_closures(Chain{}, {}).empty());
}

TEST(Certificate, ResidueChain) {
  Chain c = residue_cumulative_chain(10);
  UniformCertificate cert = uniform_convergence_certificate(c, Rational(1, 100));
  EXPECT_TRUE(cert.found);
  EXPECT_LE(cert.n_star, 10000u);
  EXPECT_STREQ(UniformCertificate::kScope, "VERIFIED-TO-HORIZON");
}

TEST(Certificate, DkPartialUnions) {
  Chain c = dk_partial_unions_chain(11);
  UniformCertificate cert = uniform_convergence_certificate(c, Rational(5, 100));
  EXPECT_TRUE(cert.found);
}

TEST(Certificate, FailsWithoutCesaroLimit) {
  for (auto eps : {Rational(1, 100), Rational(1, 10), Rational(16, 100)}) {
    UniformCertificate cert =
        uniform_convergence_certificate({sets::multiples(4), geometric_blocks() | sets::multiples(4)},
                                        {Rational(1, 4), Rational(1, 2)}, eps);
    EXPECT_FALSE(cert.found) << eps.str();
    ASSERT_TRUE(cert.failure);
    EXPECT_EQ(cert.failure->element, 1u);
  }
  UniformCertificate lone = uniform_convergence_certificate({geometric_blocks()}, {Rational(1, 2)}, Rational(1, 7));
  EXPECT_FALSE(lone.found);
}

TEST(Certificate, Monotone) {
  Chain c = residue_cumulative_chain(7);
  std::uint64_t prev = 0;
  bool have = false;
  for (auto eps : {Rational(1, 1000), Rational(1, 200), Rational(1, 50), Rational(1, 10)}) {
    UniformCertificate cert = uniform_convergence_certificate(c, eps);
    if (have) {
      EXPECT_TRUE(cert.found);
      EXPECT_LE(cert.n_star, prev);
    }
    if (cert.found) {
      have = true;
      prev = cert.n_star;
    }
  }
  EXPECT_TRUE(have);
}

TEST(Densify, Examples) {
  Chain c = densify_range(Chain::build({sets::empty(), sets::evens(), sets::naturals()}), Rational(1, 4));
  EXPECT_EQ(c.exact_charges(),
            (std::vector<Rational>{Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)}));

  Chain dense = Chain::build({sets::empty(), sets::evens(), sets::naturals()});
  EXPECT_EQ(densify_range(dense, Rational(1, 2)).size(), 3u);

  Chain two = densify_range(Chain::build({sets::empty(), sets::naturals()}), Rational(1, 2));
  EXPECT_EQ(two.exact_charges(), (std::vector<Rational>{Rational(0), Rational(1, 2), Rational(1)}));
}

TEST(Densify, GapsAndOrder) {
  for (auto eps : {Rational(1, 10), Rational(1, 16), Rational(1, 33)}) {
    Chain c = densify_range(Chain::build({sets::multiples(3)}), eps);
    auto ch = c.exact_charges();
    EXPECT_EQ(ch.front(), Rational(0));
    EXPECT_EQ(ch.back(), Rational(1));
    for (std::size_t i = 1; i < ch.size(); ++i) EXPECT_LE(ch[i] - ch[i - 1], eps);
    EXPECT_FALSE(chain_order_failure(c, 20000));
  }
}

TEST(Densify, EstimatesTrackCharges) {
  Chain c = densify_range(Chain::build({sets::empty(), sets::naturals()}), Rational(1, 8));
  EstimatorConfig cfg;
  cfg.horizon = 200000;
  for (std::size_t i = 0; i < c.size(); ++i) {
    DensityProfile p = density_profile(c.elements()[i], cfg);
    EXPECT_LE((p.values.back() - *c.charges()[i]).abs(), Rational(1, 100)) << i;
  }
}

TEST(Distance, Examples) {
  Distance a = d_nu(sets::evens(), sets::odds());
  EXPECT_TRUE(a.exact);
  EXPECT_EQ(a.value, Rational(1));
  EXPECT_EQ(d_nu(sets::odds(), sets::odds() - sets::finite({1})).value, Rational(0));
  EXPECT_EQ(d_nu(sets::evens(), sets::multiples(4)).value, Rational(1, 4));
  Distance h = d_nu(geometric_blocks(), sets::empty());
  EXPECT_FALSE(h.exact);
  EXPECT_GE(h.value, Rational(66, 100));
}

TEST(Distance, UnionReflection) {
  Chain c = dk_partial_unions_chain(12);
  SetExpr u = *c.limit_union;
  Rational prev(1);
  for (std::size_t i = 0; i < c.size(); ++i) {
    Distance d = d_nu(u, c.elements()[i]);
    ASSERT_TRUE(d.exact);
    EXPECT_EQ(d.value, Rational(1, std::int64_t{1} << (i + 1)));
    EXPECT_LT(d.value, prev);
    prev = d.value;
  }
  DensityProfile p = density_profile(u);
  EXPECT_LE(p.upper_est - *c.charges().back(), Rational(1, 1000));
}

TEST(Saturation, Examples) {
  Saturation s = saturate_chain(Chain::build({sets::empty(), sets::finite({1, 2, 3})}), 2);
  auto a = s.next(), b = s.next(), c = s.next();
  ASSERT_TRUE(a && b);
  EXPECT_FALSE(c);
  EXPECT_TRUE(a->set.contains(1));
  EXPECT_FALSE(a->set.contains(2));
  EXPECT_TRUE(b->set.contains(2));
  EXPECT_FALSE(b->set.contains(3));

  Saturation t = saturate_chain(Chain::build({sets::evens(), sets::naturals()}), 3);
  std::vector<std::uint64_t> added;
  while (auto x = t.next()) added.push_back(x->last);
  EXPECT_EQ(added, (std::vector<std::uint64_t>{1, 3, 5}));
}

TEST(Saturation, EveryPairAndComparability) {
  Chain c = Chain::build({sets::multiples(4), sets::evens(), sets::naturals()});
  Saturation s = saturate_chain(c, 4);
  std::size_t count = 0;
  while (auto x = s.next()) {
    ++count;
    for (std::size_t i = 0; i < c.size(); ++i) {
      bool below = subset_upto(c.elements()[i], x->set, 2000).holds;
      bool above = subset_upto(x->set, c.elements()[i], 2000).holds;
      EXPECT_TRUE(below || above);
    }
  }
  EXPECT_EQ(count, 8u);
}

TEST(Saturation, NullGap) {
  Chain c = Chain::build({sets::odds() - sets::squares(), sets::odds()});
  Saturation s = saturate_chain(c, 5);
  while (auto x = s.next()) {
    EXPECT_EQ(d_nu(x->set, c.elements()[0]).value, Rational(0));
    EXPECT_EQ(d_nu(x->set, c.elements()[1]).value, Rational(0));
  }
}
