#include <gtest/gtest.h>

#include <sstream>

#include "cesaro/io.hpp"
#include "cesaro/corpus.hpp"

using namespace cesaro;
using io::json;

TEST(SetJson, RoundTrip) {
  std::vector<std::string> fixed = {"{}", "{1,5,9}", "~(evens | odds)", "blocks(2^(n-1))", "blocks(n^3)",
                                    "blocks([0,2|1,3])", "greedy(1/sqrt(2))", "dilate(3, primes)",
                                    "interleave(residue(1 mod 4))", "midpoint(multiples(4), evens)",
                                    "nullmod(odds, 1/2)", "nullmod_removed(odds, 1/2)", "evens ^ (odds \\ cubes)",
                                    "powers(3) | powers(5)"};
  std::vector<SetExpr> exprs;
  for (const auto& s : fixed) exprs.push_back(dsl::parse(s));
  fixtures::Corpus c(61);
  while (exprs.size() < 200) exprs.push_back(c.expr(3));
  for (const auto& e : exprs) {
    json j = io::to_json(e);
    SetExpr back = io::from_json(json::parse(j.dump()));
    EXPECT_TRUE(structurally_equal(e, back)) << dsl::print(e);
    EXPECT_EQ(dsl::print(back), dsl::print(e));
  }
}

TEST(SetJson, Rejects) {
  EXPECT_THROW(io::from_json(json{{"kind", "nope"}}), SemanticError);
  EXPECT_THROW(io::from_json(json{{"modulus", 3}}), SemanticError);
  EXPECT_THROW(io::from_json(json{{"kind", "residue"}, {"residue", 5}}), SemanticError);
  EXPECT_THROW(io::from_json(json{{"kind", "residue"}, {"residue", 5}, {"modulus", 3}}), SemanticError);
  EXPECT_THROW(io::from_json(json{{"kind", "predicate"}, {"name", "unknown"}}), Error);
}

TEST(ProfileIo, CsvAndJson) {
  EstimatorConfig cfg;
  cfg.horizon = 10000;
  SetExpr e = sets::multiples(3);
  DensityProfile p = density_profile(e, cfg);
  std::ostringstream os;
  io::profile_csv(os, p);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "N,count,nu_N");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, p.checkpoints.size());

  json j = io::profile_json(e, p, cfg);
  EXPECT_EQ(j["exact"]["value"], "1/3");
  EXPECT_EQ(j["verdict"], "limit");
  EXPECT_EQ(j["checkpoints"].size(), p.checkpoints.size());
  EXPECT_EQ(io::profile_json(geometric_blocks(), density_profile(geometric_blocks(), cfg), cfg)["verdict"], "no-limit");
}

TEST(NullmodIo, Stream) {
  NullModResult r = algorithm1(sets::odds(), Rational(1, 2));
  std::ostringstream os;
  io::nullmod_csv(os, r, 4);
  EXPECT_EQ(os.str(), "N,in_A,in_Aprime,in_F,nu_N_Aprime\n1,1,0,1,0\n2,0,0,0,0\n3,1,1,0,1/3\n4,0,0,0,1/4\n");
  NullModReport rep = verify_nullmod(r, 1000, Rational(1, 100));
  json j = io::nullmod_json(r, rep);
  EXPECT_EQ(j["removed_prefix"], json::array({1}));
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(SequenceIo, Parse) {
  json j = json::parse(R"({"terms": [{"coef": "3/2", "set": "evens"}, {"coef": -1, "set": {"kind": "residue", "residue": 1, "modulus": 2}}], "partition": true})");
  SimpleSequence h = io::sequence_from_json(j);
  EXPECT_TRUE(h.partition);
  EXPECT_EQ(h.value(2), Rational(3, 2));
  EXPECT_EQ(h.value(3), Rational(-1));
  EXPECT_THROW(io::sequence_from_json(json::parse(R"({"terms": [{"coef": "1"}]})")), SemanticError);
  EXPECT_THROW(io::sequence_from_json(json::parse(R"({"terms": [{"coef": "1", "set": "evens"}], "partition": true})")),
               PreconditionError);
  json back = io::sequence_json(h);
  EXPECT_EQ(back["terms"][0]["coef"], "3/2");
}
