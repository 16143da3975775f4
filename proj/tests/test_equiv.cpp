#include "doctest.h"

#include "hl/equiv.hpp"
#include "hl/eval.hpp"
#include "hl/parse.hpp"
#include "hl/pretty.hpp"
#include "hl/subst.hpp"

#include "testutil.hpp"

using namespace hl;

TEST_CASE("equiv_sample: a program agrees with itself") {
  Program p = testutil::load("gcd.hl");
  EquivReport r = equiv_sample(p, p, 1, 12, 20000);
  CHECK(r.samples == 12);
  CHECK(r.disagreements.empty());
  CHECK(r.agreements + r.inconclusive == 12);
  CHECK(r.inconclusive > 0);  // gcd diverges when an input is zero
}

TEST_CASE("equiv_sample: mutual original vs distilled form") {
  Program p1 = testutil::load("mutual.hl");
  Program p2 = testutil::load("mutual_distilled.hl");

  // exhaustive check on n in 0..10 with the reference evaluator
  DefMap d1(p1), d2(p2);
  for (int n = 0; n <= 10; n++) {
    Substitution th{{"n", mk_nat(static_cast<unsigned>(n))}};
    auto o1 = eval_deep(substitute(p1.main, th), d1, 100000);
    auto o2 = eval_deep(substitute(p2.main, th), d2, 100000);
    REQUIRE(o1.is_value());
    REQUIRE(o2.is_value());
    CHECK(alpha_eq(o1.value, o2.value));
  }

  EquivReport r = equiv_sample(p1, p2, 2, 50, 100000);
  CHECK(r.disagreements.empty());
  CHECK(r.agreements == 50);
}

TEST_CASE("equiv_sample: gcd vs distilled gcd on all pairs 0..6") {
  // Frozen from the reference evaluator: the originals agree wherever both
  // converge within fuel. At x = 0 < y the original loops on gcd x (sub y x)
  // while the distilled program returns 0, which surfaces as inconclusive
  // (value against out-of-fuel); at y = 0 < x both sides diverge.
  Program p1 = testutil::load("gcd.hl");
  Program p2 = testutil::load("gcd_distilled.hl");
  DefMap d1(p1), d2(p2);
  int agree = 0, inconclusive = 0, disagree = 0;
  for (int x = 0; x <= 6; x++) {
    for (int y = 0; y <= 6; y++) {
      Substitution th{{"x", mk_nat(static_cast<unsigned>(x))},
                      {"y", mk_nat(static_cast<unsigned>(y))}};
      auto o1 = eval_deep(substitute(p1.main, th), d1, 100000);
      auto o2 = eval_deep(substitute(p2.main, th), d2, 100000);
      if (o1.k == Outcome::K::OutOfFuel || o2.k == Outcome::K::OutOfFuel)
        inconclusive++;
      else if (o1.is_value() && o2.is_value() && alpha_eq(o1.value, o2.value))
        agree++;
      else
        disagree++;
    }
  }
  CHECK(agree == 37);
  CHECK(inconclusive == 12);
  CHECK(disagree == 0);
}

TEST_CASE("equiv_sample: rejects different input sets") {
  Program p1 = parse_program("f x where f a = a");
  Program p2 = parse_program("f y where f a = a");
  CHECK_THROWS_AS(equiv_sample(p1, p2, 0, 5, 1000), Error);
}

TEST_CASE("equiv_sample: flags genuine disagreements") {
  Program p1 = parse_program("f x where f a = case a of { Zero -> Zero | Succ b -> Succ a }");
  Program p2 = parse_program("f x where f a = case a of { Zero -> Zero | Succ b -> a }");
  EquivReport r = equiv_sample(p1, p2, 3, 40, 10000);
  CHECK(!r.disagreements.empty());
  CHECK(r.disagreements[0].input.count("x") == 1);
}

TEST_CASE("equiv_sample: determinism in the seed") {
  Program p = testutil::load("sub_inc.hl");
  Program q = testutil::load("sub_inc_distilled.hl");
  EquivReport a = equiv_sample(p, q, 42, 25, 100000);
  EquivReport b = equiv_sample(p, q, 42, 25, 100000);
  CHECK(a.agreements == b.agreements);
  CHECK(a.inconclusive == b.inconclusive);
  CHECK(a.disagreements.size() == b.disagreements.size());
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("infer_input_families: gcd inputs are naturals") {
  Program p = testutil::load("gcd.hl");
  auto fams = infer_input_families(p);
  REQUIRE(fams.count("x") == 1);
  REQUIRE(fams.count("y") == 1);
  auto is_nat = [](const std::vector<std::string>& f) {
    return std::set<std::string>(f.begin(), f.end()) ==
           std::set<std::string>{"Succ", "Zero"};
  };
  CHECK(is_nat(fams["x"]));
  CHECK(is_nat(fams["y"]));
}

TEST_CASE("infer_input_families: unscrutinised input falls back to naturals") {
  Program p = parse_program("f x where f a = a");
  auto fams = infer_input_families(p);
  REQUIRE(fams.count("x") == 1);
  CHECK(std::set<std::string>(fams["x"].begin(), fams["x"].end()) ==
        std::set<std::string>{"Succ", "Zero"});
}

TEST_CASE("equiv report JSON shape") {
  Program p = testutil::load("mutual.hl");
  EquivReport r = equiv_sample(p, p, 0, 5, 10000);
  auto j = to_json(r);
  CHECK(j["samples"] == 5);
  CHECK(j.contains("agreements"));
  CHECK(j.contains("disagreements"));
  CHECK(j.contains("inconclusive"));
}
