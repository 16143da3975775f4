#include "doctest.h"

#include "hl/eval.hpp"
#include "hl/parse.hpp"
#include "hl/pretty.hpp"
#include "hl/subst.hpp"

#include "testutil.hpp"

using namespace hl;

namespace {

Outcome run_main(const Program& p, const Substitution& inputs, std::int64_t fuel) {
  DefMap defs(p);
  return eval_deep(substitute(p.main, inputs), defs, fuel);
}

}  // namespace

TEST_CASE("step: beta rule") {
  DefMap defs;
  auto e = mk_app(mk_lam("x", mk_var("x")), mk_nat(0));
  auto s = step(e, defs);
  REQUIRE(s.has_value());
  CHECK(s->second.kind == ReductionLabel::K::Beta);
  CHECK(alpha_eq(s->first, mk_nat(0)));
}

TEST_CASE("step: constructor elimination") {
  DefMap defs;
  auto e = mk_case(mk_con("Zero"),
                   {Branch{Pattern{"Zero", {}}, mk_con("A")},
                    Branch{Pattern{"Succ", {"n"}}, mk_con("B")}});
  auto s = step(e, defs);
  REQUIRE(s.has_value());
  CHECK(s->second.kind == ReductionLabel::K::ConElim);
  CHECK(s->second.name == "Zero");
  CHECK(alpha_eq(s->first, mk_con("A")));
}

TEST_CASE("step: unfolding yields a lambda abstraction") {
  Program p = parse_program("f x where f x = x");
  DefMap defs(p);
  auto s = step(mk_fun("f"), defs);
  REQUIRE(s.has_value());
  CHECK(s->second.kind == ReductionLabel::K::Unfold);
  CHECK(s->second.name == "f");
  CHECK(alpha_eq(s->first, mk_lam("x", mk_var("x"))));
}

TEST_CASE("step: reduces under application heads and case selectors") {
  Program p = parse_program("f x where f x = x");
  DefMap defs(p);
  auto s1 = step(mk_app(mk_fun("f"), mk_var("y")), defs);
  REQUIRE(s1.has_value());
  CHECK(s1->second.kind == ReductionLabel::K::Unfold);
  auto cs = mk_case(mk_app(mk_lam("x", mk_var("x")), mk_con("Zero")),
                    {Branch{Pattern{"Zero", {}}, mk_nat(1)},
                     Branch{Pattern{"Succ", {"n"}}, mk_nat(2)}});
  auto s2 = step(cs, defs);
  REQUIRE(s2.has_value());
  CHECK(s2->second.kind == ReductionLabel::K::Beta);
}

TEST_CASE("step: none on WHNF and on stuck terms") {
  DefMap defs;
  CHECK_FALSE(step(mk_lam("x", mk_var("x")), defs).has_value());
  CHECK_FALSE(step(mk_nat(3), defs).has_value());
  CHECK_FALSE(step(mk_var("x"), defs).has_value());
  auto cs = mk_case(mk_var("x"), {Branch{Pattern{"Zero", {}}, mk_nat(0)},
                                  Branch{Pattern{"Succ", {"n"}}, mk_nat(1)}});
  CHECK_FALSE(step(cs, defs).has_value());
  CHECK_FALSE(is_whnf(cs));
}

TEST_CASE("let and beta agree") {
  DefMap defs;
  testutil::ExprGen gen(17);
  for (int i = 0; i < 100; i++) {
    auto bound = gen.gen(3, {}, {"y"});
    auto body = gen.gen(3, {"x"}, {"y"});
    auto let = mk_let("x", bound, body);
    auto beta = mk_app(mk_lam("x", body), bound);
    auto s1 = step(let, defs);
    auto s2 = step(beta, defs);
    REQUIRE(s1.has_value());
    REQUIRE(s2.has_value());
    CHECK(alpha_eq(s1->first, s2->first));
  }
}

TEST_CASE("evaluate: gcd 4 6 is 2") {
  Program p = testutil::load("gcd.hl");
  auto o = run_main(p, {{"x", mk_nat(4)}, {"y", mk_nat(6)}}, 100000);
  REQUIRE(o.is_value());
  CHECK(alpha_eq(o.value, mk_nat(2)));
}

TEST_CASE("evaluate: sub 5 3 is 2 and gt 3 5 is False") {
  Program p = testutil::load("gcd.hl");
  DefMap defs(p);
  std::int64_t fuel = 100000;
  auto o1 = eval_deep(apply_spine(mk_fun("sub"), {mk_nat(5), mk_nat(3)}), defs, fuel);
  REQUIRE(o1.is_value());
  CHECK(alpha_eq(o1.value, mk_nat(2)));
  auto o2 = eval_deep(apply_spine(mk_fun("gt"), {mk_nat(3), mk_nat(5)}), defs, 100000);
  REQUIRE(o2.is_value());
  CHECK(alpha_eq(o2.value, mk_con("False")));
}

TEST_CASE("evaluate: self-loop runs out of fuel") {
  Program p = testutil::load("loop.hl");
  auto o = run_main(p, {{"x", mk_nat(0)}}, 100);
  CHECK(o.k == Outcome::K::OutOfFuel);
}

TEST_CASE("evaluate: free scrutinee is stuck") {
  Program p = parse_program(
      "case x of { Zero -> Zero | Succ n -> n } where g y = y");
  auto o = run_main(p, {}, 100);
  CHECK(o.k == Outcome::K::Stuck);
  CHECK(o.why.find("no reduction applies") != std::string::npos);
}

TEST_CASE("evaluate: deep forcing yields first-order values") {
  Program p = parse_program(
      "pair (sub 3 1) (sub 2 2) where "
      "pair a b = Pair a b; "
      "sub x y = case y of { Zero -> x | Succ y -> case x of { Zero -> Zero | Succ x -> sub x y } }");
  auto o = run_main(p, {}, 100000);
  REQUIRE(o.is_value());
  CHECK(alpha_eq(o.value, mk_con("Pair", {mk_nat(2), mk_nat(0)})));
}

TEST_CASE("evaluate: deep forcing keeps lambdas unevaluated") {
  Program p = parse_program("box where box = Box (\\x -> x)");
  auto o = run_main(p, {}, 100);
  REQUIRE(o.is_value());
  const auto* c = as<ConE>(o.value);
  REQUIRE(c != nullptr);
  CHECK(as<LamE>(c->args[0]) != nullptr);
}

TEST_CASE("evaluate: fuel is shared across deep forcing") {
  Program p = parse_program("P (sub 9 0) (sub 9 0) where "
      "sub x y = case y of { Zero -> x | Succ y -> case x of { Zero -> Zero | Succ x -> sub x y } }");
  DefMap defs(p);
  auto lots = eval_deep(p.main, defs, 100000);
  REQUIRE(lots.is_value());
  auto few = eval_deep(p.main, defs, 5);
  CHECK(few.k == Outcome::K::OutOfFuel);
}

TEST_CASE("fuel monotonicity on generated closed terms") {
  Program lib = testutil::load("gcd.hl");
  DefMap defs(lib);
  testutil::NatTermGen gen(23, lib);
  int values = 0;
  for (int i = 0; i < 1000; i++) {
    auto e = gen.gen(4);
    std::int64_t f1 = 200;
    auto o1 = eval_whnf(e, defs, f1);
    if (o1.is_value()) {
      values++;
      for (std::int64_t budget : {400, 5000}) {
        std::int64_t b = budget;
        auto o2 = eval_whnf(e, defs, b);
        REQUIRE(o2.is_value());
        CHECK(alpha_eq(o2.value, o1.value));
      }
    }
  }
  CHECK(values > 500);  // most generated terms converge quickly
}

TEST_CASE("closed well-formed terms never get stuck") {
  Program lib = testutil::load("gcd.hl");
  DefMap defs(lib);
  testutil::NatTermGen gen(29, lib);
  for (int i = 0; i < 500; i++) {
    auto e = gen.gen(4);
    REQUIRE(free_vars(e).empty());
    std::int64_t fuel = 20000;
    auto o = eval_whnf(e, defs, fuel);
    CHECK(o.k != Outcome::K::Stuck);
  }
}

TEST_CASE("evaluate: mccarthy 91 on a boundary input") {
  Program p = testutil::load("mccarthy91.hl");
  auto o = run_main(p, {{"n", mk_nat(100)}}, 2000000);
  REQUIRE(o.is_value());
  CHECK(alpha_eq(o.value, mk_nat(91)));
}
