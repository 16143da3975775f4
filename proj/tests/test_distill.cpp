#include "doctest.h"

#include "hl/distill.hpp"
#include "hl/distilled.hpp"
#include "hl/equiv.hpp"
#include "hl/lts.hpp"
#include "hl/parse.hpp"
#include "hl/pretty.hpp"
#include "hl/subst.hpp"
#include "hl/termination.hpp"

#include "testutil.hpp"

using namespace hl;

TEST_CASE("embeds: diving and coupling") {
  auto fx = mk_app(mk_fun("f"), mk_var("x"));
  auto fsx = mk_app(mk_fun("f"), mk_con("Succ", {mk_var("x")}));
  CHECK(embeds(fx, fsx));
  CHECK_FALSE(embeds(fsx, fx));
  CHECK(embeds(mk_con("Zero"), mk_con("Succ", {mk_con("Zero")})));
  CHECK_FALSE(embeds(mk_con("Succ", {mk_var("x")}),
                     mk_con("Cons", {mk_var("x"), mk_var("y")})));
  CHECK(embeds(mk_var("x"), mk_var("y")));
  CHECK(embeds(fx, fx));
}

TEST_CASE("embeds: deep numerals stay fast") {
  auto a = mk_nat(400);
  auto b = mk_nat(401);
  CHECK(embeds(a, b));
  CHECK_FALSE(embeds(b, a));
}

TEST_CASE("msg: examples") {
  // msg(f x Zero, f y (Succ z))
  auto e1 = apply_spine(mk_fun("f"), {mk_var("x"), mk_con("Zero")});
  auto e2 = apply_spine(mk_fun("f"), {mk_var("y"), mk_con("Succ", {mk_var("z")})});
  Msg m = msg(e1, e2);
  CHECK(alpha_eq(substitute(m.gen, m.s1), e1));
  CHECK(alpha_eq(substitute(m.gen, m.s2), e2));
  auto [h, args] = flatten_spine(m.gen);
  CHECK(as<FunE>(h)->name == "f");
  REQUIRE(args.size() == 2);
  CHECK(is_var(args[0]));
  CHECK(is_var(args[1]));
  CHECK(as<VarE>(args[0])->name != as<VarE>(args[1])->name);

  // msg(e, e) is e with identity substitutions
  Msg same = msg(e1, e1);
  CHECK(alpha_eq(same.gen, e1));
  CHECK(same.s1.empty());
  CHECK(same.s2.empty());

  // msg(Succ Zero, Zero) is a fresh variable
  Msg v = msg(mk_nat(1), mk_nat(0));
  CHECK(is_var(v.gen));
  REQUIRE(v.s1.size() == 1);
  CHECK(alpha_eq(v.s1.begin()->second, mk_nat(1)));
  CHECK(alpha_eq(v.s2.begin()->second, mk_nat(0)));
}

TEST_CASE("msg: merges identical binding pairs") {
  // f x Zero vs f y y': positions 1 and 2 differ independently, stay split;
  // f x x vs f y y: both positions carry the same pair, merge to one variable
  auto a = apply_spine(mk_fun("f"), {mk_var("x"), mk_var("x")});
  auto b = apply_spine(mk_fun("f"), {mk_var("y"), mk_var("y")});
  Msg m = msg(a, b);
  auto [h, args] = flatten_spine(m.gen);
  REQUIRE(args.size() == 2);
  CHECK(as<VarE>(args[0])->name == as<VarE>(args[1])->name);
  CHECK(m.s1.size() == 1);
}

TEST_CASE("msg: mismatch under a binder generalizes the enclosing term") {
  // \x -> Succ x vs \x -> x: the bodies differ but mention the bound
  // variable, so the whole lambda pair is abstracted
  auto l1 = mk_lam("x", mk_con("Succ", {mk_var("x")}));
  auto l2 = mk_lam("x", mk_var("x"));
  Msg m = msg(l1, l2);
  CHECK(is_var(m.gen));
  CHECK(alpha_eq(substitute(m.gen, m.s1), l1));
  CHECK(alpha_eq(substitute(m.gen, m.s2), l2));
}

TEST_CASE("msg: property on generated pairs") {
  testutil::ExprGen gen(31);
  for (int i = 0; i < 200; i++) {
    auto e1 = gen.gen(3, {}, {"u", "v"});
    auto e2 = gen.gen(3, {}, {"u", "v"});
    Msg m = msg(e1, e2);
    CHECK(alpha_eq(substitute(m.gen, m.s1), e1));
    CHECK(alpha_eq(substitute(m.gen, m.s2), e2));
  }
}

TEST_CASE("distill: mutual recursion collapses to the single descending loop") {
  Program p = extract_args(testutil::load("mutual.hl"));
  DistillResult r = distill(p);
  REQUIRE(r.ok());
  Program expected = testutil::load("mutual_distilled.hl");
  CHECK(program_alpha_eq(r.program, expected));
}

TEST_CASE("distill: sub_inc is distilled and provably terminating") {
  Program p = extract_args(testutil::load("sub_inc.hl"));
  DistillResult r = distill(p);
  REQUIRE(r.ok());
  CHECK(check_distilled(r.program).empty());

  Lts lts = build_lts(extract_args(r.program));
  Verdict v = analyze(lts, true);
  CHECK(v.k == Verdict::K::Terminates);

  EquivReport rep = equiv_sample(p, r.program, 5, 50, 100000);
  CHECK(rep.disagreements.empty());
}

TEST_CASE("distill: already-distilled gcd keeps the contract") {
  Program p = extract_args(testutil::load("gcd_distilled.hl"));
  DistillResult r = distill(p);
  REQUIRE(r.ok());
  CHECK(check_distilled(r.program).empty());
  EquivReport rep = equiv_sample(p, r.program, 7, 25, 30000);
  CHECK(rep.disagreements.empty());
}

TEST_CASE("distill: gcd fails cleanly or succeeds with the contract") {
  // stretch goal: success must satisfy the output contract, failure must be
  // a limit or a rejected residual, never a wrong program
  Program p = extract_args(testutil::load("gcd.hl"));
  DistillResult r = distill(p);
  if (r.ok()) {
    CHECK(check_distilled(r.program).empty());
    EquivReport rep = equiv_sample(p, r.program, 11, 50, 100000);
    CHECK(rep.disagreements.empty());
  } else {
    CHECK((r.status == DistillResult::Status::LimitExceeded ||
           r.status == DistillResult::Status::NotDistillable));
    CHECK(!r.reason.empty());
  }
}

TEST_CASE("distill: self-loop distills to itself") {
  Program p = testutil::load("loop.hl");
  DistillResult r = distill(p);
  REQUIRE(r.ok());
  Program expected = parse_program("f x where f x = f x");
  CHECK(program_alpha_eq(r.program, expected));
}

TEST_CASE("distill: non-recursive program evaluates away") {
  Program p = parse_program("f x where f x = x");
  DistillResult r = distill(p);
  REQUIRE(r.ok());
  CHECK(r.program.defs.empty());
  CHECK(alpha_eq(r.program.main, mk_var("x")));
}

TEST_CASE("distill: growing argument is extracted by a let") {
  Program p = parse_program("f x where f x = f (Succ x)");
  DistillResult r = distill(p);
  REQUIRE(r.ok());
  CHECK(check_distilled(r.program).empty());
  // the recursion persists: no case guards the cycle
  Lts lts = build_lts(extract_args(r.program));
  Verdict v = analyze(lts, true);
  CHECK(v.k == Verdict::K::Unknown);
  EquivReport rep = equiv_sample(p, r.program, 13, 10, 2000);
  CHECK(rep.disagreements.empty());
}

TEST_CASE("distill: tiny limits fail with LimitExceeded") {
  Program p = extract_args(testutil::load("gcd_distilled.hl"));
  Limits lim;
  lim.max_steps = 5;
  DistillResult r = distill(p, lim);
  REQUIRE_FALSE(r.ok());
  CHECK(r.status == DistillResult::Status::LimitExceeded);
}

TEST_CASE("distill: whenever it succeeds the residual is accepted") {
  for (const auto& name : testutil::corpus_files()) {
    CAPTURE(name);
    Program p = extract_args(testutil::load(name));
    DistillResult r = distill(p);
    if (r.ok()) CHECK(check_distilled(r.program).empty());
  }
}
