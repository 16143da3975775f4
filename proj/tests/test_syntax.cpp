#include "doctest.h"

#include "hl/ast.hpp"
#include "hl/parse.hpp"
#include "hl/pretty.hpp"
#include "hl/subst.hpp"

#include "testutil.hpp"

using namespace hl;

TEST_CASE("parse: minimal program") {
  Program p = parse_program("f x where f x = x");
  const auto* app = as<AppE>(p.main);
  REQUIRE(app != nullptr);
  CHECK(as<FunE>(app->fn) != nullptr);
  CHECK(as<FunE>(app->fn)->name == "f");
  CHECK(as<VarE>(app->arg) != nullptr);
  REQUIRE(p.defs.size() == 1);
  CHECK(p.defs[0].name == "f");
  CHECK(p.defs[0].params == std::vector<std::string>{"x"});
  CHECK(as<VarE>(p.defs[0].body) != nullptr);
}

TEST_CASE("parse: gcd program from the corpus") {
  Program p = testutil::load("gcd.hl");
  REQUIRE(p.defs.size() == 3);
  CHECK(p.defs[0].name == "gcd");
  CHECK(p.defs[1].name == "gt");
  CHECK(p.defs[2].name == "sub");
  auto [head, args] = flatten_spine(p.main);
  CHECK(as<FunE>(head)->name == "gcd");
  CHECK(args.size() == 2);
  CHECK(p.con_arities.at("Succ") == 1);
  CHECK(p.con_arities.at("Zero") == 0);
  // Zero/Succ form one family, True/False the other
  CHECK(p.family_of("Zero")->count("Succ") == 1);
  CHECK(p.family_of("True")->count("False") == 1);
  CHECK(p.family_of("True")->count("Zero") == 0);
}

TEST_CASE("parse: error cases") {
  CHECK_THROWS_AS(parse_program("x where f = case x of { Succ n -> n | Succ m -> m }"),
                  Error);  // overlapping branches
  CHECK_THROWS_AS(parse_program("f x where f x = case x of { Succ n -> n }"
                                " ; g y = case y of { Zero -> y | Succ n -> n }"),
                  Error);  // non-exhaustive: first case misses Zero
  CHECK_THROWS_AS(parse_program("x where f = case x of { Cons a a -> a }"), Error);
  CHECK_THROWS_AS(parse_program("x where f y = y; f z = z"), Error);  // duplicate name
  CHECK_THROWS_AS(parse_program("f (Succ x y) 1 where f a b = a"), Error);  // arity mismatch
  CHECK_THROWS_AS(parse_program("f where f = g x"), Error);  // unbound var in body
  try {
    parse_program("f x where f x = case x of {");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line >= 1);
    CHECK(e.col >= 1);
  }
}

TEST_CASE("parse: numerals desugar to Succ chains") {
  Program p = parse_program("f 2 where f x = x");
  auto [head, args] = flatten_spine(p.main);
  REQUIRE(args.size() == 1);
  CHECK(alpha_eq(args[0], mk_nat(2)));
  CHECK(alpha_eq(mk_nat(0), mk_con("Zero")));
}

TEST_CASE("parse: shadowing of function names by binders") {
  // parameter f shadows the definition f inside g's body
  Program p = parse_program("g y where f x = x; g f = f");
  CHECK(as<VarE>(p.defs[1].body) != nullptr);
}

TEST_CASE("pretty: examples") {
  Program p;
  p.main = mk_var("x");
  CHECK(pretty(p) == "x\nwhere\n");
  CHECK(pretty(mk_lam("x", mk_var("x"))) == "\\x -> x");
  CHECK(pretty(mk_nat(3)) == "3");
}

TEST_CASE("pretty/parse round trip is alpha-identity on the corpus") {
  for (const auto& name : testutil::corpus_files()) {
    CAPTURE(name);
    Program p = testutil::load(name);
    Program q = parse_program(pretty(p));
    CHECK(program_alpha_eq(p, q));
    // and the rendering is a fixpoint
    CHECK(pretty(p) == pretty(q));
  }
}

TEST_CASE("free_vars") {
  CHECK(free_vars(mk_var("x")) == std::set<std::string>{"x"});
  CHECK(free_vars(mk_lam("x", mk_app(mk_var("x"), mk_var("y")))) ==
        std::set<std::string>{"y"});
  auto e = mk_case(mk_var("a"),
                   {Branch{Pattern{"Zero", {}}, mk_var("c")},
                    Branch{Pattern{"Succ", {"b"}}, mk_var("b")}});
  CHECK(free_vars(e) == std::set<std::string>{"a", "c"});
  CHECK(free_vars(mk_fun("f")) == std::set<std::string>{});
}

TEST_CASE("substitute: examples") {
  CHECK(alpha_eq(substitute(mk_var("x"), {{"x", mk_nat(0)}}), mk_nat(0)));
  auto lam = mk_lam("x", mk_var("x"));
  CHECK(alpha_eq(substitute(lam, {{"x", mk_nat(0)}}), lam));
  // capture avoidance: (\y -> x){x -> y} renames the binder
  auto r = substitute(mk_lam("y", mk_var("x")), {{"x", mk_var("y")}});
  const auto* rl = as<LamE>(r);
  REQUIRE(rl != nullptr);
  CHECK(rl->param != "y");
  CHECK(alpha_eq(as<LamE>(r)->body, mk_var("y")));
}

TEST_CASE("substitute: capture avoidance in case branches") {
  // case a of { Succ y -> x } with x -> y
  auto e = mk_case(mk_var("a"), {Branch{Pattern{"Succ", {"y"}}, mk_var("x")}});
  auto r = substitute(e, {{"x", mk_var("y")}});
  const auto* cs = as<CaseE>(r);
  REQUIRE(cs != nullptr);
  CHECK(cs->branches[0].pat.vars[0] != "y");
  CHECK(alpha_eq(cs->branches[0].body, mk_var("y")));
}

TEST_CASE("alpha_eq: examples and laws") {
  CHECK(alpha_eq(mk_lam("x", mk_var("x")), mk_lam("y", mk_var("y"))));
  CHECK_FALSE(alpha_eq(mk_var("x"), mk_var("y")));
  CHECK_FALSE(alpha_eq(mk_lam("x", mk_var("z")), mk_lam("x", mk_var("w"))));

  testutil::ExprGen gen(7);
  for (int i = 0; i < 200; i++) {
    auto e1 = gen.gen(4, {}, {"u", "v"});
    auto e2 = gen.gen(4, {}, {"u", "v"});
    CHECK(alpha_eq(e1, e1));                       // reflexive
    CHECK(alpha_eq(e1, e2) == alpha_eq(e2, e1));   // symmetric
    // transitivity via a renamed copy
    auto e3 = substitute(e1, {});
    CHECK(alpha_eq(e1, e3));
  }
}

TEST_CASE("substitute: laws on generated terms") {
  testutil::ExprGen gen(11);
  for (int i = 0; i < 200; i++) {
    auto e = gen.gen(4, {}, {"u", "v", "w"});
    CHECK(alpha_eq(substitute(e, {}), e));  // empty substitution is identity

    Substitution theta{{"u", gen.gen(2, {}, {"z"})}, {"v", mk_nat(1)}};
    auto r = substitute(e, theta);
    // free-variable containment law
    auto fv_e = free_vars(e);
    std::set<std::string> expected;
    for (const auto& x : fv_e) {
      if (x == "u") {
        auto f = free_vars(theta.at("u"));
        expected.insert(f.begin(), f.end());
      } else if (x == "v") {
        // numeral: closed
      } else {
        expected.insert(x);
      }
    }
    for (const auto& x : free_vars(r)) CHECK(expected.count(x) == 1);
  }
}

TEST_CASE("match_renaming: examples") {
  // f1 c b c b against f1 a b c d
  auto e = apply_spine(mk_fun("f1"), {mk_var("c"), mk_var("b"), mk_var("c"), mk_var("b")});
  auto ep = apply_spine(mk_fun("f1"), {mk_var("a"), mk_var("b"), mk_var("c"), mk_var("d")});
  auto sigma = match_renaming(e, ep);
  REQUIRE(sigma.has_value());
  CHECK((*sigma) == Renaming{{"a", "c"}, {"b", "b"}, {"c", "c"}, {"d", "b"}});

  auto fx = mk_app(mk_fun("f"), mk_var("x"));
  auto id = match_renaming(fx, fx);
  REQUIRE(id.has_value());
  CHECK((*id) == Renaming{{"x", "x"}});

  CHECK_FALSE(match_renaming(mk_app(mk_fun("g"), mk_nat(0)),
                             mk_app(mk_fun("g"), mk_var("x")))
                  .has_value());
}

TEST_CASE("match_renaming: soundness on generated terms") {
  testutil::ExprGen gen(13);
  int found = 0;
  for (int i = 0; i < 300; i++) {
    auto ep = gen.gen(3, {}, {"u", "v", "w"});
    Renaming rn{{"u", "r"}, {"v", "u"}, {"w", "w"}};
    auto e = rename(ep, rn);
    auto sigma = match_renaming(e, ep);
    if (sigma) {
      found++;
      CHECK(alpha_eq(e, substitute(ep, to_substitution(*sigma))));
    }
  }
  CHECK(found > 100);  // the constructed instances should usually match
}

TEST_CASE("extract_args: examples") {
  Program p = parse_program("gcd (sub x y) y where gcd a b = a; sub a b = a");
  Program q = extract_args(p);
  const auto* let = as<LetE>(q.main);
  REQUIRE(let != nullptr);
  auto [bh, bargs] = flatten_spine(let->bound);
  CHECK(as<FunE>(bh)->name == "sub");
  auto [h, args] = flatten_spine(let->body);
  CHECK(as<FunE>(h)->name == "gcd");
  REQUIRE(args.size() == 2);
  CHECK(is_var(args[0]));
  CHECK(is_var(args[1]));

  Program p2 = parse_program("f Zero where f x = x");
  Program q2 = extract_args(p2);
  CHECK(as<LetE>(q2.main) != nullptr);

  Program p3 = parse_program("f x y where f a b = a");
  Program q3 = extract_args(p3);
  CHECK(program_alpha_eq(p3, q3));  // already variables: unchanged
}

TEST_CASE("extract_args: idempotent on the corpus") {
  for (const auto& name : testutil::corpus_files()) {
    CAPTURE(name);
    Program p = testutil::load(name);
    Program q = extract_args(p);
    Program r = extract_args(q);
    CHECK(program_alpha_eq(q, r));
  }
}

TEST_CASE("program_alpha_eq: function-name bijection") {
  // bound names and function names may differ; free inputs must agree
  Program a = parse_program("f n where f n = case n of { Zero -> Zero | Succ n' -> f n' }");
  Program b = parse_program("f0 n where f0 k = case k of { Zero -> Zero | Succ j -> f0 j }");
  CHECK(program_alpha_eq(a, b));
  Program c = parse_program("f0 n where f0 k = case k of { Zero -> f0 k | Succ j -> f0 j }");
  CHECK_FALSE(program_alpha_eq(a, c));
  Program d = parse_program("f0 m where f0 k = case k of { Zero -> Zero | Succ j -> f0 j }");
  CHECK_FALSE(program_alpha_eq(a, d));  // different input variable
}

TEST_CASE("alpha_eq: repeated case trees inside distilled gcd are alpha-equal") {
  // f4 and f5 share the same Zero-branch case tree up to bound names
  Program p = testutil::load("gcd_distilled.hl");
  const FunDef* f4 = p.find_def("f4");
  const FunDef* f5 = p.find_def("f5");
  REQUIRE(f4 != nullptr);
  REQUIRE(f5 != nullptr);
  auto zero_branch = [](const FunDef* d) {
    const auto* cs = as<CaseE>(d->body);
    REQUIRE(cs != nullptr);
    return cs->branches[0].body;  // case b of Zero -> Succ c | Succ b -> f5 c b c b
  };
  CHECK(alpha_eq(zero_branch(f4), zero_branch(f5)));
}
