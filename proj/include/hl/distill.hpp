#pragma once

#include <string>

#include "hl/ast.hpp"
#include "hl/subst.hpp"

namespace hl {

// Homeomorphic embedding: e1 is embedded in e2 by coupling (same head
// symbol, arguments embed pairwise) or diving (e1 embeds in a subterm of
// e2). Variables couple with variables regardless of name.
bool embeds(const ExprPtr& e1, const ExprPtr& e2);

// Most specific generalization: gen with substitute(gen, s1) == e1 and
// substitute(gen, s2) == e2 up to alpha, most specific among such (identical
// binding pairs are merged). Mismatches under binders that would capture a
// bound variable are generalized at the nearest enclosing safe position.
struct Msg {
  ExprPtr gen;
  Substitution s1, s2;
};
Msg msg(const ExprPtr& e1, const ExprPtr& e2);

struct Limits {
  int max_depth = 400;   // process-tree depth
  int max_gens = 200;    // generalizations
  int max_defs = 150;    // residual definitions
  int max_steps = 20000; // driving reduction steps
};

struct DistillResult {
  enum class Status { Ok, LimitExceeded, NotDistillable } status;
  Program program;  // valid when status == Ok
  std::string reason;

  bool ok() const { return status == Status::Ok; }
};

// Best-effort distillation: drives the program under the call-by-name
// semantics with case-pattern information propagation, memoizes driven
// function-call configurations, folds when a configuration matches a
// memoized one by renaming, and generalizes (let-extraction or msg against
// the embedding ancestor) when the homeomorphic-embedding whistle blows.
// On success the residual program is in distilled form (machine-checked
// before returning) and evaluates like the input. Always halts: the limits
// bound the process tree.
DistillResult distill(const Program& p, const Limits& lim = {});

}  // namespace hl
