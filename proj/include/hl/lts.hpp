#pragma once

#include <string>
#include <vector>

#include "hl/ast.hpp"
#include "hl/subst.hpp"

#include "json.hpp"

namespace hl {

// Transition labels: variable, constructor, lambda, function unfolding, the
// function of an application, the i-th argument, case selector, case
// pattern, let variable, let body.
struct Action {
  enum class K { Var, Con, Lambda, Unfold, AppFun, Arg, Case, Pat, LetBind, LetBody } k;
  std::string name;  // variable / constructor / function / let variable
  int index = 0;     // for Arg
  Pattern pat;       // for Pat
};

std::string action_text(const Action& a);

// Finite state graph of a program: states are expression occurrences (plus
// one terminal 0 state), transitions follow the syntax-directed rules, and
// fold edges tie a renamed function call back to the memoised call it
// instantiates: for every fold edge (e, sigma, e'), e == e' sigma.
struct Lts {
  struct State {
    int id;
    ExprPtr expr;       // null for the terminal state
    bool terminal = false;
    // var | con | lambda | call | app | case | let | terminal
    std::string kind;
  };
  struct Trans {
    int from;
    Action act;
    int to;
  };
  struct Fold {
    int from;
    Renaming sigma;
    int to;
  };

  std::vector<State> states;
  std::vector<Trans> transitions;
  std::vector<Fold> folds;
  int start = 0;
  int terminal = -1;  // -1 when no state reaches 0

  const std::string& state_kind(int id) const {
    return states.at(static_cast<std::size_t>(id)).kind;
  }
};

// Builds the folded LTS of a program whose function-call arguments are all
// variables (run extract_args first). Throws Error for calls of undefined
// functions, non-variable call arguments, or unsaturated calls.
Lts build_lts(const Program& p);

// Deterministic DOT rendering; fold edges dashed and labelled with sigma,
// the terminal state drawn as a double circle.
std::string to_dot(const Lts& l);

nlohmann::ordered_json to_json(const Lts& l);

}  // namespace hl
