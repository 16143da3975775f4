#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>

#include "hl/ast.hpp"

namespace hl {

// Finite map from variables to expressions (theta).
using Substitution = std::map<std::string, ExprPtr>;
// Substitution whose range is variables only (sigma).
using Renaming = std::map<std::string, std::string>;

std::set<std::string> free_vars(const ExprPtr& e);
// Free variables in first-occurrence (leftmost) order.
std::vector<std::string> free_vars_ordered(const ExprPtr& e);

// Capture-avoiding simultaneous substitution; bound variables are renamed
// where they would capture a substituted expression.
ExprPtr substitute(const ExprPtr& e, const Substitution& theta);
ExprPtr rename(const ExprPtr& e, const Renaming& sigma);

Substitution to_substitution(const Renaming& sigma);

// e1 and e2 differ only in the names of bound variables.
bool alpha_eq(const ExprPtr& e1, const ExprPtr& e2);

// Renaming sigma over the free variables of ep such that e == ep sigma (up
// to alpha); leftmost binding wins, later occurrences must agree. The
// renaming need not be injective.
std::optional<Renaming> match_renaming(const ExprPtr& e, const ExprPtr& ep);

// Replaces every non-variable argument of a named-function application spine
// by a fresh let binding enclosing the call. The result evaluates like the
// input and has variable-only call arguments, as required for LTS building.
Program extract_args(const Program& p);

// Alpha-equivalence of whole programs, up to a bijection on function names.
// The bijection is discovered from main; both programs' definitions must be
// covered by it.
bool program_alpha_eq(const Program& p1, const Program& p2);

std::string show_renaming(const Renaming& sigma);

}  // namespace hl
