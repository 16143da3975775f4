#pragma once

#include <string>

#include "hl/ast.hpp"

namespace hl {

// Parses a whole program in the concrete grammar:
//
//   program  := expr "where" fundef*
//   fundef   := fname var* "=" expr ";"?
//   expr     := "\" var+ "->" expr
//             | "let" var "=" expr "in" expr
//             | "case" expr "of" "{" branch ("|" branch)* "}"
//             | aexpr+                       (left-associated application)
//   branch   := Con var* "->" expr
//   aexpr    := var | fname | Con | "(" expr ")" | natlit
//
// Lowercase-initial identifiers denote variables, or calls of functions named
// in the definition list when not shadowed by a binder. Uppercase-initial
// identifiers denote constructors. Decimal literals abbreviate Succ^n Zero.
// "--" starts a line comment. The result is validated (see validate_program).
Program parse_program(const std::string& text);

// Parses a single closed constructor term (used for --input values).
ExprPtr parse_value(const std::string& text);

}  // namespace hl
