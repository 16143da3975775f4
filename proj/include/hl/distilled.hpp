#pragma once

#include <string>
#include <vector>

#include "hl/ast.hpp"

#include "json.hpp"

namespace hl {

struct Violation {
  std::string path;     // dotted path to the offending subterm
  std::string clause;   // grammar clause violated
  std::string message;
};

// Decides membership in distilled form: main and every definition body must
// derive from the restricted grammar in which function calls carry only
// variables, case selectors are variable-headed applications, and variables
// bound by enclosing lets (the set rho) never appear as selector heads.
// rho is empty at the root of every definition body. An empty result means
// the program is accepted.
std::vector<Violation> check_distilled(const Program& p);

nlohmann::ordered_json to_json(const std::vector<Violation>& vs);

}  // namespace hl
