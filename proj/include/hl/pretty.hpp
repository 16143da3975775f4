#pragma once

#include <string>

#include "hl/ast.hpp"

namespace hl {

// Deterministic rendering in the concrete grammar; parse(pretty(p)) is
// alpha-equivalent to p. Literal Succ/Zero chains print as decimals.
std::string pretty(const ExprPtr& e);
std::string pretty(const Program& p);

}  // namespace hl
