#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "hl/ast.hpp"
#include "hl/subst.hpp"

namespace hl {

// Reduction annotations: unfolding of a named function, elimination of a
// constructor, or beta substitution (lets reduce by beta as well).
struct ReductionLabel {
  enum class K { Unfold, ConElim, Beta } kind;
  std::string name;  // function or constructor name, empty for Beta
};

class DefMap {
 public:
  DefMap() = default;
  explicit DefMap(const Program& p) {
    for (const auto& d : p.defs) defs_.emplace(d.name, &d);
  }
  const FunDef* find(const std::string& name) const {
    auto it = defs_.find(name);
    return it == defs_.end() ? nullptr : it->second;
  }

 private:
  std::map<std::string, const FunDef*> defs_;
};

// Constructor application or lambda abstraction.
bool is_whnf(const ExprPtr& e);

// One-step call-by-name reduction. Reduces under the left of applications
// and in case selectors. Returns nothing when e is in weak head normal form
// or stuck (no rule applies, e.g. a free-variable-headed redex).
std::optional<std::pair<ExprPtr, ReductionLabel>> step(const ExprPtr& e,
                                                       const DefMap& defs);

struct Outcome {
  enum class K { Value, OutOfFuel, Stuck } k;
  ExprPtr value;     // for Value
  std::string why;   // for Stuck

  bool is_value() const { return k == K::Value; }
};

// Iterates step at most `fuel` times; fuel counts one-step reductions and is
// decremented in place so callers can share a budget.
Outcome eval_whnf(ExprPtr e, const DefMap& defs, std::int64_t& fuel);

// Evaluates to weak head normal form, then forces constructor arguments
// breadth-first under the same budget, yielding a first-order value tree
// (lambdas are kept unevaluated).
Outcome eval_deep(ExprPtr e, const DefMap& defs, std::int64_t fuel);

}  // namespace hl
