#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hl/ast.hpp"

#include "json.hpp"

namespace hl {

// Differential testing of two programs with the same main inputs: closed
// first-order constructor values are generated for the free variables, both
// mains are evaluated deeply, and outcomes compared. A value on one side
// against fuel exhaustion on the other is inconclusive, never a disagreement.
struct EquivReport {
  int samples = 0;
  int agreements = 0;
  int inconclusive = 0;
  struct Disagreement {
    std::map<std::string, std::string> input;
    std::string out1, out2;
  };
  std::vector<Disagreement> disagreements;
};

EquivReport equiv_sample(const Program& p1, const Program& p2,
                         std::uint64_t seed, int samples, std::int64_t fuel);

nlohmann::ordered_json to_json(const EquivReport& r);

// Constructor family to draw each main input from, found by following the
// variable through call arguments to a scrutinised parameter. Falls back to
// natural numerals for variables never scrutinised at a constructor family.
std::map<std::string, std::vector<std::string>> infer_input_families(const Program& p);

// Deterministic random closed value over a constructor family.
class ValueGen {
 public:
  ValueGen(const Program& p, std::uint64_t seed);
  // depth-bounded value for input variable `var` of sample index `index`
  ExprPtr value_for(const std::string& var, int index, int max_depth);

 private:
  const Program& p_;
  std::uint64_t seed_;
  std::map<std::string, std::vector<std::string>> families_;
};

}  // namespace hl
