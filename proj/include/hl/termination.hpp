#pragma once

#include <string>
#include <vector>

#include "hl/distilled.hpp"
#include "hl/lts.hpp"

#include "json.hpp"

namespace hl {

// Evidence that a fold edge is guarded: the case states lying on paths from
// the fold target back to the fold source, each deconstructing a well-founded
// value via its selector-head variable.
struct FoldWitness {
  int from, to;
  Renaming sigma;
  struct Guard {
    int state;
    std::string selector;
  };
  std::vector<Guard> cases;
};

struct Verdict {
  enum class K { Terminates, Unknown, NotApplicable } k;
  std::vector<FoldWitness> folds;         // Terminates
  std::vector<int> cycle;                 // Unknown: states, first == last
  std::vector<std::string> cycle_actions; // Unknown: labels between them
  std::string reason;                     // NotApplicable
  std::vector<Violation> violations;      // NotApplicable
};

// Sufficient termination check over the folded LTS: with the case states
// deleted, the remaining graph (transitions plus fold edges) must be acyclic,
// i.e. every cycle passes through a case state. Requires the source program
// to be in distilled form, otherwise NotApplicable: only then are case
// selector heads never let-extracted, so each scrutinised parameter cannot
// previously have grown and every cycle's case marks a genuine descent.
Verdict analyze(const Lts& l, bool distilled_ok);

std::string report_text(const Verdict& v, const Lts& l);
nlohmann::ordered_json report_json(const Verdict& v, const Lts& l);

}  // namespace hl
