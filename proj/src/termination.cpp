#include "hl/termination.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "hl/pretty.hpp"

namespace hl {

namespace {

struct Graph {
  int n = 0;
  // adj[v] = list of (target, label)
  std::vector<std::vector<std::pair<int, std::string>>> adj;

  explicit Graph(const Lts& l) : n(static_cast<int>(l.states.size())), adj(l.states.size()) {
    for (const auto& t : l.transitions)
      adj[static_cast<std::size_t>(t.from)].emplace_back(t.to, action_text(t.act));
    for (const auto& f : l.folds)
      adj[static_cast<std::size_t>(f.from)].emplace_back(f.to, show_renaming(f.sigma));
  }
};

std::vector<bool> case_mask(const Lts& l) {
  std::vector<bool> mask(l.states.size(), false);
  for (const auto& s : l.states)
    if (!s.terminal && s.kind == "case") mask[static_cast<std::size_t>(s.id)] = true;
  return mask;
}

// Shortest cycle through the graph restricted to unmasked states, as a state
// sequence with first == last. Returns empty when the restriction is acyclic.
std::vector<int> shortest_cycle(const Graph& g, const std::vector<bool>& deleted) {
  std::vector<int> best;
  for (int src = 0; src < g.n; src++) {
    if (deleted[static_cast<std::size_t>(src)]) continue;
    // BFS from the successors of src back to src.
    std::vector<int> prev(static_cast<std::size_t>(g.n), -2);
    std::deque<int> q;
    for (const auto& [to, _] : g.adj[static_cast<std::size_t>(src)]) {
      if (deleted[static_cast<std::size_t>(to)]) continue;
      if (to == src) return {src, src};
      if (prev[static_cast<std::size_t>(to)] == -2) {
        prev[static_cast<std::size_t>(to)] = src;
        q.push_back(to);
      }
    }
    bool found = false;
    while (!q.empty() && !found) {
      int v = q.front();
      q.pop_front();
      for (const auto& [to, _] : g.adj[static_cast<std::size_t>(v)]) {
        if (deleted[static_cast<std::size_t>(to)]) continue;
        if (to == src) {
          std::vector<int> cyc{src};
          int cur = v;
          while (cur != src) {
            cyc.push_back(cur);
            cur = prev[static_cast<std::size_t>(cur)];
          }
          std::reverse(cyc.begin() + 1, cyc.end());
          cyc.push_back(src);
          if (best.empty() || cyc.size() < best.size()) best = cyc;
          found = true;
          break;
        }
        if (prev[static_cast<std::size_t>(to)] == -2) {
          prev[static_cast<std::size_t>(to)] = v;
          q.push_back(to);
        }
      }
    }
  }
  return best;
}

std::vector<bool> reachable_from(const Graph& g, int src) {
  std::vector<bool> seen(static_cast<std::size_t>(g.n), false);
  std::deque<int> q{src};
  seen[static_cast<std::size_t>(src)] = true;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (const auto& [to, _] : g.adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(to)]) {
        seen[static_cast<std::size_t>(to)] = true;
        q.push_back(to);
      }
    }
  }
  return seen;
}

std::string selector_head(const Lts& l, int case_state) {
  const auto& s = l.states.at(static_cast<std::size_t>(case_state));
  const auto* cs = as<CaseE>(s.expr);
  if (!cs) return "";
  auto [head, args] = flatten_spine(cs->scrutinee);
  if (const auto* v = as<VarE>(head)) return v->name;
  return pretty(cs->scrutinee);
}

}  // namespace

Verdict analyze(const Lts& l, bool distilled_ok) {
  Verdict v;
  if (!distilled_ok) {
    v.k = Verdict::K::NotApplicable;
    v.reason = "program is not in distilled form";
    return v;
  }
  Graph g(l);
  auto cases = case_mask(l);
  auto cycle = shortest_cycle(g, cases);
  if (!cycle.empty()) {
    v.k = Verdict::K::Unknown;
    v.cycle = cycle;
    for (std::size_t i = 0; i + 1 < cycle.size(); i++) {
      for (const auto& [to, label] : g.adj[static_cast<std::size_t>(cycle[i])]) {
        if (to == cycle[i + 1]) {
          v.cycle_actions.push_back(label);
          break;
        }
      }
    }
    return v;
  }
  v.k = Verdict::K::Terminates;
  for (const auto& f : l.folds) {
    FoldWitness w{f.from, f.to, f.sigma, {}};
    auto from_target = reachable_from(g, f.to);
    // case states on some path target ~> source guard this fold
    for (const auto& s : l.states) {
      if (s.terminal || s.kind != "case") continue;
      if (!from_target[static_cast<std::size_t>(s.id)]) continue;
      auto from_case = reachable_from(g, s.id);
      if (from_case[static_cast<std::size_t>(f.from)])
        w.cases.push_back(FoldWitness::Guard{s.id, selector_head(l, s.id)});
    }
    v.folds.push_back(std::move(w));
  }
  return v;
}

std::string report_text(const Verdict& v, const Lts& l) {
  std::string out;
  switch (v.k) {
    case Verdict::K::Terminates: {
      out += "verdict: terminates\n";
      out += "every cycle of the folded LTS passes through a case state\n";
      for (const auto& w : v.folds) {
        out += "fold s" + std::to_string(w.from) + " -> s" + std::to_string(w.to) +
               "  sigma " + show_renaming(w.sigma) + "\n";
        out += "  guarded by:";
        for (const auto& c : w.cases)
          out += " s" + std::to_string(c.state) + " (case " + c.selector + ")";
        out += "\n";
      }
      break;
    }
    case Verdict::K::Unknown: {
      out += "verdict: unknown\n";
      out += "cycle without a case state:\n";
      for (std::size_t i = 0; i < v.cycle.size(); i++) {
        int id = v.cycle[i];
        const auto& s = l.states.at(static_cast<std::size_t>(id));
        out += "  s" + std::to_string(id) + ": " +
               (s.terminal ? std::string("0") : pretty(s.expr)) + "\n";
        if (i + 1 < v.cycle.size() && i < v.cycle_actions.size())
          out += "    --" + v.cycle_actions[i] + "-->\n";
      }
      break;
    }
    case Verdict::K::NotApplicable: {
      out += "verdict: not-applicable\n";
      out += v.reason + "\n";
      for (const auto& viol : v.violations)
        out += "  " + viol.path + ": [" + viol.clause + "] " + viol.message + "\n";
      break;
    }
  }
  return out;
}

nlohmann::ordered_json report_json(const Verdict& v, const Lts& l) {
  nlohmann::ordered_json j;
  switch (v.k) {
    case Verdict::K::Terminates: j["verdict"] = "terminates"; break;
    case Verdict::K::Unknown: j["verdict"] = "unknown"; break;
    case Verdict::K::NotApplicable: j["verdict"] = "not-applicable"; break;
  }
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& w : v.folds) {
    nlohmann::ordered_json sig = nlohmann::ordered_json::object();
    for (const auto& [k, val] : w.sigma) sig[k] = val;
    nlohmann::ordered_json cases = nlohmann::ordered_json::array();
    for (const auto& c : w.cases)
      cases.push_back({{"state", c.state}, {"selector", c.selector}});
    j["folds"].push_back({{"from", w.from},
                          {"to", w.to},
                          {"sigma", sig},
                          {"witness_case_states", cases}});
  }
  j["cycle"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < v.cycle.size(); i++) {
    int id = v.cycle[i];
    const auto& s = l.states.at(static_cast<std::size_t>(id));
    j["cycle"].push_back(
        {{"state", id}, {"expr", s.terminal ? std::string("0") : pretty(s.expr)}});
  }
  j["violations"] = to_json(v.violations);
  if (v.k == Verdict::K::NotApplicable) j["reason"] = v.reason;
  return j;
}

}  // namespace hl
