#include "hl/lts.hpp"

#include "hl/eval.hpp"
#include "hl/pretty.hpp"

namespace hl {

std::string action_text(const Action& a) {
  switch (a.k) {
    case Action::K::Var: return a.name;
    case Action::K::Con: return a.name;
    case Action::K::Lambda: return "λ" + a.name;
    case Action::K::Unfold: return a.name;
    case Action::K::AppFun: return "@";
    case Action::K::Arg: return "#" + std::to_string(a.index);
    case Action::K::Case: return "case";
    case Action::K::Pat: {
      std::string s = a.pat.ctor;
      for (const auto& v : a.pat.vars) s += " " + v;
      return s;
    }
    case Action::K::LetBind: return "let " + a.name;
    case Action::K::LetBody: return "in";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxStates = 200000;

struct Builder {
  const Program& p;
  DefMap defs;
  Lts lts;
  // Memoised function-call configurations along the current path.
  std::vector<std::pair<int, ExprPtr>> memo;

  explicit Builder(const Program& prog) : p(prog), defs(prog) {}

  int new_state(const ExprPtr& e, const std::string& kind) {
    if (lts.states.size() >= kMaxStates)
      throw Error("LTS construction exceeded " + std::to_string(kMaxStates) + " states");
    int id = static_cast<int>(lts.states.size());
    lts.states.push_back(Lts::State{id, e, false, kind});
    return id;
  }

  int terminal_state() {
    if (lts.terminal < 0) {
      int id = static_cast<int>(lts.states.size());
      lts.states.push_back(Lts::State{id, nullptr, true, "terminal"});
      lts.terminal = id;
    }
    return lts.terminal;
  }

  void edge(int from, Action a, int to) {
    lts.transitions.push_back(Lts::Trans{from, std::move(a), to});
  }

  // Decides whether e is a function-call configuration: a spine headed by a
  // named function applied to exactly arity-many variables.
  bool is_config(const ExprPtr& e, const FunDef** def_out,
                 std::vector<ExprPtr>* args_out) const {
    auto [head, args] = flatten_spine(e);
    const auto* f = as<FunE>(head);
    if (!f) return false;
    const FunDef* d = p.find_def(f->name);
    if (!d) throw Error("undefined function " + f->name + " in LTS construction");
    if (args.size() > d->params.size()) return false;  // handled by the @ rule
    if (args.size() < d->params.size())
      throw Error("unsaturated call of " + f->name + " in LTS construction");
    for (const auto& a : args)
      if (!is_var(a))
        throw Error("non-variable argument in call of " + f->name +
                    " (run extract_args first): " + pretty(e));
    *def_out = d;
    *args_out = std::move(args);
    return true;
  }

  int visit(const ExprPtr& e) {
    const FunDef* def = nullptr;
    std::vector<ExprPtr> cargs;
    if (is_config(e, &def, &cargs)) {
      int id = new_state(e, "call");
      // Fold to the most recent memoised renaming, if any.
      for (auto it = memo.rbegin(); it != memo.rend(); ++it) {
        if (auto sigma = match_renaming(e, it->second)) {
          lts.folds.push_back(Lts::Fold{id, std::move(*sigma), it->first});
          return id;
        }
      }
      Substitution theta;
      for (std::size_t i = 0; i < cargs.size(); i++)
        theta.emplace(def->params[i], cargs[i]);
      ExprPtr body = substitute(def->body, theta);
      memo.emplace_back(id, e);
      int to = visit(body);
      memo.pop_back();
      edge(id, Action{Action::K::Unfold, def->name, 0, {}}, to);
      return id;
    }
    if (const auto* v = as<VarE>(e)) {
      int id = new_state(e, "var");
      edge(id, Action{Action::K::Var, v->name, 0, {}}, terminal_state());
      return id;
    }
    if (const auto* c = as<ConE>(e)) {
      int id = new_state(e, "con");
      edge(id, Action{Action::K::Con, c->name, 0, {}}, terminal_state());
      for (std::size_t i = 0; i < c->args.size(); i++) {
        int to = visit(c->args[i]);
        edge(id, Action{Action::K::Arg, "", static_cast<int>(i) + 1, {}}, to);
      }
      return id;
    }
    if (const auto* l = as<LamE>(e)) {
      int id = new_state(e, "lambda");
      int to = visit(l->body);
      edge(id, Action{Action::K::Lambda, l->param, 0, {}}, to);
      return id;
    }
    if (const auto* a = as<AppE>(e)) {
      int id = new_state(e, "app");
      int fn = visit(a->fn);
      edge(id, Action{Action::K::AppFun, "", 0, {}}, fn);
      int arg = visit(a->arg);
      edge(id, Action{Action::K::Arg, "", 1, {}}, arg);
      return id;
    }
    if (const auto* cs = as<CaseE>(e)) {
      int id = new_state(e, "case");
      int sel = visit(cs->scrutinee);
      edge(id, Action{Action::K::Case, "", 0, {}}, sel);
      for (const auto& br : cs->branches) {
        int to = visit(br.body);
        edge(id, Action{Action::K::Pat, "", 0, br.pat}, to);
      }
      return id;
    }
    const auto* l = as<LetE>(e);
    int id = new_state(e, "let");
    int b = visit(l->bound);
    edge(id, Action{Action::K::LetBind, l->var, 0, {}}, b);
    int body = visit(l->body);
    edge(id, Action{Action::K::LetBody, "", 0, {}}, body);
    return id;
  }
};

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

Lts build_lts(const Program& p) {
  Builder b(p);
  int start = b.visit(p.main);
  b.lts.start = start;
  return std::move(b.lts);
}

std::string to_dot(const Lts& l) {
  std::string out = "digraph lts {\n  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n";
  for (const auto& s : l.states) {
    if (s.terminal) {
      out += "  s" + std::to_string(s.id) + " [shape=doublecircle, label=\"0\"];\n";
    } else {
      std::string label = "s" + std::to_string(s.id) + ": " + pretty(s.expr);
      if (label.size() > 60) label = label.substr(0, 57) + "...";
      out += "  s" + std::to_string(s.id) + " [label=\"" + dot_escape(label) + "\"];\n";
    }
  }
  for (const auto& t : l.transitions) {
    out += "  s" + std::to_string(t.from) + " -> s" + std::to_string(t.to) +
           " [label=\"" + dot_escape(action_text(t.act)) + "\"];\n";
  }
  for (const auto& f : l.folds) {
    out += "  s" + std::to_string(f.from) + " -> s" + std::to_string(f.to) +
           " [style=dashed, label=\"" + dot_escape(show_renaming(f.sigma)) + "\"];\n";
  }
  out += "}\n";
  return out;
}

nlohmann::ordered_json to_json(const Lts& l) {
  nlohmann::ordered_json j;
  j["states"] = nlohmann::ordered_json::array();
  for (const auto& s : l.states) {
    j["states"].push_back({{"id", s.id},
                           {"kind", l.state_kind(s.id)},
                           {"expr", s.terminal ? "0" : pretty(s.expr)}});
  }
  j["start"] = l.start;
  j["transitions"] = nlohmann::ordered_json::array();
  for (const auto& t : l.transitions)
    j["transitions"].push_back(
        {{"from", t.from}, {"action", action_text(t.act)}, {"to", t.to}});
  j["folds"] = nlohmann::ordered_json::array();
  for (const auto& f : l.folds) {
    nlohmann::ordered_json sig = nlohmann::ordered_json::object();
    for (const auto& [k, v] : f.sigma) sig[k] = v;
    j["folds"].push_back({{"from", f.from}, {"sigma", sig}, {"to", f.to}});
  }
  return j;
}

}  // namespace hl
