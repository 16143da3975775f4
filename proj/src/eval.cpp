#include "hl/eval.hpp"

#include <deque>

#include "hl/pretty.hpp"

namespace hl {

bool is_whnf(const ExprPtr& e) {
  return as<ConE>(e) != nullptr || as<LamE>(e) != nullptr;
}

std::optional<std::pair<ExprPtr, ReductionLabel>> step(const ExprPtr& e,
                                                       const DefMap& defs) {
  if (const auto* a = as<AppE>(e)) {
    if (const auto* l = as<LamE>(a->fn)) {
      return {{substitute(l->body, {{l->param, a->arg}}),
               {ReductionLabel::K::Beta, ""}}};
    }
    if (auto s = step(a->fn, defs))
      return {{mk_app(s->first, a->arg), s->second}};
    return std::nullopt;
  }
  if (const auto* f = as<FunE>(e)) {
    const FunDef* d = defs.find(f->name);
    if (!d) return std::nullopt;
    ExprPtr lam = d->body;
    for (auto it = d->params.rbegin(); it != d->params.rend(); ++it)
      lam = mk_lam(*it, std::move(lam));
    return {{lam, {ReductionLabel::K::Unfold, f->name}}};
  }
  if (const auto* cs = as<CaseE>(e)) {
    if (const auto* c = as<ConE>(cs->scrutinee)) {
      for (const auto& br : cs->branches) {
        if (br.pat.ctor != c->name) continue;
        if (br.pat.vars.size() != c->args.size()) return std::nullopt;
        Substitution theta;
        for (std::size_t i = 0; i < c->args.size(); i++)
          theta.emplace(br.pat.vars[i], c->args[i]);
        return {{substitute(br.body, theta), {ReductionLabel::K::ConElim, c->name}}};
      }
      return std::nullopt;  // no matching branch
    }
    if (auto s = step(cs->scrutinee, defs))
      return {{mk_case(s->first, cs->branches), s->second}};
    return std::nullopt;
  }
  if (const auto* l = as<LetE>(e)) {
    return {{substitute(l->body, {{l->var, l->bound}}),
             {ReductionLabel::K::Beta, ""}}};
  }
  return std::nullopt;  // Var, Lam, Con
}

Outcome eval_whnf(ExprPtr e, const DefMap& defs, std::int64_t& fuel) {
  while (true) {
    if (is_whnf(e)) return {Outcome::K::Value, e, ""};
    auto s = step(e, defs);
    if (!s) return {Outcome::K::Stuck, nullptr, "no reduction applies: " + pretty(e)};
    if (fuel <= 0) return {Outcome::K::OutOfFuel, nullptr, ""};
    fuel--;
    e = std::move(s->first);
  }
}

namespace {

struct Cell {
  ExprPtr raw;       // unforced expression, or the final value for leaves
  bool is_con = false;
  std::string ctor;
  std::vector<Cell> kids;
};

ExprPtr rebuild(const Cell& c) {
  if (!c.is_con) return c.raw;
  std::vector<ExprPtr> args;
  args.reserve(c.kids.size());
  for (const auto& k : c.kids) args.push_back(rebuild(k));
  return mk_con(c.ctor, std::move(args));
}

}  // namespace

Outcome eval_deep(ExprPtr e, const DefMap& defs, std::int64_t fuel) {
  Cell root{std::move(e), false, "", {}};
  std::deque<Cell*> queue{&root};
  while (!queue.empty()) {
    Cell* cell = queue.front();
    queue.pop_front();
    Outcome o = eval_whnf(cell->raw, defs, fuel);
    if (!o.is_value()) return o;
    if (const auto* c = as<ConE>(o.value)) {
      cell->is_con = true;
      cell->ctor = c->name;
      cell->raw = nullptr;
      for (const auto& a : c->args) {
        cell->kids.push_back(Cell{a, false, "", {}});
      }
      for (auto& k : cell->kids) queue.push_back(&k);
    } else {
      cell->raw = o.value;  // lambda: kept as-is
    }
  }
  return {Outcome::K::Value, rebuild(root), ""};
}

}  // namespace hl
