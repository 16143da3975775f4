#include "hl/ast.hpp"

#include <algorithm>

namespace hl {

ExprPtr mk_var(std::string name) {
  return std::make_shared<Expr>(Expr{VarE{std::move(name)}});
}
ExprPtr mk_con(std::string name, std::vector<ExprPtr> args) {
  return std::make_shared<Expr>(Expr{ConE{std::move(name), std::move(args)}});
}
ExprPtr mk_lam(std::string param, ExprPtr body) {
  return std::make_shared<Expr>(Expr{LamE{std::move(param), std::move(body)}});
}
ExprPtr mk_fun(std::string name) {
  return std::make_shared<Expr>(Expr{FunE{std::move(name)}});
}
ExprPtr mk_app(ExprPtr fn, ExprPtr arg) {
  return std::make_shared<Expr>(Expr{AppE{std::move(fn), std::move(arg)}});
}
ExprPtr mk_case(ExprPtr scrutinee, std::vector<Branch> branches) {
  return std::make_shared<Expr>(Expr{CaseE{std::move(scrutinee), std::move(branches)}});
}
ExprPtr mk_let(std::string var, ExprPtr bound, ExprPtr body) {
  return std::make_shared<Expr>(Expr{LetE{std::move(var), std::move(bound), std::move(body)}});
}

ExprPtr mk_nat(unsigned long long n) {
  ExprPtr e = mk_con("Zero");
  for (unsigned long long i = 0; i < n; i++) e = mk_con("Succ", {e});
  return e;
}

bool is_var(const ExprPtr& e) { return as<VarE>(e) != nullptr; }

ExprPtr apply_spine(ExprPtr fn, const std::vector<ExprPtr>& args) {
  for (const auto& a : args) fn = mk_app(std::move(fn), a);
  return fn;
}

std::pair<ExprPtr, std::vector<ExprPtr>> flatten_spine(const ExprPtr& e) {
  std::vector<ExprPtr> args;
  ExprPtr head = e;
  while (const auto* a = as<AppE>(head)) {
    args.push_back(a->arg);
    head = a->fn;
  }
  std::reverse(args.begin(), args.end());
  return {head, args};
}

const FunDef* Program::find_def(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

const std::set<std::string>* Program::family_of(const std::string& ctor) const {
  for (const auto& fam : con_families)
    if (fam.count(ctor)) return &fam;
  return nullptr;
}

namespace {

struct Validator {
  Program& p;
  std::map<std::string, std::size_t> arities;
  // Union-find over constructor names; constructors appearing together in
  // one case expression belong to the same family.
  std::map<std::string, std::string> parent;

  std::string find(const std::string& c) {
    auto it = parent.find(c);
    if (it == parent.end()) {
      parent[c] = c;
      return c;
    }
    if (it->second == c) return c;
    std::string r = find(it->second);
    parent[c] = r;
    return r;
  }
  void unite(const std::string& a, const std::string& b) {
    parent[find(a)] = find(b);
  }

  void register_con(const std::string& name, std::size_t n, const std::string& where) {
    auto it = arities.find(name);
    if (it == arities.end()) {
      arities[name] = n;
      find(name);
    } else if (it->second != n) {
      throw Error("arity mismatch for constructor " + name + " in " + where +
                  ": first used with " + std::to_string(it->second) +
                  " argument(s), now " + std::to_string(n));
    }
  }

  void walk(const ExprPtr& e, const std::string& where) {
    if (as<VarE>(e) || as<FunE>(e)) return;
    if (const auto* c = as<ConE>(e)) {
      register_con(c->name, c->args.size(), where);
      for (const auto& a : c->args) walk(a, where);
      return;
    }
    if (const auto* l = as<LamE>(e)) { walk(l->body, where); return; }
    if (const auto* a = as<AppE>(e)) { walk(a->fn, where); walk(a->arg, where); return; }
    if (const auto* l = as<LetE>(e)) { walk(l->bound, where); walk(l->body, where); return; }
    const auto* cs = as<CaseE>(e);
    walk(cs->scrutinee, where);
    if (cs->branches.empty())
      throw Error("case expression with no branches in " + where);
    std::set<std::string> seen;
    for (const auto& br : cs->branches) {
      if (!seen.insert(br.pat.ctor).second)
        throw Error("overlapping case branches for constructor " + br.pat.ctor +
                    " in " + where);
      register_con(br.pat.ctor, br.pat.vars.size(), where);
      std::set<std::string> pv;
      for (const auto& v : br.pat.vars)
        if (!pv.insert(v).second)
          throw Error("duplicate pattern variable " + v + " in " + where);
      unite(br.pat.ctor, cs->branches.front().pat.ctor);
      walk(br.body, where);
    }
  }

  void check_exhaustive(const ExprPtr& e, const std::string& where) {
    if (const auto* c = as<ConE>(e)) {
      for (const auto& a : c->args) check_exhaustive(a, where);
      return;
    }
    if (const auto* l = as<LamE>(e)) { check_exhaustive(l->body, where); return; }
    if (const auto* a = as<AppE>(e)) { check_exhaustive(a->fn, where); check_exhaustive(a->arg, where); return; }
    if (const auto* l = as<LetE>(e)) { check_exhaustive(l->bound, where); check_exhaustive(l->body, where); return; }
    if (const auto* cs = as<CaseE>(e)) {
      check_exhaustive(cs->scrutinee, where);
      std::set<std::string> covered;
      for (const auto& br : cs->branches) covered.insert(br.pat.ctor);
      std::string rep = find(cs->branches.front().pat.ctor);
      for (const auto& [c, _] : parent) {
        if (find(c) == rep && !covered.count(c))
          throw Error("non-exhaustive case in " + where + ": missing constructor " + c);
      }
      for (const auto& br : cs->branches) check_exhaustive(br.body, where);
    }
  }
};

void free_vars_rec(const ExprPtr& e, std::set<std::string>& bound,
                   std::set<std::string>& out);

}  // namespace

void validate_program(Program& p) {
  std::set<std::string> names;
  for (const auto& d : p.defs) {
    if (!names.insert(d.name).second)
      throw Error("duplicate function name " + d.name);
    std::set<std::string> ps;
    for (const auto& v : d.params)
      if (!ps.insert(v).second)
        throw Error("duplicate parameter " + v + " in definition of " + d.name);
  }

  Validator v{p, {}, {}};
  v.walk(p.main, "main");
  for (const auto& d : p.defs) v.walk(d.body, "definition of " + d.name);
  v.check_exhaustive(p.main, "main");
  for (const auto& d : p.defs) v.check_exhaustive(d.body, "definition of " + d.name);

  // Definition bodies may only mention their parameters (function names are
  // not variables); free variables are allowed in main only.
  for (const auto& d : p.defs) {
    std::set<std::string> bound(d.params.begin(), d.params.end());
    std::set<std::string> fvs;
    free_vars_rec(d.body, bound, fvs);
    if (!fvs.empty())
      throw Error("unbound variable " + *fvs.begin() + " in definition of " + d.name);
  }

  p.con_arities = std::move(v.arities);
  p.con_families.clear();
  std::map<std::string, std::set<std::string>> fams;
  for (const auto& [c, _] : v.parent) fams[v.find(c)].insert(c);
  for (auto& [_, fam] : fams) p.con_families.push_back(std::move(fam));
}

namespace {

void free_vars_rec(const ExprPtr& e, std::set<std::string>& bound,
                   std::set<std::string>& out) {
  if (const auto* v = as<VarE>(e)) {
    if (!bound.count(v->name)) out.insert(v->name);
    return;
  }
  if (as<FunE>(e)) return;
  if (const auto* c = as<ConE>(e)) {
    for (const auto& a : c->args) free_vars_rec(a, bound, out);
    return;
  }
  if (const auto* l = as<LamE>(e)) {
    bool fresh = bound.insert(l->param).second;
    free_vars_rec(l->body, bound, out);
    if (fresh) bound.erase(l->param);
    return;
  }
  if (const auto* a = as<AppE>(e)) {
    free_vars_rec(a->fn, bound, out);
    free_vars_rec(a->arg, bound, out);
    return;
  }
  if (const auto* l = as<LetE>(e)) {
    free_vars_rec(l->bound, bound, out);
    bool fresh = bound.insert(l->var).second;
    free_vars_rec(l->body, bound, out);
    if (fresh) bound.erase(l->var);
    return;
  }
  const auto* cs = as<CaseE>(e);
  free_vars_rec(cs->scrutinee, bound, out);
  for (const auto& br : cs->branches) {
    std::vector<std::string> added;
    for (const auto& v : br.pat.vars)
      if (bound.insert(v).second) added.push_back(v);
    free_vars_rec(br.body, bound, out);
    for (const auto& v : added) bound.erase(v);
  }
}

}  // namespace

std::string NameSupply::fresh(const std::string& base) {
  if (!is_used(base)) {
    used_.insert(base);
    return base;
  }
  for (int i = 1;; i++) {
    std::string cand = base + std::to_string(i);
    if (!is_used(cand)) {
      used_.insert(cand);
      return cand;
    }
  }
}

namespace {

void collect_idents(const ExprPtr& e, std::set<std::string>& out) {
  if (const auto* v = as<VarE>(e)) { out.insert(v->name); return; }
  if (const auto* f = as<FunE>(e)) { out.insert(f->name); return; }
  if (const auto* c = as<ConE>(e)) {
    out.insert(c->name);
    for (const auto& a : c->args) collect_idents(a, out);
    return;
  }
  if (const auto* l = as<LamE>(e)) { out.insert(l->param); collect_idents(l->body, out); return; }
  if (const auto* a = as<AppE>(e)) { collect_idents(a->fn, out); collect_idents(a->arg, out); return; }
  if (const auto* l = as<LetE>(e)) {
    out.insert(l->var);
    collect_idents(l->bound, out);
    collect_idents(l->body, out);
    return;
  }
  const auto* cs = as<CaseE>(e);
  collect_idents(cs->scrutinee, out);
  for (const auto& br : cs->branches) {
    out.insert(br.pat.ctor);
    for (const auto& v : br.pat.vars) out.insert(v);
    collect_idents(br.body, out);
  }
}

}  // namespace

std::set<std::string> all_identifiers(const Program& p) {
  std::set<std::string> out;
  collect_idents(p.main, out);
  for (const auto& d : p.defs) {
    out.insert(d.name);
    for (const auto& v : d.params) out.insert(v);
    collect_idents(d.body, out);
  }
  return out;
}

}  // namespace hl
