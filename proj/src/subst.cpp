#include "hl/subst.hpp"

#include <algorithm>

namespace hl {

namespace {

void fv_rec(const ExprPtr& e, std::set<std::string>& bound,
            std::vector<std::string>& order, std::set<std::string>& seen) {
  if (const auto* v = as<VarE>(e)) {
    if (!bound.count(v->name) && seen.insert(v->name).second)
      order.push_back(v->name);
    return;
  }
  if (as<FunE>(e)) return;
  if (const auto* c = as<ConE>(e)) {
    for (const auto& a : c->args) fv_rec(a, bound, order, seen);
    return;
  }
  if (const auto* l = as<LamE>(e)) {
    bool fresh = bound.insert(l->param).second;
    fv_rec(l->body, bound, order, seen);
    if (fresh) bound.erase(l->param);
    return;
  }
  if (const auto* a = as<AppE>(e)) {
    fv_rec(a->fn, bound, order, seen);
    fv_rec(a->arg, bound, order, seen);
    return;
  }
  if (const auto* l = as<LetE>(e)) {
    fv_rec(l->bound, bound, order, seen);
    bool fresh = bound.insert(l->var).second;
    fv_rec(l->body, bound, order, seen);
    if (fresh) bound.erase(l->var);
    return;
  }
  const auto* cs = as<CaseE>(e);
  fv_rec(cs->scrutinee, bound, order, seen);
  for (const auto& br : cs->branches) {
    std::vector<std::string> added;
    for (const auto& v : br.pat.vars)
      if (bound.insert(v).second) added.push_back(v);
    fv_rec(br.body, bound, order, seen);
    for (const auto& v : added) bound.erase(v);
  }
}

std::string fresh_avoiding(const std::string& base, const std::set<std::string>& avoid) {
  std::string cand = base + "'";
  while (avoid.count(cand)) cand += "'";
  return cand;
}

Substitution restrict_to(const Substitution& theta, const std::set<std::string>& fvs) {
  Substitution out;
  for (const auto& [k, v] : theta)
    if (fvs.count(k)) out.emplace(k, v);
  return out;
}

std::set<std::string> range_free_vars(const Substitution& theta) {
  std::set<std::string> out;
  for (const auto& [_, v] : theta) {
    auto fv = free_vars(v);
    out.insert(fv.begin(), fv.end());
  }
  return out;
}

ExprPtr subst_rec(const ExprPtr& e, const Substitution& theta);

// Substitution under binders: drops the binders from theta and renames any
// binder that would capture a free variable of the substituted range.
// Returns {binders', body'}; body' is the original body when nothing applies.
std::pair<std::vector<std::string>, ExprPtr> subst_under(
    std::vector<std::string> binders, const ExprPtr& body, const Substitution& theta) {
  auto body_fvs = free_vars(body);
  Substitution th = restrict_to(theta, body_fvs);
  for (const auto& b : binders) th.erase(b);
  if (th.empty()) return {std::move(binders), body};

  auto avoid = range_free_vars(th);
  std::set<std::string> all = avoid;
  all.insert(body_fvs.begin(), body_fvs.end());
  for (const auto& [k, _] : th) all.insert(k);
  for (const auto& b : binders) all.insert(b);
  Renaming binder_renames;
  for (auto& b : binders) {
    if (avoid.count(b)) {
      std::string nb = fresh_avoiding(b, all);
      all.insert(nb);
      binder_renames[b] = nb;
      b = nb;
    }
  }
  ExprPtr b2 = body;
  if (!binder_renames.empty()) b2 = rename(b2, binder_renames);
  return {std::move(binders), subst_rec(b2, th)};
}

ExprPtr subst_rec(const ExprPtr& e, const Substitution& theta) {
  if (theta.empty()) return e;
  if (const auto* v = as<VarE>(e)) {
    auto it = theta.find(v->name);
    return it == theta.end() ? e : it->second;
  }
  if (as<FunE>(e)) return e;
  if (const auto* c = as<ConE>(e)) {
    std::vector<ExprPtr> args;
    args.reserve(c->args.size());
    for (const auto& a : c->args) args.push_back(subst_rec(a, theta));
    return mk_con(c->name, std::move(args));
  }
  if (const auto* l = as<LamE>(e)) {
    auto [bs, body] = subst_under({l->param}, l->body, theta);
    if (bs[0] == l->param && body == l->body) return e;
    return mk_lam(bs[0], std::move(body));
  }
  if (const auto* a = as<AppE>(e)) {
    return mk_app(subst_rec(a->fn, theta), subst_rec(a->arg, theta));
  }
  if (const auto* l = as<LetE>(e)) {
    ExprPtr bound = subst_rec(l->bound, theta);
    auto [bs, body] = subst_under({l->var}, l->body, theta);
    return mk_let(bs[0], std::move(bound), std::move(body));
  }
  const auto* cs = as<CaseE>(e);
  ExprPtr scrut = subst_rec(cs->scrutinee, theta);
  std::vector<Branch> branches;
  branches.reserve(cs->branches.size());
  for (const auto& br : cs->branches) {
    auto [bs, body] = subst_under(br.pat.vars, br.body, theta);
    branches.push_back(Branch{Pattern{br.pat.ctor, std::move(bs)}, std::move(body)});
  }
  return mk_case(std::move(scrut), std::move(branches));
}

}  // namespace

std::set<std::string> free_vars(const ExprPtr& e) {
  std::set<std::string> bound, seen;
  std::vector<std::string> order;
  fv_rec(e, bound, order, seen);
  return seen;
}

std::vector<std::string> free_vars_ordered(const ExprPtr& e) {
  std::set<std::string> bound, seen;
  std::vector<std::string> order;
  fv_rec(e, bound, order, seen);
  return order;
}

ExprPtr substitute(const ExprPtr& e, const Substitution& theta) {
  return subst_rec(e, theta);
}

Substitution to_substitution(const Renaming& sigma) {
  Substitution theta;
  for (const auto& [k, v] : sigma) theta.emplace(k, mk_var(v));
  return theta;
}

ExprPtr rename(const ExprPtr& e, const Renaming& sigma) {
  return substitute(e, to_substitution(sigma));
}

namespace {

struct AlphaEnv {
  std::map<std::string, int> b1, b2;
  int depth = 0;

  template <typename F>
  bool with(const std::vector<std::string>& v1, const std::vector<std::string>& v2, F f) {
    if (v1.size() != v2.size()) return false;
    std::vector<std::pair<bool, int>> old1, old2;
    for (std::size_t i = 0; i < v1.size(); i++) {
      auto save = [&](std::map<std::string, int>& m, const std::string& n,
                      std::vector<std::pair<bool, int>>& olds) {
        auto it = m.find(n);
        olds.emplace_back(it != m.end(), it != m.end() ? it->second : 0);
        m[n] = depth;
      };
      save(b1, v1[i], old1);
      save(b2, v2[i], old2);
      depth++;
    }
    bool ok = f();
    for (std::size_t i = v1.size(); i-- > 0;) {
      depth--;
      auto restore = [&](std::map<std::string, int>& m, const std::string& n,
                         const std::pair<bool, int>& old) {
        if (old.first) m[n] = old.second;
        else m.erase(n);
      };
      restore(b1, v1[i], old1[i]);
      restore(b2, v2[i], old2[i]);
    }
    return ok;
  }
};

bool alpha_rec(const ExprPtr& e1, const ExprPtr& e2, AlphaEnv& env) {
  if (e1->node.index() != e2->node.index()) return false;
  if (const auto* v1 = as<VarE>(e1)) {
    const auto* v2 = as<VarE>(e2);
    auto i1 = env.b1.find(v1->name);
    auto i2 = env.b2.find(v2->name);
    if ((i1 != env.b1.end()) != (i2 != env.b2.end())) return false;
    if (i1 != env.b1.end()) return i1->second == i2->second;
    return v1->name == v2->name;
  }
  if (const auto* f1 = as<FunE>(e1)) return f1->name == as<FunE>(e2)->name;
  if (const auto* c1 = as<ConE>(e1)) {
    const auto* c2 = as<ConE>(e2);
    if (c1->name != c2->name || c1->args.size() != c2->args.size()) return false;
    for (std::size_t i = 0; i < c1->args.size(); i++)
      if (!alpha_rec(c1->args[i], c2->args[i], env)) return false;
    return true;
  }
  if (const auto* l1 = as<LamE>(e1)) {
    const auto* l2 = as<LamE>(e2);
    return env.with({l1->param}, {l2->param},
                    [&] { return alpha_rec(l1->body, l2->body, env); });
  }
  if (const auto* a1 = as<AppE>(e1)) {
    const auto* a2 = as<AppE>(e2);
    return alpha_rec(a1->fn, a2->fn, env) && alpha_rec(a1->arg, a2->arg, env);
  }
  if (const auto* l1 = as<LetE>(e1)) {
    const auto* l2 = as<LetE>(e2);
    if (!alpha_rec(l1->bound, l2->bound, env)) return false;
    return env.with({l1->var}, {l2->var},
                    [&] { return alpha_rec(l1->body, l2->body, env); });
  }
  const auto* cs1 = as<CaseE>(e1);
  const auto* cs2 = as<CaseE>(e2);
  if (cs1->branches.size() != cs2->branches.size()) return false;
  if (!alpha_rec(cs1->scrutinee, cs2->scrutinee, env)) return false;
  for (std::size_t i = 0; i < cs1->branches.size(); i++) {
    const auto& b1 = cs1->branches[i];
    const auto& b2 = cs2->branches[i];
    if (b1.pat.ctor != b2.pat.ctor) return false;
    if (!env.with(b1.pat.vars, b2.pat.vars,
                  [&] { return alpha_rec(b1.body, b2.body, env); }))
      return false;
  }
  return true;
}

}  // namespace

bool alpha_eq(const ExprPtr& e1, const ExprPtr& e2) {
  AlphaEnv env;
  return alpha_rec(e1, e2, env);
}

namespace {

// Like alpha_rec, but free variables on the ep side are matched against free
// variables on the e side and recorded in sigma.
bool match_rec(const ExprPtr& e, const ExprPtr& ep, AlphaEnv& env, Renaming& sigma) {
  if (const auto* vp = as<VarE>(ep)) {
    auto ip = env.b2.find(vp->name);
    const auto* v = as<VarE>(e);
    if (ip != env.b2.end()) {
      if (!v) return false;
      auto i1 = env.b1.find(v->name);
      return i1 != env.b1.end() && i1->second == ip->second;
    }
    if (!v) return false;
    if (env.b1.count(v->name)) return false;  // free cannot match bound
    auto it = sigma.find(vp->name);
    if (it != sigma.end()) return it->second == v->name;
    sigma.emplace(vp->name, v->name);
    return true;
  }
  if (e->node.index() != ep->node.index()) return false;
  if (const auto* f = as<FunE>(e)) return f->name == as<FunE>(ep)->name;
  if (const auto* c = as<ConE>(e)) {
    const auto* cp = as<ConE>(ep);
    if (c->name != cp->name || c->args.size() != cp->args.size()) return false;
    for (std::size_t i = 0; i < c->args.size(); i++)
      if (!match_rec(c->args[i], cp->args[i], env, sigma)) return false;
    return true;
  }
  if (const auto* l = as<LamE>(e)) {
    const auto* lp = as<LamE>(ep);
    return env.with({l->param}, {lp->param},
                    [&] { return match_rec(l->body, lp->body, env, sigma); });
  }
  if (const auto* a = as<AppE>(e)) {
    const auto* ap = as<AppE>(ep);
    return match_rec(a->fn, ap->fn, env, sigma) &&
           match_rec(a->arg, ap->arg, env, sigma);
  }
  if (const auto* l = as<LetE>(e)) {
    const auto* lp = as<LetE>(ep);
    if (!match_rec(l->bound, lp->bound, env, sigma)) return false;
    return env.with({l->var}, {lp->var},
                    [&] { return match_rec(l->body, lp->body, env, sigma); });
  }
  const auto* cs = as<CaseE>(e);
  const auto* csp = as<CaseE>(ep);
  if (cs->branches.size() != csp->branches.size()) return false;
  if (!match_rec(cs->scrutinee, csp->scrutinee, env, sigma)) return false;
  for (std::size_t i = 0; i < cs->branches.size(); i++) {
    const auto& b = cs->branches[i];
    const auto& bp = csp->branches[i];
    if (b.pat.ctor != bp.pat.ctor) return false;
    if (!env.with(b.pat.vars, bp.pat.vars,
                  [&] { return match_rec(b.body, bp.body, env, sigma); }))
      return false;
  }
  return true;
}

}  // namespace

std::optional<Renaming> match_renaming(const ExprPtr& e, const ExprPtr& ep) {
  AlphaEnv env;
  Renaming sigma;
  if (!match_rec(e, ep, env, sigma)) return std::nullopt;
  return sigma;
}

namespace {

ExprPtr extract_rec(const ExprPtr& e, NameSupply& ns) {
  if (as<VarE>(e) || as<FunE>(e)) return e;
  if (const auto* c = as<ConE>(e)) {
    std::vector<ExprPtr> args;
    for (const auto& a : c->args) args.push_back(extract_rec(a, ns));
    return mk_con(c->name, std::move(args));
  }
  if (const auto* l = as<LamE>(e)) return mk_lam(l->param, extract_rec(l->body, ns));
  if (const auto* l = as<LetE>(e))
    return mk_let(l->var, extract_rec(l->bound, ns), extract_rec(l->body, ns));
  if (const auto* cs = as<CaseE>(e)) {
    std::vector<Branch> branches;
    for (const auto& br : cs->branches)
      branches.push_back(Branch{br.pat, extract_rec(br.body, ns)});
    return mk_case(extract_rec(cs->scrutinee, ns), std::move(branches));
  }
  auto [head, args] = flatten_spine(e);
  for (auto& a : args) a = extract_rec(a, ns);
  if (!as<FunE>(head)) {
    return apply_spine(extract_rec(head, ns), args);
  }
  std::vector<std::pair<std::string, ExprPtr>> lets;
  for (auto& a : args) {
    if (!is_var(a)) {
      std::string v = ns.fresh("v");
      lets.emplace_back(v, std::move(a));
      a = mk_var(v);
    }
  }
  ExprPtr out = apply_spine(head, args);
  for (auto it = lets.rbegin(); it != lets.rend(); ++it)
    out = mk_let(it->first, std::move(it->second), std::move(out));
  return out;
}

}  // namespace

Program extract_args(const Program& p) {
  NameSupply ns(all_identifiers(p));
  Program out;
  out.main = extract_rec(p.main, ns);
  for (const auto& d : p.defs)
    out.defs.push_back(FunDef{d.name, d.params, extract_rec(d.body, ns)});
  validate_program(out);
  return out;
}

namespace {

// Compares expressions structurally with a growing function-name bijection;
// newly paired functions are queued for definition comparison.
struct ProgMatcher {
  const Program& p1;
  const Program& p2;
  std::map<std::string, std::string> fwd, bwd;
  std::vector<std::pair<std::string, std::string>> queue;

  bool pair_funs(const std::string& a, const std::string& b) {
    auto f = fwd.find(a);
    auto g = bwd.find(b);
    if (f != fwd.end() || g != bwd.end())
      return f != fwd.end() && g != bwd.end() && f->second == b && g->second == a;
    fwd[a] = b;
    bwd[b] = a;
    queue.emplace_back(a, b);
    return true;
  }

  bool expr_eq(const ExprPtr& e1, const ExprPtr& e2, AlphaEnv& env) {
    if (e1->node.index() != e2->node.index()) return false;
    if (const auto* f1 = as<FunE>(e1)) return pair_funs(f1->name, as<FunE>(e2)->name);
    if (const auto* v1 = as<VarE>(e1)) {
      const auto* v2 = as<VarE>(e2);
      auto i1 = env.b1.find(v1->name);
      auto i2 = env.b2.find(v2->name);
      if ((i1 != env.b1.end()) != (i2 != env.b2.end())) return false;
      if (i1 != env.b1.end()) return i1->second == i2->second;
      return v1->name == v2->name;
    }
    if (const auto* c1 = as<ConE>(e1)) {
      const auto* c2 = as<ConE>(e2);
      if (c1->name != c2->name || c1->args.size() != c2->args.size()) return false;
      for (std::size_t i = 0; i < c1->args.size(); i++)
        if (!expr_eq(c1->args[i], c2->args[i], env)) return false;
      return true;
    }
    if (const auto* l1 = as<LamE>(e1)) {
      const auto* l2 = as<LamE>(e2);
      return env.with({l1->param}, {l2->param},
                      [&] { return expr_eq(l1->body, l2->body, env); });
    }
    if (const auto* a1 = as<AppE>(e1)) {
      const auto* a2 = as<AppE>(e2);
      return expr_eq(a1->fn, a2->fn, env) && expr_eq(a1->arg, a2->arg, env);
    }
    if (const auto* l1 = as<LetE>(e1)) {
      const auto* l2 = as<LetE>(e2);
      if (!expr_eq(l1->bound, l2->bound, env)) return false;
      return env.with({l1->var}, {l2->var},
                      [&] { return expr_eq(l1->body, l2->body, env); });
    }
    const auto* cs1 = as<CaseE>(e1);
    const auto* cs2 = as<CaseE>(e2);
    if (cs1->branches.size() != cs2->branches.size()) return false;
    if (!expr_eq(cs1->scrutinee, cs2->scrutinee, env)) return false;
    for (std::size_t i = 0; i < cs1->branches.size(); i++) {
      const auto& b1 = cs1->branches[i];
      const auto& b2 = cs2->branches[i];
      if (b1.pat.ctor != b2.pat.ctor) return false;
      if (!env.with(b1.pat.vars, b2.pat.vars,
                    [&] { return expr_eq(b1.body, b2.body, env); }))
        return false;
    }
    return true;
  }
};

}  // namespace

bool program_alpha_eq(const Program& p1, const Program& p2) {
  if (p1.defs.size() != p2.defs.size()) return false;
  ProgMatcher m{p1, p2, {}, {}, {}};
  AlphaEnv env;
  if (!m.expr_eq(p1.main, p2.main, env)) return false;
  std::size_t i = 0;
  while (i < m.queue.size()) {
    auto [n1, n2] = m.queue[i++];
    const FunDef* d1 = p1.find_def(n1);
    const FunDef* d2 = p2.find_def(n2);
    if (!d1 || !d2 || d1->params.size() != d2->params.size()) return false;
    AlphaEnv denv;
    if (!denv.with(d1->params, d2->params,
                   [&] { return m.expr_eq(d1->body, d2->body, denv); }))
      return false;
  }
  return m.fwd.size() == p1.defs.size();
}

std::string show_renaming(const Renaming& sigma) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : sigma) {
    if (!first) out += ", ";
    first = false;
    out += k + "↦" + v;
  }
  return out + "}";
}

}  // namespace hl
