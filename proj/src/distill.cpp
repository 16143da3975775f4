#include "hl/distill.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <unordered_map>

#include "hl/distilled.hpp"
#include "hl/eval.hpp"
#include "hl/pretty.hpp"

namespace hl {

namespace {

std::size_t expr_size(const ExprPtr& e);

std::vector<ExprPtr> children(const ExprPtr& e) {
  if (const auto* c = as<ConE>(e)) return c->args;
  if (const auto* l = as<LamE>(e)) return {l->body};
  if (const auto* a = as<AppE>(e)) return {a->fn, a->arg};
  if (const auto* l = as<LetE>(e)) return {l->bound, l->body};
  if (const auto* cs = as<CaseE>(e)) {
    std::vector<ExprPtr> out{cs->scrutinee};
    for (const auto& br : cs->branches) out.push_back(br.body);
    return out;
  }
  return {};
}

// Pair-pointer memo keeps the relation polynomial on shared subterms.
struct PairHash {
  std::size_t operator()(const std::pair<const Expr*, const Expr*>& p) const {
    auto h1 = std::hash<const Expr*>{}(p.first);
    auto h2 = std::hash<const Expr*>{}(p.second);
    return h1 ^ (h2 * 0x9e3779b97f4a7c15ULL);
  }
};
using EmbMemo = std::unordered_map<std::pair<const Expr*, const Expr*>, bool, PairHash>;

bool emb_rec(const ExprPtr& a, const ExprPtr& b, EmbMemo& memo);

bool couples(const ExprPtr& a, const ExprPtr& b, EmbMemo& memo) {
  if (a->node.index() != b->node.index()) return false;
  if (as<VarE>(a)) return true;
  if (const auto* f = as<FunE>(a)) return f->name == as<FunE>(b)->name;
  if (const auto* c = as<ConE>(a)) {
    const auto* cb = as<ConE>(b);
    if (c->name != cb->name || c->args.size() != cb->args.size()) return false;
    for (std::size_t i = 0; i < c->args.size(); i++)
      if (!emb_rec(c->args[i], cb->args[i], memo)) return false;
    return true;
  }
  if (const auto* l = as<LamE>(a)) return emb_rec(l->body, as<LamE>(b)->body, memo);
  if (const auto* ap = as<AppE>(a)) {
    const auto* bp = as<AppE>(b);
    return emb_rec(ap->fn, bp->fn, memo) && emb_rec(ap->arg, bp->arg, memo);
  }
  if (const auto* l = as<LetE>(a)) {
    const auto* lb = as<LetE>(b);
    return emb_rec(l->bound, lb->bound, memo) && emb_rec(l->body, lb->body, memo);
  }
  const auto* ca = as<CaseE>(a);
  const auto* cb = as<CaseE>(b);
  if (ca->branches.size() != cb->branches.size()) return false;
  for (std::size_t i = 0; i < ca->branches.size(); i++)
    if (ca->branches[i].pat.ctor != cb->branches[i].pat.ctor) return false;
  if (!emb_rec(ca->scrutinee, cb->scrutinee, memo)) return false;
  for (std::size_t i = 0; i < ca->branches.size(); i++)
    if (!emb_rec(ca->branches[i].body, cb->branches[i].body, memo)) return false;
  return true;
}

bool emb_rec(const ExprPtr& a, const ExprPtr& b, EmbMemo& memo) {
  auto key = std::make_pair(a.get(), b.get());
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  bool res = couples(a, b, memo);
  if (!res) {
    for (const auto& c : children(b)) {
      if (emb_rec(a, c, memo)) {
        res = true;
        break;
      }
    }
  }
  memo.emplace(key, res);
  return res;
}

std::set<std::string> expr_identifiers(const ExprPtr& e) {
  std::set<std::string> out;
  std::function<void(const ExprPtr&)> rec = [&](const ExprPtr& x) {
    if (const auto* v = as<VarE>(x)) { out.insert(v->name); return; }
    if (const auto* f = as<FunE>(x)) { out.insert(f->name); return; }
    if (const auto* l = as<LamE>(x)) out.insert(l->param);
    if (const auto* l = as<LetE>(x)) out.insert(l->var);
    if (const auto* cs = as<CaseE>(x))
      for (const auto& br : cs->branches)
        for (const auto& v : br.pat.vars) out.insert(v);
    for (const auto& c : children(x)) rec(c);
  };
  rec(e);
  return out;
}

}  // namespace

namespace {
std::size_t expr_size(const ExprPtr& e) {
  std::size_t n = 1;
  for (const auto& c : children(e)) n += expr_size(c);
  return n;
}
}  // namespace

bool embeds(const ExprPtr& e1, const ExprPtr& e2) {
  // an embedding maps nodes of e1 injectively into e2
  if (expr_size(e1) > expr_size(e2)) return false;
  EmbMemo memo;
  return emb_rec(e1, e2, memo);
}

namespace {

struct MsgBuilder {
  NameSupply fresh;
  Substitution s1, s2;
  std::set<std::string> bound;  // common binder names along the path

  bool blocked(const ExprPtr& a, const ExprPtr& b) const {
    for (const auto& v : free_vars(a))
      if (bound.count(v)) return true;
    for (const auto& v : free_vars(b))
      if (bound.count(v)) return true;
    return false;
  }

  // nullptr: mismatch under a binder, generalize at an enclosing position.
  ExprPtr abstract_pair(const ExprPtr& a, const ExprPtr& b) {
    if (blocked(a, b)) return nullptr;
    std::string w = fresh.fresh("w");
    s1.emplace(w, a);
    s2.emplace(w, b);
    return mk_var(w);
  }

  template <typename F>
  ExprPtr under(std::vector<std::string>& common, const std::vector<std::string>& v1,
                const std::vector<std::string>& v2, const ExprPtr& b1,
                const ExprPtr& b2, F k) {
    Renaming r1, r2;
    for (std::size_t i = 0; i < v1.size(); i++) {
      std::string z = fresh.fresh(v1[i]);
      common.push_back(z);
      r1[v1[i]] = z;
      r2[v2[i]] = z;
    }
    ExprPtr nb1 = rename(b1, r1);
    ExprPtr nb2 = rename(b2, r2);
    for (const auto& z : common) bound.insert(z);
    ExprPtr res = k(nb1, nb2);
    for (const auto& z : common) bound.erase(z);
    return res;
  }

  ExprPtr rec(const ExprPtr& a, const ExprPtr& b) {
    if (a->node.index() != b->node.index()) return abstract_pair(a, b);
    if (const auto* v = as<VarE>(a)) {
      if (v->name == as<VarE>(b)->name) return a;
      return abstract_pair(a, b);
    }
    if (const auto* f = as<FunE>(a)) {
      if (f->name == as<FunE>(b)->name) return a;
      return abstract_pair(a, b);
    }
    if (const auto* c = as<ConE>(a)) {
      const auto* cb = as<ConE>(b);
      if (c->name != cb->name || c->args.size() != cb->args.size())
        return abstract_pair(a, b);
      std::vector<ExprPtr> args;
      for (std::size_t i = 0; i < c->args.size(); i++) {
        ExprPtr g = rec(c->args[i], cb->args[i]);
        if (!g) return abstract_pair(a, b);
        args.push_back(std::move(g));
      }
      return mk_con(c->name, std::move(args));
    }
    if (const auto* l = as<LamE>(a)) {
      const auto* lb = as<LamE>(b);
      std::vector<std::string> common;
      ExprPtr body = under(common, {l->param}, {lb->param}, l->body, lb->body,
                           [&](const ExprPtr& x, const ExprPtr& y) { return rec(x, y); });
      if (!body) return abstract_pair(a, b);
      return mk_lam(common[0], std::move(body));
    }
    if (const auto* ap = as<AppE>(a)) {
      const auto* bp = as<AppE>(b);
      ExprPtr fn = rec(ap->fn, bp->fn);
      ExprPtr arg = fn ? rec(ap->arg, bp->arg) : nullptr;
      if (!fn || !arg) return abstract_pair(a, b);
      return mk_app(std::move(fn), std::move(arg));
    }
    if (const auto* l = as<LetE>(a)) {
      const auto* lb = as<LetE>(b);
      ExprPtr bnd = rec(l->bound, lb->bound);
      if (!bnd) return abstract_pair(a, b);
      std::vector<std::string> common;
      ExprPtr body = under(common, {l->var}, {lb->var}, l->body, lb->body,
                           [&](const ExprPtr& x, const ExprPtr& y) { return rec(x, y); });
      if (!body) return abstract_pair(a, b);
      return mk_let(common[0], std::move(bnd), std::move(body));
    }
    const auto* ca = as<CaseE>(a);
    const auto* cb = as<CaseE>(b);
    if (ca->branches.size() != cb->branches.size()) return abstract_pair(a, b);
    for (std::size_t i = 0; i < ca->branches.size(); i++) {
      if (ca->branches[i].pat.ctor != cb->branches[i].pat.ctor ||
          ca->branches[i].pat.vars.size() != cb->branches[i].pat.vars.size())
        return abstract_pair(a, b);
    }
    ExprPtr scrut = rec(ca->scrutinee, cb->scrutinee);
    if (!scrut) return abstract_pair(a, b);
    std::vector<Branch> branches;
    for (std::size_t i = 0; i < ca->branches.size(); i++) {
      const auto& b1 = ca->branches[i];
      const auto& b2 = cb->branches[i];
      std::vector<std::string> common;
      ExprPtr body = under(common, b1.pat.vars, b2.pat.vars, b1.body, b2.body,
                           [&](const ExprPtr& x, const ExprPtr& y) { return rec(x, y); });
      if (!body) return abstract_pair(a, b);
      branches.push_back(Branch{Pattern{b1.pat.ctor, std::move(common)}, std::move(body)});
    }
    return mk_case(std::move(scrut), std::move(branches));
  }
};

}  // namespace

Msg msg(const ExprPtr& e1, const ExprPtr& e2) {
  std::set<std::string> used = expr_identifiers(e1);
  auto ids2 = expr_identifiers(e2);
  used.insert(ids2.begin(), ids2.end());
  MsgBuilder mb{NameSupply(std::move(used)), {}, {}, {}};
  ExprPtr g = mb.rec(e1, e2);
  // top-level mismatches are never blocked, so g is non-null here
  // merge generalization variables with identical binding pairs
  std::vector<std::string> vars;
  for (const auto& [k, _] : mb.s1) vars.push_back(k);
  Renaming merged;
  for (std::size_t i = 0; i < vars.size(); i++) {
    for (std::size_t j = 0; j < i; j++) {
      if (merged.count(vars[j])) continue;
      if (alpha_eq(mb.s1[vars[i]], mb.s1[vars[j]]) &&
          alpha_eq(mb.s2[vars[i]], mb.s2[vars[j]])) {
        merged[vars[i]] = vars[j];
        break;
      }
    }
  }
  if (!merged.empty()) {
    g = rename(g, merged);
    for (const auto& [k, _] : merged) {
      mb.s1.erase(k);
      mb.s2.erase(k);
    }
  }
  return Msg{g, std::move(mb.s1), std::move(mb.s2)};
}

// ---------------------------------------------------------------------------
// Driving

namespace {

struct LimitErr {
  std::string what;
};

struct GenSignal {
  std::size_t frame;
  std::vector<std::pair<std::string, ExprPtr>> lets;  // outermost first
  ExprPtr core;
};

struct PNode;
using PNodePtr = std::unique_ptr<PNode>;

struct PNode {
  enum class K { Var, Raw, Con, VarApp, Lam, Case, Let, Call, Fold } k;
  std::string name;             // Var/VarApp head, Con/Lam/Let binder, Case selector head
  ExprPtr expr;                 // Raw: the stuck expression; Call: the configuration
  std::vector<PNodePtr> kids;   // per kind, see residualize
  std::vector<Pattern> pats;    // Case: one per branch kid
  std::size_t nsel = 0;         // Case: leading kids are selector arguments
  Renaming sigma;               // Fold
  const PNode* target = nullptr;  // Fold
};

PNodePtr node(PNode::K k) {
  auto n = std::make_unique<PNode>();
  n->k = k;
  return n;
}

struct Focus {
  enum class K { Reduced, Call, CaseVar, Done } k;
  ExprPtr whole;                          // Reduced
  ExprPtr redex;                          // Call: spine; CaseVar: the case
  std::function<ExprPtr(ExprPtr)> ctx;    // plugs replacement for redex
  bool in_context = false;
};

constexpr std::size_t kMaxStateSize = 800;

struct Driver {
  const Program& src;
  DefMap defs;
  Limits lim;
  NameSupply names;
  int steps = 0, gens = 0, depth = 0, defs_created = 0;

  struct Anc {
    ExprPtr state;
    std::string fn;   // function unfolded at this state's redex
    bool memo;        // pure variable-argument configuration, fold target
    PNode* node;      // Call node for memo entries
    std::size_t frame;
  };
  std::vector<Anc> ancs;

  Driver(const Program& p, const Limits& l)
      : src(p), defs(p), lim(l), names(all_identifiers(p)) {}

  void count_step() {
    if (++steps > lim.max_steps) throw LimitErr{"step budget exhausted"};
  }

  bool is_pure_config(const ExprPtr& e, const FunDef** d_out = nullptr,
                      std::vector<ExprPtr>* args_out = nullptr) const {
    auto [head, args] = flatten_spine(e);
    const auto* f = as<FunE>(head);
    if (!f) return false;
    const FunDef* d = defs.find(f->name);
    if (!d || args.size() != d->params.size()) return false;
    for (const auto& a : args)
      if (!is_var(a)) return false;
    if (d_out) *d_out = d;
    if (args_out) *args_out = std::move(args);
    return true;
  }

  ExprPtr instantiate(const FunDef* d, const std::vector<ExprPtr>& args) {
    ExprPtr body = d->body;
    for (std::size_t i = d->params.size(); i-- > args.size();)
      body = mk_lam(d->params[i], std::move(body));
    Substitution theta;
    for (std::size_t i = 0; i < args.size(); i++)
      theta.emplace(d->params[i], args[i]);
    return substitute(body, theta);
  }

  Focus focus(const ExprPtr& e) {
    if (as<VarE>(e) || as<LamE>(e) || as<ConE>(e))
      return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};
    if (const auto* l = as<LetE>(e))
      return Focus{Focus::K::Reduced,
                   substitute(l->body, {{l->var, l->bound}}), nullptr, nullptr,
                   false};
    if (as<FunE>(e)) {
      if (!defs.find(as<FunE>(e)->name))
        return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};
      return Focus{Focus::K::Call, nullptr, e, [](ExprPtr r) { return r; }, false};
    }
    if (const auto* cs = as<CaseE>(e)) {
      const ExprPtr& s = cs->scrutinee;
      if (const auto* c = as<ConE>(s)) {
        for (const auto& br : cs->branches) {
          if (br.pat.ctor != c->name) continue;
          if (br.pat.vars.size() != c->args.size()) break;
          Substitution theta;
          for (std::size_t i = 0; i < c->args.size(); i++)
            theta.emplace(br.pat.vars[i], c->args[i]);
          return Focus{Focus::K::Reduced, substitute(br.body, theta), nullptr,
                       nullptr, false};
        }
        return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};  // stuck
      }
      auto [shead, sargs] = flatten_spine(s);
      if (as<VarE>(shead))
        return Focus{Focus::K::CaseVar, nullptr, e, [](ExprPtr r) { return r; },
                     false};
      if (as<LamE>(s))
        return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};  // stuck
      Focus inner = focus(s);
      auto branches = cs->branches;
      return wrap_focus(e, std::move(inner), [branches](ExprPtr r) {
        return mk_case(std::move(r), branches);
      });
    }
    // Application spine.
    auto [head, args] = flatten_spine(e);
    if (const auto* f = as<FunE>(head)) {
      const FunDef* d = defs.find(f->name);
      if (!d) return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};
      if (args.size() <= d->params.size())
        return Focus{Focus::K::Call, nullptr, e, [](ExprPtr r) { return r; }, false};
      std::vector<ExprPtr> inner_args(args.begin(),
                                      args.begin() + static_cast<long>(d->params.size()));
      std::vector<ExprPtr> outer(args.begin() + static_cast<long>(d->params.size()),
                                 args.end());
      ExprPtr inner = apply_spine(head, inner_args);
      return Focus{Focus::K::Call, nullptr, inner,
                   [outer](ExprPtr r) { return apply_spine(std::move(r), outer); }, true};
    }
    if (const auto* lam = as<LamE>(head)) {
      ExprPtr red = substitute(lam->body, {{lam->param, args[0]}});
      std::vector<ExprPtr> rest(args.begin() + 1, args.end());
      return Focus{Focus::K::Reduced, apply_spine(std::move(red), rest), nullptr, nullptr,
                   false};
    }
    if (as<VarE>(head) || as<ConE>(head))
      return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};
    // head is a case or let expression
    Focus inner = focus(head);
    std::vector<ExprPtr> rest = args;
    return wrap_focus(e, std::move(inner),
                      [rest](ExprPtr r) { return apply_spine(std::move(r), rest); });
  }

  template <typename Wrap>
  Focus wrap_focus(const ExprPtr&, Focus inner, Wrap wrap) {
    switch (inner.k) {
      case Focus::K::Reduced:
        return Focus{Focus::K::Reduced, wrap(inner.whole), nullptr, nullptr, false};
      case Focus::K::Done:
        return Focus{Focus::K::Done, nullptr, nullptr, nullptr, false};
      default: {
        auto ictx = inner.ctx;
        return Focus{inner.k, nullptr, inner.redex,
                     [ictx, wrap](ExprPtr r) { return wrap(ictx(std::move(r))); },
                     true};
      }
    }
  }

  struct DepthGuard {
    Driver& d;
    explicit DepthGuard(Driver& dr) : d(dr) {
      if (++d.depth > d.lim.max_depth) {
        d.depth--;
        throw LimitErr{"process-tree depth limit"};
      }
    }
    ~DepthGuard() { d.depth--; }
  };

  PNodePtr drive(ExprPtr e) {
    DepthGuard guard(*this);
    while (true) {
      Focus f = focus(e);
      switch (f.k) {
        case Focus::K::Reduced:
          count_step();
          e = f.whole;
          continue;
        case Focus::K::Done:
          return residual_whnf(e);
        case Focus::K::CaseVar:
          return drive_case(f, e);
        case Focus::K::Call:
          return drive_call(f, e);
      }
    }
  }

  PNodePtr residual_whnf(const ExprPtr& e) {
    if (const auto* v = as<VarE>(e)) {
      auto n = node(PNode::K::Var);
      n->name = v->name;
      return n;
    }
    if (const auto* l = as<LamE>(e)) {
      auto n = node(PNode::K::Lam);
      n->name = l->param;
      n->kids.push_back(drive(l->body));
      return n;
    }
    if (const auto* c = as<ConE>(e)) {
      auto n = node(PNode::K::Con);
      n->name = c->name;
      for (const auto& a : c->args) n->kids.push_back(drive(a));
      return n;
    }
    auto [head, args] = flatten_spine(e);
    if (const auto* v = as<VarE>(head); v && !args.empty()) {
      auto n = node(PNode::K::VarApp);
      n->name = v->name;
      for (const auto& a : args) n->kids.push_back(drive(a));
      return n;
    }
    auto n = node(PNode::K::Raw);  // stuck term, kept verbatim
    n->expr = e;
    return n;
  }

  PNodePtr drive_case(const Focus& f, const ExprPtr& whole) {
    const auto* cs = as<CaseE>(f.redex);
    auto [shead, sargs] = flatten_spine(cs->scrutinee);
    const std::string selvar = as<VarE>(shead)->name;

    auto n = node(PNode::K::Case);
    n->name = selvar;
    n->nsel = sargs.size();
    for (const auto& a : sargs) n->kids.push_back(drive(a));

    auto whole_fvs = free_vars(whole);
    for (const auto& br : cs->branches) {
      std::vector<std::string> binders = br.pat.vars;
      Renaming rn;
      for (auto& b : binders) {
        if (whole_fvs.count(b)) {
          std::string nb = names.fresh(b);
          rn[b] = nb;
          b = nb;
        }
      }
      ExprPtr body = rn.empty() ? br.body : rename(br.body, rn);
      ExprPtr branch_whole = f.in_context ? f.ctx(body) : body;
      if (sargs.empty()) {
        // Information propagation: the scrutinised variable is the pattern.
        std::vector<ExprPtr> pat_args;
        for (const auto& b : binders) pat_args.push_back(mk_var(b));
        branch_whole = substitute(branch_whole,
                                  {{selvar, mk_con(br.pat.ctor, pat_args)}});
      }
      n->pats.push_back(Pattern{br.pat.ctor, binders});
      n->kids.push_back(drive(branch_whole));
    }
    return n;
  }

  PNodePtr drive_call(const Focus& f, const ExprPtr& whole) {
    if (expr_size(whole) > kMaxStateSize)
      throw LimitErr{"driven state exceeds size limit"};
    auto [head, args] = flatten_spine(f.redex);
    const std::string fn = as<FunE>(head)->name;
    const FunDef* d = defs.find(fn);
    bool pure = args.size() == d->params.size() &&
                std::all_of(args.begin(), args.end(), is_var);

    if (pure && !f.in_context) {
      // fold to the most recent memoized renaming
      for (auto it = ancs.rbegin(); it != ancs.rend(); ++it) {
        if (!it->memo) continue;
        if (auto sigma = match_renaming(whole, it->state)) {
          auto n = node(PNode::K::Fold);
          n->sigma = std::move(*sigma);
          n->target = it->node;
          return n;
        }
      }
      // whistle: compare only against states unfolding the same function,
      // and never two variable-argument configurations (finitely many
      // argument patterns exist per function)
      for (auto it = ancs.rbegin(); it != ancs.rend(); ++it) {
        if (it->fn != fn || is_pure_config(it->state)) continue;
        if (embeds(it->state, whole)) return generalize(*it, whole, &f);
      }
      if (++defs_created > lim.max_defs) throw LimitErr{"residual definition limit"};
      auto n = node(PNode::K::Call);
      n->expr = whole;
      std::size_t frame = ancs.size();
      ancs.push_back(Anc{whole, fn, true, n.get(), frame});
      count_step();
      n->kids.push_back(drive(instantiate(d, args)));
      ancs.resize(frame);
      return n;
    }

    // Non-variable arguments or surrounding context: check the whistle, then
    // unfold transiently under a frame that catches upward generalization.
    for (auto it = ancs.rbegin(); it != ancs.rend(); ++it) {
      if (it->fn != fn) continue;
      if (embeds(it->state, whole)) return generalize(*it, whole, &f);
    }
    std::size_t frame = ancs.size();
    ancs.push_back(Anc{whole, fn, false, nullptr, frame});
    ExprPtr to_drive = f.ctx(instantiate(d, args));
    count_step();
    try {
      PNodePtr kid = drive(to_drive);
      ancs.resize(frame);
      return kid;
    } catch (GenSignal& g) {
      if (g.frame != frame) {
        ancs.resize(frame);
        throw;
      }
      // this state is replaced by its generalization and redriven in place
      ancs.resize(frame + 1);
      ExprPtr record = g.core;
      for (auto it = g.lets.rbegin(); it != g.lets.rend(); ++it)
        record = mk_let(it->first, it->second, record);
      ancs[frame].state = record;
      PNodePtr kid = drive_gen_lets(g.lets, g.core);
      ancs.resize(frame);
      return kid;
    }
  }

  // Residualizes a generalization: the let chain is built structurally so
  // driving cannot substitute it away again.
  PNodePtr drive_gen_lets(const std::vector<std::pair<std::string, ExprPtr>>& lets,
                          const ExprPtr& core) {
    std::vector<PNodePtr> bound_kids;
    for (const auto& [_, e] : lets) bound_kids.push_back(drive(e));
    PNodePtr body = drive(core);
    for (std::size_t i = lets.size(); i-- > 0;) {
      auto n = node(PNode::K::Let);
      n->name = lets[i].first;
      n->kids.push_back(std::move(bound_kids[i]));
      n->kids.push_back(std::move(body));
      body = std::move(n);
    }
    return body;
  }

  PNodePtr generalize(const Anc& anc, const ExprPtr& cur, const Focus* f) {
    if (++gens > lim.max_gens) throw LimitErr{"generalization limit"};
    Msg m = msg(anc.state, cur);
    bool nontrivial = false;
    for (const auto& [_, t] : m.s1)
      if (!is_var(t)) nontrivial = true;
    if (nontrivial && !anc.memo) {
      Substitution varbind;
      std::vector<std::pair<std::string, ExprPtr>> lets;
      for (const auto& [v, t] : m.s1) {
        if (is_var(t)) varbind.emplace(v, t);
        else lets.emplace_back(v, t);
      }
      throw GenSignal{anc.frame, std::move(lets), substitute(m.gen, varbind)};
    }
    // downward: extract the non-variable arguments of the current spine
    if (f && !f->in_context) {
      auto [head, args] = flatten_spine(f->redex);
      bool has_nonvar = false;
      for (const auto& a : args)
        if (!is_var(a)) has_nonvar = true;
      if (has_nonvar) return drive_split(head, args);
    }
    throw LimitErr{"whistle fired with no applicable generalization: " + pretty(cur)};
  }

  // let v1 = e1 in ... in f ... v1 ... ; bound parts and the call are driven
  // as separate subtrees.
  PNodePtr drive_split(const ExprPtr& head, std::vector<ExprPtr> args) {
    std::vector<std::pair<std::string, ExprPtr>> lets;
    for (auto& a : args) {
      if (!is_var(a)) {
        std::string v = names.fresh("v");
        lets.emplace_back(v, std::move(a));
        a = mk_var(v);
      }
    }
    std::vector<PNodePtr> bound_kids;
    for (const auto& [_, e] : lets) bound_kids.push_back(drive(e));
    PNodePtr body = drive(apply_spine(head, args));
    for (std::size_t i = lets.size(); i-- > 0;) {
      auto n = node(PNode::K::Let);
      n->name = lets[i].first;
      n->kids.push_back(std::move(bound_kids[i]));
      n->kids.push_back(std::move(body));
      body = std::move(n);
    }
    return body;
  }

};

// ---------------------------------------------------------------------------
// Residualization

struct Residualizer {
  NameSupply& names;
  int counter = 0;
  std::set<const PNode*> targets;
  std::map<const PNode*, std::string> defname;
  std::map<const PNode*, std::vector<std::string>> defparams;
  std::vector<FunDef> defs;

  void collect_targets(const PNode* n) {
    if (n->k == PNode::K::Fold) targets.insert(n->target);
    for (const auto& k : n->kids) collect_targets(k.get());
  }

  void assign_names(const PNode* n) {
    if (n->k == PNode::K::Call && targets.count(n)) {
      std::string name;
      while (true) {
        name = "f" + std::to_string(counter++);
        if (!names.is_used(name)) break;
      }
      names.reserve(name);
      defname[n] = name;
      defparams[n] = free_vars_ordered(n->expr);
    }
    for (const auto& k : n->kids) assign_names(k.get());
  }

  ExprPtr build(const PNode* n) {
    switch (n->k) {
      case PNode::K::Var: return mk_var(n->name);
      case PNode::K::Raw: return n->expr;
      case PNode::K::Con: {
        std::vector<ExprPtr> args;
        for (const auto& k : n->kids) args.push_back(build(k.get()));
        return mk_con(n->name, std::move(args));
      }
      case PNode::K::VarApp: {
        std::vector<ExprPtr> args;
        for (const auto& k : n->kids) args.push_back(build(k.get()));
        return apply_spine(mk_var(n->name), args);
      }
      case PNode::K::Lam: return mk_lam(n->name, build(n->kids[0].get()));
      case PNode::K::Let:
        return mk_let(n->name, build(n->kids[0].get()), build(n->kids[1].get()));
      case PNode::K::Case: {
        std::vector<ExprPtr> selargs;
        for (std::size_t i = 0; i < n->nsel; i++)
          selargs.push_back(build(n->kids[i].get()));
        ExprPtr sel = apply_spine(mk_var(n->name), selargs);
        std::vector<Branch> branches;
        for (std::size_t i = 0; i < n->pats.size(); i++)
          branches.push_back(Branch{n->pats[i], build(n->kids[n->nsel + i].get())});
        return mk_case(std::move(sel), std::move(branches));
      }
      case PNode::K::Call: {
        if (!targets.count(n)) return build(n->kids[0].get());
        ExprPtr body = build(n->kids[0].get());
        defs.push_back(FunDef{defname[n], defparams[n], std::move(body)});
        std::vector<ExprPtr> args;
        for (const auto& p : defparams[n]) args.push_back(mk_var(p));
        return apply_spine(mk_fun(defname[n]), args);
      }
      case PNode::K::Fold: {
        std::vector<ExprPtr> args;
        for (const auto& p : defparams[n->target])
          args.push_back(mk_var(n->sigma.at(p)));
        return apply_spine(mk_fun(defname[n->target]), args);
      }
    }
    throw Error("unreachable");
  }
};

}  // namespace

DistillResult distill(const Program& p, const Limits& lim) {
  try {
    Driver driver(p, lim);
    PNodePtr tree = driver.drive(p.main);

    Residualizer r{driver.names, 0, {}, {}, {}, {}};
    r.collect_targets(tree.get());
    r.assign_names(tree.get());
    Program res;
    res.main = r.build(tree.get());
    std::sort(r.defs.begin(), r.defs.end(), [](const FunDef& a, const FunDef& b) {
      return a.name.size() != b.name.size() ? a.name.size() < b.name.size()
                                            : a.name < b.name;
    });
    res.defs = std::move(r.defs);
    validate_program(res);

    auto viols = check_distilled(res);
    if (!viols.empty()) {
      std::string why = "residual is not in distilled form:";
      for (std::size_t i = 0; i < viols.size() && i < 3; i++)
        why += " [" + viols[i].clause + "] " + viols[i].message + ";";
      return DistillResult{DistillResult::Status::NotDistillable, {}, why};
    }
    return DistillResult{DistillResult::Status::Ok, std::move(res), ""};
  } catch (const LimitErr& e) {
    return DistillResult{DistillResult::Status::LimitExceeded, {}, e.what};
  } catch (const Error& e) {
    return DistillResult{DistillResult::Status::NotDistillable, {},
                         std::string("residual construction failed: ") + e.what()};
  }
}

}  // namespace hl
