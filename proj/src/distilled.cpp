#include "hl/distilled.hpp"

#include <set>

#include "hl/pretty.hpp"
#include "hl/subst.hpp"

namespace hl {

namespace {

struct Checker {
  const Program& p;
  std::vector<Violation> out;

  void report(const std::string& path, const std::string& clause, std::string msg) {
    out.push_back(Violation{path, clause, std::move(msg)});
  }

  // rho: let-bound variables in scope; shadowed names are removed on entry.
  void check(const ExprPtr& e, std::set<std::string> rho, const std::string& path) {
    if (as<VarE>(e)) return;
    if (const auto* f = as<FunE>(e)) {
      check_call(e, f, {}, rho, path);
      return;
    }
    if (const auto* c = as<ConE>(e)) {
      for (std::size_t i = 0; i < c->args.size(); i++)
        check(c->args[i], rho, path + ".arg[" + std::to_string(i) + "]");
      return;
    }
    if (const auto* l = as<LamE>(e)) {
      auto r = rho;
      r.erase(l->param);
      check(l->body, std::move(r), path + ".lambda");
      return;
    }
    if (const auto* l = as<LetE>(e)) {
      check(l->bound, rho, path + ".let.bound");
      auto r = rho;
      r.insert(l->var);
      check(l->body, std::move(r), path + ".let.body");
      return;
    }
    if (const auto* cs = as<CaseE>(e)) {
      auto [head, args] = flatten_spine(cs->scrutinee);
      const auto* hv = as<VarE>(head);
      if (!hv) {
        report(path + ".case.selector", "selector-not-variable-headed",
               "case selector must be a variable application, got: " +
                   pretty(cs->scrutinee));
      } else if (rho.count(hv->name)) {
        report(path + ".case.selector", "selector-rho-variable",
               "case selector head " + hv->name +
                   " is bound by an enclosing let and may not be scrutinised");
      }
      for (std::size_t i = 0; i < args.size(); i++)
        check(args[i], rho, path + ".case.selector.arg[" + std::to_string(i) + "]");
      for (std::size_t i = 0; i < cs->branches.size(); i++) {
        const auto& br = cs->branches[i];
        auto r = rho;
        for (const auto& v : br.pat.vars) r.erase(v);
        check(br.body, std::move(r), path + ".case.branch[" + std::to_string(i) + "]");
      }
      return;
    }
    // Application spine.
    auto [head, args] = flatten_spine(e);
    if (const auto* f = as<FunE>(head)) {
      check_call(e, f, args, rho, path);
      return;
    }
    if (as<VarE>(head)) {
      for (std::size_t i = 0; i < args.size(); i++)
        check(args[i], rho, path + ".arg[" + std::to_string(i) + "]");
      return;
    }
    report(path, "application-head-not-allowed",
           "application head must be a variable or a saturated function call, got: " +
               pretty(head));
  }

  void check_call(const ExprPtr& e, const FunE* f, const std::vector<ExprPtr>& args,
                  const std::set<std::string>& /*rho*/, const std::string& path) {
    const FunDef* d = p.find_def(f->name);
    if (!d) {
      report(path, "undefined-function", "call of undefined function " + f->name);
      return;
    }
    if (args.size() != d->params.size()) {
      report(path,
             args.size() < d->params.size() ? "unsaturated-function-call"
                                            : "over-applied-function-call",
             "call of " + f->name + " with " + std::to_string(args.size()) +
                 " argument(s), definition has " + std::to_string(d->params.size()));
    }
    for (std::size_t i = 0; i < args.size(); i++) {
      if (!is_var(args[i]))
        report(path + ".arg[" + std::to_string(i) + "]",
               "non-variable-function-argument",
               "argument " + std::to_string(i + 1) + " of call to " + f->name +
                   " is not a variable: " + pretty(args[i]));
    }
    (void)e;
  }
};

}  // namespace

std::vector<Violation> check_distilled(const Program& p) {
  Checker c{p, {}};
  c.check(p.main, {}, "main");
  for (const auto& d : p.defs) c.check(d.body, {}, "defs." + d.name);
  return c.out;
}

nlohmann::ordered_json to_json(const std::vector<Violation>& vs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& v : vs)
    arr.push_back({{"path", v.path}, {"clause", v.clause}, {"message", v.message}});
  return arr;
}

}  // namespace hl
