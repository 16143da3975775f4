#include "hl/equiv.hpp"

#include <algorithm>
#include <random>

#include "hl/eval.hpp"
#include "hl/pretty.hpp"
#include "hl/subst.hpp"

namespace hl {

namespace {

// Slot: a definition parameter or a free variable of main ("" function).
using Slot = std::pair<std::string, std::string>;

// Collects, per slot, the constructor family it is scrutinised at (directly
// or through call arguments, by fixpoint).
struct FamilyInference {
  const Program& p;
  std::map<Slot, std::set<std::string>> fam;
  bool changed = false;

  void join(const Slot& dst, const std::set<std::string>& src) {
    if (src.empty()) return;
    auto& f = fam[dst];
    std::size_t before = f.size();
    f.insert(src.begin(), src.end());
    if (f.size() != before) changed = true;
  }

  // Walks a body; `owner` is the enclosing definition name ("" for main).
  // `params` maps a variable name to its slot while unshadowed.
  void walk(const ExprPtr& e, const std::string& owner,
            std::map<std::string, Slot> scope) {
    if (as<VarE>(e) || as<FunE>(e)) return;
    if (const auto* c = as<ConE>(e)) {
      for (const auto& a : c->args) walk(a, owner, scope);
      return;
    }
    if (const auto* l = as<LamE>(e)) {
      auto s = scope;
      s.erase(l->param);
      walk(l->body, owner, std::move(s));
      return;
    }
    if (const auto* l = as<LetE>(e)) {
      walk(l->bound, owner, scope);
      auto s = scope;
      s.erase(l->var);
      walk(l->body, owner, std::move(s));
      return;
    }
    if (const auto* cs = as<CaseE>(e)) {
      if (const auto* v = as<VarE>(cs->scrutinee)) {
        auto it = scope.find(v->name);
        if (it != scope.end()) {
          if (const auto* family = p.family_of(cs->branches.front().pat.ctor))
            join(it->second, *family);
        }
      }
      walk(cs->scrutinee, owner, scope);
      for (const auto& br : cs->branches) {
        auto s = scope;
        for (const auto& pv : br.pat.vars) s.erase(pv);
        walk(br.body, owner, s);
      }
      return;
    }
    // Application spine: propagate callee parameter families to variable
    // arguments.
    auto [head, args] = flatten_spine(e);
    if (const auto* f = as<FunE>(head)) {
      const FunDef* d = p.find_def(f->name);
      if (d) {
        for (std::size_t i = 0; i < args.size() && i < d->params.size(); i++) {
          if (const auto* v = as<VarE>(args[i])) {
            auto it = scope.find(v->name);
            if (it != scope.end()) {
              auto cit = fam.find(Slot{f->name, d->params[i]});
              if (cit != fam.end()) join(it->second, cit->second);
            }
          }
        }
      }
    } else {
      walk(head, owner, scope);
    }
    for (const auto& a : args) walk(a, owner, scope);
  }

  void run() {
    for (int round = 0; round < 64; round++) {
      changed = false;
      std::map<std::string, Slot> main_scope;
      for (const auto& v : free_vars(p.main)) main_scope[v] = Slot{"", v};
      walk(p.main, "", main_scope);
      for (const auto& d : p.defs) {
        std::map<std::string, Slot> scope;
        for (const auto& prm : d.params) scope[prm] = Slot{d.name, prm};
        walk(d.body, d.name, scope);
      }
      if (!changed) break;
    }
  }
};

}  // namespace

std::map<std::string, std::vector<std::string>> infer_input_families(const Program& p) {
  FamilyInference inf{p, {}, false};
  inf.run();
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& v : free_vars(p.main)) {
    auto it = inf.fam.find(Slot{"", v});
    if (it != inf.fam.end() && !it->second.empty())
      out[v] = std::vector<std::string>(it->second.begin(), it->second.end());
    else
      out[v] = {"Succ", "Zero"};  // never scrutinised: fall back to numerals
  }
  return out;
}

ValueGen::ValueGen(const Program& p, std::uint64_t seed)
    : p_(p), seed_(seed), families_(infer_input_families(p)) {}

namespace {

ExprPtr gen_value(const std::vector<std::string>& family,
                  const std::map<std::string, std::size_t>& arities,
                  std::mt19937_64& rng, int depth) {
  auto arity_of = [&](const std::string& c) -> std::size_t {
    auto it = arities.find(c);
    if (it != arities.end()) return it->second;
    if (c == "Succ") return 1;
    return 0;
  };
  std::vector<std::string> nullary, rest;
  for (const auto& c : family)
    (arity_of(c) == 0 ? nullary : rest).push_back(c);
  std::string pick;
  if (depth <= 1 && !nullary.empty()) {
    pick = nullary[rng() % nullary.size()];
  } else {
    pick = family[rng() % family.size()];
    if (depth <= 1 && arity_of(pick) > 0 && !nullary.empty())
      pick = nullary[rng() % nullary.size()];
  }
  std::vector<ExprPtr> args;
  for (std::size_t i = 0; i < arity_of(pick); i++)
    args.push_back(gen_value(family, arities, rng, depth - 1));
  return mk_con(pick, std::move(args));
}

std::mt19937_64 rng_for(std::uint64_t seed, int index) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(index) + 1};
  return std::mt19937_64(seq);
}

}  // namespace

ExprPtr ValueGen::value_for(const std::string& var, int index, int max_depth) {
  auto it = families_.find(var);
  const std::vector<std::string> fallback{"Succ", "Zero"};
  const auto& family = it != families_.end() ? it->second : fallback;
  std::uint64_t h = seed_;
  for (char c : var) h = h * 1099511628211ULL + static_cast<unsigned char>(c);
  auto rng = rng_for(h, index);
  return gen_value(family, p_.con_arities, rng, max_depth);
}

EquivReport equiv_sample(const Program& p1, const Program& p2,
                         std::uint64_t seed, int samples, std::int64_t fuel) {
  auto fv1 = free_vars(p1.main);
  auto fv2 = free_vars(p2.main);
  if (fv1 != fv2)
    throw Error("equiv_sample: programs have different main inputs");

  DefMap d1(p1), d2(p2);
  ValueGen gen(p1, seed);
  EquivReport rep;
  rep.samples = samples;

  for (int i = 0; i < samples; i++) {
    Substitution theta;
    std::map<std::string, std::string> shown;
    for (const auto& v : fv1) {
      ExprPtr val = gen.value_for(v, i, 8);
      shown[v] = pretty(val);
      theta.emplace(v, std::move(val));
    }
    Outcome o1 = eval_deep(substitute(p1.main, theta), d1, fuel);
    Outcome o2 = eval_deep(substitute(p2.main, theta), d2, fuel);

    auto shown_out = [](const Outcome& o) {
      switch (o.k) {
        case Outcome::K::Value: return pretty(o.value);
        case Outcome::K::OutOfFuel: return std::string("out-of-fuel");
        case Outcome::K::Stuck: return "stuck (" + o.why + ")";
      }
      return std::string("?");
    };

    if (o1.k == Outcome::K::OutOfFuel || o2.k == Outcome::K::OutOfFuel) {
      rep.inconclusive++;
      continue;
    }
    bool agree;
    if (o1.is_value() && o2.is_value()) agree = alpha_eq(o1.value, o2.value);
    else agree = o1.k == o2.k;  // both stuck
    if (agree) {
      rep.agreements++;
    } else {
      rep.disagreements.push_back(
          EquivReport::Disagreement{shown, shown_out(o1), shown_out(o2)});
    }
  }
  return rep;
}

nlohmann::ordered_json to_json(const EquivReport& r) {
  nlohmann::ordered_json j;
  j["samples"] = r.samples;
  j["agreements"] = r.agreements;
  j["disagreements"] = nlohmann::ordered_json::array();
  for (const auto& d : r.disagreements) {
    nlohmann::ordered_json in = nlohmann::ordered_json::object();
    for (const auto& [k, v] : d.input) in[k] = v;
    j["disagreements"].push_back({{"input", in}, {"out1", d.out1}, {"out2", d.out2}});
  }
  j["inconclusive"] = r.inconclusive;
  return j;
}

}  // namespace hl
