#include "hl/pretty.hpp"

#include <optional>

namespace hl {

namespace {

// Precedence contexts: Low allows any form, AppArg requires an atom.
enum class Ctx { Low, AppHead, AppArg };

std::optional<unsigned long long> as_numeral(const ExprPtr& e) {
  unsigned long long n = 0;
  ExprPtr cur = e;
  while (true) {
    const auto* c = as<ConE>(cur);
    if (!c) return std::nullopt;
    if (c->name == "Zero" && c->args.empty()) return n;
    if (c->name == "Succ" && c->args.size() == 1) {
      n++;
      cur = c->args[0];
      continue;
    }
    return std::nullopt;
  }
}

void pp(const ExprPtr& e, Ctx ctx, std::string& out);

void pp_parens(const ExprPtr& e, std::string& out) {
  out += '(';
  pp(e, Ctx::Low, out);
  out += ')';
}

bool is_atom(const ExprPtr& e) {
  if (as<VarE>(e) || as<FunE>(e)) return true;
  if (const auto* c = as<ConE>(e)) return c->args.empty() || as_numeral(e).has_value();
  return false;
}

void pp(const ExprPtr& e, Ctx ctx, std::string& out) {
  if (const auto* v = as<VarE>(e)) { out += v->name; return; }
  if (const auto* f = as<FunE>(e)) { out += f->name; return; }
  if (const auto* c = as<ConE>(e)) {
    if (auto n = as_numeral(e)) { out += std::to_string(*n); return; }
    if (c->args.empty()) { out += c->name; return; }
    bool paren = ctx != Ctx::Low;
    if (paren) out += '(';
    out += c->name;
    for (const auto& a : c->args) {
      out += ' ';
      pp(a, Ctx::AppArg, out);
    }
    if (paren) out += ')';
    return;
  }
  if (const auto* l = as<LamE>(e)) {
    bool paren = ctx != Ctx::Low;
    if (paren) out += '(';
    out += '\\';
    out += l->param;
    ExprPtr body = l->body;
    while (const auto* l2 = as<LamE>(body)) {
      out += ' ';
      out += l2->param;
      body = l2->body;
    }
    out += " -> ";
    pp(body, Ctx::Low, out);
    if (paren) out += ')';
    return;
  }
  if (const auto* a = as<AppE>(e)) {
    bool paren = ctx == Ctx::AppArg;
    if (paren) out += '(';
    pp(a->fn, Ctx::AppHead, out);
    out += ' ';
    pp(a->arg, Ctx::AppArg, out);
    if (paren) out += ')';
    return;
  }
  if (const auto* l = as<LetE>(e)) {
    bool paren = ctx != Ctx::Low;
    if (paren) out += '(';
    out += "let ";
    out += l->var;
    out += " = ";
    pp(l->bound, Ctx::Low, out);
    out += " in ";
    pp(l->body, Ctx::Low, out);
    if (paren) out += ')';
    return;
  }
  const auto* cs = as<CaseE>(e);
  bool paren = ctx != Ctx::Low;
  if (paren) out += '(';
  out += "case ";
  if (is_atom(cs->scrutinee) || as<AppE>(cs->scrutinee) ||
      (as<ConE>(cs->scrutinee) != nullptr))
    pp(cs->scrutinee, Ctx::Low, out);
  else
    pp_parens(cs->scrutinee, out);
  out += " of { ";
  bool first = true;
  for (const auto& br : cs->branches) {
    if (!first) out += " | ";
    first = false;
    out += br.pat.ctor;
    for (const auto& v : br.pat.vars) {
      out += ' ';
      out += v;
    }
    out += " -> ";
    pp(br.body, Ctx::Low, out);
  }
  out += " }";
  if (paren) out += ')';
  return;
}

}  // namespace

std::string pretty(const ExprPtr& e) {
  std::string out;
  pp(e, Ctx::Low, out);
  return out;
}

std::string pretty(const Program& p) {
  std::string out = pretty(p.main);
  out += "\nwhere\n";
  for (const auto& d : p.defs) {
    out += d.name;
    for (const auto& v : d.params) {
      out += ' ';
      out += v;
    }
    out += " = ";
    out += pretty(d.body);
    out += ";\n";
  }
  return out;
}

}  // namespace hl
