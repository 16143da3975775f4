#include "hl/parse.hpp"

#include <cctype>

#include "hl/subst.hpp"

namespace hl {

namespace {

enum class Tok {
  LowerId, UpperId, Nat, Backslash, Arrow, Equals, LBrace, RBrace,
  LParen, RParen, Pipe, Semi, KwWhere, KwLet, KwIn, KwCase, KwOf, End,
};

struct Token {
  Tok kind;
  std::string text;
  unsigned long long nat = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1, col = 1;
  std::vector<Token> tokens;

  explicit Lexer(const std::string& s) : src(s) { run(); }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line, col); }

  void advance() {
    if (src[pos] == '\n') { line++; col = 1; } else { col++; }
    pos++;
  }

  void run() {
    while (pos < src.size()) {
      char c = src[pos];
      if (std::isspace(static_cast<unsigned char>(c))) { advance(); continue; }
      if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
        while (pos < src.size() && src[pos] != '\n') advance();
        continue;
      }
      Token t;
      t.line = line;
      t.col = col;
      if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '>') {
        t.kind = Tok::Arrow; advance(); advance();
      } else if (c == '\\') { t.kind = Tok::Backslash; advance(); }
      else if (c == '=') { t.kind = Tok::Equals; advance(); }
      else if (c == '{') { t.kind = Tok::LBrace; advance(); }
      else if (c == '}') { t.kind = Tok::RBrace; advance(); }
      else if (c == '(') { t.kind = Tok::LParen; advance(); }
      else if (c == ')') { t.kind = Tok::RParen; advance(); }
      else if (c == '|') { t.kind = Tok::Pipe; advance(); }
      else if (c == ';') { t.kind = Tok::Semi; advance(); }
      else if (std::isdigit(static_cast<unsigned char>(c))) {
        unsigned long long n = 0;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
          n = n * 10 + static_cast<unsigned long long>(src[pos] - '0');
          if (n > 1000000) fail("numeral too large");
          advance();
        }
        t.kind = Tok::Nat;
        t.nat = n;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) ||
                src[pos] == '_' || src[pos] == '\'')) {
          id += src[pos];
          advance();
        }
        if (id == "where") t.kind = Tok::KwWhere;
        else if (id == "let") t.kind = Tok::KwLet;
        else if (id == "in") t.kind = Tok::KwIn;
        else if (id == "case") t.kind = Tok::KwCase;
        else if (id == "of") t.kind = Tok::KwOf;
        else if (std::isupper(static_cast<unsigned char>(id[0]))) {
          t.kind = Tok::UpperId; t.text = std::move(id);
        } else {
          t.kind = Tok::LowerId; t.text = std::move(id);
        }
      } else {
        fail(std::string("unexpected character '") + c + "'");
      }
      tokens.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    tokens.push_back(end);
  }
};

struct Parser {
  std::vector<Token> toks;
  std::size_t pos = 0;

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Token& next() { return toks[pos < toks.size() - 1 ? pos++ : pos]; }

  [[noreturn]] void fail(const std::string& msg) {
    const Token& t = peek();
    throw ParseError(msg, t.line, t.col);
  }

  void expect(Tok k, const std::string& what) {
    if (peek().kind != k) fail("expected " + what);
    next();
  }

  // True when the upcoming tokens form a definition header: a lowercase
  // identifier, zero or more lowercase identifiers, then '='. Used to stop
  // application parsing at the start of the next definition.
  bool at_def_header() const {
    if (peek().kind != Tok::LowerId) return false;
    std::size_t i = 1;
    while (peek(i).kind == Tok::LowerId) i++;
    return peek(i).kind == Tok::Equals;
  }

  bool starts_aexpr() const {
    switch (peek().kind) {
      case Tok::LowerId: case Tok::UpperId: case Tok::Nat: case Tok::LParen:
        return true;
      default:
        return false;
    }
  }

  ExprPtr parse_aexpr() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::LowerId: { auto e = mk_var(t.text); next(); return e; }
      case Tok::UpperId: { auto e = mk_con(t.text); next(); return e; }
      case Tok::Nat: { auto e = mk_nat(t.nat); next(); return e; }
      case Tok::LParen: {
        next();
        ExprPtr e = parse_expr();
        expect(Tok::RParen, "')'");
        return e;
      }
      default:
        fail("expected expression");
    }
  }

  std::string parse_lower(const std::string& what) {
    if (peek().kind != Tok::LowerId) fail("expected " + what);
    return next().text;
  }

  ExprPtr parse_expr() {
    switch (peek().kind) {
      case Tok::Backslash: {
        next();
        std::vector<std::string> params;
        while (peek().kind == Tok::LowerId) params.push_back(next().text);
        if (params.empty()) fail("expected parameter after '\\'");
        expect(Tok::Arrow, "'->'");
        ExprPtr body = parse_expr();
        for (auto it = params.rbegin(); it != params.rend(); ++it)
          body = mk_lam(*it, std::move(body));
        return body;
      }
      case Tok::KwLet: {
        next();
        std::string v = parse_lower("let-bound variable");
        expect(Tok::Equals, "'='");
        ExprPtr bound = parse_expr();
        expect(Tok::KwIn, "'in'");
        ExprPtr body = parse_expr();
        return mk_let(std::move(v), std::move(bound), std::move(body));
      }
      case Tok::KwCase: {
        next();
        ExprPtr scrut = parse_expr();
        expect(Tok::KwOf, "'of'");
        expect(Tok::LBrace, "'{'");
        std::vector<Branch> branches;
        branches.push_back(parse_branch());
        while (peek().kind == Tok::Pipe) {
          next();
          branches.push_back(parse_branch());
        }
        expect(Tok::RBrace, "'}'");
        return mk_case(std::move(scrut), std::move(branches));
      }
      default: {
        if (!starts_aexpr()) fail("expected expression");
        ExprPtr e = parse_aexpr();
        std::vector<ExprPtr> args;
        while (starts_aexpr() && !at_def_header()) args.push_back(parse_aexpr());
        if (args.empty()) return e;
        // A constructor head absorbs the whole spine.
        if (const auto* c = as<ConE>(e); c && c->args.empty())
          return mk_con(c->name, std::move(args));
        return apply_spine(std::move(e), args);
      }
    }
  }

  Branch parse_branch() {
    if (peek().kind != Tok::UpperId) fail("expected constructor pattern");
    Pattern pat;
    pat.ctor = next().text;
    while (peek().kind == Tok::LowerId) pat.vars.push_back(next().text);
    expect(Tok::Arrow, "'->'");
    return Branch{std::move(pat), parse_expr()};
  }

  Program parse_program_toks() {
    Program p;
    p.main = parse_expr();
    expect(Tok::KwWhere, "'where'");
    while (peek().kind != Tok::End) {
      FunDef d;
      d.name = parse_lower("function name");
      while (peek().kind == Tok::LowerId) d.params.push_back(next().text);
      expect(Tok::Equals, "'='");
      d.body = parse_expr();
      if (peek().kind == Tok::Semi) next();
      p.defs.push_back(std::move(d));
    }
    return p;
  }
};

// Resolves lowercase identifiers: a bound occurrence is a variable, an
// unbound one naming a definition is a function call, anything else is a
// free variable.
ExprPtr resolve(const ExprPtr& e, const std::set<std::string>& funs,
                std::set<std::string>& bound) {
  if (const auto* v = as<VarE>(e)) {
    if (!bound.count(v->name) && funs.count(v->name)) return mk_fun(v->name);
    return e;
  }
  if (as<FunE>(e)) return e;
  if (const auto* c = as<ConE>(e)) {
    std::vector<ExprPtr> args;
    for (const auto& a : c->args) args.push_back(resolve(a, funs, bound));
    return mk_con(c->name, std::move(args));
  }
  if (const auto* l = as<LamE>(e)) {
    bool fresh = bound.insert(l->param).second;
    ExprPtr body = resolve(l->body, funs, bound);
    if (fresh) bound.erase(l->param);
    return mk_lam(l->param, std::move(body));
  }
  if (const auto* a = as<AppE>(e))
    return mk_app(resolve(a->fn, funs, bound), resolve(a->arg, funs, bound));
  if (const auto* l = as<LetE>(e)) {
    ExprPtr b = resolve(l->bound, funs, bound);
    bool fresh = bound.insert(l->var).second;
    ExprPtr body = resolve(l->body, funs, bound);
    if (fresh) bound.erase(l->var);
    return mk_let(l->var, std::move(b), std::move(body));
  }
  const auto* cs = as<CaseE>(e);
  ExprPtr scrut = resolve(cs->scrutinee, funs, bound);
  std::vector<Branch> branches;
  for (const auto& br : cs->branches) {
    std::vector<std::string> added;
    for (const auto& v : br.pat.vars)
      if (bound.insert(v).second) added.push_back(v);
    branches.push_back(Branch{br.pat, resolve(br.body, funs, bound)});
    for (const auto& v : added) bound.erase(v);
  }
  return mk_case(std::move(scrut), std::move(branches));
}

}  // namespace

Program parse_program(const std::string& text) {
  Lexer lex(text);
  Parser parser{std::move(lex.tokens)};
  Program p = parser.parse_program_toks();

  std::set<std::string> funs;
  for (const auto& d : p.defs) funs.insert(d.name);
  std::set<std::string> bound;
  p.main = resolve(p.main, funs, bound);
  for (auto& d : p.defs) {
    std::set<std::string> b(d.params.begin(), d.params.end());
    d.body = resolve(d.body, funs, b);
  }
  validate_program(p);
  return p;
}

ExprPtr parse_value(const std::string& text) {
  Lexer lex(text);
  Parser parser{std::move(lex.tokens)};
  ExprPtr e = parser.parse_expr();
  if (parser.peek().kind != Tok::End)
    parser.fail("trailing input after value");
  if (!free_vars(e).empty())
    throw Error("input value must be closed: " + text);
  return e;
}

}  // namespace hl
