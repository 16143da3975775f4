#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : Error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
        line(line_), col(col_) {}
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// Flat constructor pattern: one constructor applied to distinct variables.
struct Pattern {
  std::string ctor;
  std::vector<std::string> vars;
};

struct Branch;

struct VarE  { std::string name; };
struct ConE  { std::string name; std::vector<ExprPtr> args; };
struct LamE  { std::string param; ExprPtr body; };
struct FunE  { std::string name; };
struct AppE  { ExprPtr fn; ExprPtr arg; };
struct CaseE { ExprPtr scrutinee; std::vector<Branch> branches; };
struct LetE  { std::string var; ExprPtr bound; ExprPtr body; };

struct Expr {
  std::variant<VarE, ConE, LamE, FunE, AppE, CaseE, LetE> node;
};

struct Branch {
  Pattern pat;
  ExprPtr body;
};

ExprPtr mk_var(std::string name);
ExprPtr mk_con(std::string name, std::vector<ExprPtr> args = {});
ExprPtr mk_lam(std::string param, ExprPtr body);
ExprPtr mk_fun(std::string name);
ExprPtr mk_app(ExprPtr fn, ExprPtr arg);
ExprPtr mk_case(ExprPtr scrutinee, std::vector<Branch> branches);
ExprPtr mk_let(std::string var, ExprPtr bound, ExprPtr body);

// Succ^n Zero
ExprPtr mk_nat(unsigned long long n);

template <typename T>
const T* as(const ExprPtr& e) {
  return std::get_if<T>(&e->node);
}

bool is_var(const ExprPtr& e);

// Left-associated application spine: apply_spine(f, {a, b}) = (f a) b.
ExprPtr apply_spine(ExprPtr fn, const std::vector<ExprPtr>& args);
// Inverse of apply: peels AppE nodes only.
std::pair<ExprPtr, std::vector<ExprPtr>> flatten_spine(const ExprPtr& e);

struct FunDef {
  std::string name;
  std::vector<std::string> params;
  ExprPtr body;
};

struct Program {
  ExprPtr main;
  std::vector<FunDef> defs;
  // Filled in by validate_program.
  std::map<std::string, std::size_t> con_arities;
  std::vector<std::set<std::string>> con_families;

  const FunDef* find_def(const std::string& name) const;
  // Family of constructors that co-occur with `ctor` in some case expression.
  const std::set<std::string>* family_of(const std::string& ctor) const;
};

// Checks the Program invariants and fills in constructor arities/families:
// distinct function names, distinct parameters, definition bodies closed
// under their parameters, constructor arities consistent with first use,
// patterns flat with distinct variables, case branches non-overlapping and
// exhaustive for the constructor family of the scrutinised value.
// Throws Error on violation.
void validate_program(Program& p);

// Deterministic fresh-name source: tries base, base1, base2, ... skipping
// a fixed set of reserved identifiers.
class NameSupply {
 public:
  NameSupply() = default;
  explicit NameSupply(std::set<std::string> used) : used_(std::move(used)) {}
  void reserve(const std::string& n) { used_.insert(n); }
  bool is_used(const std::string& n) const { return used_.count(n) != 0; }
  std::string fresh(const std::string& base);

 private:
  std::set<std::string> used_;
};

// Every identifier occurring anywhere in the program (variables, binders,
// function and constructor names).
std::set<std::string> all_identifiers(const Program& p);

}  // namespace hl
