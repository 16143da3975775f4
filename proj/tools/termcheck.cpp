// termcheck: termination checker for a small call-by-name functional
// language. Pipeline: parse -> extract_args -> (distill) -> distilled-form
// check -> folded LTS -> cycle analysis.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hl/distill.hpp"
#include "hl/distilled.hpp"
#include "hl/equiv.hpp"
#include "hl/eval.hpp"
#include "hl/lts.hpp"
#include "hl/parse.hpp"
#include "hl/pretty.hpp"
#include "hl/subst.hpp"
#include "hl/termination.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hl::Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

hl::Limits parse_limits(const std::string& spec) {
  hl::Limits lim;
  if (spec.empty()) return lim;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw hl::Error("bad --limits entry (want key=value): " + item);
    std::string key = item.substr(0, eq);
    int value = std::stoi(item.substr(eq + 1));
    if (value <= 0) throw hl::Error("--limits values must be positive");
    if (key == "depth") lim.max_depth = value;
    else if (key == "gens") lim.max_gens = value;
    else if (key == "defs") lim.max_defs = value;
    else if (key == "steps") lim.max_steps = value;
    else throw hl::Error("unknown --limits key: " + key);
  }
  return lim;
}

hl::Substitution parse_inputs(const std::string& spec) {
  hl::Substitution theta;
  if (spec.empty()) return theta;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw hl::Error("bad --input entry (want name=value): " + item);
    theta.emplace(item.substr(0, eq), hl::parse_value(item.substr(eq + 1)));
  }
  return theta;
}

struct Options {
  std::string file;
  bool skip_distill = false;
  std::int64_t fuel = 100000;
  std::string limits;
  std::string format = "text";
  std::string input;
  std::uint64_t seed = 0;
};

int run_check(const Options& opt) {
  hl::Program p = hl::parse_program(read_file(opt.file));
  p = hl::extract_args(p);

  std::string distill_note;
  if (!opt.skip_distill) {
    hl::DistillResult res = hl::distill(p, parse_limits(opt.limits));
    if (res.ok()) {
      // Transformation contract check at desk scale before trusting it.
      hl::EquivReport rep = hl::equiv_sample(p, res.program, opt.seed, 20, opt.fuel);
      if (!rep.disagreements.empty()) {
        std::cerr << "internal error: distilled program disagrees with input\n";
        return kExitError;
      }
      distill_note = "distilled: " + std::to_string(res.program.defs.size()) +
                     " residual definition(s), sampled equivalence " +
                     std::to_string(rep.agreements) + "/" + std::to_string(rep.samples) +
                     " agree, " + std::to_string(rep.inconclusive) + " inconclusive";
      p = std::move(res.program);
    } else {
      hl::Verdict v;
      v.k = hl::Verdict::K::NotApplicable;
      v.reason = std::string(res.status == hl::DistillResult::Status::LimitExceeded
                                 ? "distillation exceeded limits: "
                                 : "distillation failed: ") + res.reason;
      hl::Lts empty;
      if (opt.format == "json") std::cout << hl::report_json(v, empty).dump(2) << "\n";
      else std::cout << hl::report_text(v, empty);
      return kExitNegative;
    }
  }

  auto violations = hl::check_distilled(p);
  bool distilled_ok = violations.empty();
  hl::Lts lts;
  if (distilled_ok) lts = hl::build_lts(p);
  hl::Verdict v = hl::analyze(lts, distilled_ok);
  if (!distilled_ok) v.violations = std::move(violations);

  if (opt.format == "json") {
    auto j = hl::report_json(v, lts);
    if (!distill_note.empty()) j["note"] = distill_note;
    std::cout << j.dump(2) << "\n";
  } else {
    if (!distill_note.empty()) std::cout << distill_note << "\n";
    std::cout << hl::report_text(v, lts);
  }
  return v.k == hl::Verdict::K::Terminates ? kExitOk : kExitNegative;
}

int run_distill(const Options& opt) {
  hl::Program p = hl::parse_program(read_file(opt.file));
  p = hl::extract_args(p);
  hl::DistillResult res = hl::distill(p, parse_limits(opt.limits));
  if (res.ok()) {
    hl::EquivReport rep = hl::equiv_sample(p, res.program, opt.seed, 20, opt.fuel);
    if (!rep.disagreements.empty()) {
      std::cerr << "internal error: distilled program disagrees with input:\n"
                << hl::to_json(rep).dump(2) << "\n";
      return kExitError;
    }
    if (opt.format == "json") {
      nlohmann::ordered_json j;
      j["status"] = "ok";
      j["program"] = hl::pretty(res.program);
      j["equiv"] = hl::to_json(rep);
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << hl::pretty(res.program);
    }
    return kExitOk;
  }
  if (opt.format == "json") {
    nlohmann::ordered_json j;
    j["status"] = res.status == hl::DistillResult::Status::LimitExceeded
                      ? "limit-exceeded" : "not-distillable";
    j["reason"] = res.reason;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << (res.status == hl::DistillResult::Status::LimitExceeded
                      ? "limit exceeded: " : "not distillable: ")
              << res.reason << "\n";
  }
  return kExitNegative;
}

int run_lts(const Options& opt) {
  hl::Program p = hl::parse_program(read_file(opt.file));
  p = hl::extract_args(p);
  hl::Lts lts = hl::build_lts(p);
  if (opt.format == "json") {
    std::cout << hl::to_json(lts).dump(2) << "\n";
  } else if (opt.format == "text") {
    std::cout << lts.states.size() << " states, " << lts.transitions.size()
              << " transitions, " << lts.folds.size() << " fold edge(s)\n";
    for (const auto& f : lts.folds)
      std::cout << "fold s" << f.from << " -> s" << f.to << "  sigma "
                << hl::show_renaming(f.sigma) << "\n";
  } else {
    std::cout << hl::to_dot(lts);
  }
  return kExitOk;
}

int run_eval(const Options& opt) {
  hl::Program p = hl::parse_program(read_file(opt.file));
  hl::Substitution theta = parse_inputs(opt.input);
  auto fvs = hl::free_vars(p.main);
  for (const auto& v : fvs)
    if (!theta.count(v)) throw hl::Error("missing --input binding for " + v);
  hl::ExprPtr e = hl::substitute(p.main, theta);
  hl::DefMap defs(p);
  hl::Outcome o = hl::eval_deep(e, defs, opt.fuel);
  switch (o.k) {
    case hl::Outcome::K::Value:
      std::cout << hl::pretty(o.value) << "\n";
      return kExitOk;
    case hl::Outcome::K::OutOfFuel:
      std::cout << "out of fuel after " << opt.fuel << " steps\n";
      return kExitNegative;
    case hl::Outcome::K::Stuck:
      std::cout << "stuck: " << o.why << "\n";
      return kExitNegative;
  }
  return kExitError;
}

int run_validate(const Options& opt) {
  hl::Program p = hl::parse_program(read_file(opt.file));
  auto violations = hl::check_distilled(p);
  if (opt.format == "json") {
    std::cout << hl::to_json(violations).dump(2) << "\n";
  } else if (violations.empty()) {
    std::cout << "distilled form: accepted\n";
  } else {
    std::cout << "distilled form: " << violations.size() << " violation(s)\n";
    for (const auto& v : violations)
      std::cout << "  " << v.path << ": [" << v.clause << "] " << v.message << "\n";
  }
  return violations.empty() ? kExitOk : kExitNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"termination prover via distilled form and folded LTS analysis"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool with_limits, bool with_input) {
    sub->add_option("file", opt.file, "program file (.hl)")->required();
    sub->add_option("--fuel", opt.fuel, "evaluation step budget")
        ->check(CLI::PositiveNumber);
    sub->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"text", "json", "dot"}));
    sub->add_option("--seed", opt.seed, "sampling seed");
    if (with_limits)
      sub->add_option("--limits", opt.limits, "distiller limits, e.g. depth=300,gens=40,defs=80");
    if (with_input)
      sub->add_option("--input", opt.input, "main inputs, e.g. x=4,y=6");
    return sub;
  };

  auto* check = add_common(app.add_subcommand("check", "prove termination"), true, false);
  check->add_flag("--skip-distill", opt.skip_distill,
                  "input is already distilled; bypass the transformer");
  auto* dist = add_common(app.add_subcommand("distill", "print the distilled program"), true, false);
  auto* lts = add_common(app.add_subcommand("lts", "print the folded LTS (dot/json/text)"), false, false);
  auto* eval = add_common(app.add_subcommand("eval", "evaluate main on given inputs"), false, true);
  auto* validate = add_common(app.add_subcommand("validate", "distilled-form check only"), false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;  // --help exits 0, usage errors 2
  }

  try {
    if (!app.got_subcommand(lts) && opt.format == "dot")
      throw hl::Error("--format dot is only valid for the lts subcommand");
    if (app.got_subcommand(check)) return run_check(opt);
    if (app.got_subcommand(dist)) return run_distill(opt);
    if (app.got_subcommand(lts)) {
      CLI::App* sub = app.get_subcommand(lts);
      if (sub->count("--format") == 0) opt.format = "dot";
      return run_lts(opt);
    }
    if (app.got_subcommand(eval)) return run_eval(opt);
    if (app.got_subcommand(validate)) return run_validate(opt);
  } catch (const hl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitError;
  } catch (const hl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
