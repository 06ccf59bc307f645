// sentence-lab: build, transform, inspect and numerically evaluate the
// sentence family over finite tracial algebras.
//
// Exit codes: 0 success, 2 validation error, 3 size/eligibility limit,
// 4 numerical failure.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tracelogic/tracelogic.hpp"

namespace {

using tracelogic::json;

// --algebra accepts "M2" / "L(Z4)" style names, inline JSON (leading '{'),
// or @path to a JSON spec file.
json parse_algebra_spec(const std::string& s) {
  if (!s.empty() && s[0] == '@') {
    std::ifstream in(s.substr(1));
    if (!in) throw tracelogic::ValidationError("cannot open " + s.substr(1));
    return json::parse(in);
  }
  if (!s.empty() && s[0] == '{') return json::parse(s);
  return json(s);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tracelogic::ValidationError("cannot open " + path);
  return json::parse(in);
}

void write_output(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream o(out);
  if (!o) throw tracelogic::ValidationError("cannot write " + out);
  o << text << "\n";
}

struct SentenceChoice {
  std::string name = "tau";
  int m = 1;
  int n = 2;
  int ys = 1;
};

tracelogic::FormulaPtr build_sentence(const SentenceChoice& c) {
  using namespace tracelogic;
  if (c.name == "chi") return build_chi("X", "U1", "U2");
  if (c.name == "psi") return build_psi_m(c.m, "Va", "Vb");
  if (c.name == "tau") return build_tau_m(c.m);
  if (c.name == "phi-good") return build_phi_good("U1", "U2");
  if (c.name == "phi-leq") {
    std::vector<TermPtr> ys;
    for (int i = 1; i <= c.ys; ++i)
      ys.push_back(t_var("Y" + std::to_string(i), Sort::Ball));
    return build_phi_leq(ys, t_var("U1", Sort::Unitary),
                         t_var("U2", Sort::Unitary));
  }
  if (c.name == "zeta")
    return build_zeta("x", t_var("U1a", Sort::Unitary),
                      t_var("U1b", Sort::Unitary),
                      t_var("U2a", Sort::Unitary),
                      t_var("U2b", Sort::Unitary));
  if (c.name == "theta") {
    if (c.n > 6)
      throw tracelogic::ValidationError(
          "theta levels above 6 produce sentences too large to be useful; "
          "pass --n <= 6");
    return build_theta(c.m, c.n);
  }
  throw tracelogic::ValidationError(
      "unknown sentence '" + c.name +
      "' (expected chi, psi, tau, phi-good, phi-leq, zeta or theta)");
}

json sentence_provenance(const SentenceChoice& c,
                         const tracelogic::FormulaPtr& f) {
  json p = {{"sentence", c.name}, {"m", c.m}, {"formula_hash", f->hash},
            {"node_count", f->node_count}};
  if (c.name == "theta") p["n"] = c.n;
  if (c.name == "phi-leq") p["ys"] = c.ys;
  return p;
}

std::map<std::string, tracelogic::Mat> read_assignment(
    const std::string& path) {
  std::map<std::string, tracelogic::Mat> out;
  if (path.empty()) return out;
  json j = read_json_file(path);
  if (!j.is_object())
    throw tracelogic::ValidationError(
        "assignment file must be an object of name -> matrix");
  for (auto it = j.begin(); it != j.end(); ++it)
    out[it.key()] = tracelogic::matrix_from_json(it.value());
  return out;
}

int dispatch(int argc, char** argv) {
  using namespace tracelogic;

  CLI::App app{
      "sentence-lab: sentences over finite tracial algebras (build, "
      "transform, evaluate)"};
  app.require_subcommand(1);

  SentenceChoice choice;
  std::string out, format = "json", algebra_str, assign_path, hints_path;
  EvalBudget budget;
  OracleBudget obudget;
  bool use_oracle = false;

  auto add_sentence_flags = [&](CLI::App* cmd) {
    cmd->add_option("--sentence", choice.name,
                    "chi | psi | tau | phi-good | phi-leq | zeta | theta")
        ->capture_default_str();
    cmd->add_option("--m", choice.m, "tuple size m >= 1")
        ->capture_default_str();
    cmd->add_option("--n", choice.n, "nesting depth (theta only)")
        ->capture_default_str();
    cmd->add_option("--ys", choice.ys, "number of test terms (phi-leq only)")
        ->capture_default_str();
  };
  auto add_out_flag = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "output file ('-' or empty for stdout)");
  };
  auto add_budget_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", budget.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--budget-restarts", budget.restarts,
                    "restarts per quantifier block")
        ->capture_default_str();
    cmd->add_option("--budget-iters", budget.iters,
                    "iterations per restart at the root")
        ->capture_default_str();
    cmd->add_option("--child-restarts", budget.child_restarts,
                    "restarts for cold nested solves")
        ->capture_default_str();
    cmd->add_option("--child-iters", budget.child_iters,
                    "iterations for cold nested solves")
        ->capture_default_str();
    cmd->add_option("--warm-iters", budget.warm_iters,
                    "iterations for warm nested re-solves")
        ->capture_default_str();
  };

  // ---- emit -----------------------------------------------------------------
  auto* emit = app.add_subcommand(
      "emit", "construct a sentence and print it (json, latex or prenex)");
  add_sentence_flags(emit);
  add_out_flag(emit);
  emit->add_option("--format", format, "json | latex | prenex")
      ->capture_default_str();

  // ---- analyze --------------------------------------------------------------
  std::string in_path;
  auto* analyze = app.add_subcommand(
      "analyze",
      "prenex a sentence and report prefix, alternation counts and sizes");
  add_sentence_flags(analyze);
  add_out_flag(analyze);
  analyze->add_option("--in", in_path,
                      "read the formula from a JSON file instead");

  // ---- build-algebra ----------------------------------------------------------
  auto* balg = app.add_subcommand(
      "build-algebra", "build and verify a tracial algebra from a spec");
  balg->add_option("--algebra", algebra_str,
                   "spec: M2, L(Z4), inline JSON, or @file")
      ->required();
  add_out_flag(balg);

  // ---- evaluate ---------------------------------------------------------------
  auto* ev = app.add_subcommand(
      "evaluate", "numerically evaluate a sentence over an algebra");
  add_sentence_flags(ev);
  add_out_flag(ev);
  add_budget_flags(ev);
  ev->add_option("--algebra", algebra_str, "algebra spec")->required();
  ev->add_option("--assign", assign_path,
                 "JSON file assigning matrices to free variables");
  ev->add_option("--hints", hints_path,
                 "JSON file of matrices tried as starting points");
  ev->add_flag("--oracle", use_oracle,
               "use the exhaustive grid oracle instead of the optimizer");
  ev->add_option("--oracle-axis", obudget.ball_axis,
                 "grid points per real axis for ball quantifiers")
      ->capture_default_str();
  ev->add_option("--oracle-phase", obudget.phase_points,
                 "points per circle factor for unitary quantifiers")
      ->capture_default_str();
  ev->add_option("--oracle-cap", obudget.max_points,
                 "refuse oracle runs above this many grid points")
      ->capture_default_str();

  // ---- experiment -------------------------------------------------------------
  std::string base_group = "Z2";
  int k = 3;
  bool strip_volatile = false;
  auto* ex = app.add_subcommand(
      "experiment",
      "paired tau_m run: abelian power vs wreath product of a base group");
  ex->add_option("--base", base_group, "base group name (Z2, Z3, S3, ...)")
      ->capture_default_str();
  ex->add_option("--k", k, "number of factors")->capture_default_str();
  ex->add_option("--m", choice.m, "tuple size")->capture_default_str();
  ex->add_flag("--strip-volatile", strip_volatile,
               "remove timestamp/wall-clock fields for bit-stable output");
  add_out_flag(ex);
  add_budget_flags(ex);

  // ---- verify-good-pair ---------------------------------------------------------
  std::string u1_str, u2_str;
  double gp_c = 100.0;
  auto* vg = app.add_subcommand(
      "verify-good-pair",
      "spectral-gap certificate for a pair of unitaries in an algebra");
  vg->add_option("--algebra", algebra_str, "algebra spec")->required();
  vg->add_option("--u1", u1_str,
                 "unitary: g:<index> for a canonical group unitary, or @file")
      ->required();
  vg->add_option("--u2", u2_str, "second unitary, same forms")->required();
  vg->add_option("--c", gp_c, "certificate constant")->capture_default_str();
  add_out_flag(vg);

  CLI11_PARSE(app, argc, argv);

  if (emit->parsed()) {
    auto f = build_sentence(choice);
    if (format == "latex") {
      write_output(out, to_latex(f));
    } else if (format == "prenex") {
      json j = to_json(to_prenex(f));
      j["provenance"] = sentence_provenance(choice, f);
      write_output(out, j.dump(2));
    } else if (format == "json") {
      json j = {{"kind", "sentence"},
                {"formula", to_json(f)},
                {"provenance", sentence_provenance(choice, f)}};
      write_output(out, j.dump(2));
    } else {
      throw ValidationError("unknown format '" + format + "'");
    }
    return 0;
  }

  if (analyze->parsed()) {
    FormulaPtr f;
    json prov;
    if (!in_path.empty()) {
      json j = read_json_file(in_path);
      f = formula_from_json(j.contains("formula") ? j["formula"] : j);
      prov = {{"source", in_path}};
    } else {
      f = build_sentence(choice);
      prov = sentence_provenance(choice, f);
    }
    auto pf = to_prenex(f);
    json vars = json::object();
    for (const auto& [n, s] : *f->free_vars) vars[n] = sort_name(s);
    json j = {{"kind", "analysis"},
              {"blocks", alternation_count(pf, AlternationConvention::Blocks)},
              {"switches",
               alternation_count(pf, AlternationConvention::Switches)},
              {"prefix", to_json(pf)["prefix"]},
              {"renames", to_json(pf)["renames"]},
              {"free_vars", vars},
              {"node_count", f->node_count},
              {"matrix_node_count", pf.matrix->node_count},
              {"value_bound", f->value_bound},
              {"quantifier_free", f->quantifier_free},
              {"provenance", prov}};
    write_output(out, j.dump(2));
    return 0;
  }

  if (balg->parsed()) {
    json spec = parse_algebra_spec(algebra_str);
    auto A = algebra_from_spec(spec);
    verify_algebra(A);
    json j = {{"kind", "algebra"},
              {"spec", A.spec},
              {"canonical_spec", canonical_algebra_spec(spec)},
              {"D", A.D},
              {"dim", A.dim()},
              {"commutative", detail::is_commutative(A)},
              {"center_dim", center(A).dim()},
              {"weights", std::vector<double>(
                              A.weights.data(),
                              A.weights.data() + A.weights.size())}};
    write_output(out, j.dump(2));
    return 0;
  }

  if (ev->parsed()) {
    json spec = parse_algebra_spec(algebra_str);
    auto A = algebra_from_spec(spec);
    auto f = build_sentence(choice);
    auto assignment = read_assignment(assign_path);
    json j = {{"kind", use_oracle ? "oracle_evaluation" : "evaluation"},
              {"algebra", canonical_algebra_spec(spec)},
              {"provenance", sentence_provenance(choice, f)}};
    if (use_oracle) {
      auto r = evaluate_oracle(f, A, assignment, obudget);
      j["value"] = r.value;
      j["error_bound"] = r.error_bound;
      j["total_points"] = r.total_points;
    } else {
      auto hints = read_assignment(hints_path);
      auto r = evaluate(f, A, assignment, budget, hints);
      j.update(to_json(r, budget));
    }
    write_output(out, j.dump(2));
    return 0;
  }

  if (ex->parsed()) {
    auto base = named_group(base_group);
    json j = run_t0_t1_experiment(base, k, choice.m, budget);
    if (strip_volatile) {
      for (const auto& fld : j["volatile_fields"])
        j.erase(fld.get<std::string>());
      j.erase("volatile_fields");
    }
    write_output(out, j.dump(2));
    return 0;
  }

  if (vg->parsed()) {
    json spec = parse_algebra_spec(algebra_str);
    auto A = algebra_from_spec(spec);
    auto get_unitary = [&](const std::string& s) -> Mat {
      if (s.rfind("g:", 0) == 0)
        return A.canonical_unitary(std::atoi(s.c_str() + 2));
      if (!s.empty() && s[0] == '@')
        return matrix_from_json(read_json_file(s.substr(1)));
      throw ValidationError("unitary must be g:<index> or @file, got '" + s +
                            "'");
    };
    auto rep = is_good_pair(A, get_unitary(u1_str), get_unitary(u2_str), gp_c);
    json j = to_json(rep);
    j["kind"] = "good_pair_certificate";
    j["algebra"] = canonical_algebra_spec(spec);
    write_output(out, j.dump(2));
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const tracelogic::SizeCapError& e) {
    std::cerr << "size limit: " << e.what() << "\n";
    return 3;
  } catch (const tracelogic::OracleIneligible& e) {
    std::cerr << "oracle ineligible: " << e.what() << "\n";
    return 3;
  } catch (const tracelogic::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const tracelogic::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
