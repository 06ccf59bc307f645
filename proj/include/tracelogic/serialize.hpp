#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tracelogic/builders.hpp"
#include "tracelogic/commutant.hpp"
#include "tracelogic/evaluate.hpp"
#include "tracelogic/prenex.hpp"

namespace tracelogic {

using json = nlohmann::json;

// ---- terms ------------------------------------------------------------------

inline json to_json(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var:
      return {{"op", "var"},
              {"name", t->name},
              {"sort", sort_name(t->free_vars->begin()->second)}};
    case TermKind::One: return {{"op", "one"}};
    case TermKind::Zero: return {{"op", "zero"}};
    case TermKind::Add:
      return {{"op", "add"}, {"a", to_json(t->a)}, {"b", to_json(t->b)}};
    case TermKind::Mul:
      return {{"op", "mul"}, {"a", to_json(t->a)}, {"b", to_json(t->b)}};
    case TermKind::Adjoint:
      return {{"op", "adj"}, {"a", to_json(t->a)}};
    case TermKind::Scale:
      return {{"op", "scale"},
              {"re", t->coef.real()},
              {"im", t->coef.imag()},
              {"a", to_json(t->a)}};
  }
  throw ValidationError("term to_json: unreachable");
}

inline TermPtr term_from_json(const json& j) {
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string())
    throw ValidationError("term json needs an 'op' tag");
  const std::string op = j["op"];
  auto need = [&](const char* k) -> const json& {
    if (!j.contains(k))
      throw ValidationError("term '" + op + "' missing field '" + k + "'");
    return j[k];
  };
  if (op == "var") {
    std::string s = need("sort");
    if (s != "ball" && s != "unitary")
      throw ValidationError("unknown sort '" + s + "'");
    return t_var(need("name").get<std::string>(),
                 s == "ball" ? Sort::Ball : Sort::Unitary);
  }
  if (op == "one") return t_one();
  if (op == "zero") return t_zero();
  if (op == "add") return t_add(term_from_json(need("a")), term_from_json(need("b")));
  if (op == "mul") return t_mul(term_from_json(need("a")), term_from_json(need("b")));
  if (op == "adj") return t_adj(term_from_json(need("a")));
  if (op == "scale")
    return t_scale(cplx(need("re").get<double>(), need("im").get<double>()),
                   term_from_json(need("a")));
  throw ValidationError("unknown term op '" + op + "'");
}

// ---- moduli -----------------------------------------------------------------

inline json to_json(const Modulus& m) {
  json terms = json::array();
  for (auto [slot, coeff] : m.terms()) terms.push_back({slot, coeff});
  return {{"terms", terms}};
}

inline Modulus modulus_from_json(const json& j) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
    throw ValidationError("modulus json needs a 'terms' array");
  Modulus m = Modulus::zero();
  for (const auto& t : j["terms"]) {
    if (!t.is_array() || t.size() != 2)
      throw ValidationError("modulus term must be [slot, coeff]");
    m += Modulus::term(t[0].get<int>(), t[1].get<double>());
  }
  return m;
}

// ---- formulas ---------------------------------------------------------------

inline json to_json(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Norm2: return {{"f", "norm2"}, {"t", to_json(f->t)}};
    case FormulaKind::Dist2:
      return {{"f", "dist2"}, {"t", to_json(f->t)}, {"s", to_json(f->s)}};
    case FormulaKind::Const: return {{"f", "const"}, {"c", f->cval}};
    case FormulaKind::Max:
    case FormulaKind::Min: {
      json args = json::array();
      for (const auto& a : f->args) args.push_back(to_json(a));
      return {{"f", f->kind == FormulaKind::Max ? "max" : "min"},
              {"args", args}};
    }
    case FormulaKind::Plus:
    case FormulaKind::DotMinus:
      return {{"f", f->kind == FormulaKind::Plus ? "plus" : "dotminus"},
              {"a", to_json(f->args[0])},
              {"b", to_json(f->args[1])}};
    case FormulaKind::Sqrt:
      return {{"f", "sqrt"}, {"a", to_json(f->args[0])}};
    case FormulaKind::Square:
      return {{"f", "square"}, {"a", to_json(f->args[0])}};
    case FormulaKind::ScaleF:
      return {{"f", "scale"}, {"c", f->cval}, {"a", to_json(f->args[0])}};
    case FormulaKind::ApplyModulus:
      return {{"f", "modulus"},
              {"mod", to_json(f->mod)},
              {"a", to_json(f->args[0])}};
    case FormulaKind::Sup:
    case FormulaKind::Inf:
      return {{"f", f->kind == FormulaKind::Sup ? "sup" : "inf"},
              {"var", f->var},
              {"sort", sort_name(f->var_sort)},
              {"body", to_json(f->args[0])}};
  }
  throw ValidationError("formula to_json: unreachable");
}

inline FormulaPtr formula_from_json(const json& j) {
  if (!j.is_object() || !j.contains("f") || !j["f"].is_string())
    throw ValidationError("formula json needs an 'f' tag");
  const std::string op = j["f"];
  auto need = [&](const char* k) -> const json& {
    if (!j.contains(k))
      throw ValidationError("formula '" + op + "' missing field '" + k + "'");
    return j[k];
  };
  if (op == "norm2") return f_norm2(term_from_json(need("t")));
  if (op == "dist2")
    return f_dist2(term_from_json(need("t")), term_from_json(need("s")));
  if (op == "const") return f_const(need("c").get<double>());
  if (op == "max" || op == "min") {
    std::vector<FormulaPtr> args;
    for (const auto& a : need("args")) args.push_back(formula_from_json(a));
    return op == "max" ? f_max(std::move(args)) : f_min(std::move(args));
  }
  if (op == "plus")
    return f_plus(formula_from_json(need("a")), formula_from_json(need("b")));
  if (op == "dotminus")
    return f_dotminus(formula_from_json(need("a")),
                      formula_from_json(need("b")));
  if (op == "sqrt") return f_sqrt(formula_from_json(need("a")));
  if (op == "square") return f_square(formula_from_json(need("a")));
  if (op == "scale")
    return f_scale(need("c").get<double>(), formula_from_json(need("a")));
  if (op == "modulus")
    return f_apply_modulus(modulus_from_json(need("mod")),
                           formula_from_json(need("a")));
  if (op == "sup" || op == "inf") {
    std::string s = need("sort");
    if (s != "ball" && s != "unitary")
      throw ValidationError("unknown sort '" + s + "'");
    Sort sort = s == "ball" ? Sort::Ball : Sort::Unitary;
    auto body = formula_from_json(need("body"));
    return op == "sup" ? f_sup(need("var").get<std::string>(), sort, body)
                       : f_inf(need("var").get<std::string>(), sort, body);
  }
  throw ValidationError("unknown formula op '" + op + "'");
}

// ---- matrices ---------------------------------------------------------------

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("matrix json must be a nonempty array of rows");
  const auto rows = j.size();
  const auto cols = j[0].size();
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ValidationError("matrix json rows must have equal length");
    for (size_t k = 0; k < cols; ++k) {
      const auto& e = j[i][k];
      if (!e.is_array() || e.size() != 2)
        throw ValidationError("matrix entries must be [re, im]");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

// ---- groups and algebra specs ------------------------------------------------

inline json to_json(const FiniteGroup& G) {
  json rows = json::array();
  for (int g = 0; g < G.n; ++g) {
    json row = json::array();
    for (int h = 0; h < G.n; ++h) row.push_back(G.mul(g, h));
    rows.push_back(row);
  }
  return {{"name", G.name}, {"table", rows}};
}

inline FiniteGroup group_from_json(const json& j) {
  if (!j.is_object() || !j.contains("table"))
    throw ValidationError("group json needs a 'table'");
  const auto& rows = j["table"];
  if (!rows.is_array() || rows.empty())
    throw ValidationError("group table must be a nonempty array");
  int n = static_cast<int>(rows.size());
  std::vector<int> t;
  t.reserve(static_cast<size_t>(n) * n);
  for (const auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ValidationError("group table must be square");
    for (const auto& e : row) t.push_back(e.get<int>());
  }
  std::string name = j.value("name", "G" + std::to_string(n));
  return make_group(n, std::move(t), name);
}

// Named groups: "Z<n>" and "S<k>".
inline FiniteGroup named_group(const std::string& name) {
  if (name.size() >= 2 && name[0] == 'Z') {
    int n = std::atoi(name.c_str() + 1);
    if (n >= 1) return cyclic_group(n);
  }
  if (name.size() >= 2 && name[0] == 'S') {
    int k = std::atoi(name.c_str() + 1);
    if (k >= 1 && k <= 6) return symmetric_group(k);
  }
  throw ValidationError("unknown group name '" + name + "'");
}

// Algebra specs.  Accepted forms:
//   "M<k>"                      full matrix algebra
//   "L(Z4)", "L(S3)"            group algebra of a named group
//   {"matrix": k}
//   {"group": <group json or name>}
//   {"group_power": {"base": ..., "k": ...}}
//   {"wreath": {"base": ..., "k": ...}}
//   {"tensor": [spec, spec]}
//   {"direct_sum": {"a": spec, "b": spec, "wa": ..., "wb": ...}}
inline FiniteGroup group_from_spec(const json& j) {
  if (j.is_string()) return named_group(j.get<std::string>());
  return group_from_json(j);
}

inline TracialAlgebra algebra_from_spec(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.size() >= 2 && s[0] == 'M') {
      int k = std::atoi(s.c_str() + 1);
      if (k >= 1) return matrix_algebra(k);
    }
    if (s.size() >= 4 && s.rfind("L(", 0) == 0 && s.back() == ')')
      return group_algebra(named_group(s.substr(2, s.size() - 3)));
    throw ValidationError("unknown algebra spec '" + s + "'");
  }
  if (!j.is_object())
    throw ValidationError("algebra spec must be a string or an object");
  if (j.contains("matrix")) return matrix_algebra(j["matrix"].get<int>());
  if (j.contains("group")) return group_algebra(group_from_spec(j["group"]));
  if (j.contains("group_power")) {
    const auto& p = j["group_power"];
    return group_algebra(
        direct_power(group_from_spec(p.at("base")), p.at("k").get<int>()));
  }
  if (j.contains("wreath")) {
    const auto& p = j["wreath"];
    return group_algebra(
        wreath_product(group_from_spec(p.at("base")), p.at("k").get<int>()));
  }
  if (j.contains("tensor")) {
    const auto& p = j["tensor"];
    if (!p.is_array() || p.size() != 2)
      throw ValidationError("tensor spec needs two factors");
    return tensor_algebra(algebra_from_spec(p[0]), algebra_from_spec(p[1]));
  }
  if (j.contains("direct_sum")) {
    const auto& p = j["direct_sum"];
    return direct_sum(algebra_from_spec(p.at("a")),
                      algebra_from_spec(p.at("b")), p.at("wa").get<double>(),
                      p.at("wb").get<double>());
  }
  throw ValidationError("unrecognized algebra spec");
}

// Canonical form: groups expanded to explicit tables, names preserved.
inline json canonical_algebra_spec(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.size() >= 2 && s[0] == 'M' && std::atoi(s.c_str() + 1) >= 1)
      return {{"matrix", std::atoi(s.c_str() + 1)}};
    if (s.size() >= 4 && s.rfind("L(", 0) == 0 && s.back() == ')')
      return {{"group", to_json(named_group(s.substr(2, s.size() - 3)))}};
    throw ValidationError("unknown algebra spec '" + s + "'");
  }
  if (!j.is_object())
    throw ValidationError("algebra spec must be a string or an object");
  if (j.contains("matrix")) return {{"matrix", j["matrix"].get<int>()}};
  if (j.contains("group"))
    return {{"group", to_json(group_from_spec(j["group"]))}};
  if (j.contains("group_power")) {
    const auto& p = j["group_power"];
    return {{"group", to_json(direct_power(group_from_spec(p.at("base")),
                                           p.at("k").get<int>()))}};
  }
  if (j.contains("wreath")) {
    const auto& p = j["wreath"];
    return {{"group", to_json(wreath_product(group_from_spec(p.at("base")),
                                             p.at("k").get<int>()))}};
  }
  if (j.contains("tensor")) {
    const auto& p = j["tensor"];
    return {{"tensor", json::array({canonical_algebra_spec(p.at(0)),
                                    canonical_algebra_spec(p.at(1))})}};
  }
  if (j.contains("direct_sum")) {
    const auto& p = j["direct_sum"];
    return {{"direct_sum",
             {{"a", canonical_algebra_spec(p.at("a"))},
              {"b", canonical_algebra_spec(p.at("b"))},
              {"wa", p.at("wa").get<double>()},
              {"wb", p.at("wb").get<double>()}}}};
  }
  throw ValidationError("unrecognized algebra spec");
}

// ---- results -----------------------------------------------------------------

inline json to_json(const EvalResult& r, const EvalBudget& budget) {
  json wits = json::array();
  for (const auto& [name, m] : r.witnesses)
    wits.push_back({{"name", name}, {"matrix", to_json(m)}});
  return {{"value", r.value},
          {"gap_estimate", r.gap_estimate},
          {"matrix_evals", r.matrix_evals},
          {"witnesses", wits},
          {"budget",
           {{"restarts", budget.restarts},
            {"iters", budget.iters},
            {"seed", budget.seed},
            {"child_restarts", budget.child_restarts},
            {"child_iters", budget.child_iters},
            {"warm_iters", budget.warm_iters}}}};
}

inline json to_json(const GoodPairReport& r) {
  json lambda;
  if (std::isinf(r.lambda))
    lambda = "infinity";
  else
    lambda = r.lambda;
  return {{"lambda", lambda},       {"good", r.good},
          {"vacuous", r.vacuous},   {"c", r.c},
          {"p", r.p},               {"algebra_dim", r.algebra_dim},
          {"commutant_dim", r.commutant_dim}};
}

inline json to_json(const PrenexFormula& pf) {
  json prefix = json::array();
  for (const auto& q : pf.prefix)
    prefix.push_back({{"q", q.kind == Quant::Sup ? "sup" : "inf"},
                      {"sort", sort_name(q.sort)},
                      {"var", q.var}});
  json renames = json::array();
  for (const auto& [from, to] : pf.renames)
    renames.push_back({from, to});
  return {{"prefix", prefix},
          {"matrix", to_json(pf.matrix)},
          {"blocks", alternation_count(pf, AlternationConvention::Blocks)},
          {"switches", alternation_count(pf, AlternationConvention::Switches)},
          {"renames", renames}};
}

}  // namespace tracelogic
