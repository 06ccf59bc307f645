#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>

#include "tracelogic/formula.hpp"

namespace tracelogic {

namespace detail {

inline std::string fmt_num(double v) {
  if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    return buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// "U1a.3" renders as U_{1a}^{(3)}: a trailing ".k" is a level superscript,
// the remaining tail after the leading letters a subscript.
inline std::string latex_var(const std::string& name) {
  std::string base = name, level;
  auto dot = name.rfind('.');
  if (dot != std::string::npos && dot + 1 < name.size()) {
    bool digits = true;
    for (size_t i = dot + 1; i < name.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
    if (digits) {
      base = name.substr(0, dot);
      level = name.substr(dot + 1);
    }
  }
  size_t head = 0;
  while (head < base.size() &&
         std::isalpha(static_cast<unsigned char>(base[head])))
    ++head;
  std::string out;
  if (head >= 1 && head < base.size())
    out = base.substr(0, head) + "_{" + base.substr(head) + "}";
  else if (base.size() > 1)
    out = base.substr(0, 1) + "_{" + base.substr(1) + "}";
  else
    out = base;
  if (!level.empty()) out += "^{(" + level + ")}";
  return out;
}

inline bool is_minus_one(cplx c) {
  return c.real() == -1.0 && c.imag() == 0.0;
}

// Add(Mul(a,b), Scale(-1, Mul(b,a))) is the commutator sugar.
inline bool match_commutator(const TermPtr& t, TermPtr& a, TermPtr& b) {
  if (t->kind != TermKind::Add) return false;
  const auto& left = t->a;
  const auto& right = t->b;
  if (left->kind != TermKind::Mul || right->kind != TermKind::Scale ||
      !is_minus_one(right->coef) || right->a->kind != TermKind::Mul)
    return false;
  const auto& rm = right->a;
  if (!term_equal(left->a, rm->b) || !term_equal(left->b, rm->a)) return false;
  a = left->a;
  b = left->b;
  return true;
}

// Mul(Mul(u, x), Adj(u)) is unitary conjugation.
inline bool match_conjugation(const TermPtr& t, TermPtr& u, TermPtr& x) {
  if (t->kind != TermKind::Mul || t->b->kind != TermKind::Adjoint ||
      t->a->kind != TermKind::Mul)
    return false;
  if (!term_equal(t->a->a, t->b->a)) return false;
  u = t->a->a;
  x = t->a->b;
  return true;
}

inline std::string latex_term(const TermPtr& t, bool atom_context) {
  TermPtr a, b;
  if (match_commutator(t, a, b))
    return "[" + latex_term(a, false) + ", " + latex_term(b, false) + "]";
  if (match_conjugation(t, a, b)) {
    std::string s =
        latex_term(a, true) + " " + latex_term(b, true) + " " +
        latex_term(a, true) + "^{*}";
    return atom_context ? "\\left(" + s + "\\right)" : s;
  }
  switch (t->kind) {
    case TermKind::Var: return latex_var(t->name);
    case TermKind::One: return "1";
    case TermKind::Zero: return "0";
    case TermKind::Add: {
      std::string s = latex_term(t->a, false) + " + " + latex_term(t->b, false);
      return atom_context ? "\\left(" + s + "\\right)" : s;
    }
    case TermKind::Mul:
      return latex_term(t->a, true) + " " + latex_term(t->b, true);
    case TermKind::Adjoint:
      return latex_term(t->a, true) + "^{*}";
    case TermKind::Scale: {
      std::string coef;
      if (t->coef.imag() == 0.0)
        coef = fmt_num(t->coef.real());
      else
        coef = "(" + fmt_num(t->coef.real()) + " + " +
               fmt_num(t->coef.imag()) + "i)";
      std::string s = coef + " \\, " + latex_term(t->a, true);
      return atom_context ? "\\left(" + s + "\\right)" : s;
    }
  }
  throw ValidationError("latex term: unreachable");
}

inline std::string latex_modulus(const Modulus& m) {
  std::string out;
  for (auto [slot, coeff] : m.terms()) {
    if (!out.empty()) out += " + ";
    std::string c = coeff == 1.0 ? "" : fmt_num(coeff) + " ";
    if (slot == 0)
      out += c + "t";
    else if (slot == 1)
      out += c + "\\sqrt{t}";
    else
      out += c + "t^{1/" + std::to_string(1LL << slot) + "}";
  }
  return out.empty() ? "0" : out;
}

inline std::string latex_formula(const FormulaPtr& f, bool atom_context) {
  switch (f->kind) {
    case FormulaKind::Norm2:
      return "\\left\\| " + latex_term(f->t, false) + " \\right\\|_2";
    case FormulaKind::Dist2:
      if (f->t->kind == TermKind::Var && f->s->kind == TermKind::Var)
        return "d\\!\\left(" + latex_var(f->t->name) + ", " +
               latex_var(f->s->name) + "\\right)";
      return "\\left\\| " + latex_term(f->t, false) + " - " +
             latex_term(f->s, false) + " \\right\\|_2";
    case FormulaKind::Const:
      return fmt_num(f->cval);
    case FormulaKind::Max:
    case FormulaKind::Min: {
      std::string s =
          f->kind == FormulaKind::Max ? "\\max\\left(" : "\\min\\left(";
      for (size_t i = 0; i < f->args.size(); ++i) {
        if (i) s += ",\\; ";
        s += latex_formula(f->args[i], false);
      }
      return s + "\\right)";
    }
    case FormulaKind::Plus: {
      std::string s = latex_formula(f->args[0], false) + " + " +
                      latex_formula(f->args[1], false);
      return atom_context ? "\\left(" + s + "\\right)" : s;
    }
    case FormulaKind::DotMinus: {
      std::string s = latex_formula(f->args[0], true) +
                      " \\mathbin{\\dot{-}} " +
                      latex_formula(f->args[1], true);
      return atom_context ? "\\left(" + s + "\\right)" : s;
    }
    case FormulaKind::Sqrt:
      return "\\sqrt{" + latex_formula(f->args[0], false) + "}";
    case FormulaKind::Square:
      return "\\left(" + latex_formula(f->args[0], false) + "\\right)^{2}";
    case FormulaKind::ScaleF: {
      std::string s =
          fmt_num(f->cval) + " \\, " + latex_formula(f->args[0], true);
      return atom_context ? "\\left(" + s + "\\right)" : s;
    }
    case FormulaKind::ApplyModulus:
      return "\\alpha_{[" + latex_modulus(f->mod) + "]}\\!\\left(" +
             latex_formula(f->args[0], false) + "\\right)";
    case FormulaKind::Sup:
    case FormulaKind::Inf: {
      std::string q = f->kind == FormulaKind::Sup ? "\\sup" : "\\inf";
      std::string dom = f->var_sort == Sort::Unitary ? "\\mathcal{U}" : "B";
      std::string s = q + "_{" + latex_var(f->var) + " \\in " + dom + "} \\, " +
                      latex_formula(f->args[0], true);
      return atom_context ? "\\left(" + s + "\\right)" : s;
    }
  }
  throw ValidationError("latex formula: unreachable");
}

}  // namespace detail

inline std::string to_latex(const FormulaPtr& f) {
  return detail::latex_formula(f, false);
}

inline std::string to_latex(const TermPtr& t) {
  return detail::latex_term(t, false);
}

}  // namespace tracelogic
