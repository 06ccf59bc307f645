#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "tracelogic/modulus.hpp"
#include "tracelogic/term.hpp"

namespace tracelogic {

// Formulas denote [0, inf)-valued functions of their free variables.
//
//   Norm2(t)          ||t||_2                      (trace norm of the term)
//   Dist2(t, s)       ||t - s||_2
//   Const(c)          constant c >= 0
//   Max / Min         over a nonempty argument list
//   Plus(a, b)        a + b
//   DotMinus(a, b)    max(a - b, 0)                (truncated subtraction)
//   Sqrt / Square     monotone reparametrizations
//   ScaleF(c, a)      c * a, c >= 0
//   ApplyModulus(m,a) m(a) for a modulus m        (monotone, subadditive)
//   Sup / Inf         quantifiers over a sorted variable
enum class FormulaKind {
  Norm2, Dist2, Const, Max, Min, Plus, DotMinus,
  Sqrt, Square, ScaleF, ApplyModulus, Sup, Inf
};

struct FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FormulaKind kind;
  TermPtr t, s;                    // Norm2 / Dist2
  double cval = 0.0;               // Const / ScaleF
  Modulus mod;                     // ApplyModulus
  std::vector<FormulaPtr> args;    // children for the connectives
  std::string var;                 // Sup / Inf
  Sort var_sort = Sort::Ball;      // Sup / Inf

  std::uint64_t hash = 0;
  int node_count = 1;
  bool quantifier_free = true;
  double value_bound = 0.0;        // sup over all assignments, upper bound
  std::shared_ptr<const VarSorts> free_vars;
};

inline bool is_quantifier(FormulaKind k) {
  return k == FormulaKind::Sup || k == FormulaKind::Inf;
}

namespace detail {

inline std::uint64_t double_hash(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

inline std::shared_ptr<FormulaNode> fnode(FormulaKind k) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  n->free_vars = empty_vars();
  return n;
}

inline void absorb_child(FormulaNode& n, const FormulaPtr& c) {
  n.node_count += c->node_count;
  n.quantifier_free = n.quantifier_free && c->quantifier_free;
  n.free_vars = merge_vars(n.free_vars, c->free_vars);
  n.hash = hash_combine(n.hash, c->hash);
}

}  // namespace detail

inline FormulaPtr f_norm2(TermPtr t) {
  auto n = detail::fnode(FormulaKind::Norm2);
  n->hash = hash_combine(101, t->hash);
  n->node_count = 1 + t->node_count;
  n->value_bound = t->norm_bound;
  n->free_vars = t->free_vars;
  n->t = std::move(t);
  return n;
}

inline FormulaPtr f_dist2(TermPtr t, TermPtr s) {
  auto n = detail::fnode(FormulaKind::Dist2);
  n->hash = hash_combine(102, hash_combine(t->hash, s->hash));
  n->node_count = 1 + t->node_count + s->node_count;
  n->value_bound = t->norm_bound + s->norm_bound;
  n->free_vars = detail::merge_vars(t->free_vars, s->free_vars);
  n->t = std::move(t);
  n->s = std::move(s);
  return n;
}

inline FormulaPtr f_const(double c) {
  if (!(c >= 0.0)) throw ValidationError("formula constants must be >= 0");
  auto n = detail::fnode(FormulaKind::Const);
  n->cval = c;
  n->hash = hash_combine(103, detail::double_hash(c));
  n->value_bound = c;
  return n;
}

inline FormulaPtr f_max(std::vector<FormulaPtr> args) {
  if (args.empty()) throw ValidationError("max needs at least one argument");
  if (args.size() == 1) return args[0];
  auto n = detail::fnode(FormulaKind::Max);
  n->hash = 104;
  for (const auto& a : args) {
    detail::absorb_child(*n, a);
    n->value_bound = std::max(n->value_bound, a->value_bound);
  }
  n->args = std::move(args);
  return n;
}

inline FormulaPtr f_max(FormulaPtr a, FormulaPtr b) {
  return f_max(std::vector<FormulaPtr>{std::move(a), std::move(b)});
}

inline FormulaPtr f_min(std::vector<FormulaPtr> args) {
  if (args.empty()) throw ValidationError("min needs at least one argument");
  if (args.size() == 1) return args[0];
  auto n = detail::fnode(FormulaKind::Min);
  n->hash = 105;
  n->value_bound = args[0]->value_bound;
  for (const auto& a : args) {
    detail::absorb_child(*n, a);
    n->value_bound = std::min(n->value_bound, a->value_bound);
  }
  n->args = std::move(args);
  return n;
}

inline FormulaPtr f_min(FormulaPtr a, FormulaPtr b) {
  return f_min(std::vector<FormulaPtr>{std::move(a), std::move(b)});
}

inline FormulaPtr f_plus(FormulaPtr a, FormulaPtr b) {
  auto n = detail::fnode(FormulaKind::Plus);
  n->hash = 106;
  detail::absorb_child(*n, a);
  detail::absorb_child(*n, b);
  n->value_bound = a->value_bound + b->value_bound;
  n->args = {std::move(a), std::move(b)};
  return n;
}

// a ∸ b = max(a - b, 0)
inline FormulaPtr f_dotminus(FormulaPtr a, FormulaPtr b) {
  auto n = detail::fnode(FormulaKind::DotMinus);
  n->hash = 107;
  detail::absorb_child(*n, a);
  detail::absorb_child(*n, b);
  n->value_bound = a->value_bound;
  n->args = {std::move(a), std::move(b)};
  return n;
}

inline FormulaPtr f_sqrt(FormulaPtr a) {
  auto n = detail::fnode(FormulaKind::Sqrt);
  n->hash = 108;
  detail::absorb_child(*n, a);
  n->value_bound = std::sqrt(a->value_bound);
  n->args = {std::move(a)};
  return n;
}

inline FormulaPtr f_square(FormulaPtr a) {
  auto n = detail::fnode(FormulaKind::Square);
  n->hash = 109;
  detail::absorb_child(*n, a);
  n->value_bound = a->value_bound * a->value_bound;
  n->args = {std::move(a)};
  return n;
}

inline FormulaPtr f_scale(double c, FormulaPtr a) {
  if (!(c >= 0.0)) throw ValidationError("formula scale must be >= 0");
  auto n = detail::fnode(FormulaKind::ScaleF);
  n->cval = c;
  n->hash = hash_combine(110, detail::double_hash(c));
  detail::absorb_child(*n, a);
  n->value_bound = c * a->value_bound;
  n->args = {std::move(a)};
  return n;
}

inline FormulaPtr f_apply_modulus(const Modulus& m, FormulaPtr a) {
  auto n = detail::fnode(FormulaKind::ApplyModulus);
  n->mod = m;
  n->hash = hash_combine(111, m.hash());
  detail::absorb_child(*n, a);
  n->value_bound = m(a->value_bound);
  n->args = {std::move(a)};
  return n;
}

namespace detail {

inline FormulaPtr quantifier(FormulaKind k, const std::string& var, Sort sort,
                             FormulaPtr body) {
  if (var.empty()) throw ValidationError("quantifier variable must be named");
  auto it = body->free_vars->find(var);
  if (it != body->free_vars->end() && it->second != sort)
    throw ValidationError("variable '" + var + "' used with two sorts");
  auto n = fnode(k);
  n->var = var;
  n->var_sort = sort;
  n->hash = hash_combine(k == FormulaKind::Sup ? 112 : 113,
                         hash_combine(hash_str(var), sort == Sort::Ball ? 0 : 1));
  n->node_count = 1 + body->node_count;
  n->quantifier_free = false;
  n->hash = hash_combine(n->hash, body->hash);
  n->value_bound = body->value_bound;
  // The bound variable is not free in the quantified formula.
  auto fv = std::make_shared<VarSorts>(*body->free_vars);
  fv->erase(var);
  n->free_vars = std::move(fv);
  n->args = {std::move(body)};
  return n;
}

}  // namespace detail

inline FormulaPtr f_sup(const std::string& var, Sort sort, FormulaPtr body) {
  return detail::quantifier(FormulaKind::Sup, var, sort, std::move(body));
}

inline FormulaPtr f_inf(const std::string& var, Sort sort, FormulaPtr body) {
  return detail::quantifier(FormulaKind::Inf, var, sort, std::move(body));
}

inline bool formula_equal(const FormulaPtr& x, const FormulaPtr& y) {
  if (x.get() == y.get()) return true;
  if (x->hash != y->hash || x->kind != y->kind) return false;
  switch (x->kind) {
    case FormulaKind::Norm2:
      return term_equal(x->t, y->t);
    case FormulaKind::Dist2:
      return term_equal(x->t, y->t) && term_equal(x->s, y->s);
    case FormulaKind::Const:
      return x->cval == y->cval;
    case FormulaKind::ScaleF:
      if (x->cval != y->cval) return false;
      break;
    case FormulaKind::ApplyModulus:
      if (!(x->mod == y->mod)) return false;
      break;
    case FormulaKind::Sup:
    case FormulaKind::Inf:
      if (x->var != y->var || x->var_sort != y->var_sort) return false;
      break;
    default:
      break;
  }
  if (x->args.size() != y->args.size()) return false;
  for (size_t i = 0; i < x->args.size(); ++i)
    if (!formula_equal(x->args[i], y->args[i])) return false;
  return true;
}

namespace detail {

inline void collect_binders(const FormulaPtr& f, std::vector<std::string>& out) {
  if (is_quantifier(f->kind)) out.push_back(f->var);
  for (const auto& a : f->args) collect_binders(a, out);
}

}  // namespace detail

// Enforce the evaluation contract: every bound variable is named uniquely
// and no binder shadows a free variable.  to_prenex normalizes arbitrary
// formulas into this shape.
inline void check_unique_binders(const FormulaPtr& f) {
  std::vector<std::string> binders;
  detail::collect_binders(f, binders);
  std::set<std::string> seen;
  for (const auto& b : binders) {
    if (!seen.insert(b).second)
      throw ValidationError("bound variable '" + b +
                            "' is not unique; normalize with to_prenex");
    if (f->free_vars->count(b))
      throw ValidationError("bound variable '" + b +
                            "' shadows a free variable");
  }
}

// Modulus of uniform continuity of the formula in `var` (d2 metric on the
// variable, everything else fixed).  Exact for the atomic cases, composed
// upper bounds elsewhere.
inline Modulus modulus_of(const FormulaPtr& f, const std::string& var) {
  if (!f->free_vars->count(var)) return Modulus::zero();
  switch (f->kind) {
    case FormulaKind::Norm2:
      return Modulus::linear(term_lipschitz(f->t, var));
    case FormulaKind::Dist2:
      return Modulus::linear(term_lipschitz(f->t, var) +
                             term_lipschitz(f->s, var));
    case FormulaKind::Const:
      return Modulus::zero();
    case FormulaKind::Max:
    case FormulaKind::Min: {
      Modulus m = Modulus::zero();
      for (const auto& a : f->args) m = Modulus::max(m, modulus_of(a, var));
      return m;
    }
    case FormulaKind::Plus:
    case FormulaKind::DotMinus:
      return modulus_of(f->args[0], var) + modulus_of(f->args[1], var);
    case FormulaKind::Sqrt:
      return modulus_of(f->args[0], var).sqrt_bound();
    case FormulaKind::Square:
      // |a^2 - b^2| <= (|a| + |b|) |a - b| <= 2 * bound * |a - b|.
      return modulus_of(f->args[0], var)
          .scaled(2.0 * f->args[0]->value_bound);
    case FormulaKind::ScaleF:
      return modulus_of(f->args[0], var).scaled(f->cval);
    case FormulaKind::ApplyModulus:
      return f->mod.after(modulus_of(f->args[0], var));
    case FormulaKind::Sup:
    case FormulaKind::Inf:
      // var != f->var since var is free here; quantifiers preserve moduli.
      return modulus_of(f->args[0], var);
  }
  return Modulus::zero();
}

// Substitution of free variables by terms.  Bound variables shadow; a
// substitution whose replacement term mentions a bound variable would
// capture, so that case throws.
inline FormulaPtr formula_substitute(const FormulaPtr& f,
                                     const std::map<std::string, TermPtr>& sub) {
  // Restrict to the variables actually free in f.
  bool relevant = false;
  for (const auto& [n, t] : sub)
    if (f->free_vars->count(n)) { relevant = true; break; }
  if (!relevant) return f;

  switch (f->kind) {
    case FormulaKind::Norm2:
      return f_norm2(term_substitute(f->t, sub));
    case FormulaKind::Dist2:
      return f_dist2(term_substitute(f->t, sub), term_substitute(f->s, sub));
    case FormulaKind::Const:
      return f;
    case FormulaKind::Max: {
      std::vector<FormulaPtr> a;
      a.reserve(f->args.size());
      for (const auto& c : f->args) a.push_back(formula_substitute(c, sub));
      return f_max(std::move(a));
    }
    case FormulaKind::Min: {
      std::vector<FormulaPtr> a;
      a.reserve(f->args.size());
      for (const auto& c : f->args) a.push_back(formula_substitute(c, sub));
      return f_min(std::move(a));
    }
    case FormulaKind::Plus:
      return f_plus(formula_substitute(f->args[0], sub),
                    formula_substitute(f->args[1], sub));
    case FormulaKind::DotMinus:
      return f_dotminus(formula_substitute(f->args[0], sub),
                        formula_substitute(f->args[1], sub));
    case FormulaKind::Sqrt:
      return f_sqrt(formula_substitute(f->args[0], sub));
    case FormulaKind::Square:
      return f_square(formula_substitute(f->args[0], sub));
    case FormulaKind::ScaleF:
      return f_scale(f->cval, formula_substitute(f->args[0], sub));
    case FormulaKind::ApplyModulus:
      return f_apply_modulus(f->mod, formula_substitute(f->args[0], sub));
    case FormulaKind::Sup:
    case FormulaKind::Inf: {
      auto inner = sub;
      inner.erase(f->var);
      for (const auto& [n, t] : inner)
        if (t->free_vars->count(f->var))
          throw ValidationError("substitution would capture bound variable '" +
                                f->var + "'");
      auto body = formula_substitute(f->args[0], inner);
      return f->kind == FormulaKind::Sup ? f_sup(f->var, f->var_sort, body)
                                         : f_inf(f->var, f->var_sort, body);
    }
  }
  return f;
}

}  // namespace tracelogic
