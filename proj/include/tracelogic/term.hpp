#pragma once

#include <cstring>
#include <map>
#include <memory>
#include <string>

#include "tracelogic/common.hpp"

namespace tracelogic {

// Variable sorts.  Ball ranges over the operator-norm unit ball of the
// algebra; Unitary over its unitary group.
enum class Sort { Ball, Unitary };

inline const char* sort_name(Sort s) {
  return s == Sort::Ball ? "ball" : "unitary";
}

enum class TermKind { Var, One, Zero, Add, Mul, Adjoint, Scale };

struct TermNode;
using TermPtr = std::shared_ptr<const TermNode>;
using VarSorts = std::map<std::string, Sort>;

// Immutable *-algebra term.  Nodes are shared; all derived data (hash, size,
// operator-norm bound, free variables) is computed once at construction.
struct TermNode {
  TermKind kind;
  std::string name;   // Var
  cplx coef{0.0};     // Scale
  TermPtr a, b;       // children

  std::uint64_t hash = 0;
  int node_count = 1;
  double norm_bound = 0.0;  // operator norm bound, assuming vars in unit ball
  std::shared_ptr<const VarSorts> free_vars;
};

namespace detail {

inline std::shared_ptr<const VarSorts> empty_vars() {
  static const auto e = std::make_shared<const VarSorts>();
  return e;
}

inline std::shared_ptr<const VarSorts> merge_vars(
    const std::shared_ptr<const VarSorts>& x,
    const std::shared_ptr<const VarSorts>& y) {
  if (x->empty()) return y;
  if (y->empty()) return x;
  auto out = std::make_shared<VarSorts>(*x);
  for (const auto& [n, s] : *y) {
    auto [it, inserted] = out->emplace(n, s);
    if (!inserted && it->second != s)
      throw ValidationError("variable '" + n + "' used with two sorts");
  }
  return out;
}

inline std::uint64_t cplx_hash(cplx c) {
  std::uint64_t re, im;
  double r = c.real(), i = c.imag();
  std::memcpy(&re, &r, sizeof re);
  std::memcpy(&im, &i, sizeof im);
  return hash_combine(re, im);
}

}  // namespace detail

inline TermPtr t_var(const std::string& name, Sort sort) {
  if (name.empty()) throw ValidationError("variable name must be nonempty");
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Var;
  n->name = name;
  n->hash = hash_combine(1, hash_combine(hash_str(name),
                                         sort == Sort::Ball ? 0 : 1));
  n->norm_bound = 1.0;
  auto fv = std::make_shared<VarSorts>();
  fv->emplace(name, sort);
  n->free_vars = std::move(fv);
  return n;
}

inline TermPtr t_one() {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::One;
  n->hash = 2;
  n->norm_bound = 1.0;
  n->free_vars = detail::empty_vars();
  return n;
}

inline TermPtr t_zero() {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Zero;
  n->hash = 3;
  n->norm_bound = 0.0;
  n->free_vars = detail::empty_vars();
  return n;
}

inline TermPtr t_add(TermPtr a, TermPtr b) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Add;
  n->hash = hash_combine(4, hash_combine(a->hash, b->hash));
  n->node_count = a->node_count + b->node_count + 1;
  n->norm_bound = a->norm_bound + b->norm_bound;
  n->free_vars = detail::merge_vars(a->free_vars, b->free_vars);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline TermPtr t_mul(TermPtr a, TermPtr b) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Mul;
  n->hash = hash_combine(5, hash_combine(a->hash, b->hash));
  n->node_count = a->node_count + b->node_count + 1;
  n->norm_bound = a->norm_bound * b->norm_bound;
  n->free_vars = detail::merge_vars(a->free_vars, b->free_vars);
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline TermPtr t_adj(TermPtr a) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Adjoint;
  n->hash = hash_combine(6, a->hash);
  n->node_count = a->node_count + 1;
  n->norm_bound = a->norm_bound;
  n->free_vars = a->free_vars;
  n->a = std::move(a);
  return n;
}

inline TermPtr t_scale(cplx c, TermPtr a) {
  auto n = std::make_shared<TermNode>();
  n->kind = TermKind::Scale;
  n->coef = c;
  n->hash = hash_combine(7, hash_combine(detail::cplx_hash(c), a->hash));
  n->node_count = a->node_count + 1;
  n->norm_bound = std::abs(c) * a->norm_bound;
  n->free_vars = a->free_vars;
  n->a = std::move(a);
  return n;
}

// [a, b] = ab - ba, as sugar over the core constructors.
inline TermPtr t_commutator(TermPtr a, TermPtr b) {
  return t_add(t_mul(a, b), t_scale(cplx(-1.0, 0.0), t_mul(b, a)));
}

// u a u*
inline TermPtr t_conjugate(TermPtr u, TermPtr a) {
  return t_mul(t_mul(u, std::move(a)), t_adj(u));
}

inline bool term_equal(const TermPtr& x, const TermPtr& y) {
  if (x.get() == y.get()) return true;
  if (x->hash != y->hash || x->kind != y->kind) return false;
  switch (x->kind) {
    case TermKind::Var:
      return x->name == y->name &&
             x->free_vars->begin()->second == y->free_vars->begin()->second;
    case TermKind::One:
    case TermKind::Zero:
      return true;
    case TermKind::Add:
    case TermKind::Mul:
      return term_equal(x->a, y->a) && term_equal(x->b, y->b);
    case TermKind::Adjoint:
      return term_equal(x->a, y->a);
    case TermKind::Scale:
      return x->coef == y->coef && term_equal(x->a, y->a);
  }
  return false;
}

// Lipschitz bound of the term as a function of `var` (in the d2 metric, all
// other variables held fixed anywhere in the unit ball).
inline double term_lipschitz(const TermPtr& t, const std::string& var) {
  if (!t->free_vars->count(var)) return 0.0;
  switch (t->kind) {
    case TermKind::Var:
      return 1.0;
    case TermKind::One:
    case TermKind::Zero:
      return 0.0;
    case TermKind::Add:
      return term_lipschitz(t->a, var) + term_lipschitz(t->b, var);
    case TermKind::Mul:
      // d2(ab, a'b') <= |a| d2(b,b') + d2(a,a') |b'| with operator-norm
      // coefficients.
      return t->a->norm_bound * term_lipschitz(t->b, var) +
             term_lipschitz(t->a, var) * t->b->norm_bound;
    case TermKind::Adjoint:
      return term_lipschitz(t->a, var);
    case TermKind::Scale:
      return std::abs(t->coef) * term_lipschitz(t->a, var);
  }
  return 0.0;
}

// Substitute variables by terms.  Unmapped variables stay.
inline TermPtr term_substitute(const TermPtr& t,
                               const std::map<std::string, TermPtr>& sub) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = sub.find(t->name);
      return it == sub.end() ? t : it->second;
    }
    case TermKind::One:
    case TermKind::Zero:
      return t;
    case TermKind::Add:
      return t_add(term_substitute(t->a, sub), term_substitute(t->b, sub));
    case TermKind::Mul:
      return t_mul(term_substitute(t->a, sub), term_substitute(t->b, sub));
    case TermKind::Adjoint:
      return t_adj(term_substitute(t->a, sub));
    case TermKind::Scale:
      return t_scale(t->coef, term_substitute(t->a, sub));
  }
  return t;
}

// Rename variables (name -> name), preserving sorts.
inline TermPtr term_rename(const TermPtr& t,
                           const std::map<std::string, std::string>& ren) {
  std::map<std::string, TermPtr> sub;
  for (const auto& [from, to] : ren) {
    auto it = t->free_vars->find(from);
    if (it != t->free_vars->end()) sub[from] = t_var(to, it->second);
  }
  return sub.empty() ? t : term_substitute(t, sub);
}

}  // namespace tracelogic
