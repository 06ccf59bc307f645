#pragma once

#include <deque>
#include <set>
#include <string>
#include <vector>

#include "tracelogic/formula.hpp"

namespace tracelogic {

enum class Quant { Sup, Inf };

inline Quant flip(Quant q) { return q == Quant::Sup ? Quant::Inf : Quant::Sup; }

struct QuantifierEntry {
  Quant kind;
  Sort sort;
  std::string var;

  bool operator==(const QuantifierEntry& o) const {
    return kind == o.kind && sort == o.sort && var == o.var;
  }
};

// A formula in prenex form: a quantifier prefix over a quantifier-free-ish
// matrix.  The matrix may still contain quantifiers inside ApplyModulus
// nodes: penalty moduli are evaluated as atoms, their internal quantifiers
// are not game moves and are never extracted.
struct PrenexFormula {
  std::vector<QuantifierEntry> prefix;
  FormulaPtr matrix;
  // Binder renames performed while normalizing, in traversal order.
  std::vector<std::pair<std::string, std::string>> renames;

  FormulaPtr to_formula() const {
    FormulaPtr f = matrix;
    for (auto it = prefix.rbegin(); it != prefix.rend(); ++it)
      f = it->kind == Quant::Sup ? f_sup(it->var, it->sort, f)
                                 : f_inf(it->var, it->sort, f);
    return f;
  }
};

enum class AlternationConvention { Blocks, Switches };

// Number of maximal same-kind runs in the prefix (Blocks), or that minus
// one (Switches).  An empty prefix has 0 under both conventions.
inline int alternation_count(
    const PrenexFormula& pf,
    AlternationConvention conv = AlternationConvention::Blocks) {
  if (pf.prefix.empty()) return 0;
  int blocks = 1;
  for (size_t i = 1; i < pf.prefix.size(); ++i)
    if (pf.prefix[i].kind != pf.prefix[i - 1].kind) ++blocks;
  return conv == AlternationConvention::Blocks ? blocks : blocks - 1;
}

namespace detail {

// Rename binders so every bound variable is globally unique and distinct
// from every free variable.  Deterministic: DFS order, smallest available
// suffix.  `active` maps in-scope original binder names to their current
// names for occurrence rewriting.
inline FormulaPtr rename_apart(
    const FormulaPtr& f, std::set<std::string>& claimed,
    std::map<std::string, std::string>& active,
    std::vector<std::pair<std::string, std::string>>& log) {
  switch (f->kind) {
    case FormulaKind::Norm2:
      return f_norm2(term_rename(f->t, active));
    case FormulaKind::Dist2:
      return f_dist2(term_rename(f->t, active), term_rename(f->s, active));
    case FormulaKind::Const:
      return f;
    case FormulaKind::Sup:
    case FormulaKind::Inf: {
      std::string fresh = f->var;
      if (claimed.count(fresh)) {
        int k = 2;
        do {
          fresh = f->var + "_" + std::to_string(k++);
        } while (claimed.count(fresh));
      }
      claimed.insert(fresh);
      if (fresh != f->var) log.emplace_back(f->var, fresh);
      auto saved = active.find(f->var);
      std::string prev;
      bool had = saved != active.end();
      if (had) prev = saved->second;
      active[f->var] = fresh;
      auto body = rename_apart(f->args[0], claimed, active, log);
      if (had)
        active[f->var] = prev;
      else
        active.erase(f->var);
      return f->kind == FormulaKind::Sup ? f_sup(fresh, f->var_sort, body)
                                         : f_inf(fresh, f->var_sort, body);
    }
    default: {
      std::vector<FormulaPtr> args;
      args.reserve(f->args.size());
      for (const auto& a : f->args)
        args.push_back(rename_apart(a, claimed, active, log));
      switch (f->kind) {
        case FormulaKind::Max: return f_max(std::move(args));
        case FormulaKind::Min: return f_min(std::move(args));
        case FormulaKind::Plus: return f_plus(args[0], args[1]);
        case FormulaKind::DotMinus: return f_dotminus(args[0], args[1]);
        case FormulaKind::Sqrt: return f_sqrt(args[0]);
        case FormulaKind::Square: return f_square(args[0]);
        case FormulaKind::ScaleF: return f_scale(f->cval, args[0]);
        case FormulaKind::ApplyModulus:
          return f_apply_modulus(f->mod, args[0]);
        default:
          throw ValidationError("rename_apart: unreachable");
      }
    }
  }
}

struct Extraction {
  std::deque<QuantifierEntry> prefix;
  FormulaPtr matrix;
};

// Merge child prefixes into one, round-batched: repeatedly take the head
// kind of the first child with a nonempty prefix and drain every child's
// leading run of that kind, in child order.  Runs of equal kinds thus fuse
// into single blocks instead of interleaving.
inline std::deque<QuantifierEntry> merge_prefixes(
    std::vector<std::deque<QuantifierEntry>>& parts) {
  std::deque<QuantifierEntry> out;
  for (;;) {
    const QuantifierEntry* head = nullptr;
    for (auto& p : parts)
      if (!p.empty()) { head = &p.front(); break; }
    if (!head) break;
    Quant k = head->kind;
    for (auto& p : parts)
      while (!p.empty() && p.front().kind == k) {
        out.push_back(p.front());
        p.pop_front();
      }
  }
  return out;
}

// Polarity-aware quantifier extraction.  `positive` tracks monotonicity of
// the enclosing context: the second argument of DotMinus is antitone, so
// quantifiers extracted from it flip kind.  All other connectives are
// monotone in every argument.  ApplyModulus is an extraction barrier.
inline Extraction extract(const FormulaPtr& f, bool positive) {
  switch (f->kind) {
    case FormulaKind::Norm2:
    case FormulaKind::Dist2:
    case FormulaKind::Const:
    case FormulaKind::ApplyModulus:
      return {{}, f};
    case FormulaKind::Sup:
    case FormulaKind::Inf: {
      auto body = extract(f->args[0], positive);
      Quant k = f->kind == FormulaKind::Sup ? Quant::Sup : Quant::Inf;
      if (!positive) k = flip(k);
      // Quantifiers over variables absent from the matrix are vacuous.
      if (body.matrix->free_vars->count(f->var))
        body.prefix.push_front({k, f->var_sort, f->var});
      return body;
    }
    default: {
      std::vector<std::deque<QuantifierEntry>> parts;
      std::vector<FormulaPtr> mats;
      parts.reserve(f->args.size());
      mats.reserve(f->args.size());
      for (size_t i = 0; i < f->args.size(); ++i) {
        bool child_pos = positive;
        if (f->kind == FormulaKind::DotMinus && i == 1)
          child_pos = !child_pos;
        auto e = extract(f->args[i], child_pos);
        parts.push_back(std::move(e.prefix));
        mats.push_back(std::move(e.matrix));
      }
      Extraction out;
      out.prefix = merge_prefixes(parts);
      switch (f->kind) {
        case FormulaKind::Max: out.matrix = f_max(std::move(mats)); break;
        case FormulaKind::Min: out.matrix = f_min(std::move(mats)); break;
        case FormulaKind::Plus: out.matrix = f_plus(mats[0], mats[1]); break;
        case FormulaKind::DotMinus:
          out.matrix = f_dotminus(mats[0], mats[1]);
          break;
        case FormulaKind::Sqrt: out.matrix = f_sqrt(mats[0]); break;
        case FormulaKind::Square: out.matrix = f_square(mats[0]); break;
        case FormulaKind::ScaleF:
          out.matrix = f_scale(f->cval, mats[0]);
          break;
        default:
          throw ValidationError("extract: unreachable");
      }
      return out;
    }
  }
}

}  // namespace detail

// Convert to prenex form.  Deterministic (fixed traversal order, smallest
// fresh suffixes) and idempotent: prenexing the result of to_formula() on a
// PrenexFormula reproduces it.
inline PrenexFormula to_prenex(const FormulaPtr& f) {
  std::set<std::string> claimed;
  for (const auto& [n, s] : *f->free_vars) claimed.insert(n);
  std::map<std::string, std::string> active;
  PrenexFormula out;
  auto renamed = detail::rename_apart(f, claimed, active, out.renames);
  auto e = detail::extract(renamed, /*positive=*/true);
  out.prefix.assign(e.prefix.begin(), e.prefix.end());
  out.matrix = e.matrix;
  return out;
}

}  // namespace tracelogic
