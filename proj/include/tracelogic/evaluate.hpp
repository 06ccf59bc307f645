#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tracelogic/algebra.hpp"
#include "tracelogic/formula.hpp"

namespace tracelogic {

// Budgets for the stochastic quantifier optimizer.  Nested (non-root) blocks
// run attenuated schedules: a cold solve explores briefly, warm re-solves
// continue from the block's previous best point within the same restart.
// Step sizes decay geometrically per iteration at a fixed rate, so a longer
// schedule extends a shorter one and extra budget can never hurt.
struct EvalBudget {
  int restarts = 8;
  int iters = 200;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;  // improvement below this feeds the stall counter
  int stall_limit = 48;     // stalled iterations before a run stops early

  int child_restarts = 2;   // cold nested solves
  int child_iters = 60;
  int warm_iters = 24;      // warm nested re-solves

  double init_step = 0.5;
  double step_decay = 0.985;
  double min_step = 1e-3;

  int polish_dim_cap = 48;  // compass polish at the root when the block's
                            // real dimension is at most this
};

struct EvalResult {
  double value = 0.0;
  // Bound-variable witnesses in evaluation order (outermost first; branches
  // in traversal order).  Replaying them through the formula reproduces
  // `value` exactly: the reported value IS the matrix value at these
  // witnesses, not the optimizer's running estimate.
  std::vector<std::pair<std::string, Mat>> witnesses;
  // Spread among the top three restart outcomes of the outermost block
  // optimizations.  Diagnostic only; never a verified bound.
  double gap_estimate = 0.0;
  std::uint64_t seed = 0;
  long matrix_evals = 0;
};

namespace detail {

// Free/bound variable masks over the formula's name universe (cap 256).
struct Mask {
  std::uint64_t w[4] = {0, 0, 0, 0};
  void set(int i) { w[i >> 6] |= (1ULL << (i & 63)); }
  bool subset_of(const Mask& o) const {
    for (int k = 0; k < 4; ++k)
      if (w[k] & ~o.w[k]) return false;
    return true;
  }
  void unite(const Mask& o) {
    for (int k = 0; k < 4; ++k) w[k] |= o.w[k];
  }
};

inline void collect_names(const FormulaPtr& f,
                          std::map<std::string, Sort>& out) {
  for (const auto& [n, s] : *f->free_vars) {
    auto [it, ins] = out.emplace(n, s);
    if (!ins && it->second != s)
      throw ValidationError("variable '" + n + "' used with two sorts");
  }
  if (is_quantifier(f->kind)) {
    auto [it, ins] = out.emplace(f->var, f->var_sort);
    if (!ins && it->second != f->var_sort)
      throw ValidationError("variable '" + f->var + "' used with two sorts");
  }
  for (const auto& a : f->args) collect_names(a, out);
}

struct EvalNode {
  double v = 0.0;
  std::vector<std::pair<std::string, Mat>> w;
};

class Evaluator {
 public:
  Evaluator(const FormulaPtr& f, const TracialAlgebra& A,
            const std::map<std::string, Mat>& assignment,
            const EvalBudget& budget, const std::map<std::string, Mat>& hints)
      : root_(f), A_(A), budget_(budget), hints_(hints) {
    if (budget.restarts < 1 || budget.iters < 1 ||
        budget.child_restarts < 1 || budget.child_iters < 1 ||
        budget.warm_iters < 1)
      throw ValidationError("evaluation budget must be positive");
    check_unique_binders(f);

    std::map<std::string, Sort> names;
    collect_names(f, names);
    int idx = 0;
    for (const auto& [n, s] : names) {
      if (idx >= 256) throw ValidationError("too many variables (cap 256)");
      name_bit_[n] = idx++;
    }

    for (const auto& [n, s] : *f->free_vars) {
      auto it = assignment.find(n);
      if (it == assignment.end())
        throw ValidationError("assignment missing variable '" + n + "'");
      validate_element(it->second, s, n);
      env_[n] = it->second;
    }
    for (const auto& [n, m] : assignment)
      if (!f->free_vars->count(n))
        throw ValidationError("assignment has extra variable '" + n + "'");
    for (const auto& [n, m] : hints) {
      auto it = names.find(n);
      if (it == names.end() || f->free_vars->count(n))
        throw ValidationError("hint '" + n + "' is not a bound variable");
      validate_element(m, it->second, n);
    }

    Mask base;
    for (const auto& [n, s] : *f->free_vars) base.set(bit(n));
    caches_.push_back(CacheLevel{base, {}, {}});
  }

  EvalResult run() {
    EvalNode out = eval(root_, 0, 0x746c65ull);
    EvalResult res;
    res.witnesses = out.w;
    res.seed = budget_.seed;
    res.gap_estimate = gap_;
    res.matrix_evals = evals_;
    // Exact replay at the chosen witnesses; this is the reported value.
    size_t cursor = 0;
    res.value = replay(root_, out.w, cursor);
    if (cursor != out.w.size())
      throw NumericalFailure("witness replay out of sync");
    if (!std::isfinite(res.value))
      throw NumericalFailure("evaluation produced a non-finite value");
    return res;
  }

 private:
  struct CacheLevel {
    Mask fixed;
    std::unordered_map<const TermNode*, Mat> terms;
    std::unordered_map<const FormulaNode*, double> formulas;
  };

  struct BlockVar {
    std::string name;
    Sort sort;
  };

  int bit(const std::string& n) const { return name_bit_.at(n); }

  const Mask& mask_of_term(const TermPtr& t) {
    auto it = tmask_.find(t.get());
    if (it != tmask_.end()) return it->second;
    Mask m;
    for (const auto& [n, s] : *t->free_vars) m.set(bit(n));
    return tmask_.emplace(t.get(), m).first->second;
  }

  const Mask& mask_of_formula(const FormulaPtr& f) {
    auto it = fmask_.find(f.get());
    if (it != fmask_.end()) return it->second;
    Mask m;
    for (const auto& [n, s] : *f->free_vars) m.set(bit(n));
    return fmask_.emplace(f.get(), m).first->second;
  }

  void validate_element(const Mat& m, Sort s, const std::string& n) const {
    if (m.rows() != A_.D || m.cols() != A_.D)
      throw ValidationError("matrix for '" + n + "' has the wrong shape");
    if (!m.allFinite())
      throw NumericalFailure("matrix for '" + n + "' is not finite");
    if (!A_.contains(m))
      throw ValidationError("matrix for '" + n + "' is not in the algebra");
    if (s == Sort::Unitary) {
      if (!is_unitary(A_, m))
        throw ValidationError("matrix for '" + n + "' is not unitary");
    } else if (op_norm(m) > 1.0 + 1e-6) {
      throw ValidationError("matrix for '" + n + "' exceeds the unit ball");
    }
  }

  // --- cached term / quantifier-free evaluation ------------------------------

  CacheLevel* cache_for(const Mask& m) {
    for (auto& lvl : caches_)
      if (m.subset_of(lvl.fixed)) return &lvl;
    return nullptr;  // depends on the block currently being optimized
  }

  Mat term_value(const TermPtr& t) {
    CacheLevel* lvl = cache_for(mask_of_term(t));
    if (lvl) {
      auto it = lvl->terms.find(t.get());
      if (it != lvl->terms.end()) return it->second;
    }
    Mat v;
    switch (t->kind) {
      case TermKind::Var: v = env_.at(t->name); break;
      case TermKind::One: v = A_.identity(); break;
      case TermKind::Zero: v = Mat::Zero(A_.D, A_.D); break;
      case TermKind::Add: v = term_value(t->a) + term_value(t->b); break;
      case TermKind::Mul: v = term_value(t->a) * term_value(t->b); break;
      case TermKind::Adjoint: v = term_value(t->a).adjoint(); break;
      case TermKind::Scale: v = t->coef * term_value(t->a); break;
    }
    if (lvl) lvl->terms.emplace(t.get(), v);
    return v;
  }

  // --- recursive evaluation ---------------------------------------------------

  EvalNode eval(const FormulaPtr& f, int depth, std::uint64_t path) {
    switch (f->kind) {
      case FormulaKind::Norm2:
        return {A_.norm2(term_value(f->t)), {}};
      case FormulaKind::Dist2:
        return {A_.dist2(term_value(f->t), term_value(f->s)), {}};
      case FormulaKind::Const:
        return {f->cval, {}};
      case FormulaKind::Sup:
      case FormulaKind::Inf:
        return solve_block(f, depth, path);
      default: {
        // Quantifier-free subformulas with pinned variables are cacheable.
        CacheLevel* lvl = nullptr;
        if (f->quantifier_free) {
          lvl = cache_for(mask_of_formula(f));
          if (lvl) {
            auto it = lvl->formulas.find(f.get());
            if (it != lvl->formulas.end()) return {it->second, {}};
          }
        }
        EvalNode out;
        switch (f->kind) {
          case FormulaKind::Max:
          case FormulaKind::Min: {
            bool mx = f->kind == FormulaKind::Max;
            out.v = mx ? 0.0 : std::numeric_limits<double>::infinity();
            for (size_t i = 0; i < f->args.size(); ++i) {
              EvalNode c = eval(f->args[i], depth,
                                hash_combine(path, 900 + i));
              out.v = mx ? std::max(out.v, c.v) : std::min(out.v, c.v);
              append(out.w, std::move(c.w));
            }
            break;
          }
          case FormulaKind::Plus:
          case FormulaKind::DotMinus: {
            EvalNode a = eval(f->args[0], depth, hash_combine(path, 910));
            EvalNode b = eval(f->args[1], depth, hash_combine(path, 911));
            out.v = f->kind == FormulaKind::Plus
                        ? a.v + b.v
                        : std::max(a.v - b.v, 0.0);
            out.w = std::move(a.w);
            append(out.w, std::move(b.w));
            break;
          }
          case FormulaKind::Sqrt: {
            EvalNode a = eval(f->args[0], depth, hash_combine(path, 912));
            out.v = std::sqrt(std::max(a.v, 0.0));
            out.w = std::move(a.w);
            break;
          }
          case FormulaKind::Square: {
            EvalNode a = eval(f->args[0], depth, hash_combine(path, 913));
            out.v = a.v * a.v;
            out.w = std::move(a.w);
            break;
          }
          case FormulaKind::ScaleF: {
            EvalNode a = eval(f->args[0], depth, hash_combine(path, 914));
            out.v = f->cval * a.v;
            out.w = std::move(a.w);
            break;
          }
          case FormulaKind::ApplyModulus: {
            EvalNode a = eval(f->args[0], depth, hash_combine(path, 915));
            out.v = f->mod(a.v);
            out.w = std::move(a.w);
            break;
          }
          default:
            throw ValidationError("eval: unreachable");
        }
        if (!std::isfinite(out.v))
          throw NumericalFailure("evaluation produced a non-finite value");
        if (lvl) lvl->formulas.emplace(f.get(), out.v);
        return out;
      }
    }
  }

  static void append(std::vector<std::pair<std::string, Mat>>& dst,
                     std::vector<std::pair<std::string, Mat>>&& src) {
    for (auto& x : src) dst.push_back(std::move(x));
  }

  // --- block optimization -----------------------------------------------------

  EvalNode solve_block(const FormulaPtr& f, int depth, std::uint64_t path) {
    const bool is_sup = f->kind == FormulaKind::Sup;

    std::vector<BlockVar> vars;
    FormulaPtr body = f;
    while (is_quantifier(body->kind) &&
           (body->kind == FormulaKind::Sup) == is_sup) {
      vars.push_back({body->var, body->var_sort});
      path = hash_combine(path, hash_str(body->var));
      body = body->args[0];
    }

    // Warm state: best point from this block's previous solve within the
    // same restart chain (cleared between root restarts).
    auto& warm = warm_[f.get()];
    const bool warm_start = depth > 0 && warm.size() == vars.size();

    int restarts = depth == 0 ? budget_.restarts
                   : warm_start ? 1
                                : budget_.child_restarts;
    int iters = depth == 0 ? budget_.iters
                : warm_start ? budget_.warm_iters
                             : budget_.child_iters;

    double best_v = is_sup ? -1.0 : std::numeric_limits<double>::infinity();
    std::vector<Mat> best_point;
    EvalNode best_inner;
    std::vector<double> restart_values;

    for (int r = 0; r < restarts; ++r) {
      SplitMix64 rng(derive_seed(path, r));
      std::vector<Mat> point = init_point(vars, depth, r, warm_start, warm, rng);
      EvalNode inner;
      double v = optimize(vars, body, point, inner, depth, path, iters,
                          is_sup, rng);
      restart_values.push_back(v);
      if (better(is_sup, v, best_v)) {
        best_v = v;
        best_point = point;
        best_inner = std::move(inner);
      }
      // Values are nonnegative: an inf that reached 0 cannot improve.
      if (!is_sup && best_v <= 1e-12) break;
      if (is_sup && best_v >= f->value_bound - 1e-12) break;
    }

    if (depth == 0) {
      std::sort(restart_values.begin(), restart_values.end());
      if (is_sup) std::reverse(restart_values.begin(), restart_values.end());
      size_t k = std::min<size_t>(3, restart_values.size());
      if (k >= 2)
        gap_ = std::max(gap_, std::abs(restart_values[0] -
                                       restart_values[k - 1]));
    }

    warm = best_point;

    EvalNode out;
    out.v = best_v;
    for (size_t i = 0; i < vars.size(); ++i)
      out.w.emplace_back(vars[i].name, best_point[i]);
    append(out.w, std::move(best_inner.w));
    return out;
  }

  static bool better(bool is_sup, double v, double best) {
    return is_sup ? v > best : v < best;
  }

  std::uint64_t derive_seed(std::uint64_t path, int r) const {
    return hash_combine(hash_combine(budget_.seed, path),
                        0xd1b54a32d192ed03ULL * static_cast<std::uint64_t>(r + 1));
  }

  std::vector<Mat> init_point(const std::vector<BlockVar>& vars, int depth,
                              int r, bool warm_start,
                              const std::vector<Mat>& warm, SplitMix64& rng) {
    std::vector<Mat> point;
    point.reserve(vars.size());
    if (warm_start && r == 0) return warm;
    if (depth == 0 && r == 0) {
      for (const auto& v : vars)
        point.push_back(v.sort == Sort::Unitary ? A_.identity()
                                                : Mat::Zero(A_.D, A_.D));
      return point;
    }
    if (depth == 0 && r == 1 && !hints_.empty()) {
      bool any = false;
      for (const auto& v : vars)
        if (hints_.count(v.name)) any = true;
      if (any) {
        for (const auto& v : vars) {
          auto it = hints_.find(v.name);
          if (it != hints_.end())
            point.push_back(it->second);
          else
            point.push_back(v.sort == Sort::Unitary ? A_.identity()
                                                    : Mat::Zero(A_.D, A_.D));
        }
        return point;
      }
    }
    for (const auto& v : vars)
      point.push_back(v.sort == Sort::Unitary ? random_unitary(A_, rng)
                                              : random_ball(A_, rng));
    return point;
  }

  // Objective: pin the block's variables, evaluate the body (which may spawn
  // nested solves), count one matrix evaluation.
  double objective(const std::vector<BlockVar>& vars,
                   const std::vector<Mat>& point, const FormulaPtr& body,
                   EvalNode& inner, int depth, std::uint64_t path) {
    for (size_t i = 0; i < vars.size(); ++i) env_[vars[i].name] = point[i];
    Mask fixed = caches_.back().fixed;
    for (const auto& v : vars) fixed.set(bit(v.name));
    caches_.push_back(CacheLevel{fixed, {}, {}});
    ++evals_;
    EvalNode n = eval(body, depth + 1, hash_combine(path, 1));
    caches_.pop_back();
    inner = std::move(n);
    return inner.v;
  }

  double optimize(const std::vector<BlockVar>& vars, const FormulaPtr& body,
                  std::vector<Mat>& point, EvalNode& inner, int depth,
                  std::uint64_t path, int iters, bool is_sup,
                  SplitMix64& rng) {
    EvalNode cur_inner;
    double cur = objective(vars, point, body, cur_inner, depth, path);
    inner = cur_inner;

    double step = budget_.init_step;
    int stall = 0;
    for (int t = 0; t < iters; ++t) {
      size_t vi = vars.size() == 1
                      ? 0
                      : static_cast<size_t>(rng.next_u64() % vars.size());
      Mat saved = point[vi];
      point[vi] = perturb(point[vi], vars[vi].sort, step, rng);
      EvalNode cand_inner;
      double cand = objective(vars, point, body, cand_inner, depth, path);
      if (better(is_sup, cand, cur)) {
        if (std::abs(cand - cur) < budget_.tolerance)
          ++stall;
        else
          stall = 0;
        cur = cand;
        inner = std::move(cand_inner);
      } else {
        point[vi] = saved;
        ++stall;
      }
      step = std::max(step * budget_.step_decay, budget_.min_step);
      if (stall >= budget_.stall_limit) break;
      if (!is_sup && cur <= 1e-12) break;
      if (is_sup && cur >= body->value_bound - 1e-12) break;
    }

    if (depth == 0 && block_real_dim(vars) <= budget_.polish_dim_cap)
      cur = polish(vars, body, point, inner, depth, path, is_sup, cur);

    // Re-pin the final point so nested warm states saw the best point last.
    EvalNode final_inner;
    double fin = objective(vars, point, body, final_inner, depth, path);
    if (better(is_sup, fin, cur) || fin == cur) {
      cur = fin;
      inner = std::move(final_inner);
    }
    return cur;
  }

  int block_real_dim(const std::vector<BlockVar>& vars) const {
    return static_cast<int>(vars.size()) * 2 * A_.dim();
  }

  Mat perturb(const Mat& x, Sort sort, double step, SplitMix64& rng) {
    if (sort == Sort::Unitary) {
      Mat H = random_selfadjoint(A_, rng);
      double n = A_.norm2(H);
      if (n > 1e-14) H *= step / n;
      return reunitarize((A_.identity() + cplx(0.0, 1.0) * H) * x);
    }
    Vec c(A_.dim());
    for (int i = 0; i < A_.dim(); ++i)
      c[i] = cplx(rng.next_normal(), rng.next_normal());
    Mat d = A_.from_coords(c);
    double n = A_.norm2(d);
    if (n > 1e-14) d *= step / n;
    return clip_ball(x + d);
  }

  // Deterministic compass sweeps along basis directions, root blocks only.
  double polish(const std::vector<BlockVar>& vars, const FormulaPtr& body,
                std::vector<Mat>& point, EvalNode& inner, int depth,
                std::uint64_t path, bool is_sup, double cur) {
    double step = 0.1;
    for (int sweep = 0; sweep < 40 && step >= 5e-4; ++sweep) {
      bool improved = false;
      for (size_t vi = 0; vi < vars.size(); ++vi) {
        for (int k = 0; k < A_.dim(); ++k) {
          for (int part = 0; part < 2; ++part) {
            Vec dir = Vec::Zero(A_.dim());
            dir[k] = part == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0);
            Mat d = A_.from_coords(dir);
            for (double sgn : {1.0, -1.0}) {
              Mat saved = point[vi];
              if (vars[vi].sort == Sort::Unitary) {
                Mat H = 0.5 * (d + Mat(d.adjoint()));
                double n = A_.norm2(H);
                if (n < 1e-14) continue;
                H *= sgn * step / n;
                point[vi] =
                    reunitarize((A_.identity() + cplx(0.0, 1.0) * H) * saved);
              } else {
                point[vi] = clip_ball(saved + sgn * step * d);
              }
              EvalNode cand_inner;
              double cand = objective(vars, point, body, cand_inner, depth,
                                      path);
              if (better(is_sup, cand, cur)) {
                cur = cand;
                inner = std::move(cand_inner);
                improved = true;
              } else {
                point[vi] = saved;
              }
            }
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return cur;
  }

  // Exact value at the recorded witnesses: a single deterministic pass, no
  // optimization, consuming the witness list in evaluation order.
  double replay(const FormulaPtr& f,
                const std::vector<std::pair<std::string, Mat>>& w,
                size_t& cursor) {
    switch (f->kind) {
      case FormulaKind::Norm2:
        return A_.norm2(replay_term(f->t));
      case FormulaKind::Dist2:
        return A_.dist2(replay_term(f->t), replay_term(f->s));
      case FormulaKind::Const:
        return f->cval;
      case FormulaKind::Sup:
      case FormulaKind::Inf: {
        if (cursor >= w.size() || w[cursor].first != f->var)
          throw NumericalFailure("witness replay out of sync");
        env_[f->var] = w[cursor].second;
        ++cursor;
        return replay(f->args[0], w, cursor);
      }
      case FormulaKind::Max: {
        double v = 0.0;
        for (const auto& a : f->args) v = std::max(v, replay(a, w, cursor));
        return v;
      }
      case FormulaKind::Min: {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& a : f->args) v = std::min(v, replay(a, w, cursor));
        return v;
      }
      case FormulaKind::Plus: {
        double a = replay(f->args[0], w, cursor);
        double b = replay(f->args[1], w, cursor);
        return a + b;
      }
      case FormulaKind::DotMinus: {
        double a = replay(f->args[0], w, cursor);
        double b = replay(f->args[1], w, cursor);
        return std::max(a - b, 0.0);
      }
      case FormulaKind::Sqrt:
        return std::sqrt(std::max(replay(f->args[0], w, cursor), 0.0));
      case FormulaKind::Square: {
        double a = replay(f->args[0], w, cursor);
        return a * a;
      }
      case FormulaKind::ScaleF:
        return f->cval * replay(f->args[0], w, cursor);
      case FormulaKind::ApplyModulus:
        return f->mod(replay(f->args[0], w, cursor));
    }
    throw ValidationError("replay: unreachable");
  }

  Mat replay_term(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Var: return env_.at(t->name);
      case TermKind::One: return A_.identity();
      case TermKind::Zero: return Mat::Zero(A_.D, A_.D);
      case TermKind::Add: return replay_term(t->a) + replay_term(t->b);
      case TermKind::Mul: return replay_term(t->a) * replay_term(t->b);
      case TermKind::Adjoint: return replay_term(t->a).adjoint();
      case TermKind::Scale: return t->coef * replay_term(t->a);
    }
    throw ValidationError("replay_term: unreachable");
  }

  FormulaPtr root_;
  const TracialAlgebra& A_;
  EvalBudget budget_;
  std::map<std::string, Mat> hints_;
  std::map<std::string, Mat> env_;
  std::map<std::string, int> name_bit_;
  std::unordered_map<const TermNode*, Mask> tmask_;
  std::unordered_map<const FormulaNode*, Mask> fmask_;
  std::unordered_map<const FormulaNode*, std::vector<Mat>> warm_;
  std::vector<CacheLevel> caches_;
  double gap_ = 0.0;
  long evals_ = 0;
};

}  // namespace detail

// Numerically evaluate a formula over a tracial algebra.  `assignment`
// supplies every free variable; `hints` optionally seed bound variables at
// the root blocks (one dedicated restart).  Deterministic in (formula,
// algebra, assignment, budget, hints); independent restarts are reduced in
// index order, and seeds derive from (budget.seed, block path, restart
// index) so enlarging the budget only extends the search.
inline EvalResult evaluate(const FormulaPtr& f, const TracialAlgebra& A,
                           const std::map<std::string, Mat>& assignment = {},
                           const EvalBudget& budget = {},
                           const std::map<std::string, Mat>& hints = {}) {
  detail::Evaluator ev(f, A, assignment, budget, hints);
  return ev.run();
}

}  // namespace tracelogic
