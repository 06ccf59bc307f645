#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tracelogic/algebra.hpp"
#include "tracelogic/formula.hpp"

namespace tracelogic {

// Exhaustive grid evaluator, deliberately independent of the stochastic
// optimizer: separate recursion, no caching, no shared search code.  Returns
// a rigorous two-sided error bound assembled from grid meshes and formula
// moduli.  Refuses instances whose total grid size exceeds the cap.
struct OracleBudget {
  int ball_axis = 9;       // lattice points per real axis of a ball coord
  int phase_points = 16;   // points per phase circle of a unitary coord
  double max_points = 4e6; // cap on the product of all grid sizes
};

struct OracleResult {
  double value = 0.0;
  double error_bound = 0.0;  // |value - true value| <= error_bound
  double total_points = 1.0;
};

namespace detail {

inline bool is_commutative(const TracialAlgebra& A) {
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(A.dim()));
  for (int i = 0; i < A.dim(); ++i) basis.push_back(A.unvecw(A.onb.col(i)));
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      if ((basis[i] * basis[j] - basis[j] * basis[i]).norm() > 1e-10)
        return false;
  return true;
}

// Minimal projections of a commutative algebra, via the spectral
// decomposition of a generic self-adjoint element.
inline std::vector<Mat> minimal_projections(const TracialAlgebra& A) {
  for (std::uint64_t attempt = 0; attempt < 12; ++attempt) {
    SplitMix64 rng(0x70726f6aULL + attempt);
    Mat h = random_selfadjoint(A, rng);
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const auto& ev = es.eigenvalues();
    std::vector<std::pair<double, std::vector<int>>> clusters;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (!clusters.empty() &&
          std::abs(ev[i] - clusters.back().first) < 1e-7 * (1.0 + std::abs(ev[i])))
        clusters.back().second.push_back(static_cast<int>(i));
      else
        clusters.push_back({ev[i], {static_cast<int>(i)}});
    }
    if (static_cast<int>(clusters.size()) != A.dim()) continue;
    std::vector<Mat> projs;
    bool ok = true;
    for (const auto& [val, idxs] : clusters) {
      Mat P = Mat::Zero(A.D, A.D);
      for (int i : idxs)
        P += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      if (!A.contains(P, 1e-7)) { ok = false; break; }
      projs.push_back(A.project(P));
    }
    if (ok) return projs;
  }
  throw NumericalFailure("could not split a commutative algebra into minimal projections");
}

struct GridVar {
  std::vector<Mat> points;
  double mesh = 0.0;  // d2 covering radius of the grid in the variable's domain
};

// Complex lattice on [-1,1]^2 clipped to the unit disc.  Clipping is the
// metric projection, so the covering radius is the lattice half-diagonal.
inline std::vector<cplx> disc_grid(int axis, double& mesh) {
  double delta = 2.0 / (axis - 1);
  mesh = delta / std::sqrt(2.0);
  std::vector<cplx> out;
  for (int i = 0; i < axis; ++i)
    for (int j = 0; j < axis; ++j) {
      cplx z(-1.0 + delta * i, -1.0 + delta * j);
      double a = std::abs(z);
      if (a > 1.0) z /= a;
      out.push_back(z);
    }
  return out;
}

inline GridVar make_grid(const TracialAlgebra& A,
                         const std::vector<Mat>& projs, Sort sort,
                         const OracleBudget& budget) {
  GridVar gv;
  const int dim = A.dim();
  if (!projs.empty()) {
    // Commutative: elements are sum_i z_i P_i and d2 offsets satisfy
    // ||sum dz_i P_i||_2 <= max_i |dz_i| because the traces of the
    // projections sum to 1.
    if (sort == Sort::Unitary) {
      int g = budget.phase_points;
      gv.mesh = 3.14159265358979323846 / g;
      std::vector<int> idx(static_cast<size_t>(dim), 0);
      for (;;) {
        Mat m = Mat::Zero(A.D, A.D);
        for (int k = 0; k < dim; ++k) {
          double th = 2.0 * 3.14159265358979323846 * idx[static_cast<size_t>(k)] / g;
          m += cplx(std::cos(th), std::sin(th)) * projs[static_cast<size_t>(k)];
        }
        gv.points.push_back(m);
        int k = 0;
        while (k < dim && ++idx[static_cast<size_t>(k)] == g) idx[static_cast<size_t>(k++)] = 0;
        if (k == dim) break;
      }
      return gv;
    }
    double mesh1 = 0.0;
    auto zs = disc_grid(budget.ball_axis, mesh1);
    gv.mesh = mesh1;
    std::vector<size_t> idx(static_cast<size_t>(dim), 0);
    for (;;) {
      Mat m = Mat::Zero(A.D, A.D);
      for (int k = 0; k < dim; ++k)
        m += zs[idx[static_cast<size_t>(k)]] * projs[static_cast<size_t>(k)];
      gv.points.push_back(m);
      int k = 0;
      while (k < dim && ++idx[static_cast<size_t>(k)] == zs.size()) idx[static_cast<size_t>(k++)] = 0;
      if (k == dim) break;
    }
    return gv;
  }

  // Noncommutative: coordinate lattice clipped to the operator-norm ball.
  // Requires uniform trace weights so the clip is the metric projection.
  if (sort == Sort::Unitary)
    throw OracleIneligible(
        "instance too large: unitary grids need a commutative algebra");
  double wmin = A.weights.minCoeff(), wmax = A.weights.maxCoeff();
  if (wmax - wmin > 1e-12)
    throw OracleIneligible(
        "instance too large: ball grids need uniform trace weights");
  int axis = budget.ball_axis;
  double delta = 2.0 / (axis - 1);
  gv.mesh = 0.5 * delta * std::sqrt(2.0 * dim);
  std::vector<int> idx(static_cast<size_t>(2 * dim), 0);
  for (;;) {
    Vec c(dim);
    for (int k = 0; k < dim; ++k)
      c[k] = cplx(-1.0 + delta * idx[static_cast<size_t>(2 * k)],
                  -1.0 + delta * idx[static_cast<size_t>(2 * k + 1)]);
    gv.points.push_back(clip_ball(A.from_coords(c)));
    int k = 0;
    while (k < 2 * dim && ++idx[static_cast<size_t>(k)] == axis) idx[static_cast<size_t>(k++)] = 0;
    if (k == 2 * dim) break;
  }
  return gv;
}

class Oracle {
 public:
  Oracle(const TracialAlgebra& A, const OracleBudget& budget)
      : A_(A), budget_(budget) {
    if (is_commutative(A)) projs_ = minimal_projections(A);
  }

  OracleResult run(const FormulaPtr& f,
                   const std::map<std::string, Mat>& assignment) {
    check_unique_binders(f);
    for (const auto& [n, s] : *f->free_vars) {
      auto it = assignment.find(n);
      if (it == assignment.end())
        throw ValidationError("assignment missing variable '" + n + "'");
      env_[n] = it->second;
    }

    // Eligibility: grids for every quantifier, total points within cap.
    double total = 1.0;
    plan_grids(f, total);
    if (total > budget_.max_points)
      throw OracleIneligible("instance too large for exhaustive evaluation (" +
                             std::to_string(total) + " grid points)");

    OracleResult res;
    res.total_points = total;
    res.value = eval(f);
    res.error_bound = error_of(f);
    if (!std::isfinite(res.value))
      throw NumericalFailure("oracle produced a non-finite value");
    return res;
  }

 private:
  // Predicted grid cardinality, without materializing anything.  Also
  // surfaces the structural ineligibility cases so oversized instances are
  // rejected before any allocation.
  double grid_size(Sort sort) const {
    const int dim = A_.dim();
    if (!projs_.empty())
      return std::pow(sort == Sort::Unitary
                          ? static_cast<double>(budget_.phase_points)
                          : static_cast<double>(budget_.ball_axis) *
                                budget_.ball_axis,
                      dim);
    if (sort == Sort::Unitary)
      throw OracleIneligible(
          "instance too large: unitary grids need a commutative algebra");
    double wmin = A_.weights.minCoeff(), wmax = A_.weights.maxCoeff();
    if (wmax - wmin > 1e-12)
      throw OracleIneligible(
          "instance too large: ball grids need uniform trace weights");
    return std::pow(static_cast<double>(budget_.ball_axis), 2 * dim);
  }

  void plan_grids(const FormulaPtr& f, double& total) {
    if (is_quantifier(f->kind)) total *= grid_size(f->var_sort);
    for (const auto& a : f->args) plan_grids(a, total);
  }

  Mat term_eval(const TermPtr& t) {
    switch (t->kind) {
      case TermKind::Var: return env_.at(t->name);
      case TermKind::One: return A_.identity();
      case TermKind::Zero: return Mat::Zero(A_.D, A_.D);
      case TermKind::Add: return term_eval(t->a) + term_eval(t->b);
      case TermKind::Mul: return term_eval(t->a) * term_eval(t->b);
      case TermKind::Adjoint: return term_eval(t->a).adjoint();
      case TermKind::Scale: return t->coef * term_eval(t->a);
    }
    throw ValidationError("oracle term: unreachable");
  }

  double eval(const FormulaPtr& f) {
    switch (f->kind) {
      case FormulaKind::Norm2: return A_.norm2(term_eval(f->t));
      case FormulaKind::Dist2:
        return A_.dist2(term_eval(f->t), term_eval(f->s));
      case FormulaKind::Const: return f->cval;
      case FormulaKind::Max: {
        double v = 0.0;
        for (const auto& a : f->args) v = std::max(v, eval(a));
        return v;
      }
      case FormulaKind::Min: {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& a : f->args) v = std::min(v, eval(a));
        return v;
      }
      case FormulaKind::Plus: return eval(f->args[0]) + eval(f->args[1]);
      case FormulaKind::DotMinus:
        return std::max(eval(f->args[0]) - eval(f->args[1]), 0.0);
      case FormulaKind::Sqrt:
        return std::sqrt(std::max(eval(f->args[0]), 0.0));
      case FormulaKind::Square: {
        double v = eval(f->args[0]);
        return v * v;
      }
      case FormulaKind::ScaleF: return f->cval * eval(f->args[0]);
      case FormulaKind::ApplyModulus: return f->mod(eval(f->args[0]));
      case FormulaKind::Sup:
      case FormulaKind::Inf: {
        const GridVar& gv = grid_for(f->var_sort);
        bool mx = f->kind == FormulaKind::Sup;
        double best = mx ? 0.0 : std::numeric_limits<double>::infinity();
        for (const Mat& p : gv.points) {
          env_[f->var] = p;
          double v = eval(f->args[0]);
          best = mx ? std::max(best, v) : std::min(best, v);
        }
        env_.erase(f->var);
        return best;
      }
    }
    throw ValidationError("oracle: unreachable");
  }

  // Rigorous error: how far the grid value can sit from the true value,
  // composed bottom-up.  Connectives are 1-Lipschitz or better in their
  // arguments except Sqrt (error sqrt(e)), Square (2 * bound * e), ScaleF
  // (c * e) and ApplyModulus (mod(e), by monotone subadditivity).  Each
  // quantifier adds its body modulus applied to the grid mesh.
  double error_of(const FormulaPtr& f) {
    switch (f->kind) {
      case FormulaKind::Norm2:
      case FormulaKind::Dist2:
      case FormulaKind::Const:
        return 0.0;
      case FormulaKind::Max:
      case FormulaKind::Min: {
        double e = 0.0;
        for (const auto& a : f->args) e = std::max(e, error_of(a));
        return e;
      }
      case FormulaKind::Plus:
      case FormulaKind::DotMinus:
        return error_of(f->args[0]) + error_of(f->args[1]);
      case FormulaKind::Sqrt:
        return std::sqrt(error_of(f->args[0]));
      case FormulaKind::Square:
        return 2.0 * f->args[0]->value_bound * error_of(f->args[0]);
      case FormulaKind::ScaleF:
        return f->cval * error_of(f->args[0]);
      case FormulaKind::ApplyModulus:
        return f->mod(error_of(f->args[0]));
      case FormulaKind::Sup:
      case FormulaKind::Inf: {
        const GridVar& gv = grid_for(f->var_sort);
        Modulus alpha = modulus_of(f->args[0], f->var);
        return error_of(f->args[0]) + alpha(gv.mesh);
      }
    }
    throw ValidationError("oracle error: unreachable");
  }

  // Grids depend only on the sort; materialized lazily after the
  // eligibility check, one per sort at most.
  const GridVar& grid_for(Sort sort) {
    auto& slot = sort == Sort::Unitary ? unitary_grid_ : ball_grid_;
    if (!slot) slot = make_grid(A_, projs_, sort, budget_);
    return *slot;
  }

  const TracialAlgebra& A_;
  OracleBudget budget_;
  std::vector<Mat> projs_;
  std::map<std::string, Mat> env_;
  std::optional<GridVar> ball_grid_, unitary_grid_;
};

}  // namespace detail

inline OracleResult evaluate_oracle(const FormulaPtr& f,
                                    const TracialAlgebra& A,
                                    const std::map<std::string, Mat>& assignment = {},
                                    const OracleBudget& budget = {}) {
  detail::Oracle o(A, budget);
  return o.run(f, assignment);
}

}  // namespace tracelogic
