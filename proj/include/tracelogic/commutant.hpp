#pragma once

#include <limits>
#include <vector>

#include "tracelogic/algebra.hpp"

namespace tracelogic {

// Smallest unital *-subalgebra containing the generators.  Exact: spans are
// grown by basis products until stable.  The result shares D and weights
// with the ambient algebra, so conditional expectations compose.
inline TracialAlgebra generated_subalgebra(const TracialAlgebra& A,
                                           const std::vector<Mat>& gens) {
  for (const Mat& g : gens)
    if (!A.contains(g))
      throw ValidationError("generator is not in the ambient algebra");
  TracialAlgebra S;
  S.D = A.D;
  S.weights = A.weights;
  S.spec = "W*(" + A.spec + " gens)";

  std::vector<Mat> seed;
  seed.push_back(A.identity());
  for (const Mat& g : gens) {
    seed.push_back(g);
    seed.push_back(g.adjoint());
  }
  S.onb = detail::orthonormalize(S, seed);

  for (;;) {
    int before = S.dim();
    std::vector<Mat> basis;
    basis.reserve(static_cast<size_t>(before));
    for (int i = 0; i < before; ++i) basis.push_back(S.unvecw(S.onb.col(i)));
    std::vector<Mat> extended = basis;
    for (const Mat& x : basis)
      for (const Mat& y : basis) extended.push_back(x * y);
    S.onb = detail::orthonormalize(S, extended);
    if (S.dim() == before) break;
  }
  return S;
}

// Elements of A commuting with every matrix in `constraints` (exact
// nullspace computation in coordinates).
inline TracialAlgebra commutant(const TracialAlgebra& A,
                                const std::vector<Mat>& constraints) {
  const int dim = A.dim();
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) basis.push_back(A.unvecw(A.onb.col(i)));

  const Eigen::Index N = static_cast<Eigen::Index>(A.D) * A.D;
  Mat M(static_cast<Eigen::Index>(constraints.size()) * N, dim);
  for (size_t s = 0; s < constraints.size(); ++s)
    for (int k = 0; k < dim; ++k)
      M.block(static_cast<Eigen::Index>(s) * N, k, N, 1) =
          A.vecw(basis[static_cast<size_t>(k)] * constraints[s] -
                 constraints[s] * basis[static_cast<size_t>(k)]);

  TracialAlgebra C;
  C.D = A.D;
  C.weights = A.weights;
  C.spec = "C(" + A.spec + ")";
  if (constraints.empty()) {
    C.onb = A.onb;
    return C;
  }

  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double scale = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankTol * std::max(1.0, scale)) ++rank;
  Mat null = svd.matrixV().rightCols(dim - rank);
  C.onb = A.onb * null;
  return C;
}

// C({u1, u2})' relative data: N = C(second)' ∩ C(first) inside A, i.e. all
// x in A with [x, c] = 0 for every c commuting with `second` and [x, t] = 0
// for every t in `first`.
inline TracialAlgebra relative_commutant(const TracialAlgebra& A,
                                         const std::vector<Mat>& second,
                                         const std::vector<Mat>& first) {
  TracialAlgebra Cs = commutant(A, second);
  std::vector<Mat> constraints;
  constraints.reserve(static_cast<size_t>(Cs.dim()) + first.size());
  for (int i = 0; i < Cs.dim(); ++i)
    constraints.push_back(Cs.unvecw(Cs.onb.col(i)));
  for (const Mat& t : first) constraints.push_back(t);
  TracialAlgebra N = commutant(A, constraints);
  N.spec = "N(" + A.spec + ")";
  return N;
}

inline TracialAlgebra center(const TracialAlgebra& A) {
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(A.dim()));
  for (int i = 0; i < A.dim(); ++i) basis.push_back(A.unvecw(A.onb.col(i)));
  TracialAlgebra Z = commutant(A, basis);
  Z.spec = "Z(" + A.spec + ")";
  return Z;
}

// Trace-preserving conditional expectation onto a subalgebra with the same
// ambient representation: the orthogonal projection in the d2 geometry.
inline Mat conditional_expectation(const TracialAlgebra& A,
                                   const TracialAlgebra& B, const Mat& x) {
  if (B.D != A.D || (B.weights - A.weights).norm() > 1e-12)
    throw ValidationError("subalgebra has a different ambient trace");
  return B.project(x);
}

inline double dist_to_subalgebra(const TracialAlgebra& A,
                                 const TracialAlgebra& B, const Mat& x) {
  return A.dist2(x, conditional_expectation(A, B, x));
}

// Spectral-gap certificate for a pair of unitaries.  lambda is the smallest
// eigenvalue of the quadratic form chi(z) = c * sum_i ||[z, u_i]||_2^2
// compressed to the orthocomplement of the pair's commutant; equivalently
// the best constant with chi(z) >= lambda * d2(z, commutant)^2.  The pair is
// good when lambda >= 1.  If the commutant is everything, the bound is
// vacuous and lambda = +infinity.
struct GoodPairReport {
  double lambda = 0.0;
  bool good = false;
  bool vacuous = false;
  double c = 100.0;
  int p = 2;
  int algebra_dim = 0;
  int commutant_dim = 0;
};

inline GoodPairReport is_good_pair(const TracialAlgebra& A, const Mat& u1,
                                   const Mat& u2, double c = 100.0,
                                   int p = 2) {
  if (p != 2)
    throw ValidationError("only the p = 2 spectral certificate is implemented");
  if (!(c > 0.0)) throw ValidationError("good pair constant must be positive");
  for (const Mat* u : {&u1, &u2}) {
    if (!A.contains(*u))
      throw ValidationError("good pair candidate is not in the algebra");
    if (!is_unitary(A, *u))
      throw ValidationError("good pair candidate is not unitary");
  }

  GoodPairReport rep;
  rep.c = c;
  rep.p = p;
  rep.algebra_dim = A.dim();

  TracialAlgebra C = commutant(A, {u1, u2});
  rep.commutant_dim = C.dim();
  if (C.dim() == A.dim()) {
    rep.vacuous = true;
    rep.good = true;
    rep.lambda = std::numeric_limits<double>::infinity();
    return rep;
  }

  const int dim = A.dim();
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(dim));
  for (int i = 0; i < dim; ++i) basis.push_back(A.unvecw(A.onb.col(i)));

  Mat T1(dim, dim), T2(dim, dim);
  for (int k = 0; k < dim; ++k) {
    T1.col(k) = A.coords(basis[static_cast<size_t>(k)] * u1 -
                          u1 * basis[static_cast<size_t>(k)]);
    T2.col(k) = A.coords(basis[static_cast<size_t>(k)] * u2 -
                          u2 * basis[static_cast<size_t>(k)]);
  }
  Mat M = c * (T1.adjoint() * T1 + T2.adjoint() * T2);

  // Orthonormal basis of the commutant's orthocomplement in coordinates.
  Mat Ccoords = A.onb.adjoint() * C.onb;  // dim x dimC, isometric
  Mat P = Mat::Identity(dim, dim) - Ccoords * Ccoords.adjoint();
  Eigen::JacobiSVD<Mat> svd(P, Eigen::ComputeThinU);
  Mat K(dim, dim - C.dim());
  {
    int c2 = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 0.5) K.col(c2++) = svd.matrixU().col(i);
    if (c2 != dim - C.dim())
      throw NumericalFailure("complement dimension mismatch");
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(K.adjoint() * M * K);
  rep.lambda = es.eigenvalues()[0];
  rep.good = rep.lambda >= 1.0 - 1e-9;
  return rep;
}

}  // namespace tracelogic
