#pragma once

#include <memory>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "tracelogic/common.hpp"
#include "tracelogic/group.hpp"

namespace tracelogic {

inline constexpr double kRankTol = 1e-10;

// A finite-dimensional tracial *-algebra, represented concretely: a linear
// subspace of D x D complex matrices containing 1, closed under products and
// adjoints, with a faithful tracial state tau(x) = sum_j w_j x_jj.
//
// The inner product <x,y> = tau(y* x) is realized by the weighted
// vectorization vecw(x)_{i + D j} = sqrt(w_j) x_{ij}; `onb` holds a
// weighted-orthonormal basis of the subspace as its columns, so coordinate
// maps are isometries and projections are exact.
struct TracialAlgebra {
  int D = 0;
  Eigen::VectorXd weights;  // positive, sums to 1
  Mat onb;                  // (D*D) x dim
  std::string spec;         // human-readable construction string

  std::shared_ptr<const FiniteGroup> group;  // group algebras only
  std::vector<Mat> group_units;              // canonical unitaries u_g

  int dim() const { return static_cast<int>(onb.cols()); }

  Vec vecw(const Mat& x) const {
    Vec v(static_cast<Eigen::Index>(D) * D);
    for (int j = 0; j < D; ++j) {
      double s = std::sqrt(weights[j]);
      for (int i = 0; i < D; ++i) v[i + static_cast<Eigen::Index>(D) * j] = s * x(i, j);
    }
    return v;
  }

  Mat unvecw(const Vec& v) const {
    Mat x(D, D);
    for (int j = 0; j < D; ++j) {
      double s = 1.0 / std::sqrt(weights[j]);
      for (int i = 0; i < D; ++i) x(i, j) = s * v[i + static_cast<Eigen::Index>(D) * j];
    }
    return x;
  }

  cplx trace(const Mat& x) const {
    cplx t = 0.0;
    for (int j = 0; j < D; ++j) t += weights[j] * x(j, j);
    return t;
  }

  cplx inner(const Mat& x, const Mat& y) const {  // <x, y> = tau(y* x)
    return trace(y.adjoint() * x);
  }

  double norm2(const Mat& x) const { return vecw(x).norm(); }
  double dist2(const Mat& x, const Mat& y) const { return norm2(x - y); }

  Vec coords(const Mat& x) const { return onb.adjoint() * vecw(x); }
  Mat from_coords(const Vec& c) const { return unvecw(onb * c); }

  // Orthogonal projection onto the subspace.
  Mat project(const Mat& x) const { return from_coords(coords(x)); }

  bool contains(const Mat& x, double tol = 1e-8) const {
    return dist2(project(x), x) <= tol * (1.0 + norm2(x));
  }

  Mat identity() const { return Mat::Identity(D, D); }

  Mat canonical_unitary(int g) const {
    if (!group) throw ValidationError("algebra has no underlying group");
    if (g < 0 || g >= group->n)
      throw ValidationError("group element index out of range");
    return group_units[static_cast<size_t>(g)];
  }
};

namespace detail {

// Modified Gram-Schmidt (with one reorthogonalization pass) over weighted
// vectorizations.  Deterministic in the input order.
inline Mat orthonormalize(const TracialAlgebra& shell,
                          const std::vector<Mat>& spanning) {
  const Eigen::Index N = static_cast<Eigen::Index>(shell.D) * shell.D;
  Mat onb(N, 0);
  for (const Mat& m : spanning) {
    Vec v = shell.vecw(m);
    double orig = v.norm();
    if (orig <= kRankTol) continue;
    for (int pass = 0; pass < 2; ++pass)
      if (onb.cols() > 0) v -= onb * (onb.adjoint() * v);
    if (v.norm() <= kRankTol * (1.0 + orig)) continue;
    v.normalize();
    onb.conservativeResize(Eigen::NoChange, onb.cols() + 1);
    onb.col(onb.cols() - 1) = v;
  }
  return onb;
}

}  // namespace detail

// Full matrix algebra M_k with its normalized trace.
inline TracialAlgebra matrix_algebra(int k) {
  if (k < 1) throw ValidationError("matrix algebra needs k >= 1");
  if (k > size_cap())
    throw SizeCapError("matrix dimension exceeds size cap");
  TracialAlgebra A;
  A.D = k;
  A.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  A.spec = "M" + std::to_string(k);
  // Basis sqrt(k) E_ij is weighted-orthonormal; its vectorization is a
  // 0/1 pattern, one unit entry per column.
  const Eigen::Index N = static_cast<Eigen::Index>(k) * k;
  A.onb = Mat::Zero(N, N);
  Eigen::Index c = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      A.onb(i + static_cast<Eigen::Index>(k) * j, c++) = 1.0;
  return A;
}

// Group von Neumann algebra of a finite group: the left regular
// representation inside M_{|G|} with its canonical trace.
inline TracialAlgebra group_algebra(const FiniteGroup& G) {
  if (G.n > size_cap())
    throw SizeCapError("group algebra dimension exceeds size cap");
  TracialAlgebra A;
  A.D = G.n;
  A.weights = Eigen::VectorXd::Constant(G.n, 1.0 / G.n);
  A.spec = "L(" + G.name + ")";
  A.group = std::make_shared<FiniteGroup>(G);
  A.group_units.reserve(static_cast<size_t>(G.n));
  const Eigen::Index N = static_cast<Eigen::Index>(G.n) * G.n;
  A.onb = Mat::Zero(N, G.n);
  for (int g = 0; g < G.n; ++g) {
    Mat u = Mat::Zero(G.n, G.n);
    for (int h = 0; h < G.n; ++h) u(G.mul(g, h), h) = 1.0;
    A.group_units.push_back(u);
    A.onb.col(g) = A.vecw(u);  // u_g are weighted-orthonormal
  }
  return A;
}

namespace detail {

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace detail

// Tensor product with the product trace.
inline TracialAlgebra tensor_algebra(const TracialAlgebra& A,
                                     const TracialAlgebra& B) {
  if (static_cast<long>(A.D) * B.D > size_cap())
    throw SizeCapError("tensor dimension exceeds size cap");
  TracialAlgebra T;
  T.D = A.D * B.D;
  T.weights.resize(T.D);
  for (int i = 0; i < A.D; ++i)
    for (int j = 0; j < B.D; ++j)
      T.weights[i * B.D + j] = A.weights[i] * B.weights[j];
  T.spec = "(" + A.spec + ")x(" + B.spec + ")";
  const Eigen::Index N = static_cast<Eigen::Index>(T.D) * T.D;
  T.onb.resize(N, static_cast<Eigen::Index>(A.dim()) * B.dim());
  Eigen::Index c = 0;
  for (int i = 0; i < A.dim(); ++i) {
    Mat ba = A.unvecw(A.onb.col(i));
    for (int j = 0; j < B.dim(); ++j) {
      Mat bb = B.unvecw(B.onb.col(j));
      T.onb.col(c++) = T.vecw(detail::kron(ba, bb));
    }
  }
  return T;
}

// Direct sum with trace wa * tau_A ⊕ wb * tau_B, wa + wb = 1.
inline TracialAlgebra direct_sum(const TracialAlgebra& A,
                                 const TracialAlgebra& B, double wa,
                                 double wb) {
  if (!(wa > 0.0) || !(wb > 0.0) || std::abs(wa + wb - 1.0) > 1e-12)
    throw ValidationError("direct sum weights must be positive and sum to 1");
  if (A.D + B.D > size_cap())
    throw SizeCapError("direct sum dimension exceeds size cap");
  TracialAlgebra S;
  S.D = A.D + B.D;
  S.weights.resize(S.D);
  S.weights.head(A.D) = wa * A.weights;
  S.weights.tail(B.D) = wb * B.weights;
  S.spec = "(" + A.spec + ")+(" + B.spec + ")";
  const Eigen::Index N = static_cast<Eigen::Index>(S.D) * S.D;
  S.onb.resize(N, A.dim() + B.dim());
  Eigen::Index c = 0;
  for (int i = 0; i < A.dim(); ++i) {
    Mat m = Mat::Zero(S.D, S.D);
    m.topLeftCorner(A.D, A.D) = A.unvecw(A.onb.col(i));
    // Embedded blocks pick up a weight factor; renormalize.
    S.onb.col(c++) = S.vecw(m) / std::sqrt(wa);
  }
  for (int i = 0; i < B.dim(); ++i) {
    Mat m = Mat::Zero(S.D, S.D);
    m.bottomRightCorner(B.D, B.D) = B.unvecw(B.onb.col(i));
    S.onb.col(c++) = S.vecw(m) / std::sqrt(wb);
  }
  return S;
}

// Structural sanity: 1 in the span, *-closure, product closure, tracial
// property, weighted orthonormality.  Heavy (dim^2 products); used by tests
// and at construction time for externally supplied data.
inline void verify_algebra(const TracialAlgebra& A, double tol = 1e-8) {
  if (A.D < 1 || A.dim() < 1) throw ValidationError("empty algebra");
  if (A.weights.size() != A.D) throw ValidationError("weight size mismatch");
  if (A.weights.minCoeff() <= 0.0)
    throw ValidationError("trace weights must be positive");
  if (std::abs(A.weights.sum() - 1.0) > 1e-9)
    throw ValidationError("trace weights must sum to 1");
  Mat gram = A.onb.adjoint() * A.onb;
  if ((gram - Mat::Identity(A.dim(), A.dim())).norm() > tol)
    throw ValidationError("basis is not orthonormal");
  if (!A.contains(A.identity(), tol))
    throw ValidationError("algebra does not contain 1");
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(A.dim()));
  for (int i = 0; i < A.dim(); ++i) basis.push_back(A.unvecw(A.onb.col(i)));
  for (const Mat& b : basis)
    if (!A.contains(b.adjoint(), tol))
      throw ValidationError("algebra is not *-closed");
  for (const Mat& x : basis)
    for (const Mat& y : basis) {
      Mat p = x * y;
      if (!A.contains(p, tol))
        throw ValidationError("algebra is not closed under products");
      if (std::abs(A.trace(p) - A.trace(y * x)) > tol)
        throw ValidationError("trace is not tracial");
    }
}

// --- element generation and hygiene -----------------------------------------

// Gaussian element of the algebra (no norm constraint).
inline Mat random_element(const TracialAlgebra& A, SplitMix64& rng) {
  Vec c(A.dim());
  for (int i = 0; i < A.dim(); ++i)
    c[i] = cplx(rng.next_normal(), rng.next_normal());
  return A.from_coords(c);
}

inline Mat random_selfadjoint(const TracialAlgebra& A, SplitMix64& rng) {
  Mat z = random_element(A, rng);
  return 0.5 * (z + Mat(z.adjoint()));
}

// Metric clip onto the operator-norm unit ball: x -> x g(x* x) with
// g(s) = min(1, 1/sqrt(s)).  Stays inside the algebra (continuous functional
// calculus of an algebra element) and equals singular value truncation.
inline Mat clip_ball(const Mat& x) {
  Eigen::SelfAdjointEigenSolver<Mat> es(x.adjoint() * x);
  Eigen::VectorXd g = es.eigenvalues().cwiseMax(1.0).cwiseSqrt().cwiseInverse();
  return x * es.eigenvectors() * g.asDiagonal() *
         es.eigenvectors().adjoint();
}

inline double op_norm(const Mat& x) {
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues()[0];
}

// Two Newton-Schulz steps pull a near-unitary back to the unitary manifold
// without leaving the algebra (polynomial in u, u*).
inline Mat reunitarize(const Mat& u) {
  Mat v = u;
  for (int k = 0; k < 3; ++k)
    v = 0.5 * (3.0 * v - v * v.adjoint() * v);
  return v;
}

inline Mat random_ball(const TracialAlgebra& A, SplitMix64& rng) {
  return clip_ball(random_element(A, rng));
}

inline Mat random_unitary(const TracialAlgebra& A, SplitMix64& rng,
                          double spread = 1.0) {
  Mat H = random_selfadjoint(A, rng);
  Mat u = (cplx(0.0, spread) * H).exp();
  return reunitarize(u);
}

inline bool is_unitary(const TracialAlgebra& A, const Mat& u,
                       double tol = 1e-8) {
  return (u.adjoint() * u - A.identity()).norm() <= tol * A.D;
}

}  // namespace tracelogic
