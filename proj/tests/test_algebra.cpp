#include <catch2/catch_amalgamated.hpp>

#include "tracelogic/algebra.hpp"

using namespace tracelogic;

namespace {
Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat pauli_y() {
  Mat m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace

TEST_CASE("matrix algebras carry the normalized trace") {
  auto A = matrix_algebra(2);
  CHECK(A.D == 2);
  CHECK(A.dim() == 4);
  verify_algebra(A);
  CHECK(A.trace(A.identity()).real() == Catch::Approx(1.0));
  CHECK(A.norm2(pauli_x()) == Catch::Approx(1.0));
  CHECK(A.norm2(pauli_z()) == Catch::Approx(1.0));
  CHECK(std::abs(A.inner(pauli_x(), pauli_z())) < 1e-14);
  CHECK(A.dist2(pauli_x(), pauli_z()) == Catch::Approx(std::sqrt(2.0)));
  CHECK(A.contains(pauli_y()));
}

TEST_CASE("group algebras represent the group unitarily") {
  auto G = cyclic_group(4);
  auto A = group_algebra(G);
  CHECK(A.D == 4);
  CHECK(A.dim() == 4);
    verify_algebra(A);
  for (int g = 0; g < G.n; ++g) {
    Mat u = A.canonical_unitary(g);
    CHECK(is_unitary(A, u));
    CHECK(A.contains(u));
    for (int h = 0; h < G.n; ++h) {
      Mat prod = A.canonical_unitary(g) * A.canonical_unitary(h);
      CHECK((prod - A.canonical_unitary(G.mul(g, h))).norm() < 1e-12);
    }
  }
  // tau(u_g) = 0 off the identity.
  for (int g = 1; g < G.n; ++g)
    CHECK(std::abs(A.trace(A.canonical_unitary(g))) < 1e-14);
  auto S3 = symmetric_group(3);
  verify_algebra(group_algebra(S3));
}

TEST_CASE("tensor products multiply traces on elementary tensors") {
  auto M2 = matrix_algebra(2);
  auto T = tensor_algebra(M2, M2);
  CHECK(T.D == 4);
  CHECK(T.dim() == 16);
  verify_algebra(T);
  Mat a = pauli_z() + 0.5 * Mat::Identity(2, 2);
  Mat b = pauli_x() + 2.0 * Mat::Identity(2, 2);
  Mat ab = detail::kron(a, b);
  CHECK(T.contains(ab));
  CHECK(T.trace(ab).real() ==
        Catch::Approx((M2.trace(a) * M2.trace(b)).real()));
}

TEST_CASE("direct sums weight the traces") {
  auto M2 = matrix_algebra(2);
  auto M1 = matrix_algebra(1);
  auto S = direct_sum(M2, M1, 0.5, 0.5);
  CHECK(S.D == 3);
  CHECK(S.dim() == 5);
  verify_algebra(S);
  Mat p = Mat::Zero(3, 3);
  p(0, 0) = p(1, 1) = 1.0;  // identity of the first summand
  CHECK(S.contains(p));
  CHECK(S.trace(p).real() == Catch::Approx(0.5));
  CHECK_THROWS_AS(direct_sum(M2, M1, 0.7, 0.7), ValidationError);
}

TEST_CASE("weighted vectorization is an isometry") {
  auto G = cyclic_group(3);
  auto A = group_algebra(G);
  SplitMix64 rng(7);
  for (int k = 0; k < 5; ++k) {
    Mat x = random_element(A, rng);
    Mat y = random_element(A, rng);
    CHECK(A.norm2(x) == Catch::Approx(std::sqrt(A.trace(x.adjoint() * x).real())));
    cplx direct = A.trace(y.adjoint() * x);
    cplx viavec = A.vecw(y).dot(A.vecw(x));
    CHECK(std::abs(direct - viavec) < 1e-12);
    CHECK((A.unvecw(A.vecw(x)) - x).norm() < 1e-12);
  }
}

TEST_CASE("projection onto the algebra is idempotent and contractive") {
  auto M2 = matrix_algebra(2);
  auto T = tensor_algebra(M2, M2);
  // Build a strict subalgebra view: M2 tensor 1 inside M4.
  TracialAlgebra sub = T;
  Mat cols(16, 4);
  int c = 0;
  for (Mat s : {Mat(Mat::Identity(2, 2)), pauli_x(), pauli_y(), pauli_z()})
    cols.col(c++) = T.vecw(detail::kron(s, Mat::Identity(2, 2)));
  sub.onb = cols;
  Mat x = detail::kron(pauli_x(), pauli_z());
  Mat px = sub.project(x);
  // x has no component along the subalgebra.
  CHECK(sub.norm2(px) < 1e-12);
  Mat y = detail::kron(pauli_z(), Mat::Identity(2, 2)) + x;
  Mat py = sub.project(y);
  CHECK((py - detail::kron(pauli_z(), Mat::Identity(2, 2))).norm() < 1e-10);
  CHECK((sub.project(py) - py).norm() < 1e-12);
  CHECK(sub.norm2(py) <= sub.norm2(y) + 1e-12);
}

TEST_CASE("ball clipping truncates singular values") {
  auto A = matrix_algebra(3);
  SplitMix64 rng(11);
  for (int k = 0; k < 6; ++k) {
    Mat x = 2.0 * random_element(A, rng);
    Mat cx = clip_ball(x);
    CHECK(op_norm(cx) <= 1.0 + 1e-9);
    CHECK(A.contains(cx));
    // Elements already in the ball are fixed.
    CHECK((clip_ball(cx) - cx).norm() < 1e-8);
  }
  // Uniform-weight clip is 2-norm contractive.
  for (int k = 0; k < 4; ++k) {
    Mat x = 1.5 * random_element(A, rng);
    Mat y = 1.5 * random_element(A, rng);
    CHECK(A.dist2(clip_ball(x), clip_ball(y)) <= A.dist2(x, y) + 1e-9);
  }
}

TEST_CASE("reunitarization repairs small drift") {
  auto A = matrix_algebra(2);
  SplitMix64 rng(3);
  Mat u = random_unitary(A, rng);
  REQUIRE(is_unitary(A, u, 1e-12));
  Mat drifted = u + 1e-3 * random_element(A, rng);
  Mat fixed = reunitarize(drifted);
  CHECK((fixed.adjoint() * fixed - A.identity()).norm() < 1e-7);
  CHECK(A.contains(fixed));
}

TEST_CASE("random generators respect their constraints") {
  auto G = direct_power(cyclic_group(2), 2);
  auto A = group_algebra(G);
  SplitMix64 rng(21);
  for (int k = 0; k < 5; ++k) {
    Mat b = random_ball(A, rng);
    CHECK(op_norm(b) <= 1.0 + 1e-9);
    CHECK(A.contains(b));
    Mat u = random_unitary(A, rng);
    CHECK(is_unitary(A, u, 1e-10));
    CHECK(A.contains(u));
    Mat h = random_selfadjoint(A, rng);
    CHECK((h - h.adjoint()).norm() < 1e-12);
  }
}

TEST_CASE("size caps apply to algebra constructions") {
  CHECK_THROWS_AS(matrix_algebra(65), SizeCapError);
  auto M8 = matrix_algebra(8);
  CHECK_THROWS_AS(tensor_algebra(M8, matrix_algebra(9)), SizeCapError);
}
