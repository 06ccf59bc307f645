#include <catch2/catch_amalgamated.hpp>

#include "tracelogic/builders.hpp"
#include "tracelogic/commutant.hpp"
#include "tracelogic/evaluate.hpp"

using namespace tracelogic;

namespace {
Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace

TEST_CASE("quantifier-free evaluation is exact") {
  auto A = matrix_algebra(2);
  auto chi = build_chi("X", "U1", "U2");
  std::map<std::string, Mat> asg = {
      {"X", pauli_z()}, {"U1", pauli_x()}, {"U2", pauli_x()}};
  auto r = evaluate(chi, A, asg);
  // ||[sigma_z, sigma_x]||_2 = 2, so chi = 100 * (4 + 4).
  CHECK(r.value == Catch::Approx(800.0).epsilon(1e-12));
  CHECK(r.witnesses.empty());
  CHECK(r.gap_estimate == 0.0);

  auto mixed = f_dotminus(f_sqrt(chi), f_const(10.0));
  CHECK(evaluate(mixed, A, asg).value ==
        Catch::Approx(std::sqrt(800.0) - 10.0));
  auto clipped = f_dotminus(f_const(10.0), f_sqrt(chi));
  CHECK(evaluate(clipped, A, asg).value == 0.0);
}

TEST_CASE("assignment validation") {
  auto A = matrix_algebra(2);
  auto f = f_norm2(t_var("X", Sort::Ball));
  CHECK_THROWS_AS(evaluate(f, A, {}), ValidationError);
  // Extra names are rejected to catch typos.
  CHECK_THROWS_AS(
      evaluate(f, A, {{"X", pauli_x()}, {"Y", pauli_x()}}),
      ValidationError);
  // Ball-sorted variables must lie in the unit ball.
  CHECK_THROWS_AS(evaluate(f, A, {{"X", Mat(3.0 * pauli_x())}}),
                  ValidationError);
  // Unitary-sorted variables must be unitary.
  auto g = f_norm2(t_var("U", Sort::Unitary));
  CHECK_THROWS_AS(evaluate(g, A, {{"U", Mat(0.5 * pauli_x())}}),
                  ValidationError);
  // Assignments must lie inside the algebra.
  auto Z2 = group_algebra(cyclic_group(2));
  Mat off(2, 2);
  off << 0, 1, 0, 0;
  CHECK_THROWS_AS(evaluate(f, Z2, {{"X", off}}), ValidationError);
  // Non-finite entries are a numerical failure.
  Mat bad = pauli_x();
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(evaluate(f, A, {{"X", bad}}), NumericalFailure);
}

TEST_CASE("duplicate binders are rejected up front") {
  auto x = t_var("X", Sort::Ball);
  auto f = f_plus(f_sup("X", Sort::Ball, f_norm2(x)),
                  f_sup("X", Sort::Ball, f_norm2(x)));
  auto A = matrix_algebra(2);
  CHECK_THROWS_AS(evaluate(f, A), ValidationError);
}

TEST_CASE("an infimum with an attainable zero is found exactly") {
  auto A = matrix_algebra(2);
  // inf_Y || Y - X ||_2 with X assigned: the optimum Y = X gives zero, and
  // the canonical first restart plus polish reaches it on small algebras.
  auto f = f_inf("Y", Sort::Ball,
                 f_dist2(t_var("Y", Sort::Ball), t_var("X", Sort::Ball)));
  Mat target = 0.5 * pauli_x();
  auto r = evaluate(f, A, {{"X", target}});
  CHECK(r.value < 5e-3);
  // With a hint it is exact: the reported value is the matrix value at the
  // returned witness, and the hint is a candidate start.
  auto rh = evaluate(f, A, {{"X", target}}, {}, {{"Y", target}});
  CHECK(rh.value == 0.0);
  REQUIRE(rh.witnesses.size() == 1);
  CHECK(rh.witnesses[0].first == "Y");
  CHECK((rh.witnesses[0].second - target).norm() < 1e-12);
}

TEST_CASE("suprema respect the one-sided soundness contract") {
  auto A = matrix_algebra(2);
  auto f = f_sup("X", Sort::Ball, f_norm2(t_var("X", Sort::Ball)));
  auto r = evaluate(f, A);
  // Reported value is a true matrix value, hence a lower bound on the sup,
  // and the sup over the unit ball of ||X||_2 is 1.
  CHECK(r.value <= 1.0 + 1e-12);
  CHECK(r.value > 0.9);

  // Unitary-sorted search stays on the unitary manifold.
  auto g = f_sup("U", Sort::Unitary,
                 f_dist2(t_var("U", Sort::Unitary), t_one()));
  auto rg = evaluate(g, A);
  CHECK(rg.value <= 2.0 + 1e-12);
  CHECK(rg.value > 1.9);
  REQUIRE(rg.witnesses.size() == 1);
  CHECK(is_unitary(A, rg.witnesses[0].second, 1e-8));
}

TEST_CASE("witness replay reproduces the reported value exactly") {
  auto A = matrix_algebra(2);
  auto f = f_inf("U", Sort::Unitary,
                 f_sup("X", Sort::Ball,
                       f_dotminus(f_norm2(t_commutator(
                                      t_var("X", Sort::Ball),
                                      t_var("U", Sort::Unitary))),
                                  f_const(0.25))));
  EvalBudget small;
  small.restarts = 3;
  small.iters = 60;
  auto r = evaluate(f, A, {}, small);
  REQUIRE(r.witnesses.size() == 2);
  CHECK(r.witnesses[0].first == "U");
  CHECK(r.witnesses[1].first == "X");
  // Replay through a fully assigned evaluation.
  auto matrix = f_dotminus(
      f_norm2(t_commutator(t_var("X", Sort::Ball), t_var("U", Sort::Unitary))),
      f_const(0.25));
  auto replay = evaluate(matrix, A,
                         {{"U", r.witnesses[0].second},
                          {"X", r.witnesses[1].second}});
  CHECK(replay.value == r.value);
}

TEST_CASE("evaluation is deterministic in the seed") {
  auto A = group_algebra(cyclic_group(3));
  auto f = f_inf("U", Sort::Unitary,
                 f_sup("X", Sort::Ball,
                       f_norm2(t_commutator(t_var("X", Sort::Ball),
                                            t_var("U", Sort::Unitary)))));
  EvalBudget b;
  b.restarts = 3;
  b.iters = 50;
  b.seed = 42;
  auto r1 = evaluate(f, A, {}, b);
  auto r2 = evaluate(f, A, {}, b);
  CHECK(r1.value == r2.value);
  REQUIRE(r1.witnesses.size() == r2.witnesses.size());
  for (size_t i = 0; i < r1.witnesses.size(); ++i)
    CHECK((r1.witnesses[i].second - r2.witnesses[i].second).norm() == 0.0);

  b.seed = 43;
  auto r3 = evaluate(f, A, {}, b);
  // A different seed may land elsewhere but stays sound.
  CHECK(r3.value >= 0.0);
}

TEST_CASE("more budget never hurts") {
  auto A = matrix_algebra(2);
  // Minimization: a larger budget can only lower the reported value.
  auto f = f_inf("Y", Sort::Ball,
                 f_plus(f_dist2(t_var("Y", Sort::Ball), t_var("X", Sort::Ball)),
                        f_norm2(t_commutator(t_var("Y", Sort::Ball),
                                             t_var("X", Sort::Ball)))));
  std::map<std::string, Mat> asg = {{"X", Mat(0.4 * pauli_z() + 0.3 * pauli_x())}};
  EvalBudget small;
  small.restarts = 2;
  small.iters = 30;
  EvalBudget big = small;
  big.restarts = 5;
  big.iters = 120;
  auto rs = evaluate(f, A, asg, small);
  auto rb = evaluate(f, A, asg, big);
  CHECK(rb.value <= rs.value + 1e-12);
}

TEST_CASE("zero is recognized early on abelian instances") {
  auto A = group_algebra(direct_power(cyclic_group(2), 2));
  auto tau = build_tau_m(1);
  EvalBudget b;
  b.restarts = 2;
  b.iters = 40;
  auto r = evaluate(tau, A, {}, b);
  CHECK(r.value == 0.0);
  CHECK(r.witnesses.size() == 5);  // Va, Vb, X1, Y1, U along the best path
}

TEST_CASE("constrained minimization over a commutant via penalties") {
  auto A = matrix_algebra(2);
  // inf_X ||X - y||_2 + penalty(sqrt(chi(X, sigma_z, sigma_z))): the
  // penalty forces X toward the diagonal, so the optimum is the projection
  // of y onto the diagonal; with the projection supplied as a hint the
  // value is exact.
  auto x = t_var("X", Sort::Ball);
  auto y = t_var("YFIX", Sort::Ball);
  auto pen = f_apply_modulus(Modulus::linear(1.0),
                             f_sqrt(build_chi("X", "UZ1", "UZ2")));
  auto f = f_inf("X", Sort::Ball, f_plus(f_dist2(x, y), pen));
  Mat target = 0.3 * pauli_x() + 0.5 * pauli_z();
  Mat diag_part = 0.5 * pauli_z();
  std::map<std::string, Mat> asg = {
      {"YFIX", target}, {"UZ1", pauli_z()}, {"UZ2", pauli_z()}};
  auto r = evaluate(f, A, asg, {}, {{"X", diag_part}});
  // d(y, diagonal) = ||0.3 sigma_x||_2 = 0.3, and the penalty dominates the
  // distance to the diagonal, so the infimum is exactly 0.3.
  CHECK(r.value == Catch::Approx(0.3).margin(1e-9));
}
