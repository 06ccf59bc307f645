// A guided tour of the library: build a sentence, look at it, push it through
// the prenexer, and evaluate it over a few concrete algebras.
//
// Everything here runs in a couple of seconds; it is meant to be read
// alongside the README.

#include <cstdio>

#include "tracelogic/tracelogic.hpp"

using namespace tracelogic;

int main() {
  // ---- 1. The commutation functional ---------------------------------------
  //
  // chi(X; U1, U2) = 100 (||[X,U1]||_2^2 + ||[X,U2]||_2^2), a quantifier-free
  // formula with three free variables.
  auto chi = build_chi("X", "U1", "U2");
  std::printf("chi as LaTeX:\n  %s\n\n", to_latex(chi).c_str());

  // Evaluate it exactly in the 2x2 matrix algebra at X = sz, U1 = U2 = sx.
  // [sz, sx] = 2i sy has normalized squared 2-norm 4, so the value is 800.
  auto M2 = matrix_algebra(2);
  Mat sx = (Mat(2, 2) << 0, 1, 1, 0).finished();
  Mat sz = (Mat(2, 2) << 1, 0, 0, -1).finished();
  auto r = evaluate(chi, M2, {{"X", sz}, {"U1", sx}, {"U2", sx}});
  std::printf("chi(sz; sx, sx) over M2 = %.1f\n\n", r.value);

  // ---- 2. Quantifiers and prenex form ---------------------------------------
  //
  // tau_m packs the whole "some near-commuting pair stays far from every
  // conjugated candidate" game into one sentence.  The prenexer pulls its
  // quantifiers to the front; the alternation count is what transfers to
  // ultraproducts.
  auto tau = build_tau_m(1);
  auto pf = to_prenex(tau);
  std::printf("tau_1 prenexed: %d quantifier blocks:\n",
              alternation_count(pf));
  for (const auto& q : pf.prefix)
    std::printf("  %s %s : %s\n", q.kind == Quant::Inf ? "inf" : "sup",
                q.var.c_str(), sort_name(q.sort));
  std::printf("\n");

  // ---- 3. Group algebras and the t0/t1 contrast ----------------------------
  //
  // Over the abelian L(Z2 x Z2) the commutator game is unwinnable for the
  // sup player and tau_1 evaluates to exactly zero.  Over the wreath product
  // L(Z2 wr S2) (dihedral of order 8) the permutation unitary separates the
  // near-commuting pair and the value comes out positive.
  EvalBudget quick;
  quick.restarts = 2;
  quick.iters = 40;
  quick.child_restarts = 1;
  quick.child_iters = 20;
  quick.warm_iters = 10;
  quick.seed = 7;

  auto t0 = group_algebra(direct_power(cyclic_group(2), 2));
  auto t1 = group_algebra(wreath_product(cyclic_group(2), 2));
  auto r0 = evaluate(tau, t0, {}, quick);
  auto r1 = evaluate(tau, t1, {}, quick);
  std::printf("tau_1 over %s = %.6f\n", t0.spec.c_str(), r0.value);
  std::printf("tau_1 over %s = %.6f\n\n", t1.spec.c_str(), r1.value);

  // ---- 4. Spectral-gap certificates -----------------------------------------
  //
  // (sx, sz) generate M2 and nothing commutes with both except scalars, with
  // a quantitative gap: the certificate constant lambda is exactly 400 here.
  auto rep = is_good_pair(M2, sx, sz);
  std::printf("(sx, sz) in M2: good pair = %s, lambda = %.1f\n\n",
              rep.good ? "yes" : "no", rep.lambda);

  // ---- 5. Oracle cross-check -------------------------------------------------
  //
  // Commutative algebras admit an exhaustive grid oracle with a rigorous
  // error bound.  inf_Y d(Y, a) over the ball of L(Z2) should be ~0.
  auto Z2 = group_algebra(cyclic_group(2));
  auto f = f_inf("Y", Sort::Ball,
                 f_dist2(t_var("Y", Sort::Ball), t_var("a", Sort::Ball)));
  Mat a = 0.5 * Z2.canonical_unitary(1);
  auto ores = evaluate_oracle(f, Z2, {{"a", a}});
  std::printf("oracle: inf_Y d(Y,a) over L(Z2) = %.6f (+/- %.2e, %g pts)\n",
              ores.value, ores.error_bound, ores.total_points);

  // ---- 6. The separation threshold ------------------------------------------
  //
  // The headline inequality needs a concrete epsilon; compute_delta() derives
  // the default one (1/600) from the moduli of the sentences involved.
  std::printf("delta = %.10f (= 1/600)\n", compute_delta());
  return 0;
}
