#pragma once

#include <chrono>
#include <ctime>
#include <string>

#include "tracelogic/oracle.hpp"
#include "tracelogic/serialize.hpp"

namespace tracelogic {

// Paired evaluation of tau_m on two tracial algebras built from the same
// base group: the abelian power Gamma^k (where tau_m vanishes identically)
// and the wreath product Gamma wr S_k (where the permutation unitaries are
// available to separate near-commuting tuples).  Identical budgets and seeds
// on both sides.  The returned report is bit-reproducible except for the
// fields listed under "volatile_fields".
inline json run_t0_t1_experiment(const FiniteGroup& base, int k, int m,
                                 const EvalBudget& budget) {
  auto wall_start = std::chrono::steady_clock::now();

  FiniteGroup g0 = direct_power(base, k);
  FiniteGroup g1 = wreath_product(base, k);
  TracialAlgebra a0 = group_algebra(g0);
  TracialAlgebra a1 = group_algebra(g1);

  FormulaPtr tau = build_tau_m(m);

  EvalResult r0 = evaluate(tau, a0, {}, budget);
  EvalResult r1 = evaluate(tau, a1, {}, budget);

  // How close the winning inner unitary sits to a canonical group unitary.
  json unitary_analysis;
  for (const auto& [name, w] : r1.witnesses) {
    if (name != "U") continue;
    int best_g = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int g = 0; g < g1.n; ++g) {
      double d = a1.dist2(w, a1.canonical_unitary(g));
      if (d < best_d) {
        best_d = d;
        best_g = g;
      }
    }
    unitary_analysis = {{"nearest_group_element", best_g},
                        {"distance", best_d},
                        {"element_order", element_order(g1, best_g)}};
    break;
  }

  double wall = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - wall_start)
                    .count();
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));

  auto side = [&](const TracialAlgebra& A, const FiniteGroup& G,
                  const EvalResult& r) {
    return json{{"algebra", A.spec},
                {"group_order", G.n},
                {"abelian", is_abelian(G)},
                {"value", r.value},
                {"gap_estimate", r.gap_estimate},
                {"matrix_evals", r.matrix_evals}};
  };

  return json{
      {"kind", "t0_t1_experiment"},
      {"base_group", base.name},
      {"k", k},
      {"m", m},
      {"seed", budget.seed},
      {"budget",
       {{"restarts", budget.restarts},
        {"iters", budget.iters},
        {"child_restarts", budget.child_restarts},
        {"child_iters", budget.child_iters},
        {"warm_iters", budget.warm_iters}}},
      {"t0", side(a0, g0, r0)},
      {"t1", side(a1, g1, r1)},
      {"separation", r1.value - r0.value},
      {"delta_reference", compute_delta()},
      {"separates_at_delta", r1.value - r0.value >= compute_delta()},
      {"witness_unitary_analysis", unitary_analysis},
      {"timestamp", stamp},
      {"wall_seconds", wall},
      {"volatile_fields", json::array({"timestamp", "wall_seconds"})}};
}

}  // namespace tracelogic
