#include <catch2/catch_amalgamated.hpp>

#include "tracelogic/builders.hpp"

using namespace tracelogic;

namespace {
std::vector<std::string> block_vars(const PrenexFormula& pf, size_t i) {
  std::vector<std::vector<std::string>> blocks;
  for (size_t k = 0; k < pf.prefix.size(); ++k) {
    if (k == 0 || pf.prefix[k].kind != pf.prefix[k - 1].kind)
      blocks.emplace_back();
    blocks.back().push_back(pf.prefix[k].var);
  }
  return blocks.at(i);
}
}  // namespace

TEST_CASE("chi is the scaled two-commutator defect") {
  auto chi = build_chi("X", "U1", "U2");
  CHECK(chi->value_bound == Catch::Approx(800.0));
  CHECK(chi->quantifier_free);
  REQUIRE(chi->free_vars->size() == 3);
  CHECK(chi->free_vars->at("X") == Sort::Ball);
  CHECK(chi->free_vars->at("U1") == Sort::Unitary);
  CHECK(modulus_of(chi, "X") == Modulus::linear(1600.0));
  CHECK(modulus_of(build_sqrt_chi(t_var("X", Sort::Ball),
                                  t_var("U1", Sort::Unitary),
                                  t_var("U2", Sort::Unitary)),
                   "X") == Modulus::root(40.0));
}

TEST_CASE("the separation margin evaluates to 1/600 at the defaults") {
  CHECK(compute_delta() == Catch::Approx(1.0 / 600.0).epsilon(1e-14));
  // General parameters: upsilon(t) = t^2, C = 2, m = 3.
  double d = compute_delta([](double t) { return t * t; }, 2.0, 3);
  CHECK(d == Catch::Approx(std::sqrt((1.0 / 144.0) / 180000.0)));
  CHECK_THROWS_AS(compute_delta([](double t) { return t; }, -1.0, 1),
                  ValidationError);
}

TEST_CASE("hat transforms attach the penalty with the right modulus") {
  auto psi = f_dist2(t_var("Z", Sort::Ball), t_var("W", Sort::Ball));
  auto hat = hat_transform(psi, "Z", t_var("V1", Sort::Unitary),
                           t_var("V2", Sort::Unitary), HatMode::Inf);
  CHECK(hat->kind == FormulaKind::Inf);
  CHECK(hat->var == "Z");
  REQUIRE(hat->args[0]->kind == FormulaKind::Plus);
  auto pen = hat->args[0]->args[1];
  REQUIRE(pen->kind == FormulaKind::ApplyModulus);
  CHECK(pen->mod == Modulus::linear(1.0));

  auto sup = hat_transform(psi, "Z", t_var("V1", Sort::Unitary),
                           t_var("V2", Sort::Unitary), HatMode::Sup);
  CHECK(sup->kind == FormulaKind::Sup);
  CHECK(sup->args[0]->kind == FormulaKind::DotMinus);

  CHECK_THROWS_AS(hat_transform(psi, "Q", t_var("V1", Sort::Unitary),
                                t_var("V2", Sort::Unitary), HatMode::Inf),
                  ValidationError);
}

TEST_CASE("the compression sentence has the documented shape") {
  auto tau = build_tau_m(2);
  CHECK(tau->kind == FormulaKind::Inf);  // begins with an Inf over Va
  CHECK(tau->free_vars->empty());        // a sentence
  auto pf = to_prenex(tau);
  CHECK(alternation_count(pf) == 3);
  CHECK(pf.prefix[0].kind == Quant::Inf);
  CHECK(block_vars(pf, 0) == std::vector<std::string>{"Va", "Vb"});
  CHECK(block_vars(pf, 1) ==
        std::vector<std::string>{"X1", "X2", "Y1", "Y2"});
  CHECK(block_vars(pf, 2) == std::vector<std::string>{"U"});
  CHECK(pf.prefix[2].sort == Sort::Ball);
  CHECK(pf.prefix.back().sort == Sort::Unitary);

  // The value is bounded by 2: commutators of ball elements.
  CHECK(tau->value_bound == Catch::Approx(2.0));
  CHECK_THROWS_AS(build_tau_m(0), ValidationError);
}

TEST_CASE("good-pair and comparison sentences bind tagged variables") {
  auto good = build_phi_good("P", "Q", "tag");
  auto pf = to_prenex(good);
  REQUIRE(pf.prefix.size() == 2);
  CHECK(pf.prefix[0] == QuantifierEntry{Quant::Sup, Sort::Ball, "Xgtag"});
  CHECK(pf.prefix[1] == QuantifierEntry{Quant::Inf, Sort::Ball, "Ygtag"});
  CHECK(good->free_vars->size() == 2);

  auto leq = build_phi_leq({t_var("A", Sort::Ball), t_var("P", Sort::Unitary)},
                           t_var("U1", Sort::Unitary),
                           t_var("U2", Sort::Unitary), "t2");
  auto pl = to_prenex(leq);
  REQUIRE(pl.prefix.size() == 1);
  CHECK(pl.prefix[0].var == "Xlet2");
  CHECK(leq->free_vars->count("A") == 1);
  CHECK_THROWS_AS(build_phi_leq({}, t_var("U1", Sort::Unitary),
                                t_var("U2", Sort::Unitary)),
                  ValidationError);
}

TEST_CASE("zeta exposes its hat penalty modulus") {
  auto z = build_zeta("x", t_var("U1a", Sort::Unitary),
                      t_var("U1b", Sort::Unitary),
                      t_var("U2a", Sort::Unitary),
                      t_var("U2b", Sort::Unitary));
  CHECK(z->free_vars->size() == 5);
  CHECK(z->free_vars->count("x_zw") == 0);
  REQUIRE(z->kind == FormulaKind::Plus);
  auto hat = z->args[1];
  REQUIRE(hat->kind == FormulaKind::Sqrt);
  auto sup = hat->args[0];
  REQUIRE(sup->kind == FormulaKind::Sup);
  CHECK(sup->var == "x_zw");
  auto body = sup->args[0];
  REQUIRE(body->kind == FormulaKind::DotMinus);
  auto pen = body->args[1];
  REQUIRE(pen->kind == FormulaKind::ApplyModulus);
  // psi(x, Y) moves 2-Lipschitz in Y, so the penalty modulus is 2t.
  CHECK(pen->mod == Modulus::linear(2.0));
}

TEST_CASE("relativization preserves the quantifier prefix") {
  auto u1a = t_var("W1a", Sort::Unitary);
  auto u1b = t_var("W1b", Sort::Unitary);
  auto u2a = t_var("W2a", Sort::Unitary);
  auto u2b = t_var("W2b", Sort::Unitary);

  auto tau = build_tau_m(1);
  auto pf = to_prenex(tau);
  auto rel = relativize(pf, u1a, u1b, u2a, u2b);
  CHECK(rel.prefix == pf.prefix);
  // The new free variables are exactly the two pairs.
  CHECK(rel.to_formula()->free_vars->size() == 4);
  // Every quantifier gained a penalty: the matrix grew.
  CHECK(rel.matrix->node_count > pf.matrix->node_count);

  // Unitary-sorted binders keep their sort.
  for (size_t i = 0; i < rel.prefix.size(); ++i)
    CHECK(rel.prefix[i].sort == pf.prefix[i].sort);
}

TEST_CASE("relativization drops vacuous quantifiers") {
  PrenexFormula pf;
  pf.prefix.push_back({Quant::Sup, Sort::Ball, "Dead"});
  pf.prefix.push_back({Quant::Inf, Sort::Ball, "Z"});
  pf.matrix = f_norm2(t_var("Z", Sort::Ball));
  auto rel = relativize(pf, t_var("W1a", Sort::Unitary),
                        t_var("W1b", Sort::Unitary),
                        t_var("W2a", Sort::Unitary),
                        t_var("W2b", Sort::Unitary));
  REQUIRE(rel.prefix.size() == 1);
  CHECK(rel.prefix[0].var == "Z");
}

TEST_CASE("alternation depth of the nested hierarchy grows by four") {
  // theta_{m,1} is tau_m with three blocks; each further level wraps the
  // relativized sentence in one new Inf/Sup/Inf layer and the merge fuses
  // like kinds, adding exactly four blocks per level.
  std::vector<int> counts;
  for (int n = 1; n <= 3; ++n) {
    auto th = build_theta(1, n);
    auto pf = to_prenex(th);
    counts.push_back(alternation_count(pf));
    CHECK(pf.prefix[0].kind == Quant::Inf);
    CHECK(pf.prefix.back().kind == Quant::Inf);
  }
  CHECK(counts == std::vector<int>{3, 7, 11});
  // Blocks alternate strictly between Inf and Sup, so the count is odd at
  // every level: prefixes both start and end with Inf.
  for (int c : counts) CHECK(c % 2 == 1);
}

TEST_CASE("the hierarchy at level two references both pairs") {
  auto th = build_theta(1, 2);
  CHECK(th->free_vars->empty());
  auto pf = to_prenex(th);
  // Outermost block: the first candidate pair.
  CHECK(block_vars(pf, 0) ==
        std::vector<std::string>{"U1a.2", "U1b.2"});
  // The second pair is chosen after the adversary's A.
  auto second = block_vars(pf, 2);
  CHECK(std::find(second.begin(), second.end(), "U2a.2") != second.end());
  CHECK(std::find(second.begin(), second.end(), "U2b.2") != second.end());
}
