#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "tracelogic/prenex.hpp"

namespace tracelogic {

// chi(x; u1, u2) = 100 * (||[x,u1]||_2^2 + ||[x,u2]||_2^2).
// Small chi certifies x nearly commutes with the pair; for a good pair this
// upgrades to a distance bound to the relative commutant.
inline FormulaPtr build_chi(TermPtr x, TermPtr u1, TermPtr u2) {
  auto c1 = f_square(f_norm2(t_commutator(x, std::move(u1))));
  auto c2 = f_square(f_norm2(t_commutator(std::move(x), std::move(u2))));
  return f_scale(100.0, f_plus(std::move(c1), std::move(c2)));
}

inline FormulaPtr build_chi(const std::string& x, const std::string& u1,
                            const std::string& u2) {
  return build_chi(t_var(x, Sort::Ball), t_var(u1, Sort::Unitary),
                   t_var(u2, Sort::Unitary));
}

// sqrt(chi(x; u1, u2)), the form the penalties use.
inline FormulaPtr build_sqrt_chi(TermPtr x, TermPtr u1, TermPtr u2) {
  return f_sqrt(build_chi(std::move(x), std::move(u1), std::move(u2)));
}

enum class HatMode { Inf, Sup };

// Constrained-quantifier relaxation: replaces "Q x in the relative commutant
// of (u1,u2)" by an unconstrained quantifier with a modulus-weighted penalty,
//
//   hat-inf:  inf_x  [ psi + alpha(sqrt(chi(x; u1, u2))) ]
//   hat-sup:  sup_x  [ psi - alpha(sqrt(chi(x; u1, u2))) ]   (truncated)
//
// where alpha is the modulus of psi in x.  For a pair with commutant
// spectral gap >= 1, sqrt(chi(x)) dominates d2(x, commutant), so both
// directions of the usual quantification argument go through.
inline FormulaPtr hat_transform(FormulaPtr psi, const std::string& x,
                                TermPtr u1, TermPtr u2, HatMode mode) {
  if (!psi->free_vars->count(x))
    throw ValidationError("hat_transform: '" + x + "' is not free in psi");
  if (psi->free_vars->at(x) != Sort::Ball)
    throw ValidationError("hat_transform: '" + x + "' must be a ball variable");
  Modulus alpha = modulus_of(psi, x);
  auto penalty = f_apply_modulus(
      alpha, build_sqrt_chi(t_var(x, Sort::Ball), std::move(u1), std::move(u2)));
  FormulaPtr body = mode == HatMode::Inf
                        ? f_plus(std::move(psi), std::move(penalty))
                        : f_dotminus(std::move(psi), std::move(penalty));
  return mode == HatMode::Inf ? f_inf(x, Sort::Ball, std::move(body))
                              : f_sup(x, Sort::Ball, std::move(body));
}

// psi_m(va, vb) = sup_{X1..Xm, Y1..Ym} [
//     ( inf_U max_{i,j} ||[U Xi U*, Yj]||_2 )  ∸  2 max_i sqrt(chi(Xi; va, vb)) ]
//
// Large psi_m witnesses an m-tuple that stays spread out under every inner
// unitary conjugation while nearly commuting with (va, vb).
inline FormulaPtr build_psi_m(int m, const std::string& va,
                              const std::string& vb) {
  if (m < 1) throw ValidationError("psi_m needs m >= 1");
  auto U = t_var("U", Sort::Unitary);
  std::vector<FormulaPtr> comms;
  std::vector<FormulaPtr> penalties;
  for (int i = 1; i <= m; ++i) {
    auto Xi = t_var("X" + std::to_string(i), Sort::Ball);
    auto moved = t_conjugate(U, Xi);
    for (int j = 1; j <= m; ++j) {
      auto Yj = t_var("Y" + std::to_string(j), Sort::Ball);
      comms.push_back(f_norm2(t_commutator(moved, Yj)));
    }
    penalties.push_back(build_sqrt_chi(Xi, t_var(va, Sort::Unitary),
                                       t_var(vb, Sort::Unitary)));
  }
  auto inner = f_inf("U", Sort::Unitary, f_max(std::move(comms)));
  auto penalty = f_scale(2.0, f_max(std::move(penalties)));
  auto body = f_dotminus(std::move(inner), std::move(penalty));
  for (int i = m; i >= 1; --i)
    body = f_sup("Y" + std::to_string(i), Sort::Ball, std::move(body));
  for (int i = m; i >= 1; --i)
    body = f_sup("X" + std::to_string(i), Sort::Ball, std::move(body));
  return body;
}

// tau_m = inf_{Va, Vb} psi_m(Va, Vb).  Vanishes exactly on algebras where
// every near-commuting m-tuple can be compressed together by an inner
// unitary; positive values detect the opposite behavior.
inline FormulaPtr build_tau_m(int m) {
  return f_inf("Va", Sort::Unitary,
               f_inf("Vb", Sort::Unitary, build_psi_m(m, "Va", "Vb")));
}

// phi_good(u1, u2) = sup_X inf_Y max( ||[Y,u1]||_2, ||[Y,u2]||_2,
//                                     d(X,Y) ∸ sqrt(chi(X; u1, u2)) ).
//
// Zero iff every X nearly commuting with the pair is d2-close to an exact
// commutant element Y: the sentence-level certificate that (u1, u2) is a
// good pair.  `tag` suffixes the bound variable names so multiple copies
// coexist in one sentence without relying on automatic renaming.
inline FormulaPtr build_phi_good(TermPtr u1, TermPtr u2,
                                 const std::string& tag = "") {
  std::string xn = "Xg" + tag, yn = "Yg" + tag;
  auto X = t_var(xn, Sort::Ball);
  auto Y = t_var(yn, Sort::Ball);
  auto clause = f_max({f_norm2(t_commutator(Y, u1)),
                       f_norm2(t_commutator(Y, u2)),
                       f_dotminus(f_dist2(X, Y), build_sqrt_chi(X, u1, u2))});
  return f_sup(xn, Sort::Ball, f_inf(yn, Sort::Ball, std::move(clause)));
}

inline FormulaPtr build_phi_good(const std::string& u1, const std::string& u2,
                                 const std::string& tag = "") {
  return build_phi_good(t_var(u1, Sort::Unitary), t_var(u2, Sort::Unitary),
                        tag);
}

// phi_leq(ys; u1, u2) = sup_X [ max_i ||[X, ys_i]||_2 ∸ 2 sqrt(chi(X; u1, u2)) ].
//
// Zero-ish when everything nearly commuting with (u1, u2) nearly commutes
// with every ys_i too, i.e. the ys generate no more than the pair does.
inline FormulaPtr build_phi_leq(const std::vector<TermPtr>& ys, TermPtr u1,
                                TermPtr u2, const std::string& tag = "") {
  if (ys.empty()) throw ValidationError("phi_leq needs at least one term");
  std::string xn = "Xle" + tag;
  auto X = t_var(xn, Sort::Ball);
  std::vector<FormulaPtr> comms;
  comms.reserve(ys.size());
  for (const auto& y : ys) comms.push_back(f_norm2(t_commutator(X, y)));
  auto body = f_dotminus(f_max(std::move(comms)),
                         f_scale(2.0, build_sqrt_chi(X, std::move(u1),
                                                     std::move(u2))));
  return f_sup(xn, Sort::Ball, std::move(body));
}

// zeta(x; (u1a,u1b), (u2a,u2b)): definable bound on the d2-distance from x
// to N = C(u2)' ∩ C(u1) when both pairs are good,
//
//   zeta(x) = sqrt(chi(x; u1)) + sqrt( sup_Y [ psi(x, Y) ∸ 2 sqrt(chi(Y; u2)) ] )
//   psi(x, Y) = 2 sqrt(chi(x; u1)) + ||[x, Y]||_2,
//
// and zeta vanishes on N itself.  The sup over Y is a hat-sup over the
// second pair's commutant; its penalty modulus (2t, from psi's Y-modulus) is
// what the formula shows explicitly.
inline FormulaPtr build_zeta(const std::string& x, TermPtr u1a, TermPtr u1b,
                             TermPtr u2a, TermPtr u2b,
                             Sort x_sort = Sort::Ball) {
  auto X = t_var(x, x_sort);
  std::string yn = x + "_zw";
  auto sqrt_chi1 = build_sqrt_chi(X, u1a, u1b);
  auto psi = f_plus(f_scale(2.0, sqrt_chi1),
                    f_norm2(t_commutator(X, t_var(yn, Sort::Ball))));
  auto hat = hat_transform(std::move(psi), yn, std::move(u2a), std::move(u2b),
                           HatMode::Sup);
  return f_plus(std::move(sqrt_chi1), f_sqrt(std::move(hat)));
}

enum class BarMode { Inf, Sup };

// One step of relativization: replace "Q v ranging over N" by the ambient
// quantifier plus a modulus-weighted zeta penalty,
//
//   bar-inf:  inf_v [ rho + alpha(zeta(v)) ]      (ball v)
//   bar-sup:  sup_v [ rho ∸ alpha(zeta(v)) ]
//
// with alpha the modulus of rho in v.  Unitary variables keep their sort;
// their penalty uses alpha(3 t) composed with zeta, since a unitary with
// zeta(u) <= eps lies within 3 eps of a genuine unitary of N (conditional
// expectation contracts d2 into N, and the polar part w of y = E_N(u)
// satisfies ||y - w||_2 <= ||y*y - 1||_2 <= 2 eps).
inline FormulaPtr bar_transform(FormulaPtr rho, const std::string& v,
                                Sort sort, TermPtr u1a, TermPtr u1b,
                                TermPtr u2a, TermPtr u2b, BarMode mode) {
  if (!rho->free_vars->count(v))
    throw ValidationError("bar_transform: '" + v + "' is not free in rho");
  Modulus alpha = modulus_of(rho, v);
  if (sort == Sort::Unitary) alpha = alpha.arg_scaled(3.0);
  auto zeta = build_zeta(v, std::move(u1a), std::move(u1b), std::move(u2a),
                         std::move(u2b), sort);
  auto penalty = f_apply_modulus(alpha, std::move(zeta));
  FormulaPtr body = mode == BarMode::Inf
                        ? f_plus(std::move(rho), std::move(penalty))
                        : f_dotminus(std::move(rho), std::move(penalty));
  return mode == BarMode::Inf ? f_inf(v, sort, std::move(body))
                              : f_sup(v, sort, std::move(body));
}

// Relativize a prenex sentence to N = C(u2)' ∩ C(u1): every quantifier is
// rebuilt inside out with its bar penalty.  The penalties live inside
// ApplyModulus nodes, which the prenexer treats as atoms, so the transformed
// sentence has the same quantifier prefix as the input; this is asserted.
inline PrenexFormula relativize(const PrenexFormula& pf, TermPtr u1a,
                                TermPtr u1b, TermPtr u2a, TermPtr u2b) {
  FormulaPtr f = pf.matrix;
  std::vector<QuantifierEntry> kept;
  for (auto it = pf.prefix.rbegin(); it != pf.prefix.rend(); ++it) {
    // Vacuous quantifiers (var absent from the matrix) are dropped; they
    // range over nothing and would not survive re-prenexing anyway.
    if (!f->free_vars->count(it->var)) continue;
    f = bar_transform(f, it->var, it->sort, u1a, u1b, u2a, u2b,
                      it->kind == Quant::Inf ? BarMode::Inf : BarMode::Sup);
    kept.push_back(*it);
  }
  std::reverse(kept.begin(), kept.end());
  PrenexFormula out = to_prenex(f);
  if (out.prefix != kept)
    throw NumericalFailure("relativize changed the quantifier prefix");
  return out;
}

inline PrenexFormula relativize(const FormulaPtr& f, TermPtr u1a, TermPtr u1b,
                                TermPtr u2a, TermPtr u2b) {
  return relativize(to_prenex(f), std::move(u1a), std::move(u1b),
                    std::move(u2a), std::move(u2b));
}

// theta_{m,1} = tau_m; theta_{m,l+1} nests: choose a candidate pair, check
// it is good, then for every A exhibit a second good pair whose relative
// commutant N contains A's obstruction and satisfies theta relativized.
//
//   theta_{l+1} = inf_{U1} max( phi_good(U1),
//        sup_A inf_{U2} max( phi_good(U2), phi_leq({A} ∪ U2; U1),
//                            relativize(theta_l; U1, U2) ) )
inline FormulaPtr build_theta(int m, int n) {
  if (m < 1 || n < 1) throw ValidationError("theta needs m, n >= 1");
  FormulaPtr theta = build_tau_m(m);
  for (int level = 2; level <= n; ++level) {
    std::string L = "." + std::to_string(level);
    auto u1a = t_var("U1a" + L, Sort::Unitary);
    auto u1b = t_var("U1b" + L, Sort::Unitary);
    auto u2a = t_var("U2a" + L, Sort::Unitary);
    auto u2b = t_var("U2b" + L, Sort::Unitary);
    auto A = t_var("A" + L, Sort::Ball);

    auto relativized = relativize(theta, u1a, u1b, u2a, u2b).to_formula();
    auto inner = f_max({build_phi_good(u2a, u2b, "2" + L),
                        build_phi_leq({A, u2a, u2b}, u1a, u1b, L),
                        std::move(relativized)});
    auto mid = f_sup(
        "A" + L, Sort::Ball,
        f_inf("U2a" + L, Sort::Unitary,
              f_inf("U2b" + L, Sort::Unitary, std::move(inner))));
    auto outer = f_max(build_phi_good(u1a, u1b, "1" + L), std::move(mid));
    theta = f_inf("U1a" + L, Sort::Unitary,
                  f_inf("U1b" + L, Sort::Unitary, std::move(outer)));
  }
  return theta;
}

// Separation margin for the tau-based distinguishing argument:
//   delta = sqrt( upsilon(1 / (2 C m)) / (200 * 30^2) ).
// With the identity modulus, C = 1, m = 1 this is exactly 1/600.
inline double compute_delta(
    const std::function<double(double)>& upsilon = [](double t) { return t; },
    double C = 1.0, int m = 1) {
  if (C <= 0.0 || m < 1) throw ValidationError("compute_delta: bad C or m");
  double inner = upsilon(1.0 / (2.0 * C * static_cast<double>(m)));
  if (!(inner >= 0.0))
    throw ValidationError("compute_delta: upsilon must be nonnegative");
  return std::sqrt(inner / (200.0 * 30.0 * 30.0));
}

}  // namespace tracelogic
