#pragma once

#include <array>
#include <cmath>
#include <cstring>
#include <utility>
#include <vector>

#include "tracelogic/common.hpp"

namespace tracelogic {

// A modulus of uniform continuity of the form
//
//     alpha(t) = sum_{j=0..15} c_j * t^(2^-j),    c_j >= 0,
//
// i.e. a nonnegative combination of t, sqrt(t), t^(1/4), ...  The family is
// closed under the operations formula transforms need: pointwise sum and max,
// scaling, precomposition with t -> s*t, the sqrt bound
// sqrt(alpha(t)) <= sum sqrt(c_j) t^(2^-(j+1)), and composition alpha∘beta
// via subadditivity of t^e for e <= 1.  Slot j holds the coefficient of
// t^(2^-j); compositions that would need exponents below 2^-15 throw.
class Modulus {
 public:
  static constexpr int kSlots = 16;

  Modulus() = default;

  static Modulus zero() { return Modulus{}; }

  // L*t
  static Modulus linear(double L) {
    Modulus m;
    m.set(0, L);
    return m;
  }

  // K*sqrt(t)
  static Modulus root(double K) {
    Modulus m;
    m.set(1, K);
    return m;
  }

  static Modulus term(int slot, double coeff) {
    Modulus m;
    m.set(slot, coeff);
    return m;
  }

  double coeff(int slot) const { return c_.at(static_cast<size_t>(slot)); }

  bool is_zero() const {
    for (double v : c_)
      if (v != 0.0) return false;
    return true;
  }

  double operator()(double t) const {
    if (t < 0.0) t = 0.0;
    double acc = 0.0;
    double root = t;  // t^(2^-j), starting at j = 0
    for (int j = 0; j < kSlots; ++j) {
      if (c_[static_cast<size_t>(j)] != 0.0)
        acc += c_[static_cast<size_t>(j)] * root;
      root = std::sqrt(root);
    }
    return acc;
  }

  Modulus& operator+=(const Modulus& o) {
    for (int j = 0; j < kSlots; ++j)
      c_[static_cast<size_t>(j)] += o.c_[static_cast<size_t>(j)];
    return *this;
  }

  friend Modulus operator+(Modulus a, const Modulus& b) { return a += b; }

  // Pointwise max is bounded slot-wise: max(alpha,beta) <= slotwise-max sum.
  // Slot-wise max is itself a valid modulus for max(f,g) and min(f,g).
  static Modulus max(const Modulus& a, const Modulus& b) {
    Modulus m;
    for (int j = 0; j < kSlots; ++j)
      m.c_[static_cast<size_t>(j)] = std::max(a.c_[static_cast<size_t>(j)],
                                              b.c_[static_cast<size_t>(j)]);
    return m;
  }

  // s * alpha(t)
  Modulus scaled(double s) const {
    if (s < 0.0) throw ValidationError("modulus scale must be nonnegative");
    Modulus m;
    for (int j = 0; j < kSlots; ++j)
      m.c_[static_cast<size_t>(j)] = s * c_[static_cast<size_t>(j)];
    return m;
  }

  // alpha(s * t): coefficient c_j picks up s^(2^-j).
  Modulus arg_scaled(double s) const {
    if (s < 0.0) throw ValidationError("modulus arg scale must be nonnegative");
    Modulus m;
    double p = s;
    for (int j = 0; j < kSlots; ++j) {
      m.c_[static_cast<size_t>(j)] = c_[static_cast<size_t>(j)] * p;
      p = std::sqrt(p);
    }
    return m;
  }

  // Upper bound for sqrt(alpha(t)): sqrt of each term, exponents halve.
  Modulus sqrt_bound() const {
    Modulus m;
    for (int j = 0; j < kSlots; ++j) {
      double cj = c_[static_cast<size_t>(j)];
      if (cj == 0.0) continue;
      if (j + 1 >= kSlots)
        throw ValidationError("modulus exponent capacity exceeded (sqrt)");
      m.c_[static_cast<size_t>(j + 1)] += std::sqrt(cj);
    }
    return m;
  }

  // Upper bound for this ∘ inner: each of my terms b_j * u^(2^-j) applied to
  // u = inner(t) = sum_k c_k t^(2^-k) expands, by subadditivity of x^e for
  // e <= 1, into sum_k b_j * c_k^(2^-j) * t^(2^-(j+k)).
  Modulus after(const Modulus& inner) const {
    Modulus m;
    for (int j = 0; j < kSlots; ++j) {
      double bj = c_[static_cast<size_t>(j)];
      if (bj == 0.0) continue;
      double e = std::pow(0.5, j);
      for (int k = 0; k < kSlots; ++k) {
        double ck = inner.c_[static_cast<size_t>(k)];
        if (ck == 0.0) continue;
        if (j + k >= kSlots)
          throw ValidationError("modulus exponent capacity exceeded (compose)");
        m.c_[static_cast<size_t>(j + k)] += bj * std::pow(ck, e);
      }
    }
    return m;
  }

  // Nonzero (slot, coefficient) pairs, slot-ascending.  Used by serializers.
  std::vector<std::pair<int, double>> terms() const {
    std::vector<std::pair<int, double>> out;
    for (int j = 0; j < kSlots; ++j)
      if (c_[static_cast<size_t>(j)] != 0.0)
        out.emplace_back(j, c_[static_cast<size_t>(j)]);
    return out;
  }

  bool operator==(const Modulus& o) const { return c_ == o.c_; }

  std::uint64_t hash() const {
    std::uint64_t h = 0x6d6f64756c7573ULL;
    for (int j = 0; j < kSlots; ++j) {
      double v = c_[static_cast<size_t>(j)];
      std::uint64_t bits;
      static_assert(sizeof bits == sizeof v);
      std::memcpy(&bits, &v, sizeof bits);
      h = hash_combine(h, bits);
    }
    return h;
  }

 private:
  void set(int slot, double coeff) {
    if (slot < 0 || slot >= kSlots)
      throw ValidationError("modulus slot out of range");
    if (coeff < 0.0)
      throw ValidationError("modulus coefficient must be nonnegative");
    c_[static_cast<size_t>(slot)] = coeff;
  }

  std::array<double, kSlots> c_{};
};

}  // namespace tracelogic
