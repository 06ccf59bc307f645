#pragma once

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tracelogic/common.hpp"

namespace tracelogic {

// Default cap on |G| (and on algebra dimensions derived from groups).
// Overridable through the TL_SIZE_CAP environment variable.
inline int size_cap() {
  if (const char* env = std::getenv("TL_SIZE_CAP")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 64;
}

// A finite group as a multiplication table: table[g * n + h] = g*h.
// Element 0 is always the identity.
struct FiniteGroup {
  int n = 0;
  std::vector<int> table;
  std::vector<int> inverse;
  std::string name;

  int mul(int g, int h) const { return table[static_cast<size_t>(g) * n + h]; }
  int inv(int g) const { return inverse[static_cast<size_t>(g)]; }
};

// Validates the table axioms: Latin square, two-sided identity at 0,
// inverses, associativity (exhaustive up to n = 512, else sampled).
// Returns the group with inverses filled in.
inline FiniteGroup make_group(int n, std::vector<int> table,
                              std::string name) {
  if (n < 1) throw ValidationError("group order must be >= 1");
  if (static_cast<int>(table.size()) != n * n)
    throw ValidationError("group table must be n x n");
  for (int v : table)
    if (v < 0 || v >= n)
      throw ValidationError("group table entry out of range");

  FiniteGroup G;
  G.n = n;
  G.table = std::move(table);
  G.name = std::move(name);

  for (int g = 0; g < n; ++g) {
    if (G.mul(0, g) != g || G.mul(g, 0) != g)
      throw ValidationError("element 0 is not a two-sided identity");
    std::vector<bool> row(static_cast<size_t>(n)), col(static_cast<size_t>(n));
    for (int h = 0; h < n; ++h) {
      if (row[static_cast<size_t>(G.mul(g, h))])
        throw ValidationError("group table row is not a permutation");
      row[static_cast<size_t>(G.mul(g, h))] = true;
      if (col[static_cast<size_t>(G.mul(h, g))])
        throw ValidationError("group table column is not a permutation");
      col[static_cast<size_t>(G.mul(h, g))] = true;
    }
  }

  G.inverse.assign(static_cast<size_t>(n), -1);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      if (G.mul(g, h) == 0 && G.mul(h, g) == 0) G.inverse[static_cast<size_t>(g)] = h;
  for (int g = 0; g < n; ++g)
    if (G.inverse[static_cast<size_t>(g)] < 0)
      throw ValidationError("group element has no two-sided inverse");

  if (n <= 512) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          if (G.mul(G.mul(a, b), c) != G.mul(a, G.mul(b, c)))
            throw ValidationError("group table is not associative");
  } else {
    SplitMix64 rng(0x61737331ULL);
    for (int k = 0; k < 1000000; ++k) {
      int a = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
      int b = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
      int c = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
      if (G.mul(G.mul(a, b), c) != G.mul(a, G.mul(b, c)))
        throw ValidationError("group table is not associative");
    }
  }
  return G;
}

inline FiniteGroup cyclic_group(int n) {
  if (n < 1) throw ValidationError("cyclic group order must be >= 1");
  std::vector<int> t(static_cast<size_t>(n) * n);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) t[static_cast<size_t>(g) * n + h] = (g + h) % n;
  return make_group(n, std::move(t), "Z" + std::to_string(n));
}

// S_k with elements enumerated lexicographically (identity first);
// composition (s*t)(i) = s(t(i)).
inline FiniteGroup symmetric_group(int k) {
  if (k < 1 || k > 6) throw ValidationError("symmetric_group supports 1 <= k <= 6");
  std::vector<std::vector<int>> perms;
  std::vector<int> p(static_cast<size_t>(k));
  std::iota(p.begin(), p.end(), 0);
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  int n = static_cast<int>(perms.size());

  auto index_of = [&](const std::vector<int>& q) {
    auto it = std::lower_bound(perms.begin(), perms.end(), q);
    return static_cast<int>(it - perms.begin());
  };

  std::vector<int> t(static_cast<size_t>(n) * n);
  std::vector<int> comp(static_cast<size_t>(k));
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) {
      for (int i = 0; i < k; ++i)
        comp[static_cast<size_t>(i)] =
            perms[static_cast<size_t>(g)][static_cast<size_t>(
                perms[static_cast<size_t>(h)][static_cast<size_t>(i)])];
      t[static_cast<size_t>(g) * n + h] = index_of(comp);
    }
  return make_group(n, std::move(t), "S" + std::to_string(k));
}

// Gamma^k, elements as base-|Gamma| tuples (component 0 least significant).
inline FiniteGroup direct_power(const FiniteGroup& G, int k) {
  if (k < 1) throw ValidationError("direct power needs k >= 1");
  double sz = std::pow(static_cast<double>(G.n), k);
  if (sz > static_cast<double>(size_cap()))
    throw SizeCapError("direct power order " + std::to_string(sz) +
                       " exceeds size cap " + std::to_string(size_cap()));
  int n = static_cast<int>(sz + 0.5);
  auto digits = [&](int g) {
    std::vector<int> d(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      d[static_cast<size_t>(i)] = g % G.n;
      g /= G.n;
    }
    return d;
  };
  std::vector<int> t(static_cast<size_t>(n) * n);
  for (int g = 0; g < n; ++g) {
    auto dg = digits(g);
    for (int h = 0; h < n; ++h) {
      auto dh = digits(h);
      int out = 0, mult = 1;
      for (int i = 0; i < k; ++i) {
        out += G.mul(dg[static_cast<size_t>(i)], dh[static_cast<size_t>(i)]) * mult;
        mult *= G.n;
      }
      t[static_cast<size_t>(g) * n + h] = out;
    }
  }
  return make_group(n, std::move(t), G.name + "^" + std::to_string(k));
}

// Wreath product Gamma wr S_k = Gamma^k ⋊ S_k with
// (v, s)(w, r) = (v · s(w), s r), where s acts by permuting coordinates:
// s(w)_i = w_{s^{-1}(i)}.  Elements are encoded as pairs (tuple, perm) with
// index tuple + |Gamma^k| * perm.
inline FiniteGroup wreath_product(const FiniteGroup& G, int k) {
  if (k < 1 || k > 6) throw ValidationError("wreath_product supports 1 <= k <= 6");
  FiniteGroup base = direct_power(G, k);
  FiniteGroup sym = symmetric_group(k);
  double sz = static_cast<double>(base.n) * sym.n;
  if (sz > static_cast<double>(size_cap()))
    throw SizeCapError("wreath product order " + std::to_string(sz) +
                       " exceeds size cap " + std::to_string(size_cap()));
  int n = static_cast<int>(sz + 0.5);

  // Permutation action of S_k elements, in the same enumeration
  // symmetric_group uses.
  std::vector<std::vector<int>> perms;
  {
    std::vector<int> p(static_cast<size_t>(k));
    std::iota(p.begin(), p.end(), 0);
    do {
      perms.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
  }

  auto digits = [&](int g) {
    std::vector<int> d(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) {
      d[static_cast<size_t>(i)] = g % G.n;
      g /= G.n;
    }
    return d;
  };
  auto undigits = [&](const std::vector<int>& d) {
    int out = 0, mult = 1;
    for (int i = 0; i < k; ++i) {
      out += d[static_cast<size_t>(i)] * mult;
      mult *= G.n;
    }
    return out;
  };

  std::vector<int> t(static_cast<size_t>(n) * n);
  for (int g = 0; g < n; ++g) {
    int vg = g % base.n, sg = g / base.n;
    auto dv = digits(vg);
    const auto& sperm = perms[static_cast<size_t>(sg)];
    for (int h = 0; h < n; ++h) {
      int wh = h % base.n, rh = h / base.n;
      auto dw = digits(wh);
      // s(w)_i = w_{s^{-1}(i)}; with sperm as the map i -> s(i), the inverse
      // image is found by scanning.
      std::vector<int> moved(static_cast<size_t>(k));
      for (int i = 0; i < k; ++i)
        moved[static_cast<size_t>(sperm[static_cast<size_t>(i)])] =
            dw[static_cast<size_t>(i)];
      std::vector<int> prod(static_cast<size_t>(k));
      for (int i = 0; i < k; ++i)
        prod[static_cast<size_t>(i)] =
            G.mul(dv[static_cast<size_t>(i)], moved[static_cast<size_t>(i)]);
      int vout = undigits(prod);
      int sout = sym.mul(sg, rh);
      t[static_cast<size_t>(g) * n + h] = vout + base.n * sout;
    }
  }
  return make_group(n, std::move(t),
                    G.name + "wr" + std::to_string(k));
}

inline int element_order(const FiniteGroup& G, int g) {
  int x = g, ord = 1;
  while (x != 0) {
    x = G.mul(x, g);
    ++ord;
  }
  return ord;
}

inline int conjugacy_class_count(const FiniteGroup& G) {
  std::vector<bool> seen(static_cast<size_t>(G.n), false);
  int classes = 0;
  for (int g = 0; g < G.n; ++g) {
    if (seen[static_cast<size_t>(g)]) continue;
    ++classes;
    for (int h = 0; h < G.n; ++h)
      seen[static_cast<size_t>(G.mul(G.mul(h, g), G.inv(h)))] = true;
  }
  return classes;
}

inline bool is_abelian(const FiniteGroup& G) {
  for (int g = 0; g < G.n; ++g)
    for (int h = 0; h < g; ++h)
      if (G.mul(g, h) != G.mul(h, g)) return false;
  return true;
}

}  // namespace tracelogic
