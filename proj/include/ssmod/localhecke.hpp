#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssmod/ellcurve.hpp"
#include "ssmod/zmod.hpp"

// Right-coset decompositions H x g H = disjoint union of H x_j for the
// minuscule double cosets of GL_2 and GSp_2g over Z_l, at finite precision
// Z/l^k. A coset H x is identified with the row lattice of x.

namespace ssmod {

struct CosetList {
  std::string group;  // "gl2" or "gsp"
  int g = 1;
  u64 l = 0;
  int precision = 0;
  std::vector<int> divisors;  // elementary-divisor exponents, sorted
  std::vector<ZMatrix> representatives;
  std::size_t count() const { return representatives.size(); }
};

// Upper-triangular row Hermite form of the lattice spanned by the rows of x
// and l^k Z^n: diagonal l^{v_c}, entries above the diagonal in [0, l^{v_c}).
// Two matrices give the same coset iff their forms agree.
inline ZMatrix lattice_form(const ZMatrix& x, u64 l, int k) {
  const u64 mod = ipow(l, k);
  const std::size_t n = x.cols();
  std::vector<std::vector<u64>> rows;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<u64> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = x(i, j) % mod;
    rows.push_back(r);
  }
  auto val = [&](u64 a) { return a == 0 ? k : valuation(a, l); };
  ZMatrix h(n, n, 0);
  std::vector<int> v(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t best = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (best == rows.size() || val(rows[i][c]) < val(rows[best][c])) best = i;
    std::vector<u64> piv(n, 0);
    if (best == rows.size() || rows[best][c] == 0) {
      v[c] = k;
      piv[c] = 0;
    } else {
      v[c] = val(rows[best][c]);
      u64 lv = ipow(l, v[c]);
      u64 unit = rows[best][c] / lv;
      u64 w = invmod(unit % mod, mod);
      piv = rows[best];
      for (auto& e : piv) e = mulmod(e, w, mod);
      rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(best));
      for (auto& r : rows) {
        u64 t = r[c] / lv;  // r[c] has valuation >= v[c]
        for (std::size_t j = 0; j < n; ++j) r[j] = (r[j] + mod - mulmod(t, piv[j], mod)) % mod;
      }
      // keep l^{k-v} times the pivot row, which vanishes in column c
      std::vector<u64> ann(n);
      u64 s = ipow(l, k - v[c]);
      for (std::size_t j = 0; j < n; ++j) ann[j] = mulmod(piv[j], s, mod);
      rows.push_back(ann);
    }
    for (std::size_t j = 0; j < n; ++j) h(c, j) = piv[j];
    h(c, c) = ipow(l, v[c]);
  }
  // left to right: reducing column c only touches columns >= c
  for (std::size_t c = 0; c < n; ++c) {
    u64 d = h(c, c);
    for (std::size_t r = 0; r < c; ++r) {
      u64 t = h(r, c) / d;
      if (!t) continue;
      for (std::size_t j = c; j < n; ++j) {
        u64 sub = (j == c ? d : h(c, j)) % mod;
        h(r, j) = (h(r, j) + mod - mulmod(t % mod, sub, mod)) % mod;
      }
    }
  }
  return h;
}

inline std::vector<int> elementary_divisors(const ZMatrix& x, u64 l, int k) {
  auto v = smith_local(x, l, k).valuations;
  std::sort(v.begin(), v.end());
  return v;
}

inline int default_precision(const std::vector<int>& divisors) {
  return (divisors.empty() ? 0 : *std::max_element(divisors.begin(), divisors.end())) + 1;
}

// Hermite representatives [[l^i, c], [0, l^j]] of the requested type.
inline CosetList decompose_gl2(u64 l, std::vector<int> divisors = {0, 1}, int k = 0) {
  if (!is_prime(l)) config_error("localhecke", "l must be prime");
  if (divisors.size() != 2) config_error("localhecke", "GL_2 types have two exponents");
  std::sort(divisors.begin(), divisors.end());
  if (divisors[0] < 0 || divisors[1] - divisors[0] > 2) config_error("localhecke", "unsupported GL_2 coset type");
  if (k == 0) k = default_precision(divisors);
  if (k <= divisors[1]) config_error("localhecke", "precision must exceed the largest exponent");
  CosetList out;
  out.group = "gl2";
  out.l = l;
  out.precision = k;
  out.divisors = divisors;
  const u64 mod = ipow(l, k);
  int total = divisors[0] + divisors[1];
  for (int i = 0; i <= total; ++i) {
    int j = total - i;
    for (u64 c = 0; c < ipow(l, j); ++c) {
      ZMatrix x(2, 2, 0);
      x(0, 0) = ipow(l, i) % mod;
      x(0, 1) = c % mod;
      x(1, 1) = ipow(l, j) % mod;
      if (elementary_divisors(x, l, k) == divisors) out.representatives.push_back(x);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lagrangian subspaces of F_l^{2g} for the form J = [[0, I], [-I, 0]].

namespace detail {

inline u64 symplectic_pairing(const std::vector<u64>& a, const std::vector<u64>& b, std::size_t g, u64 mod) {
  u64 s = 0;
  for (std::size_t i = 0; i < g; ++i) {
    s = (s + mulmod(a[i], b[g + i], mod)) % mod;
    s = (s + mod - mulmod(a[g + i], b[i], mod)) % mod;
  }
  return s;
}

// Reduced row echelon form over F_l; returns the nonzero rows.
inline std::vector<std::vector<u64>> rref_rows(std::vector<std::vector<u64>> rows, u64 l) {
  std::size_t n = rows.empty() ? 0 : rows[0].size(), r = 0;
  for (std::size_t c = 0; c < n && r < rows.size(); ++c) {
    std::size_t piv = r;
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[r], rows[piv]);
    u64 inv = invmod(rows[r][c], l);
    for (auto& e : rows[r]) e = mulmod(e, inv, l);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      u64 t = rows[i][c];
      for (std::size_t j = 0; j < n; ++j) rows[i][j] = (rows[i][j] + l - mulmod(t, rows[r][j], l)) % l;
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

}  // namespace detail

// Lagrangians in reduced echelon form, by pivot set and then row by row with
// isotropy checked against earlier rows.
inline std::vector<std::vector<std::vector<u64>>> lagrangians(std::size_t g, u64 l) {
  const std::size_t n = 2 * g;
  const u64 cap = scaled_cap(20000000);
  u64 work = 0;
  std::vector<std::vector<std::vector<u64>>> out;
  std::vector<int> choose(n, 0);
  std::fill(choose.begin(), choose.begin() + static_cast<std::ptrdiff_t>(g), 1);
  std::vector<std::vector<std::size_t>> pivot_sets;
  do {
    std::vector<std::size_t> s;
    for (std::size_t c = 0; c < n; ++c)
      if (choose[c]) s.push_back(c);
    pivot_sets.push_back(s);
  } while (std::prev_permutation(choose.begin(), choose.end()));
  std::sort(pivot_sets.begin(), pivot_sets.end());
  for (const auto& piv : pivot_sets) {
    std::vector<bool> is_piv(n, false);
    for (auto c : piv) is_piv[c] = true;
    std::vector<std::vector<std::size_t>> free(g);
    for (std::size_t i = 0; i < g; ++i)
      for (std::size_t c = piv[i] + 1; c < n; ++c)
        if (!is_piv[c]) free[i].push_back(c);
    std::vector<std::vector<u64>> rows(g, std::vector<u64>(n, 0));
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (i == g) {
        out.push_back(rows);
        return;
      }
      u64 total = ipow(l, static_cast<unsigned>(free[i].size()));
      for (u64 idx = 0; idx < total; ++idx) {
        if (++work > cap) budget_error("localhecke", "Lagrangian enumeration exceeds the budget");
        std::fill(rows[i].begin(), rows[i].end(), 0);
        rows[i][piv[i]] = 1;
        u64 t = idx;
        for (auto c : free[i]) {
          rows[i][c] = t % l;
          t /= l;
        }
        bool ok = true;
        for (std::size_t j = 0; j <= i && ok; ++j) ok = detail::symplectic_pairing(rows[j], rows[i], g, l) == 0;
        if (ok) self(self, i + 1);
      }
    };
    rec(rec, 0);
  }
  return out;
}

// Independent count: every g-tuple of vectors, kept when independent and
// pairwise isotropic, deduplicated by echelon form.
inline u64 lagrangian_count(std::size_t g, u64 l) {
  if (!is_prime(l)) config_error("localhecke", "l must be prime");
  const std::size_t n = 2 * g;
  const u64 vecs = ipow(l, static_cast<unsigned>(n));
  if (std::pow(static_cast<double>(vecs), static_cast<double>(g)) > static_cast<double>(scaled_cap(10000000)))
    budget_error("localhecke", "brute-force Lagrangian count is beyond the budget");
  auto vec = [&](u64 idx) {
    std::vector<u64> v(n);
    for (std::size_t j = 0; j < n; ++j) {
      v[j] = idx % l;
      idx /= l;
    }
    return v;
  };
  std::set<std::vector<std::vector<u64>>> seen;
  std::vector<u64> idx(g, 0);
  for (;;) {
    std::vector<std::vector<u64>> rows;
    for (auto i : idx) rows.push_back(vec(i));
    bool iso = true;
    for (std::size_t a = 0; a < g && iso; ++a)
      for (std::size_t b = a + 1; b < g && iso; ++b) iso = detail::symplectic_pairing(rows[a], rows[b], g, l) == 0;
    if (iso) {
      auto r = detail::rref_rows(rows, l);
      if (r.size() == g) seen.insert(r);
    }
    std::size_t t = 0;
    while (t < g && ++idx[t] == vecs) idx[t++] = 0;
    if (t == g) break;
  }
  return seen.size();
}

namespace detail {

// C with C G C^t = J mod l^k for an alternating G that is invertible mod l.
inline ZMatrix symplectic_basis(const ZMatrix& G, u64 l, int k) {
  const u64 mod = ipow(l, k);
  const std::size_t n = G.rows(), g = n / 2;
  auto form = [&](const std::vector<u64>& a, const std::vector<u64>& b) {
    u64 s = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s = (s + mulmod(mulmod(a[i], G(i, j), mod), b[j], mod)) % mod;
    return s;
  };
  std::vector<std::vector<u64>> rest;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<u64> e(n, 0);
    e[i] = 1;
    rest.push_back(e);
  }
  std::vector<std::vector<u64>> es, fs;
  while (!rest.empty()) {
    std::vector<u64> u = rest.front();
    rest.erase(rest.begin());
    std::size_t vi = rest.size();
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (form(u, rest[i]) % l) {
        vi = i;
        break;
      }
    if (vi == rest.size()) config_error("localhecke", "form is degenerate mod l");
    std::vector<u64> v = rest[vi];
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(vi));
    u64 inv = invmod(form(u, v), mod);
    for (auto& e : v) e = mulmod(e, inv, mod);
    for (auto& w : rest) {
      u64 wv = form(w, v), wu = form(w, u);
      for (std::size_t j = 0; j < n; ++j)
        w[j] = (w[j] + mod - mulmod(wv, u[j], mod) + mulmod(wu, v[j], mod)) % mod;
    }
    es.push_back(u);
    fs.push_back(v);
  }
  ZMatrix C(n, n, 0);
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      C(i, j) = es[i][j];
      C(g + i, j) = fs[i][j];
    }
  return C;
}

}  // namespace detail

inline ZMatrix symplectic_form(std::size_t g, u64 mod) {
  ZMatrix j(2 * g, 2 * g, 0);
  for (std::size_t i = 0; i < g; ++i) {
    j(i, g + i) = 1;
    j(g + i, i) = mod - 1;
  }
  return j;
}

// x with x J x^t = l J mod l^k whose row lattice is W + l Z^{2g}.
inline ZMatrix lagrangian_representative(const std::vector<std::vector<u64>>& w, std::size_t g, u64 l, int k) {
  const std::size_t n = 2 * g;
  const u64 mod = ipow(l, k), big = mod * l;
  std::vector<bool> is_piv(n, false);
  ZMatrix B(n, n, 0);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < n; ++j) B(i, j) = w[i][j];
    std::size_t c = 0;
    while (w[i][c] == 0) ++c;
    is_piv[c] = true;
  }
  std::size_t r = g;
  for (std::size_t c = 0; c < n; ++c)
    if (!is_piv[c]) B(r++, c) = l;
  // G = B J B^t / l, computed mod l^{k+1} before dividing
  ZMatrix G = zmul(zmul(B, symplectic_form(g, big), big), B.transpose(), big);
  for (auto& e : G.data()) e = (e / l) % mod;
  ZMatrix C = detail::symplectic_basis(G, l, k);
  return zmul(C, zreduce(B, mod), mod);
}

inline CosetList decompose_gsp(std::size_t g, u64 l, int k = 0) {
  if (!is_prime(l)) config_error("localhecke", "l must be prime");
  if (g < 1 || g > 3) config_error("localhecke", "decompose_gsp supports 1 <= g <= 3");
  if (l > scaled_cap(7)) budget_error("localhecke", "l > 7 is beyond the GSp coset budget");
  CosetList out;
  out.group = "gsp";
  out.g = static_cast<int>(g);
  out.l = l;
  out.divisors.assign(g, 0);
  out.divisors.insert(out.divisors.end(), g, 1);
  if (k == 0) k = default_precision(out.divisors);
  if (k < 2) config_error("localhecke", "precision must exceed the largest exponent");
  out.precision = k;
  for (const auto& w : lagrangians(g, l)) out.representatives.push_back(lagrangian_representative(w, g, l, k));
  return out;
}

inline bool is_gsp_mod(const ZMatrix& x, u64 l, int k, u64 factor) {
  const u64 mod = ipow(l, k);
  std::size_t g = x.rows() / 2;
  ZMatrix J = symplectic_form(g, mod);
  ZMatrix lhs = zmul(zmul(x, J, mod), x.transpose(), mod);
  ZMatrix rhs = J;
  for (auto& e : rhs.data()) e = mulmod(e, factor % mod, mod);
  return lhs == rhs;
}

// Representatives are pairwise inequivalent: distinct lattice forms.
inline bool pairwise_inequivalent(const CosetList& c) {
  std::set<std::vector<u64>> forms;
  for (const auto& x : c.representatives) forms.insert(lattice_form(x, c.l, c.precision).data());
  return forms.size() == c.count();
}

// ---------------------------------------------------------------------------
// GL_2 cosets against the order-l kernels of a curve: the kernel generated by
// aP + bQ corresponds to the coset whose row lattice mod l is the line (a, b).

struct KernelMatch {
  bool bijective = false;
  bool types_match = false;
  std::vector<std::size_t> coset_of_subgroup;
  std::vector<IsogenyType> types;
};

inline std::vector<u64> normalized_line(std::vector<u64> v, u64 l) {
  for (auto& e : v) e %= l;
  for (auto e : v)
    if (e) {
      u64 inv = invmod(e, l);
      for (auto& x : v) x = mulmod(x, inv, l);
      break;
    }
  return v;
}

// e must have Frobenius [-p] (a canonical model).
inline KernelMatch match_gl2_kernels(const Curve& e, u64 l, u64 seed = 1) {
  CosetList cosets = decompose_gl2(l);
  std::map<std::vector<u64>, std::size_t> by_line;
  for (std::size_t i = 0; i < cosets.count(); ++i) {
    const ZMatrix& x = cosets.representatives[i];
    std::vector<u64> line;
    for (std::size_t r = 0; r < 2 && line.empty(); ++r)
      if (x(r, 0) % l || x(r, 1) % l) line = normalized_line({x(r, 0), x(r, 1)}, l);
    by_line[line] = i;
  }
  SubgroupList subs = ell_subgroups(e, l, seed);
  KernelMatch m;
  std::set<std::size_t> hit;
  m.types_match = true;
  for (const auto& s : subs.subgroups) {
    auto [a, b] = subs.torsion.log(s.generator);
    auto it = by_line.find(normalized_line({a, b}, l));
    if (it == by_line.end()) return m;
    m.coset_of_subgroup.push_back(it->second);
    hit.insert(it->second);
    IsogenyType t = isogeny_type(to_canonical(velu(e, s.kernel_poly, l)), l, seed);
    m.types.push_back(t);
    auto d = elementary_divisors(cosets.representatives[it->second], l, cosets.precision);
    m.types_match = m.types_match && t.a == d[0] && t.b == d[1];
  }
  m.bijective = hit.size() == cosets.count() && subs.subgroups.size() == cosets.count();
  return m;
}

}  // namespace ssmod
