#pragma once

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <vector>

#include "ssmod/matrix.hpp"
#include "ssmod/util.hpp"

namespace ssmod {

// Matrices over Z/N stored as residues in [0, N).
using ZMatrix = Matrix<u64>;

inline ZMatrix zidentity(std::size_t n) {
  ZMatrix m(n, n, 0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

inline ZMatrix zmul(const ZMatrix& a, const ZMatrix& b, u64 mod) {
  ZMatrix c(a.rows(), b.cols(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      u64 x = a(i, k);
      if (!x) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) = (c(i, j) + mulmod(x, b(k, j), mod)) % mod;
    }
  return c;
}

inline ZMatrix zreduce(ZMatrix a, u64 mod) {
  for (auto& x : a.data()) x %= mod;
  return a;
}

// Smith form over the local ring Z/p^n: U * A * V = diag(p^{v_0}, p^{v_1}, ...).
// A valuation of n stands for a zero diagonal entry.
struct LocalSmith {
  u64 p = 0;
  int n = 0;
  ZMatrix U, V, D;
  std::vector<int> valuations;  // length min(rows, cols)
};

inline LocalSmith smith_local(ZMatrix a, u64 p, int n) {
  const u64 mod = ipow(p, n);
  const std::size_t r = a.rows(), c = a.cols();
  LocalSmith s;
  s.p = p;
  s.n = n;
  s.U = zidentity(r);
  s.V = zidentity(c);
  a = zreduce(a, mod);
  auto val = [&](u64 x) { return x == 0 ? n : std::min(n, valuation(x, p)); };
  const std::size_t k = std::min(r, c);
  for (std::size_t t = 0; t < k; ++t) {
    int best = n;
    std::size_t bi = t, bj = t;
    for (std::size_t i = t; i < r && best > 0; ++i)
      for (std::size_t j = t; j < c; ++j) {
        int v = val(a(i, j));
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
          if (v == 0) break;
        }
      }
    if (best >= n) {
      for (std::size_t u = t; u < k; ++u) s.valuations.push_back(n);
      break;
    }
    a.swap_rows(t, bi);
    s.U.swap_rows(t, bi);
    a.swap_cols(t, bj);
    s.V.swap_cols(t, bj);
    u64 pv = ipow(p, best);
    u64 unit = (a(t, t) / pv) % mod;
    u64 uinv = invmod(unit, mod);
    for (std::size_t j = 0; j < c; ++j) a(t, j) = mulmod(a(t, j), uinv, mod);
    for (std::size_t j = 0; j < r; ++j) s.U(t, j) = mulmod(s.U(t, j), uinv, mod);
    for (std::size_t i = t + 1; i < r; ++i) {
      if (!a(i, t)) continue;
      u64 w = a(i, t) / pv;
      for (std::size_t j = 0; j < c; ++j) a(i, j) = (a(i, j) + mod - mulmod(w, a(t, j), mod)) % mod;
      for (std::size_t j = 0; j < r; ++j) s.U(i, j) = (s.U(i, j) + mod - mulmod(w, s.U(t, j), mod)) % mod;
    }
    for (std::size_t j = t + 1; j < c; ++j) {
      if (!a(t, j)) continue;
      u64 w = a(t, j) / pv;
      for (std::size_t i = 0; i < r; ++i) a(i, j) = (a(i, j) + mod - mulmod(w, a(i, t), mod)) % mod;
      for (std::size_t i = 0; i < c; ++i) s.V(i, j) = (s.V(i, j) + mod - mulmod(w, s.V(i, t), mod)) % mod;
    }
    s.valuations.push_back(best);
  }
  s.D = a;
  return s;
}

// Solution of A x = b over Z/p^n, if any.
inline std::optional<std::vector<u64>> solve_local(const ZMatrix& a, const std::vector<u64>& b, u64 p, int n) {
  const u64 mod = ipow(p, n);
  LocalSmith s = smith_local(a, p, n);
  ZMatrix bb(b.size(), 1, 0);
  for (std::size_t i = 0; i < b.size(); ++i) bb(i, 0) = b[i] % mod;
  ZMatrix ub = zmul(s.U, bb, mod);
  std::vector<u64> y(a.cols(), 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    u64 v = ub(i, 0);
    if (i < s.valuations.size()) {
      int e = s.valuations[i];
      if (e >= n) {
        if (v) return std::nullopt;
        continue;
      }
      u64 pe = ipow(p, e);
      if (v % pe) return std::nullopt;
      y[i] = v / pe;
    } else if (v) {
      return std::nullopt;
    }
  }
  std::vector<u64> x(a.cols(), 0);
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) x[i] = (x[i] + mulmod(s.V(i, j), y[j], mod)) % mod;
  return x;
}

// Kernel of A over Z/p^n: free generators (a basis of a free direct summand)
// and torsion generators p^{n-v} V e_i for unit-free pivots.
struct LocalKernel {
  std::vector<std::vector<u64>> free;
  std::vector<std::vector<u64>> torsion;
};

inline LocalKernel kernel_local(const ZMatrix& a, u64 p, int n) {
  const u64 mod = ipow(p, n);
  LocalSmith s = smith_local(a, p, n);
  LocalKernel k;
  for (std::size_t i = 0; i < a.cols(); ++i) {
    int v = i < s.valuations.size() ? s.valuations[i] : n;
    std::vector<u64> col(a.cols());
    for (std::size_t r = 0; r < a.cols(); ++r) col[r] = s.V(r, i);
    if (v >= n) {
      k.free.push_back(col);
    } else if (v > 0) {
      u64 f = ipow(p, n - v);
      for (auto& x : col) x = mulmod(x, f, mod);
      k.torsion.push_back(col);
    }
  }
  return k;
}

// Integer Hermite normal form (row style, upper triangular, positive pivots,
// entries above a pivot reduced into [0, pivot)) of the lattice spanned by the
// rows of A together with mod * Z^n. Used as a canonical form of lattices
// containing mod * Z^n.
inline Matrix<i64> hermite_mod(const Matrix<i64>& a, i64 mod) {
  const std::size_t n = a.cols();
  std::vector<std::vector<i64>> rows;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::vector<i64> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = mod_floor(a(i, j), mod);
    rows.push_back(r);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<i64> r(n, 0);
    r[j] = mod;
    rows.push_back(r);
  }
  Matrix<i64> h(n, n, 0);
  std::size_t top = 0;
  for (std::size_t col = 0; col < n; ++col) {
    // Euclid down the column among rows[top..].
    while (true) {
      std::size_t piv = rows.size();
      for (std::size_t i = top; i < rows.size(); ++i)
        if (rows[i][col] != 0 && (piv == rows.size() || std::llabs(rows[i][col]) < std::llabs(rows[piv][col]))) piv = i;
      if (piv == rows.size()) break;
      std::swap(rows[top], rows[piv]);
      bool done = true;
      for (std::size_t i = top + 1; i < rows.size(); ++i) {
        if (rows[i][col] == 0) continue;
        i64 q = rows[i][col] / rows[top][col];
        for (std::size_t j = 0; j < n; ++j) rows[i][j] -= q * rows[top][j];
        for (std::size_t j = col + 1; j < n; ++j) rows[i][j] = mod_floor(rows[i][j], mod);
        if (rows[i][col] != 0) done = false;
      }
      if (done) break;
    }
    if (rows[top][col] < 0)
      for (auto& x : rows[top]) x = -x;
    // Keep entries bounded: the lattice contains mod * e_j.
    for (std::size_t j = col + 1; j < n; ++j) rows[top][j] = mod_floor(rows[top][j], mod);
    ++top;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = rows[i][j];
  // Reduce above pivots.
  for (std::size_t col = 0; col < n; ++col) {
    i64 d = h(col, col);
    for (std::size_t i = 0; i < col; ++i) {
      i64 q = h(i, col) >= 0 ? h(i, col) / d : -((-h(i, col) + d - 1) / d);
      if (q == 0) continue;
      for (std::size_t j = 0; j < n; ++j) h(i, j) -= q * h(col, j);
    }
  }
  return h;
}

}  // namespace ssmod
