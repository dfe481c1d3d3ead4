#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "ssmod/ff.hpp"
#include "ssmod/util.hpp"

// Level-1 q-expansions: Ramanujan tau and Hecke matrices on M_k mod p.
// Used as an independent oracle for the supersingular Hecke module.

namespace ssmod {

using BigInt = boost::multiprecision::cpp_int;
using Series = std::vector<BigInt>;

inline Series series_mul(const Series& a, const Series& b, std::size_t prec) {
  Series c(prec, 0);
  for (std::size_t i = 0; i < a.size() && i < prec; ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size() && i + j < prec; ++j) c[i + j] += a[i] * b[j];
  }
  return c;
}

inline Series series_pow(Series base, unsigned e, std::size_t prec) {
  Series r(prec, 0);
  r[0] = 1;
  while (e) {
    if (e & 1) r = series_mul(r, base, prec);
    base = series_mul(base, base, prec);
    e >>= 1;
  }
  return r;
}

// prod_{n >= 1} (1 - q^n) via Euler's pentagonal number theorem.
inline Series euler_product(std::size_t prec) {
  Series s(prec, 0);
  for (i64 k = 0;; ++k) {
    bool any = false;
    for (i64 sign : {1, -1}) {
      if (k == 0 && sign == -1) continue;
      i64 kk = sign * k;
      i64 g = kk * (3 * kk - 1) / 2;
      if (g < static_cast<i64>(prec)) {
        s[g] += (k % 2 ? -1 : 1);
        any = true;
      }
    }
    if (!any) break;
  }
  return s;
}

// Delta = q prod (1 - q^n)^24, coefficients 0..prec-1.
inline Series delta_series(std::size_t prec) {
  Series e = series_pow(euler_product(prec), 24, prec);
  Series d(prec, 0);
  for (std::size_t i = 1; i < prec; ++i) d[i] = e[i - 1];
  return d;
}

inline BigInt ramanujan_tau(u64 n) { return delta_series(n + 1)[n]; }

inline Series eisenstein_series(int k, std::size_t prec) {
  // E_4 = 1 + 240 sum sigma_3(n) q^n, E_6 = 1 - 504 sum sigma_5(n) q^n
  if (k != 4 && k != 6) throw Error(ErrorKind::Internal, "qexp", "only E4 and E6 are provided");
  BigInt c = k == 4 ? 240 : -504;
  Series s(prec, 0);
  s[0] = 1;
  for (std::size_t n = 1; n < prec; ++n) {
    BigInt sig = 0;
    for (std::size_t d = 1; d <= n; ++d)
      if (n % d == 0) sig += boost::multiprecision::pow(BigInt(d), k - 1);
    s[n] = c * sig;
  }
  return s;
}

inline int dim_mk(int k) {
  if (k < 0 || k % 2) return 0;
  if (k % 12 == 2) return k / 12;
  return k / 12 + 1;
}

// Basis Delta^i E4^a E6^b with 4a + 6b = k - 12 i; the i-th element is q^i + O(q^{i+1}).
inline std::vector<Series> miller_basis(int k, std::size_t prec) {
  int d = dim_mk(k);
  Series e4 = eisenstein_series(4, prec), e6 = eisenstein_series(6, prec), dl = delta_series(prec);
  std::vector<Series> out;
  for (int i = 0; i < d; ++i) {
    int r = k - 12 * i;
    int b = r % 4 == 0 ? 0 : 1;
    int a = (r - 6 * b) / 4;
    Series s = series_pow(dl, i, prec);
    s = series_mul(s, series_pow(e4, a, prec), prec);
    s = series_mul(s, series_pow(e6, b, prec), prec);
    out.push_back(s);
  }
  return out;
}

inline u64 reduce_big(const BigInt& x, u64 p) {
  BigInt r = x % p;
  if (r < 0) r += p;
  return static_cast<u64>(r);
}

// Matrix of T_l on M_k mod p in the basis above (column j is T_l applied to
// basis element j), via b(n) = a(l n) + l^{k-1} a(n / l).
inline FMatrix qexp_hecke_matrix(int k, u64 l, u64 p) {
  Field f = make_field(p, 1);
  int d = dim_mk(k);
  if (d == 0) return FMatrix(0, 0, FieldElement(f));
  std::size_t prec = static_cast<std::size_t>(l) * d + 1;
  auto basis = miller_basis(k, prec);
  BigInt lk = boost::multiprecision::pow(BigInt(l), k - 1);
  FMatrix m(d, d, FieldElement(f));
  for (int j = 0; j < d; ++j) {
    std::vector<BigInt> tb(d, 0);
    for (int n = 0; n < d; ++n) {
      tb[n] = basis[j][l * n];
      if (n % l == 0) tb[n] += lk * basis[j][n / l];
    }
    // Unitriangular solve: basis[i][n] = 0 for n < i, 1 at n = i.
    for (int i = 0; i < d; ++i) {
      BigInt c = tb[i];
      m(i, j) = FieldElement(f, reduce_big(c, p));
      for (int n = i; n < d; ++n) tb[n] -= c * basis[i][n];
    }
  }
  return m;
}

}  // namespace ssmod
