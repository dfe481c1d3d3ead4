#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ssmod/ff.hpp"
#include "ssmod/zmod.hpp"

namespace ssmod {

// Short Weierstrass curve y^2 = x^3 + a4 x + a6 over a field of characteristic >= 5.
struct Curve {
  Field field;
  FieldElement a4, a6;

  FieldElement rhs(const FieldElement& x) const { return (x * x + a4) * x + a6; }
  FieldElement discriminant() const {
    // -16 (4 a4^3 + 27 a6^2)
    return -(a4 * a4 * a4 * FieldElement(field, 4) + a6 * a6 * FieldElement(field, 27)) * FieldElement(field, 16);
  }
  FieldElement j_invariant() const {
    FieldElement num = a4 * a4 * a4 * FieldElement(field, 4);
    FieldElement den = num + a6 * a6 * FieldElement(field, 27);
    return FieldElement(field, 1728) * num / den;
  }
  Poly rhs_poly() const { return Poly(field, {a6, a4, FieldElement(field), FieldElement(field, 1)}); }
  std::string to_string() const { return "y^2 = x^3 + (" + a4.to_string() + ")x + (" + a6.to_string() + ")"; }
  friend bool operator==(const Curve& a, const Curve& b) { return a.a4 == b.a4 && a.a6 == b.a6; }
};

inline Curve make_curve(const FieldElement& a4, const FieldElement& a6) {
  const Field& f = a4.field();
  if (f->p < 5) config_error("ellcurve", "characteristic must be >= 5");
  Curve e{f, a4, a6};
  if (e.discriminant().is_zero()) config_error("ellcurve", "singular curve " + e.to_string());
  return e;
}

inline Curve curve_from_j(const FieldElement& j) {
  const Field& f = j.field();
  if (f->p < 5) config_error("ellcurve", "characteristic must be >= 5");
  if (j.is_zero()) return make_curve(FieldElement(f), FieldElement(f, 1));
  FieldElement k1728(f, 1728);
  if (j == k1728) return make_curve(FieldElement(f, 1), FieldElement(f));
  FieldElement d = k1728 - j;
  return make_curve(FieldElement(f, 3) * j * d, FieldElement(f, 2) * j * d * d);
}

inline Curve base_change(const Curve& e, const Embedding& emb) {
  return Curve{emb.to(), emb.lift(e.a4), emb.lift(e.a6)};
}

struct Point {
  FieldElement x, y;
  bool inf = false;

  static Point infinity(const Field& f) { return Point{FieldElement(f), FieldElement(f), true}; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.inf || b.inf) return a.inf == b.inf;
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator!=(const Point& a, const Point& b) { return !(a == b); }
  friend bool operator<(const Point& a, const Point& b) {
    if (a.inf != b.inf) return a.inf;
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  }
  std::string to_string() const { return inf ? "O" : "(" + x.to_string() + ", " + y.to_string() + ")"; }
};

inline std::ostream& operator<<(std::ostream& os, const Point& P) { return os << P.to_string(); }
inline std::ostream& operator<<(std::ostream& os, const Curve& e) { return os << e.to_string(); }

inline bool on_curve(const Curve& e, const Point& P) { return P.inf || P.y * P.y == e.rhs(P.x); }

inline Point neg(const Point& P) { return P.inf ? P : Point{P.x, -P.y, false}; }

inline Point add(const Curve& e, const Point& P, const Point& Q) {
  if (P.inf) return Q;
  if (Q.inf) return P;
  FieldElement lam;
  if (P.x == Q.x) {
    if ((P.y + Q.y).is_zero()) return Point::infinity(e.field);
    lam = (P.x * P.x * FieldElement(e.field, 3) + e.a4) / (P.y + P.y);
  } else {
    lam = (Q.y - P.y) / (Q.x - P.x);
  }
  FieldElement x3 = lam * lam - P.x - Q.x;
  return Point{x3, lam * (P.x - x3) - P.y, false};
}

inline Point mul(const Curve& e, Point P, u128 n) {
  Point r = Point::infinity(e.field);
  while (n) {
    if (n & 1) r = add(e, r, P);
    P = add(e, P, P);
    n >>= 1;
  }
  return r;
}

inline Point mul_signed(const Curve& e, const Point& P, i64 n) {
  return n >= 0 ? mul(e, P, static_cast<u128>(n)) : neg(mul(e, P, static_cast<u128>(-n)));
}

inline Point frobenius_point(const Point& P, int k = 1) {
  if (P.inf) return P;
  return Point{frobenius(P.x, k), frobenius(P.y, k), false};
}

inline Point random_point(const Curve& e, std::mt19937_64& rng) {
  for (;;) {
    FieldElement x = FieldElement::random(e.field, rng);
    auto y = sqrt(e.rhs(x));
    if (!y) continue;
    if (rng() & 1) *y = -*y;
    return Point{x, *y, false};
  }
}

// Quadratic character table indexed by FieldElement::index().
inline std::vector<signed char> quadratic_character_table(const Field& f) {
  if (f->order > scaled_cap(1000000)) budget_error("ellcurve", "field of order > 10^6 is beyond the point-count scan budget");
  std::size_t q = static_cast<std::size_t>(f->order);
  std::vector<signed char> chi(q, -1);
  chi[0] = 0;
  for (std::size_t i = 1; i < q; ++i) {
    FieldElement y = FieldElement::from_index(f, i);
    chi[static_cast<std::size_t>((y * y).index())] = 1;
  }
  return chi;
}

inline u64 count_points(const Curve& e, const std::vector<signed char>& chi) {
  std::size_t q = static_cast<std::size_t>(e.field->order);
  i64 n = 1;
  for (std::size_t i = 0; i < q; ++i) n += 1 + chi[static_cast<std::size_t>(e.rhs(FieldElement::from_index(e.field, i)).index())];
  return static_cast<u64>(n);
}

inline u64 count_points(const Curve& e) { return count_points(e, quadratic_character_table(e.field)); }

inline i64 frobenius_trace(const Curve& e) {
  return static_cast<i64>(e.field->order) + 1 - static_cast<i64>(count_points(e));
}

inline bool is_supersingular(const Curve& e) { return frobenius_trace(e) % static_cast<i64>(e.field->p) == 0; }

// All twists of e over its field: quadratic in general, quartic at j = 1728,
// sextic at j = 0. Parametrized by powers of the primitive element.
inline std::vector<Curve> twists(const Curve& e) {
  const Field& f = e.field;
  FieldElement g = primitive_element(f);
  std::vector<Curve> out;
  if (e.a6.is_zero()) {
    FieldElement d = g.one();
    for (int i = 0; i < 4; ++i, d = d * g) out.push_back(Curve{f, e.a4 * d, e.a6});
  } else if (e.a4.is_zero()) {
    FieldElement d = g.one();
    for (int i = 0; i < 6; ++i, d = d * g) out.push_back(Curve{f, e.a4, e.a6 * d});
  } else {
    out.push_back(e);
    out.push_back(Curve{f, e.a4 * g * g, e.a6 * g * g * g});
  }
  return out;
}

// The twist of the standard model over F_{p^2} with (p+1)^2 points, so that the
// p^2-power Frobenius acts as [-p].
inline Curve canonical_model(const FieldElement& j) {
  const Field& f = j.field();
  if (f->m != 2) config_error("ellcurve", "canonical models live over F_{p^2}");
  u64 p = f->p;
  u64 target = (p + 1) * (p + 1);
  auto chi = quadratic_character_table(f);
  for (const Curve& t : twists(curve_from_j(j)))
    if (count_points(t, chi) == target) return t;
  throw Error(ErrorKind::Internal, "ellcurve", "no twist with (p+1)^2 points for j = " + j.to_string());
}

inline bool is_canonical_type(const Curve& e) {
  return e.field->m == 2 && count_points(e) == (e.field->p + 1) * (e.field->p + 1);
}

// Check (x^{p^2}, y^{p^2}) = [-p]P on points defined over F_{p^4}.
inline bool verify_frobenius_minus_p(const Curve& e, int samples, std::mt19937_64& rng) {
  Field big = make_field(e.field->p, 4);
  Embedding emb(e.field, big);
  Curve eb = base_change(e, emb);
  for (int s = 0; s < samples; ++s) {
    Point P = random_point(eb, rng);
    if (frobenius_point(P, 2) != neg(mul(eb, P, e.field->p))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Weil pairing via Miller's algorithm; nullopt when an evaluation degenerates.

namespace detail {

inline std::optional<FieldElement> miller(const Curve& e, const Point& P, const Point& Q, u64 n) {
  const Field& f = e.field;
  // For P of order d | n, f_{n,P} = f_{d,P}^{n/d}; the loop below needs exact order.
  u64 d = n;
  for (u64 c = 1; c < n; ++c)
    if (n % c == 0 && mul(e, P, c).inf) {
      d = c;
      break;
    }
  if (d < n) {
    if (d == 1) return FieldElement(f, 1);
    auto r = miller(e, P, Q, d);
    if (!r) return r;
    return r->pow(n / d);
  }
  FieldElement num(f, 1), den(f, 1);
  Point T = P;
  int top = 63;
  while (!((n >> top) & 1)) --top;
  auto step = [&](const Point& A, const Point& B) {
    // Line through A and B evaluated at Q, divided by the vertical at A + B.
    Point S = add(e, A, B);
    if (A.x == B.x && (A.y + B.y).is_zero()) {
      num *= Q.x - A.x;
    } else {
      FieldElement lam = A == B ? (A.x * A.x * FieldElement(f, 3) + e.a4) / (A.y + A.y) : (B.y - A.y) / (B.x - A.x);
      num *= Q.y - A.y - lam * (Q.x - A.x);
      den *= Q.x - S.x;
    }
    return S;
  };
  for (int i = top - 1; i >= 0; --i) {
    num = num * num;
    den = den * den;
    T = step(T, T);
    if ((n >> i) & 1) T = step(T, P);
  }
  if (num.is_zero() || den.is_zero()) return std::nullopt;
  return num / den;
}

}  // namespace detail

inline std::optional<FieldElement> weil_pairing(const Curve& e, const Point& P, const Point& Q, u64 n) {
  if (P.inf || Q.inf || P == Q) return std::nullopt;
  auto a = detail::miller(e, P, Q, n), b = detail::miller(e, Q, P, n);
  if (!a || !b) return std::nullopt;
  FieldElement r = *a / *b;
  return n % 2 ? -r : r;
}

// ---------------------------------------------------------------------------
// Division polynomials, with psi_n = F_n for odd n and y F_n for even n.

inline std::vector<Poly> division_polynomials(const Curve& e, int upto) {
  const Field& f = e.field;
  auto c = [&](i64 v) { return FieldElement(f, static_cast<u64>(mod_floor(v, static_cast<i64>(f->p)))); };
  const FieldElement& a = e.a4;
  const FieldElement& b = e.a6;
  FieldElement z(f);
  std::vector<Poly> F(std::max(upto + 1, 5), Poly(f));
  F[0] = Poly(f);
  F[1] = Poly::constant(c(1));
  F[2] = Poly::constant(c(2));
  F[3] = Poly(f, {-(a * a), b * c(12), a * c(6), z, c(3)});
  F[4] = Poly(f, {-(a * a * a) * c(4) - b * b * c(32), -(a * b) * c(16), -(a * a) * c(20), b * c(80), a * c(20), z, c(4)});
  Poly rhs = e.rhs_poly();
  Poly rhs2 = rhs * rhs;
  FieldElement half = c(2).inverse();
  for (int n = 5; n <= upto; ++n) {
    int m = n / 2;
    if (n % 2) {
      if (m % 2 == 0)
        F[n] = rhs2 * F[m + 2] * F[m] * F[m] * F[m] - F[m - 1] * F[m + 1] * F[m + 1] * F[m + 1];
      else
        F[n] = F[m + 2] * F[m] * F[m] * F[m] - rhs2 * F[m - 1] * F[m + 1] * F[m + 1] * F[m + 1];
    } else {
      F[n] = F[m] * (F[m + 2] * F[m - 1] * F[m - 1] - F[m - 2] * F[m + 1] * F[m + 1]) * half;
    }
  }
  F.resize(upto + 1);
  return F;
}

// Monic polynomial whose roots are the x-coordinates of the nonzero l-torsion.
inline Poly torsion_x_poly(const Curve& e, int l) {
  if (l == 2) return e.rhs_poly();
  return division_polynomials(e, l)[l].monic();
}

// ---------------------------------------------------------------------------
// Torsion bases and discrete logarithms on E[N].

struct TorsionBasis {
  u64 n = 0;
  Field field;      // L, containing E[N]
  Embedding emb;    // base field -> L
  Curve curve;      // base change to L
  Point P, Q;
  std::map<Point, std::pair<u64, u64>> dlog;  // aP + bQ -> (a, b)

  std::pair<u64, u64> log(const Point& R) const {
    auto it = dlog.find(R);
    if (it == dlog.end()) throw Error(ErrorKind::Internal, "ellcurve", "point is not N-torsion");
    return it->second;
  }
  Point combo(u64 a, u64 b) const { return add(curve, mul(curve, P, a % n), mul(curve, Q, b % n)); }
};

namespace detail {

inline std::optional<std::map<Point, std::pair<u64, u64>>> span_table(const Curve& e, const Point& P, const Point& Q, u64 n) {
  std::map<Point, std::pair<u64, u64>> t;
  Point row = Point::infinity(e.field);
  for (u64 a = 0; a < n; ++a) {
    Point cur = row;
    for (u64 b = 0; b < n; ++b) {
      if (!t.emplace(cur, std::make_pair(a, b)).second) return std::nullopt;
      cur = add(e, cur, Q);
    }
    row = add(e, row, P);
  }
  return t;
}

// Smallest k >= 1 with (-p)^k = 1 mod n.
inline int canonical_torsion_degree(u64 p, u64 n) {
  i64 m = static_cast<i64>(n);
  i64 x = 1, mp = mod_floor(-static_cast<i64>(p), m);
  for (int k = 1; k <= 1000; ++k) {
    x = static_cast<i64>(mulmod(static_cast<u64>(x), static_cast<u64>(mp), n));
    if (x == 1 % m) return k;
  }
  config_error("ellcurve", "N must be coprime to p");
}

inline int max_extension_degree() { return static_cast<int>(std::min<u64>(scaled_cap(12), 32)); }

}  // namespace detail

// E[N] for a curve over F_{p^2} whose Frobenius is [-p]: over L = F_{p^{2k}},
// E(L) = E[M] with M = |(-p)^k - 1|, so cofactor multiples of random points
// are uniform in E[N].
inline TorsionBasis torsion_basis_canonical(const Curve& e, u64 n, u64 seed = 1) {
  u64 p = e.field->p;
  if (n < 2 || n % p == 0) config_error("ellcurve", "torsion level must be >= 2 and coprime to p");
  int k = detail::canonical_torsion_degree(p, n);
  if (k > detail::max_extension_degree())
    budget_error("ellcurve", "E[" + std::to_string(n) + "] needs a degree-" + std::to_string(k) +
                                 " extension of F_{p^2}; raise SSMOD_BUDGET to allow it");
  TorsionBasis tb;
  tb.n = n;
  tb.field = k == 1 ? e.field : make_field(p, 2 * k);
  tb.emb = Embedding(e.field, tb.field);
  tb.curve = base_change(e, tb.emb);
  // (-p)^k - 1 in absolute value
  i64 sgn = k % 2 ? -1 : 1;
  u128 pk = ipow128(p, k);
  u128 M = sgn > 0 ? pk - 1 : pk + 1;
  u128 cof = M / n;
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 200; ++attempt) {
    Point P = mul(tb.curve, random_point(tb.curve, rng), cof);
    Point Q = mul(tb.curve, random_point(tb.curve, rng), cof);
    auto t = detail::span_table(tb.curve, P, Q, n);
    if (!t) continue;
    tb.P = P;
    tb.Q = Q;
    tb.dlog = std::move(*t);
    return tb;
  }
  throw Error(ErrorKind::Internal, "ellcurve", "failed to find a torsion basis");
}

// E[l] for prime l on any curve, from the roots of the l-division polynomial.
inline TorsionBasis torsion_basis_prime(const Curve& e, u64 l) {
  u64 p = e.field->p;
  if (!is_prime(l) || l == p) config_error("ellcurve", "torsion_basis_prime needs a prime l != p");
  Poly h = torsion_x_poly(e, static_cast<int>(l));
  int d = 1;
  for (const auto& pf : factor(h)) d = std::lcm(d, pf.factor.degree());
  std::vector<Point> pts;
  Field L;
  Embedding emb;
  Curve eL;
  for (int ext : {d, 2 * d}) {
    if (ext > detail::max_extension_degree())
      budget_error("ellcurve", "E[" + std::to_string(l) + "] needs a degree-" + std::to_string(ext) + " extension");
    L = ext == 1 ? e.field : make_field(p, e.field->m * ext);
    emb = Embedding(e.field, L);
    eL = base_change(e, emb);
    pts.clear();
    for (const auto& r : roots(emb.lift(h))) {
      auto y = sqrt(eL.rhs(r.root));
      if (!y) break;
      pts.push_back(Point{r.root, *y, false});
    }
    if (pts.size() == (l * l - 1) / (l == 2 ? 1 : 2)) break;
  }
  if (pts.size() != (l * l - 1) / (l == 2 ? 1 : 2)) throw Error(ErrorKind::Internal, "ellcurve", "l-torsion not found");
  std::sort(pts.begin(), pts.end());
  TorsionBasis tb;
  tb.n = l;
  tb.field = L;
  tb.emb = emb;
  tb.curve = eL;
  tb.P = pts[0];
  for (std::size_t i = 1; i < pts.size(); ++i) {
    auto t = detail::span_table(eL, pts[0], pts[i], l);
    if (!t) continue;
    tb.Q = pts[i];
    tb.dlog = std::move(*t);
    return tb;
  }
  throw Error(ErrorKind::Internal, "ellcurve", "l-torsion points do not span");
}

inline TorsionBasis torsion_basis(const Curve& e, u64 n, u64 seed = 1) {
  if (is_canonical_type(e)) return torsion_basis_canonical(e, n, seed);
  if (is_prime(n)) return torsion_basis_prime(e, n);
  config_error("ellcurve", "composite torsion level needs a curve with Frobenius [-p]");
}

// ---------------------------------------------------------------------------
// Isogenies as chains of Velu steps and isomorphisms (x, y) -> (u^2 x, u^3 y).

struct IsogenyStep {
  bool is_velu = true;
  Curve domain, codomain;
  Poly kernel;                 // Velu: monic kernel polynomial
  Poly xnum, xden;             // Velu: X = xnum / xden
  Poly ynum, yden;             // Velu: Y = y * ynum / yden
  u64 degree = 1;
  FieldElement u;              // isomorphism parameter
};

struct Isogeny {
  Curve domain, codomain;
  std::vector<IsogenyStep> steps;
  u64 degree = 1;
  // pullback of dx/y on the codomain equals scalar * dx/y on the domain
  FieldElement scalar;
  Poly kernel_poly;  // for a single Velu step

  std::string to_string() const {
    return "isogeny of degree " + std::to_string(degree) + " to " + codomain.to_string() + ", scalar " + scalar.to_string();
  }
};

inline Isogeny identity_isogeny(const Curve& e) {
  Isogeny i;
  i.domain = e;
  i.codomain = e;
  i.scalar = FieldElement(e.field, 1);
  i.kernel_poly = Poly::constant(FieldElement(e.field, 1));
  return i;
}

// Velu from a monic kernel polynomial of a cyclic kernel of order l (l = 2 or odd).
inline Isogeny velu(const Curve& e, const Poly& kernel, u64 l) {
  const Field& f = e.field;
  if (l % f->p == 0) config_error("ellcurve", "kernel order divisible by p");
  if (l == 1) return identity_isogeny(e);
  Poly D = kernel.monic();
  int d = D.degree();
  auto c = [&](i64 v) { return FieldElement(f, static_cast<u64>(mod_floor(v, static_cast<i64>(f->p)))); };
  Poly xp = Poly::x(f);
  Poly fx = e.rhs_poly();
  IsogenyStep s;
  s.is_velu = true;
  s.domain = e;
  s.kernel = D;
  s.degree = l;
  FieldElement v, w;
  if (l == 2) {
    if (d != 1 || !(fx % D).is_zero()) config_error("ellcurve", "degree-2 kernel must be a root of x^3 + a4 x + a6");
    FieldElement x0 = -D.coeff(0);
    v = x0 * x0 * c(3) + e.a4;
    w = x0 * v;
    s.xnum = xp * D + Poly::constant(v);
    s.xden = D;
  } else {
    if (l % 2 == 0 || static_cast<u64>(2 * d + 1) != l) config_error("ellcurve", "kernel polynomial degree does not match l");
    // Power sums of the roots via Newton's identities.
    FieldElement e1 = -D.coeff(d - 1);
    FieldElement e2 = d >= 2 ? D.coeff(d - 2) : FieldElement(f);
    FieldElement e3 = d >= 3 ? -D.coeff(d - 3) : FieldElement(f);
    FieldElement s1 = e1, s2 = e1 * s1 - e2.scale(2);
    FieldElement s3 = e1 * s2 - e2 * s1 + e3.scale(3);
    v = s2.scale(6) + e.a4.scale(2 * d % f->p);
    w = s3.scale(10) + e.a4 * s1.scale(6) + e.a6.scale(4 * d % f->p);
    Poly Dp = D.derivative(), Dpp = Dp.derivative();
    Poly lin = xp * c(1 + 2 * d) - Poly::constant(s1.scale(2));
    s.xnum = lin * D * D - fx.derivative() * Dp * D * c(2) + fx * (Dp * Dp - D * Dpp) * c(4);
    s.xden = D * D;
  }
  // Y = y dX/dx
  s.ynum = s.xnum.derivative() * s.xden - s.xnum * s.xden.derivative();
  s.yden = s.xden * s.xden;
  s.codomain = make_curve(e.a4 - v.scale(5), e.a6 - w.scale(7));
  Isogeny iso;
  iso.domain = e;
  iso.codomain = s.codomain;
  iso.degree = l;
  iso.scalar = FieldElement(f, 1);
  iso.kernel_poly = D;
  iso.steps.push_back(s);
  return iso;
}

// All u with (x, y) -> (u^2 x, u^3 y) mapping e1 onto e2, sorted.
inline std::vector<FieldElement> isomorphisms(const Curve& e1, const Curve& e2) {
  const Field& f = e1.field;
  std::vector<FieldElement> out;
  if (e1.j_invariant() != e2.j_invariant()) return out;
  auto roots_of = [&](int deg, const FieldElement& c) {
    std::vector<FieldElement> co(deg + 1, FieldElement(f));
    co[0] = -c;
    co[deg] = FieldElement(f, 1);
    for (const auto& r : roots(Poly(f, co))) out.push_back(r.root);
  };
  if (e1.a4.is_zero()) {
    roots_of(6, e2.a6 / e1.a6);
  } else if (e1.a6.is_zero()) {
    roots_of(4, e2.a4 / e1.a4);
  } else {
    FieldElement r = (e2.a6 / e1.a6) * (e1.a4 / e2.a4);
    auto u = sqrt(r);
    if (u) {
      out.push_back(*u);
      out.push_back(-*u);
    }
  }
  std::vector<FieldElement> ok;
  for (const auto& u : out) {
    FieldElement u2 = u * u, u4 = u2 * u2;
    if (e2.a4 == u4 * e1.a4 && e2.a6 == u4 * u2 * e1.a6) ok.push_back(u);
  }
  std::sort(ok.begin(), ok.end());
  ok.erase(std::unique(ok.begin(), ok.end()), ok.end());
  return ok;
}

inline Isogeny isomorphism(const Curve& e, const FieldElement& u) {
  IsogenyStep s;
  s.is_velu = false;
  s.domain = e;
  FieldElement u2 = u * u;
  s.codomain = Curve{e.field, u2 * u2 * e.a4, u2 * u2 * u2 * e.a6};
  s.u = u;
  s.degree = 1;
  Isogeny i;
  i.domain = e;
  i.codomain = s.codomain;
  i.degree = 1;
  i.scalar = u.inverse();
  i.kernel_poly = Poly::constant(FieldElement(e.field, 1));
  i.steps.push_back(s);
  return i;
}

// second after first
inline Isogeny compose(const Isogeny& second, const Isogeny& first) {
  if (!(first.codomain == second.domain)) throw Error(ErrorKind::Internal, "ellcurve", "isogenies do not compose");
  Isogeny r;
  r.domain = first.domain;
  r.codomain = second.codomain;
  r.steps = first.steps;
  r.steps.insert(r.steps.end(), second.steps.begin(), second.steps.end());
  r.degree = first.degree * second.degree;
  r.scalar = first.scalar * second.scalar;
  r.kernel_poly = first.steps.empty() ? second.kernel_poly : second.steps.empty() ? first.kernel_poly : Poly(first.domain.field);
  return r;
}

// Isogeny evaluated on points over an extension L of its field of definition.
class LiftedIsogeny {
 public:
  LiftedIsogeny(const Isogeny& phi, const Field& L) {
    Embedding emb(phi.domain.field, L);
    for (const auto& s : phi.steps) {
      Lifted l;
      l.is_velu = s.is_velu;
      l.codomain = base_change(s.codomain, emb);
      if (s.is_velu) {
        l.xnum = emb.lift(s.xnum);
        l.xden = emb.lift(s.xden);
        l.ynum = emb.lift(s.ynum);
        l.yden = emb.lift(s.yden);
      } else {
        l.u2 = emb.lift(s.u * s.u);
        l.u3 = l.u2 * emb.lift(s.u);
      }
      steps_.push_back(l);
    }
    field_ = L;
  }

  Point operator()(Point P) const {
    for (const auto& s : steps_) {
      if (P.inf) return Point::infinity(field_);
      if (s.is_velu) {
        FieldElement den = s.xden(P.x);
        if (den.is_zero()) return Point::infinity(field_);
        P = Point{s.xnum(P.x) / den, P.y * s.ynum(P.x) / s.yden(P.x), false};
      } else {
        P = Point{P.x * s.u2, P.y * s.u3, false};
      }
    }
    return P;
  }

 private:
  struct Lifted {
    bool is_velu;
    Curve codomain;
    Poly xnum, xden, ynum, yden;
    FieldElement u2, u3;
  };
  std::vector<Lifted> steps_;
  Field field_;
};

// Kernel polynomial (over the base field) of the cyclic subgroup generated by
// a point G of prime order l over an extension; nullopt if not Galois-stable.
inline std::optional<Poly> kernel_polynomial(const Curve& eL, const Embedding& emb, const Point& G, u64 l) {
  std::vector<FieldElement> xs;
  Point R = G;
  u64 half = l == 2 ? 1 : (l - 1) / 2;
  for (u64 i = 0; i < half; ++i) {
    xs.push_back(R.x);
    R = add(eL, R, G);
  }
  Poly k = poly_from_roots(xs, eL.field);
  return emb.restrict(k);
}

struct Subgroup {
  Poly kernel_poly;  // over the curve's field
  Point generator;   // over the torsion field
};

struct SubgroupList {
  TorsionBasis torsion;
  std::vector<Subgroup> subgroups;
};

// The l+1 cyclic subgroups of order l, generated by Q and P + bQ.
inline SubgroupList ell_subgroups(const Curve& e, u64 l, u64 seed = 1) {
  if (!is_prime(l) || l == e.field->p) config_error("ellcurve", "l must be a prime different from p");
  if (l > scaled_cap(13)) budget_error("ellcurve", "l > 13 is beyond the subgroup enumeration budget");
  SubgroupList out;
  out.torsion = torsion_basis(e, l, seed);
  const TorsionBasis& tb = out.torsion;
  std::vector<Point> gens{tb.Q};
  for (u64 b = 0; b < l; ++b) gens.push_back(tb.combo(1, b));
  for (const auto& G : gens) {
    auto k = kernel_polynomial(tb.curve, tb.emb, G, l);
    if (!k) config_error("ellcurve", "order-l subgroup is not Galois-stable over the base field");
    out.subgroups.push_back({*k, G});
  }
  return out;
}

// The Velu isogeny with kernel C followed by the isomorphism onto the
// canonical model of its codomain (first u in sorted order).
inline Isogeny to_canonical(const Isogeny& phi) {
  Curve target = canonical_model(phi.codomain.j_invariant());
  auto us = isomorphisms(phi.codomain, target);
  if (us.empty()) throw Error(ErrorKind::Internal, "ellcurve", "codomain is not isomorphic to the canonical model over F_{p^2}");
  return compose(isomorphism(phi.codomain, us.front()), phi);
}

// Dual of a chain: reverse order, dual of each step.
inline Isogeny dual(const Isogeny& phi, u64 seed = 1) {
  Isogeny r = identity_isogeny(phi.codomain);
  for (auto it = phi.steps.rbegin(); it != phi.steps.rend(); ++it) {
    const IsogenyStep& s = *it;
    Isogeny d;
    if (!s.is_velu) {
      d = isomorphism(s.codomain, s.u.inverse());
    } else {
      u64 l = s.degree;
      Isogeny single;
      single.domain = s.domain;
      single.codomain = s.codomain;
      single.steps = {s};
      single.degree = l;
      single.scalar = FieldElement(s.domain.field, 1);
      TorsionBasis tb = torsion_basis(s.domain, l, seed);
      LiftedIsogeny lift(single, tb.field);
      Point img = lift(tb.P);
      if (img.inf) img = lift(tb.Q);
      Curve codL = base_change(s.codomain, tb.emb);
      auto k = kernel_polynomial(codL, tb.emb, img, l);
      if (!k) throw Error(ErrorKind::Internal, "ellcurve", "dual kernel not rational");
      Isogeny back = velu(s.codomain, *k, l);
      FieldElement u = FieldElement(s.domain.field, l).inverse();
      Isogeny fix = isomorphism(back.codomain, u);
      if (!(fix.codomain == s.domain)) throw Error(ErrorKind::Internal, "ellcurve", "dual does not return to the domain");
      d = compose(fix, back);
    }
    r = compose(d, r);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Local invariants at l: the matrix of phi on E[l^n] and its Smith type.

struct TorsionMatrix {
  u64 modulus = 1;  // l^n
  ZMatrix m;        // columns are coordinates of phi(P), phi(Q)
};

inline TorsionMatrix torsion_matrix(const Isogeny& phi, const TorsionBasis& dom, const TorsionBasis& cod) {
  if (dom.n != cod.n || !same_field(dom.field, cod.field))
    config_error("ellcurve", "torsion bases must share level and field");
  LiftedIsogeny lift(phi, dom.field);
  TorsionMatrix t;
  t.modulus = dom.n;
  t.m = ZMatrix(2, 2, 0);
  auto a = cod.log(lift(dom.P)), b = cod.log(lift(dom.Q));
  t.m(0, 0) = a.first;
  t.m(1, 0) = a.second;
  t.m(0, 1) = b.first;
  t.m(1, 1) = b.second;
  return t;
}

struct IsogenyType {
  u64 l = 0;
  int a = 0, b = 0;  // exponents, a <= b
  std::string to_string() const {
    return "(" + std::to_string(l) + "^" + std::to_string(a) + ", " + std::to_string(l) + "^" + std::to_string(b) + ")";
  }
  friend bool operator==(const IsogenyType& x, const IsogenyType& y) { return x.l == y.l && x.a == y.a && x.b == y.b; }
};

inline IsogenyType smith_type(const ZMatrix& m, u64 l, int n) {
  LocalSmith s = smith_local(m, l, n);
  IsogenyType t;
  t.l = l;
  t.a = s.valuations[0];
  t.b = s.valuations[1];
  if (t.a > t.b) std::swap(t.a, t.b);
  return t;
}

// Both domain and codomain must have Frobenius [-p] (true for chains starting
// at a canonical model).
inline IsogenyType isogeny_type(const Isogeny& phi, u64 l, u64 seed = 1) {
  int n = valuation(phi.degree, l);
  IsogenyType t;
  t.l = l;
  if (n == 0) return t;
  // At level l^n the exponents sum to n, so a valuation of n is exact.
  u64 N = ipow(l, n);
  TorsionBasis dom = torsion_basis_canonical(phi.domain, N, seed);
  TorsionBasis cod = torsion_basis_canonical(phi.codomain, N, seed + 1);
  return smith_type(torsion_matrix(phi, dom, cod).m, l, n);
}

struct KerCoker {
  u64 ker_order = 0, coker_order = 0;
  std::vector<u64> ker_profile, coker_profile;  // |{x : l^i x = 0}| for i = 0..n
  bool match = false;
};

inline KerCoker ker_coker_check(const Isogeny& phi, u64 l, int n, u64 seed = 1) {
  if (n < valuation(phi.degree, l)) config_error("ellcurve", "n must be at least ord_l(deg phi)");
  u64 N = ipow(l, n);
  TorsionBasis dom = torsion_basis_canonical(phi.domain, N, seed);
  TorsionBasis cod = torsion_basis_canonical(phi.codomain, N, seed + 1);
  LiftedIsogeny lift(phi, dom.field);
  std::vector<Point> ker;
  std::set<std::pair<u64, u64>> image;
  for (const auto& [pt, ab] : dom.dlog) {
    Point im = lift(pt);
    if (im.inf) ker.push_back(pt);
    image.insert(cod.log(im));
  }
  KerCoker r;
  r.ker_order = ker.size();
  r.coker_order = N * N / image.size();
  for (int i = 0; i <= n; ++i) {
    u64 li = ipow(l, i);
    u64 kc = 0;
    for (const auto& pt : ker)
      if (mul(dom.curve, pt, li).inf) ++kc;
    r.ker_profile.push_back(kc);
    // x in coker with l^i x = 0: count y with l^i y in image, divide by |image|.
    u64 cc = 0;
    for (u64 a = 0; a < N; ++a)
      for (u64 b = 0; b < N; ++b)
        if (image.count({a * li % N, b * li % N})) ++cc;
    r.coker_profile.push_back(cc / image.size());
  }
  r.match = r.ker_order == r.coker_order && r.ker_profile == r.coker_profile;
  return r;
}

}  // namespace ssmod
