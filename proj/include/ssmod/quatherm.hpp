#pragma once

#include <algorithm>
#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ssmod/ff.hpp"
#include "ssmod/matrix.hpp"
#include "ssmod/util.hpp"

// Definite quaternion algebras over Q, quaternion hermitian forms, and the
// split model of B (x) F_q used to compare unitary and symplectic similitudes.

namespace ssmod {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(s));
    BigInt num(s.substr(0, slash)), den(s.substr(slash + 1));
    if (den == 0) config_error("quatherm", "zero denominator in '" + s + "'");
    return Rational(num, den);
  } catch (const std::runtime_error&) {
    config_error("quatherm", "cannot parse rational '" + s + "'");
  }
}

inline std::string rational_to_string(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

// ---------------------------------------------------------------------------
// Hilbert symbols over Q. Place 0 stands for the real place.

namespace detail {

inline int legendre(i64 u, u64 l) {
  u64 r = static_cast<u64>(mod_floor(u, static_cast<i64>(l)));
  if (r == 0) return 0;
  return powmod(r, (l - 1) / 2, l) == 1 ? 1 : -1;
}

// a = l^v u with u prime to l
inline std::pair<int, i64> split_off(i64 a, u64 l) {
  int v = 0;
  while (a % static_cast<i64>(l) == 0) {
    a /= static_cast<i64>(l);
    ++v;
  }
  return {v, a};
}

}  // namespace detail

inline int hilbert_symbol(i64 a, i64 b, u64 place) {
  if (a == 0 || b == 0) config_error("quatherm", "Hilbert symbol of zero");
  if (place == 0) return a < 0 && b < 0 ? -1 : 1;
  auto [va, u] = detail::split_off(a, place);
  auto [vb, v] = detail::split_off(b, place);
  if (place == 2) {
    auto eps = [](i64 x) { return static_cast<int>(mod_floor((x - 1) / 2, 2)); };
    auto omega = [](i64 x) {
      i64 r = mod_floor(x, 16);
      return static_cast<int>(((r * r - 1) / 8) % 2);
    };
    int e = eps(u) * eps(v) + va * omega(v) + vb * omega(u);
    return e % 2 ? -1 : 1;
  }
  int sign = (va * vb % 2 && (place - 1) / 2 % 2) ? -1 : 1;
  int lu = vb % 2 ? detail::legendre(u, place) : 1;
  int lv = va % 2 ? detail::legendre(v, place) : 1;
  return sign * lu * lv;
}

// The real place, 2, and every prime dividing a b.
inline std::vector<u64> relevant_places(i64 a, i64 b) {
  std::vector<u64> out{0, 2};
  for (i64 x : {a, b})
    for (auto [l, e] : factor_int(static_cast<u64>(x < 0 ? -x : x)))
      if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Quaternions w + x i + y j + z k with i^2 = a, j^2 = b, k = ij = -ji, over any
// commutative scalar ring S.

template <class S>
struct Quat {
  S a, b;
  S w, x, y, z;

  Quat operator+(const Quat& o) const { return {a, b, w + o.w, x + o.x, y + o.y, z + o.z}; }
  Quat operator-(const Quat& o) const { return {a, b, w - o.w, x - o.x, y - o.y, z - o.z}; }
  Quat operator-() const {
    S zero = w - w;
    return {a, b, zero - w, zero - x, zero - y, zero - z};
  }
  Quat operator*(const Quat& o) const {
    return {a,
            b,
            w * o.w + a * x * o.x + b * y * o.y - a * b * z * o.z,
            w * o.x + x * o.w - b * y * o.z + b * z * o.y,
            w * o.y + y * o.w + a * x * o.z - a * z * o.x,
            w * o.z + z * o.w + x * o.y - y * o.x};
  }
  Quat scale(const S& s) const { return {a, b, w * s, x * s, y * s, z * s}; }
  friend bool operator==(const Quat& p, const Quat& q) { return p.w == q.w && p.x == q.x && p.y == q.y && p.z == q.z; }
};

template <class S>
Quat<S> conjugate(const Quat<S>& q) {
  S zero = q.w - q.w;
  return {q.a, q.b, q.w, zero - q.x, zero - q.y, zero - q.z};
}

template <class S>
S norm(const Quat<S>& q) {
  return q.w * q.w - q.a * q.x * q.x - q.b * q.y * q.y + q.a * q.b * q.z * q.z;
}

template <class S>
bool is_scalar(const Quat<S>& q) {
  S zero = q.w - q.w;
  return q.x == zero && q.y == zero && q.z == zero;
}

using QuatQ = Quat<Rational>;
using QuatMatrix = Matrix<QuatQ>;

struct QuatAlgebra {
  u64 p = 0;
  i64 a = 0, b = 0;
  std::vector<std::pair<u64, int>> symbols;  // (place, Hilbert symbol) over the relevant places

  QuatQ element(Rational w, Rational x = 0, Rational y = 0, Rational z = 0) const {
    return {Rational(a), Rational(b), w, x, y, z};
  }
  QuatQ one() const { return element(1); }
  QuatQ zero() const { return element(0); }
  std::vector<u64> ramified() const {
    std::vector<u64> out;
    for (auto [v, s] : symbols)
      if (s == -1) out.push_back(v);
    return out;
  }
};

inline QuatAlgebra certify(u64 p, i64 a, i64 b) {
  QuatAlgebra B;
  B.p = p;
  B.a = a;
  B.b = b;
  auto places = relevant_places(a, b);
  if (std::find(places.begin(), places.end(), p) == places.end()) places.push_back(p);
  std::sort(places.begin(), places.end());
  for (u64 v : places) B.symbols.push_back({v, hilbert_symbol(a, b, v)});
  return B;
}

// (a, b) with ramification exactly at {p, infinity}.
inline QuatAlgebra build_algebra(u64 p) {
  if (!is_prime(p)) config_error("quatherm", "p must be prime (got " + std::to_string(p) + ")");
  std::vector<u64> want{0, p};
  auto ok = [&](const QuatAlgebra& B) { return B.ramified() == want; };
  if (p == 2) {
    QuatAlgebra B = certify(2, -1, -1);
    if (!ok(B)) throw Error(ErrorKind::Internal, "quatherm", "(-1,-1) failed certification");
    return B;
  }
  if (p % 4 == 3) {
    QuatAlgebra B = certify(p, -1, -static_cast<i64>(p));
    if (!ok(B)) throw Error(ErrorKind::Internal, "quatherm", "(-1,-p) failed certification");
    return B;
  }
  u64 cap = scaled_cap(1000);
  for (u64 q = 3; q <= cap; ++q) {
    if (!is_prime(q)) continue;
    QuatAlgebra B = certify(p, -static_cast<i64>(q), -static_cast<i64>(p));
    if (ok(B)) return B;
  }
  budget_error("quatherm", "no auxiliary prime q <= " + std::to_string(cap) + " gives (-q,-p) ramified at {p, inf}");
}

inline QuatQ inverse(const QuatQ& q) {
  Rational n = norm(q);
  if (n == 0) config_error("quatherm", "zero quaternion has no inverse");
  return conjugate(q).scale(1 / n);
}

inline QuatQ random_quat(const QuatAlgebra& B, std::mt19937_64& rng, int height) {
  std::uniform_int_distribution<int> num(-height, height), den(1, height);
  auto r = [&] { return Rational(num(rng), den(rng)); };
  Rational w = r(), x = r(), y = r(), z = r();
  return B.element(w, x, y, z);
}

// ---------------------------------------------------------------------------
// Norm equations n(x) = alpha, by search over a common denominator d <= bound:
// integers with W^2 - a X^2 - b Y^2 + ab Z^2 = m d^2, m the square class of alpha.

namespace detail {

inline std::optional<std::array<i64, 4>> represent(i64 ca, i64 cb, i64 cab, i64 T) {
  // W^2 + ca X^2 + cb Y^2 + cab Z^2 = T with positive coefficients
  for (i64 Z = 0; cab * Z * Z <= T; ++Z)
    for (i64 Y = 0; cb * Y * Y + cab * Z * Z <= T; ++Y)
      for (i64 X = 0; ca * X * X + cb * Y * Y + cab * Z * Z <= T; ++X) {
        i64 rest = T - ca * X * X - cb * Y * Y - cab * Z * Z;
        i64 W = static_cast<i64>(std::llround(std::sqrt(static_cast<double>(rest))));
        while (W * W > rest) --W;
        while ((W + 1) * (W + 1) <= rest) ++W;
        if (W * W == rest) return std::array<i64, 4>{W, X, Y, Z};
      }
  return std::nullopt;
}

}  // namespace detail

inline constexpr u64 kDefaultNormBound = 50;

inline QuatQ norm_equation(const QuatAlgebra& B, const Rational& alpha, u64 bound = kDefaultNormBound) {
  if (alpha <= 0) config_error("quatherm", "norm equation needs alpha > 0");
  if (B.a >= 0 || B.b >= 0) config_error("quatherm", "norm equation search needs a definite algebra");
  // alpha = r/s = m t^2 / s^2 with m = squarefree part of r s; solve n(y) = m
  // and return y t / s.
  const BigInt rs = numerator(alpha) * denominator(alpha);
  if (rs > BigInt(std::numeric_limits<i64>::max()))
    budget_error("quatherm", "norm equation target " + rational_to_string(alpha) + " is too large");
  u64 m = 1, t = 1;
  for (auto [q, e] : factor_int(static_cast<u64>(rs))) {
    if (e % 2) m *= q;
    t *= ipow(q, static_cast<unsigned>(e / 2));
  }
  const u64 work_cap = scaled_cap(1000000000000ULL);
  for (u64 d = 1; d <= bound; ++d) {
    if (m > work_cap / (d * d)) break;
    auto sol = detail::represent(-B.a, -B.b, B.a * B.b, static_cast<i64>(m * d * d));
    if (!sol) continue;
    Rational c = Rational(BigInt(t), BigInt(d) * denominator(alpha));
    return B.element(Rational((*sol)[0]) * c, Rational((*sol)[1]) * c, Rational((*sol)[2]) * c, Rational((*sol)[3]) * c);
  }
  budget_error("quatherm", "norm equation n(x) = " + rational_to_string(alpha) + " has no solution with denominator <= " +
                               std::to_string(bound));
}

// ---------------------------------------------------------------------------
// Matrices over B.

inline QuatMatrix quat_identity(const QuatAlgebra& B, std::size_t g) {
  QuatMatrix m(g, g, B.zero());
  for (std::size_t i = 0; i < g; ++i) m(i, i) = B.one();
  return m;
}

inline QuatMatrix adjoint(const QuatMatrix& m) {
  QuatMatrix t = m.transpose();
  for (auto& x : t.data()) x = conjugate(x);
  return t;
}

inline bool is_self_adjoint(const QuatMatrix& m) {
  if (!m.square()) return false;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (!is_scalar(m(i, i))) return false;
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!(m(i, j) == conjugate(m(j, i)))) return false;
  }
  return true;
}

// f(u, v) = u^* G v; the real form (u, v) -> w-coordinate of u^* G v on Q^{4g}.
inline Matrix<Rational> trace_form(const QuatMatrix& gram, const QuatAlgebra& B) {
  const std::size_t g = gram.rows();
  std::vector<QuatQ> e{B.element(1), B.element(0, 1), B.element(0, 0, 1), B.element(0, 0, 0, 1)};
  Matrix<Rational> s(4 * g, 4 * g, Rational(0));
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      for (int a = 0; a < 4; ++a)
        for (int c = 0; c < 4; ++c) s(4 * i + a, 4 * j + c) = (conjugate(e[a]) * gram(i, j) * e[c]).w;
  return s;
}

// All leading principal minors positive, via elimination without pivoting.
inline bool leading_minors_positive(Matrix<Rational> s) {
  const std::size_t n = s.rows();
  for (std::size_t c = 0; c < n; ++c) {
    if (s(c, c) <= 0) return false;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (s(r, c) == 0) continue;
      Rational f = s(r, c) / s(c, c);
      for (std::size_t k = c; k < n; ++k) s(r, k) -= f * s(c, k);
    }
  }
  return true;
}

inline bool is_positive_definite(const QuatMatrix& gram, const QuatAlgebra& B) {
  return is_self_adjoint(gram) && leading_minors_positive(trace_form(gram, B));
}

struct Diagonalization {
  QuatMatrix orthogonalizer;  // M0 with M0^* G M0 = diag(alphas)
  std::vector<Rational> alphas;
  std::vector<QuatQ> scalings;  // x_i with n(x_i) = alpha_i
  QuatMatrix transform;         // M = M0 diag(x_i^{-1}), M^* G M = I
};

inline Diagonalization hermitian_diagonalize(const QuatAlgebra& B, const QuatMatrix& gram, u64 bound = kDefaultNormBound) {
  const std::size_t g = gram.rows();
  if (g == 0 || g > 4) config_error("quatherm", "hermitian_diagonalize supports 1 <= g <= 4");
  if (!is_self_adjoint(gram)) config_error("quatherm", "gram matrix is not self-adjoint");
  if (!is_positive_definite(gram, B)) config_error("quatherm", "hermitian form is not positive-definite");
  Diagonalization d;
  QuatMatrix M = quat_identity(B, g);
  for (std::size_t i = 0; i < g; ++i) {
    QuatMatrix H = adjoint(M) * gram * M;
    Rational hii = H(i, i).w;
    for (std::size_t j = i + 1; j < g; ++j) {
      QuatQ t = H(i, j).scale(1 / hii);
      for (std::size_t r = 0; r < g; ++r) M(r, j) = M(r, j) - M(r, i) * t;
    }
  }
  QuatMatrix D = adjoint(M) * gram * M;
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = 0; j < g; ++j)
      if (i != j && !(D(i, j) == B.zero())) throw Error(ErrorKind::Internal, "quatherm", "Gram-Schmidt left an off-diagonal entry");
  d.orthogonalizer = M;
  for (std::size_t i = 0; i < g; ++i) d.alphas.push_back(D(i, i).w);
  QuatMatrix T = M;
  for (std::size_t i = 0; i < g; ++i) {
    QuatQ x = norm_equation(B, d.alphas[i], bound);
    d.scalings.push_back(x);
    QuatQ xi = inverse(x);
    for (std::size_t r = 0; r < g; ++r) T(r, i) = T(r, i) * xi;
  }
  d.transform = T;
  if (!(adjoint(T) * gram * T == quat_identity(B, g)))
    throw Error(ErrorKind::Internal, "quatherm", "diagonalizing transform does not give the identity");
  return d;
}

struct GUVerdict {
  bool member = false;
  Rational gamma = 0;
};

inline GUVerdict is_gu(const QuatMatrix& m) {
  GUVerdict v;
  if (!m.square() || m.rows() == 0) return v;
  QuatMatrix h = adjoint(m) * m;
  const QuatQ& d0 = h(0, 0);
  if (!is_scalar(d0) || d0.w == 0) return v;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) {
      if (i == j && !(h(i, j) == d0)) return v;
      if (i != j && !(h(i, j) == d0.scale(0))) return v;
    }
  v.member = true;
  v.gamma = d0.w;
  return v;
}

// Random positive-definite gram matrix with coordinates of height <= height.
inline QuatMatrix random_positive_definite(const QuatAlgebra& B, std::size_t g, std::mt19937_64& rng, int height = 5,
                                           int attempts = 200000) {
  std::uniform_int_distribution<int> num(1, height), den(1, height);
  for (int t = 0; t < attempts; ++t) {
    QuatMatrix m(g, g, B.zero());
    for (std::size_t i = 0; i < g; ++i) m(i, i) = B.element(Rational(num(rng), den(rng)));
    // off-diagonal entries are redrawn until each 2x2 principal minor is positive
    bool ok = true;
    for (std::size_t i = 0; i < g && ok; ++i)
      for (std::size_t j = i + 1; j < g && ok; ++j) {
        int tries = 0;
        do m(i, j) = random_quat(B, rng, height);
        while (norm(m(i, j)) >= m(i, i).w * m(j, j).w && ++tries < 1000);
        ok = tries < 1000;
        m(j, i) = conjugate(m(i, j));
      }
    if (ok && is_positive_definite(m, B)) return m;
  }
  budget_error("quatherm", "no positive-definite sample found");
}

// ---------------------------------------------------------------------------
// Symplectic forms and the conjugator.

inline Matrix<int> symplectic_j(std::size_t g) {
  Matrix<int> j(2 * g, 2 * g, 0);
  for (std::size_t i = 0; i < g; ++i) {
    j(i, g + i) = 1;
    j(g + i, i) = -1;
  }
  return j;
}

inline Matrix<int> block_j(std::size_t g) {
  Matrix<int> j(2 * g, 2 * g, 0);
  for (std::size_t i = 0; i < g; ++i) {
    j(2 * i, 2 * i + 1) = 1;
    j(2 * i + 1, 2 * i) = -1;
  }
  return j;
}

inline Matrix<int> permutation_matrix(const std::vector<std::size_t>& images) {
  // column c has its 1 in row images[c]
  Matrix<int> p(images.size(), images.size(), 0);
  for (std::size_t c = 0; c < images.size(); ++c) p(images[c], c) = 1;
  return p;
}

// P with P^t diag(J_2, ..., J_2) P = J_{2g}. First the transpositions
// (2i, 2g + 1 - 2i), 1-indexed, for 2i < 2g + 1 - 2i; the result pairs
// coordinates r < c with entry +1 at (r, c). A second permutation then sends
// the i-th such pair to (i, g + i).
inline Matrix<int> conjugator(std::size_t g) {
  if (g < 1) config_error("quatherm", "genus must be >= 1");
  const std::size_t n = 2 * g;
  std::vector<std::size_t> first(n);
  for (std::size_t c = 0; c < n; ++c) first[c] = c;
  for (std::size_t i = 1; 2 * i < n + 1 - 2 * i; ++i) std::swap(first[2 * i - 1], first[n - 2 * i]);
  Matrix<int> P1 = permutation_matrix(first);
  Matrix<int> M1 = P1.transpose() * block_j(g) * P1;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (M1(r, c) == 1) pairs.push_back({r, c});
  std::sort(pairs.begin(), pairs.end());
  std::vector<std::size_t> second(n);
  for (std::size_t i = 0; i < g; ++i) {
    second[i] = pairs[i].first;
    second[g + i] = pairs[i].second;
  }
  Matrix<int> P = P1 * permutation_matrix(second);
  if (!(P.transpose() * block_j(g) * P == symplectic_j(g)))
    throw Error(ErrorKind::Internal, "quatherm", "conjugator identity failed");
  return P;
}

// ---------------------------------------------------------------------------
// Split model B (x) F_q -> M_2(F_q): i -> diag(s, -s), j -> [[0, 1], [b, 0]].

using QuatF = Quat<FieldElement>;

struct SplitModel {
  QuatAlgebra algebra;
  u64 l = 0;
  Field field;
  FieldElement s;  // s^2 = a

  QuatF element(const FieldElement& w, const FieldElement& x, const FieldElement& y, const FieldElement& z) const {
    return {fa(), fb(), w, x, y, z};
  }
  FieldElement fa() const { return FieldElement(field, static_cast<u64>(mod_floor(algebra.a, static_cast<i64>(l)))); }
  FieldElement fb() const { return FieldElement(field, static_cast<u64>(mod_floor(algebra.b, static_cast<i64>(l)))); }
  QuatF random(std::mt19937_64& rng) const {
    return element(FieldElement::random(field, rng), FieldElement::random(field, rng), FieldElement::random(field, rng),
                   FieldElement::random(field, rng));
  }

  FMatrix image(const QuatF& q) const {
    FieldElement zero(field), one(field, 1);
    FMatrix m(2, 2, zero);
    // w I + x diag(s, -s) + y [[0,1],[b,0]] + z [[0, s], [-s b, 0]]
    m(0, 0) = q.w + q.x * s;
    m(1, 1) = q.w - q.x * s;
    m(0, 1) = q.y + q.z * s;
    m(1, 0) = q.y * fb() - q.z * s * fb();
    return m;
  }
};

// q = l^m; moves to F_{q^2} when a is not a square in F_q.
inline SplitModel split_model(const QuatAlgebra& B, u64 l, int m) {
  if (!is_prime(l) || l == 2) config_error("quatherm", "split model needs an odd prime l");
  if (l == B.p || B.a % static_cast<i64>(l) == 0 || B.b % static_cast<i64>(l) == 0)
    config_error("quatherm", "l must not divide the parameters a, b or equal p");
  SplitModel sm;
  sm.algebra = B;
  sm.l = l;
  sm.field = make_field(l, m);
  auto s = sqrt(sm.fa());
  if (!s) {
    sm.field = make_field(l, 2 * m);
    s = sqrt(sm.fa());
  }
  sm.s = *s;
  return sm;
}

using QuatFMatrix = Matrix<QuatF>;

inline QuatFMatrix adjoint(const QuatFMatrix& m) {
  QuatFMatrix t = m.transpose();
  for (auto& x : t.data()) x = conjugate(x);
  return t;
}

inline std::optional<FieldElement> gu_factor(const QuatFMatrix& m) {
  QuatFMatrix h = adjoint(m) * m;
  const QuatF& d0 = h(0, 0);
  if (!is_scalar(d0) || d0.w.is_zero()) return std::nullopt;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) {
      const QuatF& e = h(i, j);
      if (i == j && !(e == d0)) return std::nullopt;
      if (i != j && !(e.w.is_zero() && is_scalar(e))) return std::nullopt;
    }
  return d0.w;
}

// Block matrix in M_{2g}(F_q) from a g x g matrix over B (x) F_q.
inline FMatrix split_matrix(const SplitModel& sm, const QuatFMatrix& m) {
  FMatrix out(2 * m.rows(), 2 * m.cols(), FieldElement(sm.field));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      FMatrix b = sm.image(m(i, j));
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out(2 * i + r, 2 * j + c) = b(r, c);
    }
  return out;
}

inline FMatrix to_field(const Matrix<int>& m, const Field& f) {
  FMatrix out(m.rows(), m.cols(), FieldElement(f));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      out(i, j) = FieldElement(f, static_cast<u64>(mod_floor(m(i, j), static_cast<i64>(f->p))));
  return out;
}

// gamma with X^t J X = gamma J, if any.
inline std::optional<FieldElement> gsp_factor(const FMatrix& x) {
  std::size_t g = x.rows() / 2;
  const Field& f = x(0, 0).field();
  FMatrix J = to_field(symplectic_j(g), f);
  FMatrix lhs = x.transpose() * J * x;
  FieldElement gamma = lhs(0, g);
  if (gamma.is_zero()) return std::nullopt;
  if (!(lhs == scalar_mul(J, gamma))) return std::nullopt;
  return gamma;
}

// Random element of GU_g(B (x) F_q): a product of unit-norm diagonal entries,
// coordinate swaps, unitary 2x2 blocks [[u, -u'^{-1} v' u'], [v, u']] with
// n(u) + n(v) = 1 (primes denote conjugates) and a scalar similitude.
inline QuatFMatrix random_gu(const SplitModel& sm, std::size_t g, std::mt19937_64& rng, int factors = 6) {
  const Field& f = sm.field;
  FieldElement zero(f), one(f, 1);
  QuatF qzero = sm.element(zero, zero, zero, zero), qone = sm.element(one, zero, zero, zero);
  auto ident = [&] {
    QuatFMatrix m(g, g, qzero);
    for (std::size_t i = 0; i < g; ++i) m(i, i) = qone;
    return m;
  };
  auto invertible = [&](std::mt19937_64& r) {
    for (;;) {
      QuatF x = sm.random(r);
      if (!norm(x).is_zero()) return x;
    }
  };
  auto qinv = [&](const QuatF& x) { return conjugate(x).scale(norm(x).inverse()); };
  QuatFMatrix acc = ident();
  for (int t = 0; t < factors; ++t) {
    QuatFMatrix e = ident();
    int kind = static_cast<int>(rng() % 3);
    std::size_t i = rng() % g, j = rng() % g;
    if (kind == 0) {
      QuatF x = invertible(rng);
      e(i, i) = x * qinv(conjugate(x));
    } else if (kind == 1 && g > 1) {
      if (i == j) j = (i + 1) % g;
      e(i, i) = qzero;
      e(j, j) = qzero;
      e(i, j) = qone;
      e(j, i) = qone;
    } else if (g > 1) {
      if (i == j) j = (i + 1) % g;
      for (;;) {
        QuatF u = invertible(rng), v = sm.random(rng);
        if (norm(u) + norm(v) != one) continue;
        QuatF ub = conjugate(u);
        e(i, i) = u;
        e(j, i) = v;
        e(i, j) = -(qinv(ub) * conjugate(v) * ub);
        e(j, j) = ub;
        break;
      }
    }
    acc = acc * e;
  }
  QuatF c = invertible(rng);
  QuatFMatrix sc = ident();
  for (std::size_t i = 0; i < g; ++i) sc(i, i) = c;
  return acc * sc;
}

}  // namespace ssmod
