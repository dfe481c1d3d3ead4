#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "ssmod/matrix.hpp"
#include "ssmod/util.hpp"

namespace ssmod {

namespace fp {

// Dense polynomials over F_p as little-endian coefficient vectors.
using Vec = std::vector<u64>;

inline void trim(Vec& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}
inline int deg(const Vec& a) { return static_cast<int>(a.size()) - 1; }

inline Vec sub(Vec a, const Vec& b, u64 p) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] = (a[i] + p - b[i]) % p;
  trim(a);
  return a;
}

inline Vec mul(const Vec& a, const Vec& b, u64 p) {
  if (a.empty() || b.empty()) return {};
  Vec c(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] = (c[i + j] + mulmod(a[i], b[j], p)) % p;
  }
  trim(c);
  return c;
}

// Returns (quotient, remainder).
inline std::pair<Vec, Vec> divmod(Vec a, const Vec& b, u64 p) {
  trim(a);
  if (b.empty()) throw Error(ErrorKind::Internal, "ff", "division by zero polynomial");
  if (a.size() < b.size()) return {{}, a};
  Vec q(a.size() - b.size() + 1, 0);
  u64 inv = invmod(b.back(), p);
  for (int i = deg(a); i >= deg(b); --i) {
    u64 c = mulmod(a[i], inv, p);
    if (!c) continue;
    q[i - deg(b)] = c;
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t k = i - deg(b) + j;
      a[k] = (a[k] + p - mulmod(c, b[j], p)) % p;
    }
  }
  trim(a);
  trim(q);
  return {q, a};
}

inline Vec mod(const Vec& a, const Vec& b, u64 p) { return divmod(a, b, p).second; }

inline Vec monic(Vec a, u64 p) {
  trim(a);
  if (a.empty()) return a;
  u64 inv = invmod(a.back(), p);
  for (auto& c : a) c = mulmod(c, inv, p);
  return a;
}

inline Vec gcd(Vec a, Vec b, u64 p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Vec r = mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return monic(a, p);
}

inline Vec powmod(Vec base, u128 e, const Vec& m, u64 p) {
  Vec r{1};
  base = mod(base, m, p);
  while (e) {
    if (e & 1) r = mod(mul(r, base, p), m, p);
    base = mod(mul(base, base, p), m, p);
    e >>= 1;
  }
  return r;
}

// Rabin's irreducibility test for a monic polynomial of degree m.
inline bool is_irreducible(const Vec& f, u64 p) {
  int m = deg(f);
  if (m < 1) return false;
  if (m == 1) return true;
  std::vector<Vec> xp;  // xp[i] = X^{p^i} mod f
  xp.push_back(mod(Vec{0, 1}, f, p));
  for (int i = 1; i <= m; ++i) xp.push_back(powmod(xp.back(), p, f, p));
  Vec x = mod(Vec{0, 1}, f, p);
  if (sub(xp[m], x, p) != Vec{}) return false;
  for (auto [r, e] : factor_int(static_cast<u64>(m))) {
    (void)e;
    Vec h = sub(xp[m / r], x, p);
    if (gcd(f, h, p).size() != 1) return false;
  }
  return true;
}

}  // namespace fp

struct FieldParams {
  u64 p = 0;
  int m = 0;
  fp::Vec modulus;                   // monic, size m + 1
  std::vector<fp::Vec> frob_cols;    // frob_cols[i] = t^{i p} reduced, padded to m
  u128 order = 0;                    // p^m

  bool same_as(const FieldParams& o) const { return p == o.p && modulus == o.modulus; }
};

using Field = std::shared_ptr<const FieldParams>;

inline bool same_field(const Field& a, const Field& b) { return a == b || a->same_as(*b); }

// Field of order p^m with the lexicographically first monic irreducible
// modulus, comparing coefficient tuples (c_0, c_1, ..., c_{m-1}).
inline Field make_field(u64 p, int m) {
  if (!is_prime(p)) config_error("ff", "p must be prime (got " + std::to_string(p) + ")");
  if (m < 1) config_error("ff", "extension degree must be >= 1");
  if (m > 64) budget_error("ff", "extension degree " + std::to_string(m) + " exceeds the supported bound");
  static std::mutex cache_mutex;
  static std::map<std::pair<u64, int>, Field> cache;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find({p, m});
    if (it != cache.end()) return it->second;
  }
  auto fpp = std::make_shared<FieldParams>();
  fpp->p = p;
  fpp->m = m;
  fpp->order = ipow128(p, m);
  if (m == 1) {
    fpp->modulus = {0, 1};
  } else {
    // Polynomials with c_0 = 0 are divisible by t, so the scan starts at c_0 = 1.
    fp::Vec low(m, 0);
    low[0] = 1;
    bool found = false;
    while (!found) {
      fp::Vec f = low;
      f.push_back(1);
      if (fp::is_irreducible(f, p)) {
        fpp->modulus = f;
        found = true;
        break;
      }
      // Increment with c_{m-1} fastest.
      int i = m - 1;
      while (i >= 0) {
        if (++low[i] < p) break;
        low[i] = 0;
        --i;
      }
      if (i < 0) throw Error(ErrorKind::Internal, "ff", "no irreducible modulus found");
    }
  }
  fp::Vec xp = fp::powmod(fp::Vec{0, 1}, p, fpp->modulus, p);
  fp::Vec cur{1};
  for (int i = 0; i < m; ++i) {
    fp::Vec col = cur;
    col.resize(m, 0);
    fpp->frob_cols.push_back(col);
    cur = fp::mod(fp::mul(cur, xp, p), fpp->modulus, p);
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  return cache.emplace(std::make_pair(p, m), fpp).first->second;
}

class FieldElement {
 public:
  FieldElement() = default;
  explicit FieldElement(Field f) : f_(std::move(f)), c_(f_->m, 0) {}
  FieldElement(Field f, u64 v) : f_(std::move(f)), c_(f_->m, 0) { c_[0] = v % f_->p; }
  FieldElement(Field f, std::vector<u64> coeffs) : f_(std::move(f)), c_(std::move(coeffs)) {
    c_.resize(f_->m, 0);
    for (auto& x : c_) x %= f_->p;
  }

  static FieldElement gen(const Field& f) {
    FieldElement e(f);
    if (f->m == 1)
      e.c_[0] = (f->p - f->modulus[0]) % f->p;
    else
      e.c_[1] = 1;
    return e;
  }

  static FieldElement from_index(const Field& f, u128 idx) {
    FieldElement e(f);
    for (int i = 0; i < f->m; ++i) {
      e.c_[i] = static_cast<u64>(idx % f->p);
      idx /= f->p;
    }
    return e;
  }

  static FieldElement random(const Field& f, std::mt19937_64& rng) {
    FieldElement e(f);
    std::uniform_int_distribution<u64> d(0, f->p - 1);
    for (auto& x : e.c_) x = d(rng);
    return e;
  }

  const Field& field() const { return f_; }
  const std::vector<u64>& coeffs() const { return c_; }
  u64 p() const { return f_->p; }

  u128 index() const {
    u128 r = 0;
    for (int i = f_->m - 1; i >= 0; --i) r = r * f_->p + c_[i];
    return r;
  }

  bool is_zero() const {
    for (auto x : c_)
      if (x) return false;
    return true;
  }
  bool is_one() const {
    if (c_.empty() || c_[0] != 1) return false;
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (c_[i]) return false;
    return true;
  }
  bool in_prime_field() const {
    for (std::size_t i = 1; i < c_.size(); ++i)
      if (c_[i]) return false;
    return true;
  }

  FieldElement zero() const { return FieldElement(f_); }
  FieldElement one() const { return FieldElement(f_, 1); }

  FieldElement operator+(const FieldElement& o) const {
    FieldElement r(*this);
    u64 p = f_->p;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      u64 s = r.c_[i] + o.c_[i];
      r.c_[i] = s >= p ? s - p : s;
    }
    return r;
  }
  FieldElement operator-(const FieldElement& o) const {
    FieldElement r(*this);
    u64 p = f_->p;
    for (std::size_t i = 0; i < c_.size(); ++i) r.c_[i] = c_[i] >= o.c_[i] ? c_[i] - o.c_[i] : c_[i] + p - o.c_[i];
    return r;
  }
  FieldElement operator-() const { return zero() - *this; }

  FieldElement operator*(const FieldElement& o) const {
    const u64 p = f_->p;
    const int m = f_->m;
    if (m == 1) return FieldElement(f_, mulmod(c_[0], o.c_[0], p), raw_tag{});
    std::vector<u64> t(2 * m - 1, 0);
    if (p < (1ULL << 26)) {
      // Products stay below 2^52, so up to 4096 terms accumulate safely.
      for (int i = 0; i < m; ++i) {
        if (!c_[i]) continue;
        for (int j = 0; j < m; ++j) t[i + j] += c_[i] * o.c_[j];
      }
      for (auto& x : t) x %= p;
    } else {
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) t[i + j] = (t[i + j] + mulmod(c_[i], o.c_[j], p)) % p;
    }
    const auto& md = f_->modulus;
    for (int i = 2 * m - 2; i >= m; --i) {
      u64 c = t[i];
      if (!c) continue;
      t[i] = 0;
      for (int j = 0; j < m; ++j) {
        if (!md[j]) continue;
        std::size_t k = i - m + j;
        t[k] = (t[k] + p - mulmod(c, md[j], p)) % p;
      }
    }
    t.resize(m);
    FieldElement r;
    r.f_ = f_;
    r.c_ = std::move(t);
    return r;
  }

  FieldElement scale(u64 s) const {
    FieldElement r(*this);
    for (auto& x : r.c_) x = mulmod(x, s % f_->p, f_->p);
    return r;
  }

  FieldElement inverse() const {
    if (is_zero()) throw Error(ErrorKind::Internal, "ff", "inverse of zero");
    const u64 p = f_->p;
    if (f_->m == 1) return FieldElement(f_, invmod(c_[0], p));
    // Extended Euclid on (self, modulus).
    fp::Vec r0 = f_->modulus, r1 = c_;
    fp::trim(r1);
    fp::Vec s0{}, s1{1};
    while (!r1.empty()) {
      auto [q, r] = fp::divmod(r0, r1, p);
      fp::Vec s = fp::sub(s0, fp::mul(q, s1, p), p);
      r0 = std::move(r1);
      r1 = std::move(r);
      s0 = std::move(s1);
      s1 = std::move(s);
    }
    // r0 is a nonzero constant.
    u64 inv = invmod(r0[0], p);
    for (auto& x : s0) x = mulmod(x, inv, p);
    s0.resize(f_->m, 0);
    return FieldElement(f_, s0);
  }

  FieldElement operator/(const FieldElement& o) const { return *this * o.inverse(); }

  FieldElement pow(u128 e) const {
    FieldElement r = one(), b = *this;
    while (e) {
      if (e & 1) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  FieldElement pow_signed(i64 e) const {
    if (e >= 0) return pow(static_cast<u128>(e));
    return inverse().pow(static_cast<u128>(-e));
  }

  FieldElement& operator+=(const FieldElement& o) { return *this = *this + o; }
  FieldElement& operator-=(const FieldElement& o) { return *this = *this - o; }
  FieldElement& operator*=(const FieldElement& o) { return *this = *this * o; }

  friend bool operator==(const FieldElement& a, const FieldElement& b) {
    return a.c_ == b.c_ && (a.f_ == b.f_ || a.f_->same_as(*b.f_));
  }
  friend bool operator!=(const FieldElement& a, const FieldElement& b) { return !(a == b); }
  // Lexicographic on the coefficient vector, c_0 first.
  friend bool operator<(const FieldElement& a, const FieldElement& b) { return a.c_ < b.c_; }

  std::string to_string() const {
    std::string s;
    for (int i = f_->m - 1; i >= 0; --i) {
      if (!c_[i]) continue;
      if (!s.empty()) s += "+";
      if (i == 0 || c_[i] != 1) s += std::to_string(c_[i]);
      if (i >= 1) {
        if (c_[i] != 1) s += "*";
        s += "t";
        if (i > 1) s += "^" + std::to_string(i);
      }
    }
    return s.empty() ? "0" : s;
  }

 private:
  struct raw_tag {};
  FieldElement(Field f, u64 v, raw_tag) : f_(std::move(f)), c_(1, v) {}

  Field f_;
  std::vector<u64> c_;
};

inline std::ostream& operator<<(std::ostream& os, const FieldElement& x) { return os << x.to_string(); }

// x^(p^k); the Frobenius on coefficients is F_p-linear, so it is a matrix product.
inline FieldElement frobenius(const FieldElement& x, int k = 1) {
  const auto& f = x.field();
  int m = f->m;
  k = ((k % m) + m) % m;
  FieldElement cur = x;
  for (int it = 0; it < k; ++it) {
    std::vector<u64> out(m, 0);
    for (int i = 0; i < m; ++i) {
      u64 c = cur.coeffs()[i];
      if (!c) continue;
      for (int j = 0; j < m; ++j) out[j] = (out[j] + mulmod(c, f->frob_cols[i][j], f->p)) % f->p;
    }
    cur = FieldElement(f, out);
  }
  return cur;
}

// Absolute trace to F_p.
inline u64 trace_to_prime(const FieldElement& x) {
  FieldElement s = x, cur = x;
  for (int i = 1; i < x.field()->m; ++i) {
    cur = frobenius(cur);
    s += cur;
  }
  return s.coeffs()[0];
}

// Smallest e dividing m with x in F_{p^e}.
inline int minimal_degree(const FieldElement& x) {
  int m = x.field()->m;
  for (int e = 1; e <= m; ++e)
    if (m % e == 0 && frobenius(x, e) == x) return e;
  return m;
}

inline std::optional<FieldElement> sqrt(const FieldElement& a) {
  if (a.is_zero()) return a;
  const auto& f = a.field();
  u128 q = f->order;
  if (f->p == 2) return a.pow(q / 2);
  if (a.pow((q - 1) / 2) != a.one()) return std::nullopt;
  u128 s = q - 1;
  int e = 0;
  while (!(s & 1)) {
    s >>= 1;
    ++e;
  }
  // Deterministic non-residue: first element in index order.
  FieldElement z(f);
  for (u128 i = 2;; ++i) {
    z = FieldElement::from_index(f, i);
    if (!z.is_zero() && z.pow((q - 1) / 2) != z.one()) break;
  }
  FieldElement x = a.pow((s + 1) / 2), b = a.pow(s), g = z.pow(s);
  int r = e;
  while (!b.is_one()) {
    int t = 0;
    FieldElement bb = b;
    while (!bb.is_one()) {
      bb = bb * bb;
      ++t;
    }
    FieldElement gs = g;
    for (int i = 0; i < r - t - 1; ++i) gs = gs * gs;
    x = x * gs;
    g = gs * gs;
    b = b * g;
    r = t;
  }
  return x;
}

// Multiplicative order of x divides q - 1; computed from the factorization.
inline u128 mult_order(const FieldElement& x) {
  u128 n = x.field()->order - 1;
  u128 ord = n;
  // q - 1 may exceed 64 bits only for very large fields; factor by trial division.
  std::vector<u64> primes;
  {
    u128 t = n;
    for (u64 d = 2; (u128)d * d <= t; ++d) {
      if (t % d) continue;
      primes.push_back(d);
      while (t % d == 0) t /= d;
      if (d > 10000000) budget_error("ff", "order factorization too large");
    }
    if (t > 1) {
      if (t > UINT64_MAX) budget_error("ff", "order factorization too large");
      primes.push_back(static_cast<u64>(t));
    }
  }
  for (u64 r : primes)
    while (ord % r == 0 && x.pow(ord / r).is_one()) ord /= r;
  return ord;
}

// Deterministic primitive element: first generator of F_q^x in index order.
inline FieldElement primitive_element(const Field& f) {
  for (u128 i = 1;; ++i) {
    FieldElement z = FieldElement::from_index(f, i);
    if (!z.is_zero() && mult_order(z) == f->order - 1) return z;
  }
}

// ---------------------------------------------------------------------------
// Polynomials over F_q.

class Poly {
 public:
  Poly() = default;
  explicit Poly(Field f) : f_(std::move(f)) {}
  Poly(Field f, std::vector<FieldElement> c) : f_(std::move(f)), c_(std::move(c)) { trim(); }

  static Poly constant(const FieldElement& a) { return Poly(a.field(), {a}); }
  static Poly x(const Field& f) { return Poly(f, {FieldElement(f), FieldElement(f, 1)}); }
  // X - r
  static Poly linear(const FieldElement& r) { return Poly(r.field(), {-r, r.one()}); }

  const Field& field() const { return f_; }
  const std::vector<FieldElement>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  FieldElement coeff(int i) const { return i < static_cast<int>(c_.size()) && i >= 0 ? c_[i] : FieldElement(f_); }
  FieldElement lead() const { return c_.back(); }

  void trim() {
    while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
  }

  Poly operator+(const Poly& o) const {
    std::vector<FieldElement> c(std::max(c_.size(), o.c_.size()), FieldElement(f_));
    for (std::size_t i = 0; i < c_.size(); ++i) c[i] = c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) c[i] = c[i] + o.c_[i];
    return Poly(f_, c);
  }
  Poly operator-(const Poly& o) const {
    std::vector<FieldElement> c(std::max(c_.size(), o.c_.size()), FieldElement(f_));
    for (std::size_t i = 0; i < c_.size(); ++i) c[i] = c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) c[i] = c[i] - o.c_[i];
    return Poly(f_, c);
  }
  Poly operator*(const Poly& o) const {
    if (c_.empty() || o.c_.empty()) return Poly(f_);
    std::vector<FieldElement> c(c_.size() + o.c_.size() - 1, FieldElement(f_));
    for (std::size_t i = 0; i < c_.size(); ++i) {
      if (c_[i].is_zero()) continue;
      for (std::size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
    }
    return Poly(f_, c);
  }
  Poly operator*(const FieldElement& s) const {
    std::vector<FieldElement> c = c_;
    for (auto& x : c) x = x * s;
    return Poly(f_, c);
  }

  std::pair<Poly, Poly> divmod(const Poly& b) const {
    if (b.is_zero()) throw Error(ErrorKind::Internal, "ff", "polynomial division by zero");
    if (degree() < b.degree()) return {Poly(f_), *this};
    std::vector<FieldElement> r = c_;
    std::vector<FieldElement> q(c_.size() - b.c_.size() + 1, FieldElement(f_));
    FieldElement inv = b.lead().inverse();
    int db = b.degree();
    for (int i = degree(); i >= db; --i) {
      if (r[i].is_zero()) continue;
      FieldElement c = r[i] * inv;
      q[i - db] = c;
      for (int j = 0; j <= db; ++j) r[i - db + j] -= c * b.c_[j];
    }
    r.resize(db > 0 ? db : 0, FieldElement(f_));
    return {Poly(f_, q), Poly(f_, r)};
  }
  Poly operator/(const Poly& b) const { return divmod(b).first; }
  Poly operator%(const Poly& b) const { return divmod(b).second; }

  Poly monic() const {
    if (is_zero()) return *this;
    return *this * lead().inverse();
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly(f_);
    std::vector<FieldElement> c;
    for (std::size_t i = 1; i < c_.size(); ++i) c.push_back(c_[i].scale(i % f_->p));
    return Poly(f_, c);
  }

  FieldElement operator()(const FieldElement& x) const {
    FieldElement r = x.zero();
    for (int i = degree(); i >= 0; --i) r = r * x + c_[i];
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
  friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }

  std::string to_string() const {
    if (c_.empty()) return "0";
    std::string s;
    for (int i = degree(); i >= 0; --i) {
      if (c_[i].is_zero()) continue;
      if (!s.empty()) s += " + ";
      std::string cs = c_[i].to_string();
      bool compound = cs.find('+') != std::string::npos;
      if (i == 0)
        s += cs;
      else {
        if (!c_[i].is_one()) s += (compound ? "(" + cs + ")" : cs) + "*";
        s += i == 1 ? "X" : "X^" + std::to_string(i);
      }
    }
    return s;
  }

 private:
  Field f_;
  std::vector<FieldElement> c_;
};

inline Poly gcd(Poly a, Poly b) {
  while (!b.is_zero()) {
    Poly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

inline Poly powmod(Poly base, u128 e, const Poly& m) {
  Poly r = Poly::constant(FieldElement(m.field(), 1)) % m;
  base = base % m;
  while (e) {
    if (e & 1) r = (r * base) % m;
    base = (base * base) % m;
    e >>= 1;
  }
  return r;
}

inline Poly poly_from_roots(const std::vector<FieldElement>& roots, const Field& f) {
  Poly r = Poly::constant(FieldElement(f, 1));
  for (const auto& x : roots) r = r * Poly::linear(x);
  return r;
}

// ---------------------------------------------------------------------------
// Embeddings F_{p^a} -> F_{p^b} for a | b.

struct RootMult {
  FieldElement root;
  int multiplicity;
};

inline std::vector<RootMult> roots(const Poly& f);

class Embedding {
 public:
  Embedding() = default;
  Embedding(Field from, Field to) : from_(std::move(from)), to_(std::move(to)) {
    if (from_->p != to_->p || to_->m % from_->m != 0)
      config_error("ff", "embedding requires a | b over the same prime");
    if (from_->m == 1) {
      image_ = FieldElement(to_, (from_->p - from_->modulus[0]) % from_->p);
    } else if (same_field(from_, to_)) {
      image_ = FieldElement::gen(to_);
    } else {
      std::vector<FieldElement> mc;
      for (u64 c : from_->modulus) mc.push_back(FieldElement(to_, c));
      auto rs = roots(Poly(to_, mc));
      if (rs.empty()) throw Error(ErrorKind::Internal, "ff", "modulus has no root in target field");
      image_ = rs.front().root;
    }
    FieldElement cur(to_, 1);
    for (int i = 0; i < from_->m; ++i) {
      powers_.push_back(cur);
      cur = cur * image_;
    }
  }

  const Field& from() const { return from_; }
  const Field& to() const { return to_; }

  FieldElement lift(const FieldElement& x) const {
    FieldElement r(to_);
    for (int i = 0; i < from_->m; ++i)
      if (x.coeffs()[i]) r += powers_[i].scale(x.coeffs()[i]);
    return r;
  }

  Poly lift(const Poly& f) const {
    std::vector<FieldElement> c;
    for (const auto& x : f.coeffs()) c.push_back(lift(x));
    return Poly(to_, c);
  }

  // Preimage of y, if y lies in the image.
  std::optional<FieldElement> restrict(const FieldElement& y) const {
    const u64 p = to_->p;
    int a = from_->m, b = to_->m;
    // Solve sum_i x_i powers_[i] = y over F_p; b equations, a unknowns.
    std::vector<std::vector<u64>> rows(b, std::vector<u64>(a + 1, 0));
    for (int r = 0; r < b; ++r) {
      for (int i = 0; i < a; ++i) rows[r][i] = powers_[i].coeffs()[r];
      rows[r][a] = y.coeffs()[r];
    }
    std::vector<int> pivcol;
    int rank = 0;
    for (int c = 0; c < a && rank < b; ++c) {
      int piv = -1;
      for (int r = rank; r < b; ++r)
        if (rows[r][c]) {
          piv = r;
          break;
        }
      if (piv < 0) continue;
      std::swap(rows[piv], rows[rank]);
      u64 inv = invmod(rows[rank][c], p);
      for (auto& v : rows[rank]) v = mulmod(v, inv, p);
      for (int r = 0; r < b; ++r) {
        if (r == rank || !rows[r][c]) continue;
        u64 f = rows[r][c];
        for (int k = 0; k <= a; ++k) rows[r][k] = (rows[r][k] + p - mulmod(f, rows[rank][k], p)) % p;
      }
      pivcol.push_back(c);
      ++rank;
    }
    for (int r = rank; r < b; ++r)
      if (rows[r][a]) return std::nullopt;
    std::vector<u64> x(a, 0);
    for (int r = 0; r < rank; ++r) x[pivcol[r]] = rows[r][a];
    return FieldElement(from_, x);
  }

  std::optional<Poly> restrict(const Poly& f) const {
    std::vector<FieldElement> c;
    for (const auto& y : f.coeffs()) {
      auto x = restrict(y);
      if (!x) return std::nullopt;
      c.push_back(*x);
    }
    return Poly(from_, c);
  }

 private:
  Field from_, to_;
  FieldElement image_;
  std::vector<FieldElement> powers_;
};

// Embedding of the minimal subfield containing x, and x expressed there.
struct CanonicalValue {
  u64 p = 0;
  int degree = 1;
  std::vector<u64> coeffs;

  friend bool operator==(const CanonicalValue& a, const CanonicalValue& b) {
    return a.p == b.p && a.degree == b.degree && a.coeffs == b.coeffs;
  }
  friend bool operator<(const CanonicalValue& a, const CanonicalValue& b) {
    if (a.degree != b.degree) return a.degree < b.degree;
    return a.coeffs < b.coeffs;
  }
  std::string to_string() const {
    if (degree == 1) return std::to_string(coeffs[0]);
    return FieldElement(make_field(p, degree), coeffs).to_string() + " in F_" + std::to_string(p) + "^" +
           std::to_string(degree);
  }
};

inline CanonicalValue canonical(const FieldElement& x) {
  int e = minimal_degree(x);
  CanonicalValue cv;
  cv.p = x.p();
  cv.degree = e;
  if (e == x.field()->m) {
    if (e == 1) {
      cv.coeffs = x.coeffs();
      return cv;
    }
    Field sub = make_field(x.p(), e);
    if (sub->same_as(*x.field())) {
      cv.coeffs = x.coeffs();
      return cv;
    }
  }
  Field sub = make_field(x.p(), e);
  Embedding emb(sub, x.field());
  auto y = emb.restrict(x);
  if (!y) throw Error(ErrorKind::Internal, "ff", "minimal subfield restriction failed");
  cv.coeffs = y->coeffs();
  return cv;
}

// ---------------------------------------------------------------------------
// Root finding.

namespace detail {

// Split a squarefree polynomial whose roots all lie in its coefficient field,
// using the F_p-valued maps r -> Tr(beta r) for beta in the power basis.
inline void split_distinct(const Poly& g, int basis_from, std::vector<FieldElement>& out) {
  if (g.degree() <= 0) return;
  if (g.degree() == 1) {
    Poly mg = g.monic();
    out.push_back(-mg.coeff(0));
    return;
  }
  const Field& f = g.field();
  const u64 p = f->p;
  for (int s = basis_from; s < f->m; ++s) {
    FieldElement beta = FieldElement::gen(f).pow(s);
    if (f->m == 1) beta = FieldElement(f, 1);
    // T(X) = sum_{i<m} (beta X)^{p^i} mod g
    Poly h = Poly(f, {FieldElement(f), beta}) % g;
    Poly tr = h;
    for (int i = 1; i < f->m; ++i) {
      h = powmod(h, p, g);
      tr = tr + h;
    }
    if (tr.degree() <= 0) continue;
    for (u64 c = 0; c < p; ++c) {
      Poly part = gcd(g, tr - Poly::constant(FieldElement(f, c)));
      if (part.degree() > 0) split_distinct(part, s + 1, out);
    }
    return;
  }
  throw Error(ErrorKind::Internal, "ff", "trace splitting failed on a squarefree split polynomial");
}

}  // namespace detail

inline std::vector<RootMult> roots(const Poly& f0) {
  if (f0.is_zero()) config_error("ff", "roots of the zero polynomial");
  const Field& f = f0.field();
  if (f->p > (1ULL << 22)) budget_error("ff", "root finding supports p < 2^22");
  Poly fm = f0.monic();
  std::vector<RootMult> out;
  if (fm.degree() < 1) return out;
  Poly x = Poly::x(f);
  Poly xq = powmod(x, f->order, fm);
  Poly g = gcd(fm, xq - x);
  std::vector<FieldElement> rs;
  detail::split_distinct(g, 0, rs);
  std::sort(rs.begin(), rs.end(), [](const FieldElement& a, const FieldElement& b) { return a.index() < b.index(); });
  for (const auto& r : rs) {
    int mult = 0;
    Poly cur = fm;
    while (true) {
      auto [q, rem] = cur.divmod(Poly::linear(r));
      if (!rem.is_zero()) break;
      ++mult;
      cur = q;
    }
    out.push_back({r, mult});
  }
  return out;
}

// Exhaustive scan; kept as an independent oracle for the splitting method.
inline std::vector<RootMult> roots_by_scan(const Poly& f0) {
  if (f0.is_zero()) config_error("ff", "roots of the zero polynomial");
  const Field& f = f0.field();
  if (f->order > scaled_cap(1000000)) budget_error("ff", "exhaustive root scan limited to fields of size 10^6");
  std::vector<RootMult> out;
  for (u128 i = 0; i < f->order; ++i) {
    FieldElement r = FieldElement::from_index(f, i);
    if (!f0(r).is_zero()) continue;
    int mult = 0;
    Poly cur = f0;
    while (true) {
      auto [q, rem] = cur.divmod(Poly::linear(r));
      if (!rem.is_zero()) break;
      ++mult;
      cur = q;
    }
    out.push_back({r, mult});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factorization over F_q.

struct PolyFactor {
  Poly factor;
  int multiplicity;
};

namespace detail {

inline Poly pth_root(const Poly& f) {
  const Field& fl = f.field();
  std::vector<FieldElement> c;
  for (int i = 0; i <= f.degree(); i += static_cast<int>(fl->p)) c.push_back(frobenius(f.coeff(i), fl->m - 1));
  return Poly(fl, c);
}

inline void squarefree(const Poly& f, int scale, std::vector<PolyFactor>& out) {
  if (f.degree() < 1) return;
  Poly d = f.derivative();
  if (d.is_zero()) {
    squarefree(pth_root(f), scale * static_cast<int>(f.field()->p), out);
    return;
  }
  Poly c = gcd(f, d);
  Poly w = f / c;
  int i = 1;
  while (w.degree() > 0) {
    Poly y = gcd(w, c);
    Poly fac = w / y;
    if (fac.degree() > 0) out.push_back({fac.monic(), i * scale});
    w = y;
    c = c / y;
    ++i;
  }
  if (c.degree() > 0) squarefree(pth_root(c.monic()), scale * static_cast<int>(f.field()->p), out);
}

inline bool poly_less(const Poly& a, const Poly& b) {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  for (int i = 0; i <= a.degree(); ++i) {
    auto ia = a.coeff(i).index(), ib = b.coeff(i).index();
    if (ia != ib) return ia < ib;
  }
  return false;
}

}  // namespace detail

inline std::vector<PolyFactor> factor(const Poly& f0) {
  if (f0.is_zero()) config_error("ff", "factor of the zero polynomial");
  const Field& f = f0.field();
  std::vector<PolyFactor> sqf;
  detail::squarefree(f0.monic(), 1, sqf);
  std::vector<PolyFactor> out;
  for (const auto& [s0, mult] : sqf) {
    Poly s = s0;
    Poly x = Poly::x(f);
    Poly h = x % s;
    for (int d = 1; s.degree() >= 2 * d; ++d) {
      h = powmod(h, f->order, s);
      Poly gd = gcd(s, h - x);
      if (gd.degree() > 0) {
        if (gd.degree() == d) {
          out.push_back({gd, mult});
        } else {
          Field big = make_field(f->p, f->m * d);
          Embedding emb(f, big);
          auto rs = roots(emb.lift(gd));
          std::vector<bool> used(rs.size(), false);
          for (std::size_t i = 0; i < rs.size(); ++i) {
            if (used[i]) continue;
            std::vector<FieldElement> orbit;
            FieldElement r = rs[i].root;
            for (int k = 0; k < d; ++k) {
              orbit.push_back(r);
              for (std::size_t j = 0; j < rs.size(); ++j)
                if (!used[j] && rs[j].root == r) used[j] = true;
              r = frobenius(r, f->m);
            }
            auto fac = emb.restrict(poly_from_roots(orbit, big));
            if (!fac) throw Error(ErrorKind::Internal, "ff", "orbit polynomial not defined over base");
            out.push_back({*fac, mult});
          }
        }
        s = s / gd;
        h = h % s;
      }
    }
    if (s.degree() > 0) out.push_back({s.monic(), mult});
  }
  std::sort(out.begin(), out.end(), [](const PolyFactor& a, const PolyFactor& b) {
    if (a.factor != b.factor) return detail::poly_less(a.factor, b.factor);
    return a.multiplicity < b.multiplicity;
  });
  // Merge equal factors produced by different squarefree layers.
  std::vector<PolyFactor> merged;
  for (const auto& pf : out) {
    if (!merged.empty() && merged.back().factor == pf.factor)
      merged.back().multiplicity += pf.multiplicity;
    else
      merged.push_back(pf);
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Linear algebra over F_q.

using FMatrix = Matrix<FieldElement>;

inline FMatrix identity(const Field& f, std::size_t n) {
  FMatrix m(n, n, FieldElement(f));
  for (std::size_t i = 0; i < n; ++i) m(i, i) = FieldElement(f, 1);
  return m;
}

inline FMatrix zero_matrix(const Field& f, std::size_t r, std::size_t c) { return FMatrix(r, c, FieldElement(f)); }

inline FMatrix scalar_mul(const FMatrix& a, const FieldElement& s) {
  return a.map([&](const FieldElement& x) { return x * s; });
}

inline FMatrix lift(const Embedding& e, const FMatrix& a) {
  return a.map([&](const FieldElement& x) { return e.lift(x); });
}

inline bool is_zero(const FMatrix& a) {
  for (const auto& x : a.data())
    if (!x.is_zero()) return false;
  return true;
}

// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(FMatrix& a) {
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < a.cols() && r < a.rows(); ++c) {
    std::size_t pr = a.rows();
    for (std::size_t i = r; i < a.rows(); ++i)
      if (!a(i, c).is_zero()) {
        pr = i;
        break;
      }
    if (pr == a.rows()) continue;
    a.swap_rows(pr, r);
    FieldElement inv = a(r, c).inverse();
    for (std::size_t j = c; j < a.cols(); ++j) a(r, j) = a(r, j) * inv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == r || a(i, c).is_zero()) continue;
      FieldElement f = a(i, c);
      for (std::size_t j = c; j < a.cols(); ++j) a(i, j) -= f * a(r, j);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

inline std::size_t rank(FMatrix a) { return rref(a).size(); }

// Columns form a basis of the right kernel.
inline FMatrix kernel(FMatrix a) {
  const Field f = a(0, 0).field();
  auto piv = rref(a);
  std::vector<bool> is_piv(a.cols(), false);
  for (auto c : piv) is_piv[c] = true;
  std::vector<std::size_t> free;
  for (std::size_t c = 0; c < a.cols(); ++c)
    if (!is_piv[c]) free.push_back(c);
  FMatrix k(a.cols(), free.size(), FieldElement(f));
  for (std::size_t t = 0; t < free.size(); ++t) {
    k(free[t], t) = FieldElement(f, 1);
    for (std::size_t r = 0; r < piv.size(); ++r) k(piv[r], t) = -a(r, free[t]);
  }
  return k;
}

// Solves A X = B; nullopt if inconsistent. A need not be square.
inline std::optional<FMatrix> solve(const FMatrix& a, const FMatrix& b) {
  const Field f = a(0, 0).field();
  FMatrix aug(a.rows(), a.cols() + b.cols(), FieldElement(f));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    for (std::size_t j = 0; j < b.cols(); ++j) aug(i, a.cols() + j) = b(i, j);
  }
  auto piv = rref(aug);
  for (auto c : piv)
    if (c >= a.cols()) return std::nullopt;
  FMatrix x(a.cols(), b.cols(), FieldElement(f));
  for (std::size_t r = 0; r < piv.size(); ++r)
    for (std::size_t j = 0; j < b.cols(); ++j) x(piv[r], j) = aug(r, a.cols() + j);
  return x;
}

inline std::optional<FMatrix> inverse(const FMatrix& a) {
  if (!a.square()) return std::nullopt;
  auto x = solve(a, identity(a(0, 0).field(), a.rows()));
  if (!x || rank(a) != a.rows()) return std::nullopt;
  return x;
}

inline FieldElement det(FMatrix a) {
  const Field f = a(0, 0).field();
  FieldElement d(f, 1);
  std::size_t n = a.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pr = n;
    for (std::size_t i = c; i < n; ++i)
      if (!a(i, c).is_zero()) {
        pr = i;
        break;
      }
    if (pr == n) return FieldElement(f);
    if (pr != c) {
      a.swap_rows(pr, c);
      d = -d;
    }
    d = d * a(c, c);
    FieldElement inv = a(c, c).inverse();
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a(i, c).is_zero()) continue;
      FieldElement t = a(i, c) * inv;
      for (std::size_t j = c; j < n; ++j) a(i, j) -= t * a(c, j);
    }
  }
  return d;
}

// det(X I - M) via reduction to upper Hessenberg form.
inline Poly char_poly(const FMatrix& m) {
  if (!m.square()) config_error("ff", "characteristic polynomial of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) throw Error(ErrorKind::Internal, "ff", "empty matrix");
  const Field f = m(0, 0).field();
  FMatrix h = m;
  for (std::size_t c = 0; c + 2 < n; ++c) {
    std::size_t r = n;
    for (std::size_t i = c + 1; i < n; ++i)
      if (!h(i, c).is_zero()) {
        r = i;
        break;
      }
    if (r == n) continue;
    if (r != c + 1) {
      h.swap_rows(r, c + 1);
      h.swap_cols(r, c + 1);
    }
    FieldElement inv = h(c + 1, c).inverse();
    for (std::size_t i = c + 2; i < n; ++i) {
      if (h(i, c).is_zero()) continue;
      FieldElement u = h(i, c) * inv;
      for (std::size_t j = 0; j < n; ++j) h(i, j) -= u * h(c + 1, j);
      for (std::size_t j = 0; j < n; ++j) h(j, c + 1) += u * h(j, i);
    }
  }
  std::vector<Poly> pk;
  pk.push_back(Poly::constant(FieldElement(f, 1)));
  Poly x = Poly::x(f);
  for (std::size_t k = 1; k <= n; ++k) {
    Poly next = (x - Poly::constant(h(k - 1, k - 1))) * pk[k - 1];
    FieldElement prod(f, 1);
    for (std::size_t i = k - 1; i-- > 0;) {
      prod = prod * h(i + 1, i);
      FieldElement coef = h(i, k - 1) * prod;
      if (!coef.is_zero()) next = next - pk[i] * coef;
    }
    pk.push_back(next);
  }
  return pk[n];
}

struct EigenFactor {
  Poly factor;            // irreducible over the matrix field
  int multiplicity;
  Field extension;        // F_{q^deg}
  FieldElement eigenvalue;  // a root of factor in the extension
};

struct CharPolyEigendata {
  Poly char_poly;
  std::vector<EigenFactor> factors;
};

inline CharPolyEigendata char_poly_eigendata(const FMatrix& m) {
  CharPolyEigendata out;
  out.char_poly = char_poly(m);
  const Field f = m(0, 0).field();
  for (const auto& [fac, mult] : factor(out.char_poly)) {
    int d = fac.degree();
    Field ext = d == 1 ? f : make_field(f->p, f->m * d);
    Embedding emb(f, ext);
    auto rs = roots(emb.lift(fac));
    out.factors.push_back({fac, mult, ext, rs.front().root});
  }
  return out;
}

inline std::string matrix_to_string(const FMatrix& a) {
  std::string s;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    s += "[";
    for (std::size_t j = 0; j < a.cols(); ++j) s += (j ? " " : "") + a(i, j).to_string();
    s += "]\n";
  }
  return s;
}

}  // namespace ssmod
