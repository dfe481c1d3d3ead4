#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>

#include "ssmod/ff.hpp"
#include "ssmod/util.hpp"

namespace ssmod {

// W_n(F_{p^2}) realized as (Z/p^n)[w]/(w^2 + c1 w + c0), the integer lift of
// the F_{p^2} modulus, with Frobenius lift sigma(w) = s0 + s1 w.
struct WittParams {
  u64 p = 0;
  int n = 0;
  u64 mod = 0;  // p^n
  u64 c0 = 0, c1 = 0;
  u64 s0 = 0, s1 = 0;
  Field residue;  // F_{p^2}
};

using Witt = std::shared_ptr<const WittParams>;

class WittElement {
 public:
  WittElement() = default;
  WittElement(Witt w, u64 a, u64 b = 0) : w_(std::move(w)), a_(a % w_->mod), b_(b % w_->mod) {}
  static WittElement from_signed(const Witt& w, i64 a, i64 b = 0) {
    i64 m = static_cast<i64>(w->mod);
    return WittElement(w, static_cast<u64>(mod_floor(a, m)), static_cast<u64>(mod_floor(b, m)));
  }
  static WittElement omega(const Witt& w) { return WittElement(w, 0, 1); }
  static WittElement random(const Witt& w, std::mt19937_64& rng) {
    std::uniform_int_distribution<u64> d(0, w->mod - 1);
    u64 a = d(rng);
    return WittElement(w, a, d(rng));
  }

  const Witt& params() const { return w_; }
  u64 a() const { return a_; }
  u64 b() const { return b_; }

  WittElement zero() const { return WittElement(w_, 0, 0); }
  WittElement one() const { return WittElement(w_, 1, 0); }
  bool is_zero() const { return a_ == 0 && b_ == 0; }

  WittElement operator+(const WittElement& o) const { return WittElement(w_, a_ + o.a_, b_ + o.b_); }
  WittElement operator-(const WittElement& o) const { return WittElement(w_, a_ + w_->mod - o.a_, b_ + w_->mod - o.b_); }
  WittElement operator-() const { return zero() - *this; }
  WittElement operator*(const WittElement& o) const {
    const u64 m = w_->mod;
    u64 ac = mulmod(a_, o.a_, m), bd = mulmod(b_, o.b_, m);
    u64 cross = (mulmod(a_, o.b_, m) + mulmod(b_, o.a_, m)) % m;
    // w^2 = -c1 w - c0
    u64 ra = (ac + m - mulmod(bd, w_->c0, m)) % m;
    u64 rb = (cross + m - mulmod(bd, w_->c1, m)) % m;
    return WittElement(w_, ra, rb);
  }
  WittElement scale(u64 s) const { return WittElement(w_, mulmod(a_, s % w_->mod, w_->mod), mulmod(b_, s % w_->mod, w_->mod)); }
  WittElement& operator+=(const WittElement& o) { return *this = *this + o; }
  WittElement& operator-=(const WittElement& o) { return *this = *this - o; }

  // Units are exactly the elements with nonzero residue.
  bool is_unit() const { return a_ % w_->p != 0 || b_ % w_->p != 0; }

  friend bool operator==(const WittElement& x, const WittElement& y) { return x.a_ == y.a_ && x.b_ == y.b_; }
  friend bool operator!=(const WittElement& x, const WittElement& y) { return !(x == y); }
  friend bool operator<(const WittElement& x, const WittElement& y) {
    return x.a_ != y.a_ ? x.a_ < y.a_ : x.b_ < y.b_;
  }

  std::string to_string() const {
    return "(" + std::to_string(a_) + "+" + std::to_string(b_) + "w mod " + std::to_string(w_->p) + "^" +
           std::to_string(w_->n) + ")";
  }

 private:
  Witt w_;
  u64 a_ = 0, b_ = 0;
};

inline WittElement sigma(const WittElement& x, int k = 1) {
  if (((k % 2) + 2) % 2 == 0) return x;
  const auto& w = x.params();
  // a + b sigma(w)
  return WittElement(w, x.a() + mulmod(x.b(), w->s0, w->mod), mulmod(x.b(), w->s1, w->mod));
}

// x * sigma(x), which lies in Z/p^n.
inline u64 witt_norm(const WittElement& x) {
  WittElement n = x * sigma(x);
  if (n.b() != 0) throw Error(ErrorKind::Internal, "wittring", "norm left Z/p^n");
  return n.a();
}

// Inverse via the other root -c1 - w of the modulus, so it does not depend on
// the stored sigma (which is being computed while this is first used).
inline WittElement inverse(const WittElement& x) {
  if (!x.is_unit()) config_error("wittring", "element " + x.to_string() + " is not a unit");
  const auto& w = x.params();
  WittElement conj(w, x.a() + w->mod - mulmod(w->c1, x.b(), w->mod), w->mod - x.b());
  WittElement nm = x * conj;
  return conj.scale(invmod(nm.a(), w->mod));
}

inline FieldElement reduce_mod_p(const WittElement& x) {
  const auto& w = x.params();
  return FieldElement(w->residue, std::vector<u64>{x.a() % w->p, x.b() % w->p});
}

// Lift with coordinates in [0, p).
inline WittElement lift_residue(const Witt& w, const FieldElement& x) {
  return WittElement(w, x.coeffs()[0], x.coeffs()[1]);
}

inline Witt make_witt(u64 p, int n) {
  if (!is_prime(p)) config_error("wittring", "p must be prime (got " + std::to_string(p) + ")");
  if (p < 3) config_error("wittring", "p = 2 is not supported by the Witt/Dieudonne stack");
  if (n < 1) config_error("wittring", "truncation length must be >= 1");
  if (static_cast<double>(n) * std::log2(static_cast<double>(p)) > 40)
    budget_error("wittring", "p^n exceeds 2^40");
  auto wp = std::make_shared<WittParams>();
  wp->p = p;
  wp->n = n;
  wp->mod = ipow(p, n);
  wp->residue = make_field(p, 2);
  wp->c0 = wp->residue->modulus[0];
  wp->c1 = wp->residue->modulus[1];
  // Start from the residue of t^p, then Newton-iterate on the lifted modulus.
  FieldElement tp = frobenius(FieldElement::gen(wp->residue), 1);
  wp->s0 = tp.coeffs()[0];
  wp->s1 = tp.coeffs()[1];
  Witt tmp = wp;
  WittElement r(tmp, wp->s0, wp->s1);
  auto P = [&](const WittElement& x) { return x * x + x.scale(wp->c1) + WittElement(tmp, wp->c0); };
  for (int it = 0; it < n + 1; ++it) {
    WittElement d = r.scale(2) + WittElement(tmp, wp->c1);
    r = r - P(r) * inverse(d);
  }
  if (!P(r).is_zero()) throw Error(ErrorKind::Internal, "wittring", "Hensel lift of sigma(w) failed");
  wp->s0 = r.a();
  wp->s1 = r.b();
  return wp;
}

// The natural projection W_n -> W_{n-1}, given the target parameters.
inline WittElement project(const WittElement& x, const Witt& lower) {
  return WittElement(lower, x.a() % lower->mod, x.b() % lower->mod);
}

}  // namespace ssmod
