#include <gtest/gtest.h>

#include <set>

#include "ssmod/ellcurve.hpp"

using namespace ssmod;

namespace {

// Naive count: all (x, y) pairs plus infinity.
u64 brute_count(const Curve& e) {
  u64 n = 1;
  for (u128 i = 0; i < e.field->order; ++i)
    for (u128 k = 0; k < e.field->order; ++k) {
      FieldElement x = FieldElement::from_index(e.field, i), y = FieldElement::from_index(e.field, k);
      if (y * y == e.rhs(x)) ++n;
    }
  return n;
}

std::vector<FieldElement> supersingular_js_by_scan(const Field& f) {
  std::vector<FieldElement> out;
  auto chi = quadratic_character_table(f);
  for (u128 i = 0; i < f->order; ++i) {
    FieldElement j = FieldElement::from_index(f, i);
    Curve e = curve_from_j(j);
    i64 t = static_cast<i64>(f->order) + 1 - static_cast<i64>(count_points(e, chi));
    if (t % static_cast<i64>(f->p) == 0) out.push_back(j);
  }
  return out;
}

}  // namespace

TEST(EllCurve, CurveFromJ) {
  Field f11 = make_field(11, 1);
  Curve e0 = curve_from_j(FieldElement(f11, 0));
  EXPECT_EQ(e0.a4, FieldElement(f11, 0));
  EXPECT_EQ(e0.a6, FieldElement(f11, 1));
  Curve e1 = curve_from_j(FieldElement(f11, 1));
  EXPECT_EQ(e1.a4, FieldElement(f11, 1));
  EXPECT_EQ(e1.a6, FieldElement(f11, 0));
  Field f13 = make_field(13, 1);
  EXPECT_EQ(curve_from_j(FieldElement(f13, 5)).j_invariant(), FieldElement(f13, 5));
  Field f49 = make_field(7, 2);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    FieldElement j = FieldElement::random(f49, rng);
    EXPECT_EQ(curve_from_j(j).j_invariant(), j);
  }
  EXPECT_THROW(make_curve(FieldElement(f11, 0), FieldElement(f11, 0)), Error);
}

TEST(EllCurve, CountPoints) {
  Field f5 = make_field(5, 1);
  Curve e = make_curve(FieldElement(f5, 0), FieldElement(f5, 1));
  EXPECT_EQ(count_points(e), 6u);
  EXPECT_EQ(brute_count(e), 6u);
  for (u64 p : {7, 11, 13}) {
    Field f = make_field(p, 1);
    std::mt19937_64 rng(p);
    for (int i = 0; i < 10; ++i) {
      FieldElement a = FieldElement::random(f, rng), b = FieldElement::random(f, rng);
      Curve c{f, a, b};
      if (c.discriminant().is_zero()) continue;
      u64 n = count_points(c);
      EXPECT_EQ(n, brute_count(c));
      double dev = std::abs(static_cast<double>(n) - static_cast<double>(p + 1));
      EXPECT_LE(dev, 2 * std::sqrt(static_cast<double>(p)));
      auto tw = twists(c);
      if (!c.a4.is_zero() && !c.a6.is_zero()) {
        EXPECT_EQ(n + count_points(tw[1]), 2 * (p + 1));
      }
    }
  }
  Field f49 = make_field(7, 2);
  Curve e49 = make_curve(FieldElement(f49, 1), FieldElement(f49, 3));
  EXPECT_EQ(count_points(e49), brute_count(e49));
}

TEST(EllCurve, Supersingularity) {
  Field f11 = make_field(11, 1);
  EXPECT_TRUE(is_supersingular(curve_from_j(FieldElement(f11, 0))));
  EXPECT_TRUE(is_supersingular(curve_from_j(FieldElement(f11, 1))));
  EXPECT_FALSE(is_supersingular(curve_from_j(FieldElement(f11, 2))));
  EXPECT_EQ(count_points(curve_from_j(FieldElement(f11, 0))), 12u);
}

TEST(EllCurve, CanonicalModelExamples) {
  Field f121 = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f121, 0));
  EXPECT_EQ(count_points(e), 144u);
  EXPECT_EQ(e.j_invariant(), FieldElement(f121, 0));
  Field f49 = make_field(7, 2);
  ASSERT_TRUE(is_supersingular(curve_from_j(FieldElement(f49, 6))));
  Curve e7 = canonical_model(FieldElement(f49, 6));
  EXPECT_EQ(count_points(e7), 64u);
  std::mt19937_64 rng(8);
  EXPECT_TRUE(verify_frobenius_minus_p(e, 20, rng));
  EXPECT_TRUE(verify_frobenius_minus_p(e7, 20, rng));
  // The other twists fail the Frobenius check.
  for (const Curve& t : twists(curve_from_j(FieldElement(f121, 0))))
    if (!(t == e)) {
      EXPECT_FALSE(verify_frobenius_minus_p(t, 5, rng));
    }
}

TEST(EllCurve, CanonicalTraceAllSupersingular) {
  for (u64 p : {5, 7, 11, 13, 17, 19, 23}) {
    Field f = make_field(p, 2);
    auto js = supersingular_js_by_scan(f);
    ASSERT_FALSE(js.empty());
    for (const auto& j : js) {
      Curve e = canonical_model(j);
      EXPECT_EQ(frobenius_trace(e), -2 * static_cast<i64>(p)) << "p=" << p << " j=" << j.to_string();
    }
  }
}

TEST(EllCurve, GroupLaw) {
  Field f = make_field(13, 2);
  Curve e = make_curve(FieldElement(f, 2), FieldElement(f, 5));
  std::mt19937_64 rng(21);
  for (int i = 0; i < 30; ++i) {
    Point P = random_point(e, rng), Q = random_point(e, rng), R = random_point(e, rng);
    ASSERT_TRUE(on_curve(e, P));
    EXPECT_TRUE(on_curve(e, add(e, P, Q)));
    EXPECT_EQ(add(e, add(e, P, Q), R), add(e, P, add(e, Q, R)));
    EXPECT_EQ(add(e, P, Q), add(e, Q, P));
    EXPECT_TRUE(add(e, P, neg(P)).inf);
  }
  Point P = random_point(e, rng);
  Point acc = Point::infinity(f);
  for (u64 m = 0; m <= 50; ++m) {
    EXPECT_EQ(mul(e, P, m), acc);
    acc = add(e, acc, P);
  }
  EXPECT_TRUE(mul(e, P, count_points(e)).inf);
}

TEST(EllCurve, TwoTorsion) {
  Field f = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f, 1));
  TorsionBasis tb = torsion_basis(e, 2);
  Poly rhs = tb.emb.lift(e.rhs_poly());
  EXPECT_TRUE(tb.P.y.is_zero());
  EXPECT_TRUE(tb.Q.y.is_zero());
  EXPECT_TRUE(rhs(tb.P.x).is_zero());
  EXPECT_TRUE(rhs(tb.Q.x).is_zero());
  EXPECT_NE(tb.P.x, tb.Q.x);
}

TEST(EllCurve, TorsionBasisAndPairing) {
  Field f = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f, 0));
  for (u64 n : {3, 4, 5, 6}) {
    TorsionBasis tb = torsion_basis(e, n, 5);
    EXPECT_EQ(tb.dlog.size(), n * n);
    EXPECT_TRUE(mul(tb.curve, tb.P, n).inf);
    EXPECT_TRUE(mul(tb.curve, tb.Q, n).inf);
    auto w = weil_pairing(tb.curve, tb.P, tb.Q, n);
    ASSERT_TRUE(w.has_value());
    EXPECT_TRUE(w->pow(n).is_one());
    for (u64 d = 1; d < n; ++d)
      if (n % d == 0) {
        EXPECT_FALSE(w->pow(d).is_one()) << n;
      }
    // Bilinearity and alternation.
    auto w2 = weil_pairing(tb.curve, mul(tb.curve, tb.P, 2), tb.Q, n);
    if (w2) {
      EXPECT_EQ(*w2, w->pow(2));
    }
    auto wq = weil_pairing(tb.curve, tb.Q, tb.P, n);
    ASSERT_TRUE(wq.has_value());
    EXPECT_EQ(*wq * *w, w->one());
    auto ws = weil_pairing(tb.curve, tb.P, add(tb.curve, tb.P, tb.Q), n);
    if (ws) {
      EXPECT_EQ(*ws, *w);
    }
  }
  // p = 11, N = 3: (-11) = 1 mod 3, so E[3] is already rational over F_121.
  EXPECT_EQ(torsion_basis(e, 3).field->m, 2);
}

TEST(EllCurve, PrimeTorsionRoutesAgree) {
  Field f = make_field(13, 2);
  Curve e = canonical_model(FieldElement(f, 5));
  for (u64 l : {2, 3, 5}) {
    TorsionBasis a = torsion_basis_canonical(e, l, 3), b = torsion_basis_prime(e, l);
    std::set<Point> pa, pb;
    for (const auto& [pt, ab] : a.dlog) pa.insert(pt);
    for (const auto& [pt, ab] : b.dlog) {
      // move into a's field if the routes chose different extensions
      if (same_field(a.field, b.field)) pb.insert(pt);
    }
    if (same_field(a.field, b.field)) {
      EXPECT_EQ(pa, pb);
    }
    EXPECT_EQ(b.dlog.size(), l * l);
  }
}

TEST(EllCurve, DivisionPolynomials) {
  Field f = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f, 0));
  auto F = division_polynomials(e, 7);
  EXPECT_EQ(F[3].degree(), 4);
  EXPECT_EQ(F[5].degree(), 12);
  EXPECT_EQ(F[7].degree(), 24);
  for (u64 n : {3, 4, 5, 6}) {
    TorsionBasis tb = torsion_basis(e, n);
    Poly Fn = tb.emb.lift(F[n]);
    for (const auto& [pt, ab] : tb.dlog) {
      if (pt.inf) continue;
      // Points of order exactly 2 are the roots of y for even n.
      if (pt.y.is_zero()) continue;
      EXPECT_TRUE(Fn(pt.x).is_zero()) << n;
    }
  }
}

TEST(EllCurve, VeluIdentityAndTwoIsogeny) {
  Field f = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f, 1));
  Isogeny id = velu(e, Poly::constant(FieldElement(f, 1)), 1);
  EXPECT_EQ(id.codomain, e);
  EXPECT_TRUE(id.scalar.is_one());
  // y^2 = x^3 + x with kernel x = 0: codomain y^2 = x^3 - 4x.
  for (u64 p : {11, 13}) {
    Field fp = make_field(p, 1);
    Curve c = make_curve(FieldElement(fp, 1), FieldElement(fp, 0));
    Isogeny phi = velu(c, Poly::x(fp), 2);
    EXPECT_EQ(phi.codomain.a4, -FieldElement(fp, 4));
    EXPECT_TRUE(phi.codomain.a6.is_zero());
  }
}

TEST(EllCurve, VeluMapsPointsAndDual) {
  for (u64 p : {11, 13}) {
    Field f = make_field(p, 2);
    auto js = supersingular_js_by_scan(f);
    for (u64 l : {2, 3, 5}) {
      Curve e = canonical_model(js.back());
      SubgroupList sl = ell_subgroups(e, l);
      ASSERT_EQ(sl.subgroups.size(), l + 1);
      // Product of kernel polynomials is the monic l-division polynomial.
      Poly prod = Poly::constant(FieldElement(f, 1));
      for (const auto& s : sl.subgroups) prod = prod * s.kernel_poly;
      EXPECT_EQ(prod, torsion_x_poly(e, static_cast<int>(l)));
      for (const auto& s : sl.subgroups) {
        EXPECT_TRUE(mul(sl.torsion.curve, s.generator, l).inf);
        EXPECT_FALSE(s.generator.inf);
        Isogeny phi = velu(e, s.kernel_poly, l);
        EXPECT_EQ(phi.degree, l);
        EXPECT_TRUE(is_canonical_type(phi.codomain));
        Isogeny can = to_canonical(phi);
        EXPECT_EQ(can.codomain, canonical_model(phi.codomain.j_invariant()));
        // Homomorphism on random points over F_{p^4}.
        Field big = make_field(p, 4);
        Embedding emb(f, big);
        Curve eb = base_change(e, emb), cb = base_change(phi.codomain, emb);
        LiftedIsogeny lift(phi, big);
        std::mt19937_64 rng(l * 7 + p);
        for (int i = 0; i < 5; ++i) {
          Point P = random_point(eb, rng), Q = random_point(eb, rng);
          Point fp = lift(P), fq = lift(Q);
          EXPECT_TRUE(on_curve(cb, fp));
          EXPECT_EQ(lift(add(eb, P, Q)), add(cb, fp, fq));
        }
        // Dual composes to [l], on the kernel it vanishes.
        Isogeny d = dual(phi);
        Isogeny dd = compose(d, phi);
        EXPECT_EQ(dd.codomain, e);
        EXPECT_EQ(dd.degree, l * l);
        EXPECT_EQ(dd.scalar, FieldElement(f, l));
        EXPECT_EQ(dd.scalar, d.scalar * phi.scalar);
        LiftedIsogeny ld(dd, big);
        for (int i = 0; i < 20; ++i) {
          Point P = random_point(eb, rng);
          EXPECT_EQ(ld(P), mul(eb, P, l));
        }
        LiftedIsogeny lk(phi, sl.torsion.field);
        EXPECT_TRUE(lk(s.generator).inf);
      }
    }
  }
}

TEST(EllCurve, IsomorphismScalars) {
  Field f = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f, 0));
  auto us = isomorphisms(e, e);
  EXPECT_EQ(us.size(), 6u);  // Aut of j = 0
  Curve e1 = canonical_model(FieldElement(f, 1));
  EXPECT_EQ(isomorphisms(e1, e1).size(), 4u);
  std::mt19937_64 rng(3);
  FieldElement u = FieldElement::random(f, rng);
  Isogeny iso = isomorphism(e, u);
  EXPECT_EQ(iso.scalar, u.inverse());
  auto back = isomorphisms(iso.codomain, e);
  EXPECT_EQ(back.size(), 6u);
  EXPECT_TRUE(std::find(back.begin(), back.end(), u.inverse()) != back.end());
}

TEST(EllCurve, SupersingularGraphRegular) {
  for (u64 p : {11, 13, 17}) {
    Field f = make_field(p, 2);
    auto js = supersingular_js_by_scan(f);
    std::set<std::vector<u64>> jset;
    for (const auto& j : js) jset.insert(j.coeffs());
    for (u64 l : {2, 3}) {
      for (const auto& j : js) {
        SubgroupList sl = ell_subgroups(canonical_model(j), l);
        EXPECT_EQ(sl.subgroups.size(), l + 1);
        for (const auto& s : sl.subgroups) {
          FieldElement j2 = velu(canonical_model(j), s.kernel_poly, l).codomain.j_invariant();
          EXPECT_TRUE(jset.count(j2.coeffs())) << "neighbour not supersingular";
        }
      }
    }
  }
}

TEST(EllCurve, IsogenyTypeAndKerCoker) {
  Field f = make_field(11, 2);
  Curve e = canonical_model(FieldElement(f, 0));
  for (u64 l : {2, 3}) {
    SubgroupList sl = ell_subgroups(e, l);
    Isogeny phi = to_canonical(velu(e, sl.subgroups[1].kernel_poly, l));
    IsogenyType t = isogeny_type(phi, l);
    EXPECT_EQ(t.a, 0);
    EXPECT_EQ(t.b, 1);
    for (u64 seed = 2; seed < 22; ++seed) EXPECT_EQ(isogeny_type(phi, l, seed), t);
    Isogeny ll = compose(dual(phi), phi);
    IsogenyType tl = isogeny_type(ll, l);
    EXPECT_EQ(tl.a, 1);
    EXPECT_EQ(tl.b, 1);
    KerCoker id = ker_coker_check(identity_isogeny(e), l, 1);
    EXPECT_EQ(id.ker_order, 1u);
    EXPECT_EQ(id.coker_order, 1u);
    KerCoker k1 = ker_coker_check(phi, l, 1);
    EXPECT_EQ(k1.ker_order, l);
    EXPECT_EQ(k1.coker_order, l);
    EXPECT_TRUE(k1.match);
    KerCoker k2 = ker_coker_check(ll, l, 2);
    EXPECT_EQ(k2.ker_order, l * l);
    EXPECT_EQ(k2.coker_order, l * l);
    EXPECT_TRUE(k2.match);
  }
  EXPECT_THROW(ker_coker_check(compose(dual(to_canonical(velu(e, ell_subgroups(e, 2).subgroups[0].kernel_poly, 2))),
                                       to_canonical(velu(e, ell_subgroups(e, 2).subgroups[0].kernel_poly, 2))),
                               2, 1),
               Error);
}
