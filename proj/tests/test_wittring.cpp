#include <gtest/gtest.h>

#include "ssmod/wittring.hpp"

using namespace ssmod;

TEST(Witt, Example3_2) {
  Witt w = make_witt(3, 2);
  EXPECT_EQ(w->mod, 9u);
  EXPECT_EQ(w->c0, 1u);
  EXPECT_EQ(w->c1, 0u);
  WittElement s = sigma(WittElement::omega(w));
  EXPECT_EQ(s, WittElement(w, 0, 8));
}

TEST(Witt, Example5_3Hensel) {
  Witt w = make_witt(5, 3);
  WittElement s = sigma(WittElement::omega(w));
  WittElement lifted = s * s + s.scale(w->c1) + WittElement(w, w->c0);
  EXPECT_TRUE(lifted.is_zero());
  FieldElement t = FieldElement::gen(w->residue);
  EXPECT_EQ(reduce_mod_p(s), t.pow(5));
}

TEST(Witt, SigmaIsOtherRootOfModulus) {
  for (u64 p : {3, 5, 7, 11, 13}) {
    for (int n : {1, 2, 4}) {
      Witt w = make_witt(p, n);
      // Sum of the roots is -c1.
      WittElement expected = -WittElement(w, w->c1) - WittElement::omega(w);
      EXPECT_EQ(sigma(WittElement::omega(w)), expected) << p << " " << n;
    }
  }
}

TEST(Witt, LengthOneIsFrobenius) {
  for (u64 p : {3, 7, 11}) {
    Witt w = make_witt(p, 1);
    std::mt19937_64 rng(p);
    for (int i = 0; i < 50; ++i) {
      WittElement x = WittElement::random(w, rng);
      EXPECT_EQ(reduce_mod_p(sigma(x)), frobenius(reduce_mod_p(x)));
    }
  }
}

TEST(Witt, RingAxiomsAndSigma) {
  for (u64 p : {3, 5, 11}) {
    Witt w = make_witt(p, 3);
    std::mt19937_64 rng(17 + p);
    for (int i = 0; i < 300; ++i) {
      WittElement x = WittElement::random(w, rng), y = WittElement::random(w, rng), z = WittElement::random(w, rng);
      EXPECT_EQ((x * y) * z, x * (y * z));
      EXPECT_EQ(x * (y + z), x * y + x * z);
      EXPECT_EQ(x * y, y * x);
      EXPECT_EQ(sigma(x * y), sigma(x) * sigma(y));
      EXPECT_EQ(sigma(x + y), sigma(x) + sigma(y));
      EXPECT_EQ(sigma(x, 2), x);
      EXPECT_EQ(reduce_mod_p(sigma(x)), reduce_mod_p(x).pow(p));
      EXPECT_EQ(reduce_mod_p(x * y), reduce_mod_p(x) * reduce_mod_p(y));
    }
    WittElement a(w, 7);
    EXPECT_EQ(sigma(a), a);
  }
}

TEST(Witt, UnitInverses) {
  Witt w = make_witt(7, 3);
  std::mt19937_64 rng(5);
  int done = 0;
  while (done < 500) {
    WittElement x = WittElement::random(w, rng);
    if (!x.is_unit()) continue;
    EXPECT_EQ(x * inverse(x), x.one());
    ++done;
  }
  WittElement nonunit(w, 7, 14);
  EXPECT_FALSE(nonunit.is_unit());
  try {
    inverse(nonunit);
    FAIL() << "expected error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
}

TEST(Witt, ReductionExamples) {
  Witt w = make_witt(5, 2);
  std::mt19937_64 rng(1);
  WittElement y = WittElement::random(w, rng);
  EXPECT_TRUE(reduce_mod_p(y.scale(5)).is_zero());
  EXPECT_EQ(reduce_mod_p(WittElement::omega(w)), FieldElement::gen(w->residue));
  EXPECT_EQ(reduce_mod_p(WittElement(w, 1) + y.scale(5)), FieldElement(w->residue, 1));
}

TEST(Witt, ProjectionTower) {
  for (u64 p : {3, 5, 7}) {
    Witt hi = make_witt(p, 4), lo = make_witt(p, 3);
    std::mt19937_64 rng(p * 3);
    for (int i = 0; i < 200; ++i) {
      WittElement x = WittElement::random(hi, rng), y = WittElement::random(hi, rng);
      EXPECT_EQ(project(x * y, lo), project(x, lo) * project(y, lo));
      EXPECT_EQ(project(x + y, lo), project(x, lo) + project(y, lo));
      EXPECT_EQ(project(sigma(x), lo), sigma(project(x, lo)));
    }
  }
}

TEST(Witt, Errors) {
  EXPECT_THROW(make_witt(4, 2), Error);
  EXPECT_THROW(make_witt(2, 2), Error);
  try {
    make_witt(3, 40);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
}
