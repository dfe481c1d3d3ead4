#include <gtest/gtest.h>

#include <set>

#include "ssmod/qexp.hpp"
#include "ssmod/sslocus.hpp"

using namespace ssmod;

namespace {

// Supersingular j from the roots of the Legendre-form Hasse polynomial
// sum_i C(m, i)^2 x^i, m = (p - 1)/2, found by exhaustive scan.
std::set<std::vector<u64>> hasse_oracle(u64 p) {
  Field f = make_field(p, 2);
  u64 m = (p - 1) / 2;
  std::vector<FieldElement> c;
  u64 binom = 1;
  for (u64 i = 0; i <= m; ++i) {
    c.push_back(FieldElement(f, mulmod(binom, binom, p)));
    binom = mulmod(mulmod(binom, m - i, p), invmod((i + 1) % p, p), p);
  }
  std::set<std::vector<u64>> js;
  for (const auto& r : roots_by_scan(Poly(f, c))) {
    FieldElement l = r.root, one(f, 1);
    FieldElement t = l * l - l + one;
    FieldElement j = FieldElement(f, 256) * t * t * t / (l * l * (l - one) * (l - one));
    js.insert(j.coeffs());
  }
  return js;
}

std::vector<CanonicalValue> ints(u64 p, std::vector<i64> v) {
  std::vector<CanonicalValue> out;
  for (i64 x : v) out.push_back(canonical(FieldElement(make_field(p, 1), static_cast<u64>(mod_floor(x, p)))));
  return out;
}

std::multiset<std::vector<CanonicalValue>> system_set(const EigenResult& r) {
  std::multiset<std::vector<CanonicalValue>> s;
  for (const auto& sys : r.systems)
    for (int i = 0; i < sys.multiplicity; ++i) s.insert(sys.canonical);
  return s;
}

bool row_sums_equal(const FMatrix& m, u64 v) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    FieldElement s(m(0, 0).field());
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j);
    if (s != FieldElement(m(0, 0).field(), v)) return false;
  }
  return true;
}

}  // namespace

TEST(SSLocus, ClassesMatchHasseOracle) {
  for (u64 p : {5, 7, 11, 13, 17, 19, 23, 31, 37}) {
    ClassList cl = supersingular_classes(p);
    std::set<std::vector<u64>> got;
    for (const auto& c : cl.classes) {
      got.insert(c.j.coeffs());
      EXPECT_TRUE(is_supersingular(c.model));
      EXPECT_TRUE(is_canonical_type(c.model));
      int expected = c.j.is_zero() ? 6 : c.j == FieldElement(c.j.field(), 1728) ? 4 : 2;
      EXPECT_EQ(c.aut_order, expected) << "p=" << p << " j=" << c.j;
    }
    EXPECT_EQ(got, hasse_oracle(p)) << "p=" << p;
    EXPECT_EQ(cl.mass24, p - 1) << "p=" << p;  // sum 1/aut = (p-1)/24
  }
}

TEST(SSLocus, ClassExamples) {
  ClassList c11 = supersingular_classes(11);
  ASSERT_EQ(c11.classes.size(), 2u);
  EXPECT_TRUE(c11.classes[0].j.is_zero());
  EXPECT_EQ(c11.classes[0].aut_order, 6);
  EXPECT_EQ(c11.classes[1].j, FieldElement(make_field(11, 2), 1));
  EXPECT_EQ(c11.classes[1].aut_order, 4);
  ClassList c13 = supersingular_classes(13);
  EXPECT_EQ(c13.classes.size(), 1u);
  EXPECT_EQ(c13.mass24, 12u);
}

TEST(SSLocus, ClassErrors) {
  try {
    supersingular_classes(4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
  }
  try {
    supersingular_classes(61);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Budget);
  }
  EXPECT_THROW(build_sigma(11, 11), Error);
}

TEST(SSLocus, SigmaSizes) {
  EXPECT_EQ(build_sigma(11, 1).points.size(), 2u);
  EXPECT_EQ(build_sigma(13, 1).points.size(), 1u);
  EXPECT_EQ(gl2_order(3), 48u);
  EXPECT_EQ(gl2_elements(3).size(), 48u);
  EXPECT_EQ(gl2_elements(4).size(), gl2_order(4));
  SigmaSet s = build_sigma(11, 3);
  EXPECT_EQ(s.points.size(), 20u);
  // Burnside with automorphism matrices computed from the points directly: a
  // nontrivial automorphism fixes no level structure when N >= 3.
  std::size_t orbits = 0;
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const TorsionBasis& tb = s.torsion[c];
    std::size_t fixed = 0;
    for (const auto& u : s.classes[c].automorphisms) {
      FieldElement uL = tb.emb.lift(u);
      auto act = [&](const Point& P) { return Point{uL * uL * P.x, uL * uL * uL * P.y, false}; };
      auto a = tb.log(act(tb.P)), b = tb.log(act(tb.Q));
      bool trivial = a == std::make_pair<u64, u64>(1, 0) && b == std::make_pair<u64, u64>(0, 1);
      fixed += trivial ? 48 : 0;
    }
    orbits += fixed / s.classes[c].automorphisms.size();
  }
  EXPECT_EQ(orbits, 20u);
  for (const auto& pt : s.points) EXPECT_TRUE(pt.stabilizer.size() == 1 && pt.stabilizer[0].is_one());
  // |Sigma(N)| = |GL_2(Z/N)| sum 1/aut
  for (u64 p : {13, 17}) {
    SigmaSet t = build_sigma(p, 3);
    EXPECT_EQ(t.points.size() * 24, 48 * t.mass24);
  }
}

TEST(SSLocus, TauOracle) {
  EXPECT_EQ(ramanujan_tau(1), 1);
  EXPECT_EQ(ramanujan_tau(2), -24);
  EXPECT_EQ(ramanujan_tau(3), 252);
  EXPECT_EQ(ramanujan_tau(5), 4830);
  EXPECT_EQ(ramanujan_tau(7), -16744);
  // Multiplicativity and the Hecke recursion at 4 = 2^2.
  EXPECT_EQ(ramanujan_tau(6), ramanujan_tau(2) * ramanujan_tau(3));
  EXPECT_EQ(ramanujan_tau(4), ramanujan_tau(2) * ramanujan_tau(2) - 2048);
}

TEST(SSLocus, HeckeLevelOneExamples) {
  SigmaSet s = build_sigma(11, 1);
  HeckeMatrix t2 = hecke_matrix(s, 2, 0);
  EXPECT_TRUE(row_sums_equal(t2.matrix, 3));
  // Classical modular polynomial Phi_2(j_i, Y) counts the 2-isogenies by target.
  Field f = s.f2;
  for (std::size_t i = 0; i < s.classes.size(); ++i) {
    FieldElement X = s.classes[i].j;
    auto C = [&](i64 v) { return FieldElement(f, static_cast<u64>(mod_floor(v, 11))); };
    auto c = [&](const char* dec) {
      BigInt v(dec);
      return FieldElement(f, reduce_big(v, 11));
    };
    FieldElement X2 = X * X, X3 = X2 * X;
    std::vector<FieldElement> co{X3 + c("8748000000") * X - c("162000") * X2 - c("157464000000000"),
                                 C(1488) * X2 + c("40773375") * X + c("8748000000"), -X2 + C(1488) * X - C(162000),
                                 FieldElement(f, 1)};
    auto rs = roots_by_scan(Poly(f, co));
    for (std::size_t j = 0; j < s.classes.size(); ++j) {
      int mult = 0;
      for (const auto& r : rs)
        if (r.root == s.classes[j].j) mult = r.multiplicity;
      EXPECT_EQ(t2.matrix(i, j), FieldElement(f, static_cast<u64>(mult))) << i << " " << j;
    }
  }
  auto r2 = eigensystems({hecke_matrix(s, 2, 0)});
  std::multiset<std::vector<CanonicalValue>> want2{ints(11, {3}), ints(11, {-24})};
  EXPECT_EQ(system_set(r2), want2);
  auto r3 = eigensystems({hecke_matrix(s, 3, 0)});
  std::multiset<std::vector<CanonicalValue>> want3{ints(11, {4}), ints(11, {252})};
  EXPECT_EQ(system_set(r3), want3);
}

TEST(SSLocus, LevelOneMatchesQExpansionOracle) {
  // Weight-0 systems on the supersingular classes are those of M_{p+1} mod p.
  for (u64 p : {11, 13, 17, 19, 23}) {
    SigmaSet s = build_sigma(p, 1);
    std::vector<u64> ls{2, 3, 5, 7};
    std::vector<HeckeMatrix> hs;
    std::vector<FMatrix> q;
    for (u64 l : ls) {
      hs.push_back(hecke_matrix(s, l, 0));
      q.push_back(qexp_hecke_matrix(static_cast<int>(p + 1), l, p));
    }
    EXPECT_EQ(system_set(eigensystems(hs)), system_set(eigensystems(ls, q))) << "p=" << p;
  }
  // Spelled out for p = 11.
  SigmaSet s = build_sigma(11, 1);
  auto r = eigensystems({hecke_matrix(s, 2, 0), hecke_matrix(s, 3, 0)});
  std::multiset<std::vector<CanonicalValue>> want{ints(11, {3, 4}), ints(11, {-2, 10})};
  EXPECT_EQ(system_set(r), want);
}

TEST(SSLocus, WeightKMatchesShiftedQExpansionWeight) {
  // Algebraic weight k corresponds to classical weight k + p + 1.
  u64 p = 11;
  SigmaSet s = build_sigma(p, 1);
  std::vector<u64> ls{2, 3, 5};
  for (int k : {4, 6, 8, 12, 16}) {
    std::vector<HeckeMatrix> hs;
    std::vector<FMatrix> q;
    for (u64 l : ls) {
      hs.push_back(hecke_matrix(s, l, k));
      q.push_back(qexp_hecke_matrix(k + static_cast<int>(p) + 1, l, p));
    }
    ASSERT_FALSE(hs[0].points.empty());
    auto alg = system_set(eigensystems(hs));
    auto cls = system_set(eigensystems(ls, q));
    for (const auto& sys : alg) EXPECT_TRUE(cls.count(sys)) << "k=" << k;
  }
  // Odd weights and weights not divisible by the automorphism orders vanish.
  EXPECT_TRUE(hecke_matrix(s, 2, 3).points.empty());
  EXPECT_TRUE(hecke_matrix(s, 2, 2).points.empty());
  EXPECT_EQ(hecke_matrix(s, 2, 4).points.size(), 1u);  // j = 1728 only
}

TEST(SSLocus, WeightPeriodicity) {
  for (u64 N : {1, 3}) {
    SigmaSet s = build_sigma(11, N);
    for (i64 k : {0, 4, 7, 12}) {
      HeckeMatrix a = hecke_matrix(s, 2, k), b = hecke_matrix(s, 2, k + 120), c = hecke_matrix(s, 2, k - 120);
      EXPECT_EQ(a.matrix, b.matrix);
      EXPECT_EQ(a.matrix, c.matrix);
      EXPECT_EQ(a.points, b.points);
    }
  }
}

TEST(SSLocus, CommutativityAndRowSums) {
  for (u64 p : {11, 13, 17, 19, 23}) {
    for (u64 N : {1, 3}) {
      SigmaSet s = build_sigma(p, N);
      for (i64 k : {0, 2, 4}) {
        std::vector<HeckeMatrix> hs;
        for (u64 l : {2, 5, 7}) hs.push_back(hecke_matrix(s, l, k));
        if (N == 1) hs.push_back(hecke_matrix(s, 3, k));
        for (std::size_t i = 0; i < hs.size(); ++i)
          for (std::size_t j = i + 1; j < hs.size(); ++j)
            EXPECT_EQ(hs[i].matrix * hs[j].matrix, hs[j].matrix * hs[i].matrix) << p << " " << N << " " << k;
        if (k == 0) {
          for (const auto& h : hs) EXPECT_TRUE(row_sums_equal(h.matrix, h.l + 1)) << p << " " << N << " l=" << h.l;
        }
      }
    }
  }
}

TEST(SSLocus, BrandtVariant) {
  for (u64 p : {11, 17, 23}) {
    SigmaSet s = build_sigma(p, 1);
    FMatrix t = hecke_matrix(s, 2, 0).matrix, b = brandt_matrix(s, 2);
    FMatrix d(t.rows(), t.cols(), FieldElement(s.f2)), dinv = d;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      d(i, i) = FieldElement(s.f2, s.classes[i].aut_order);
      dinv(i, i) = d(i, i).inverse();
    }
    EXPECT_EQ(b, dinv * t * d);
  }
}

TEST(SSLocus, GL2Action) {
  SigmaSet s = build_sigma(11, 3);
  auto group = gl2_elements(3);
  for (std::size_t x = 0; x < s.points.size(); ++x) {
    auto [y, u] = gl2_action(s, {1, 0, 0, 1}, x);
    EXPECT_EQ(y, x);
    EXPECT_TRUE(u.is_one());
  }
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    LevelMat g = group[rng() % group.size()], h = group[rng() % group.size()];
    LevelMat gh = detail::lm_mul(g, h, 3);
    for (std::size_t x = 0; x < s.points.size(); ++x) {
      auto [y1, u1] = gl2_action(s, h, x);
      auto [y2, u2] = gl2_action(s, g, y1);
      auto [y, u] = gl2_action(s, gh, x);
      EXPECT_EQ(y, y2);
      EXPECT_EQ(u, u1 * u2);
    }
  }
  for (i64 k : {0, 4}) {
    FMatrix t = hecke_matrix(s, 2, k).matrix;
    for (const auto& g : group) {
      FMatrix P = gl2_matrix(s, g, k);
      EXPECT_EQ(P * t, t * P);
    }
  }
  EXPECT_THROW(gl2_action(s, {1, 0, 0, 0}, 0), Error);
}

TEST(SSLocus, RaiseLevel) {
  SigmaSet s3 = build_sigma(11, 3), s1 = build_sigma(11, 1);
  // d = 1 is the identity
  EXPECT_EQ(raise_matrix(s3, s3, 0), identity(s3.f2, s3.points.size()));
  auto rd = raise_matrices(s3, s1);
  std::set<std::size_t> hit;
  for (std::size_t x = 0; x < s3.points.size(); ++x) hit.insert(raise_level(s3, s1, rd, x).first);
  EXPECT_EQ(hit.size(), 2u);
  for (i64 k : {0, 4}) {
    FMatrix R = raise_matrix(s3, s1, k);
    EXPECT_EQ(hecke_matrix(s3, 2, k).matrix * R, R * hecke_matrix(s1, 2, k).matrix) << "k=" << k;
  }
  EXPECT_THROW(raise_matrices(s1, s3), Error);
}

TEST(SSLocus, RaiseLevelComposite) {
  // Sigma(6) -> Sigma(3) and Sigma(6) -> Sigma(2) at p = 5.
  SigmaSet s6 = build_sigma(5, 6), s3 = build_sigma(5, 3), s2 = build_sigma(5, 2);
  for (const SigmaSet* lo : {&s3, &s2}) {
    FMatrix R = raise_matrix(s6, *lo, 0);
    EXPECT_EQ(hecke_matrix(s6, 7, 0).matrix * R, R * hecke_matrix(*lo, 7, 0).matrix) << lo->N;
  }
}

TEST(SSLocus, EigensystemBasics) {
  Field f = make_field(7, 1);
  FMatrix d = zero_matrix(f, 3, 3);
  d(0, 0) = FieldElement(f, 2);
  d(1, 1) = FieldElement(f, 5);
  d(2, 2) = FieldElement(f, 2);
  auto r = eigensystems({2}, {d});
  ASSERT_EQ(r.systems.size(), 2u);
  EXPECT_EQ(r.systems[0].canonical, ints(7, {2}));
  EXPECT_EQ(r.systems[0].multiplicity, 2);
  EXPECT_EQ(r.systems[1].canonical, ints(7, {5}));

  // Conjugating by a permutation leaves the systems unchanged.
  SigmaSet s = build_sigma(23, 1);
  std::vector<HeckeMatrix> hs{hecke_matrix(s, 2, 0), hecke_matrix(s, 3, 0)};
  FMatrix P = zero_matrix(s.f2, 3, 3);
  P(0, 2) = P(1, 0) = P(2, 1) = FieldElement(s.f2, 1);
  FMatrix Pi = P.transpose();
  auto a = eigensystems({2, 3}, {hs[0].matrix, hs[1].matrix});
  auto b = eigensystems({2, 3}, {P * hs[0].matrix * Pi, P * hs[1].matrix * Pi});
  EXPECT_EQ(system_set(a), system_set(b));
  for (const auto& sys : a.systems) {
    // The stored vector is a common eigenvector.
    Embedding up(a.base, a.common);
    for (std::size_t t = 0; t < 2; ++t) {
      FMatrix T = lift(up, a.matrices[t]);
      for (std::size_t i = 0; i < 3; ++i) {
        FieldElement acc(a.common);
        for (std::size_t j = 0; j < 3; ++j) acc += T(i, j) * sys.eigenvector[j];
        EXPECT_EQ(acc, sys.values[t] * sys.eigenvector[i]);
      }
    }
  }

  FMatrix x = zero_matrix(f, 2, 2), y = zero_matrix(f, 2, 2);
  x(0, 1) = FieldElement(f, 1);
  y(1, 0) = FieldElement(f, 1);
  try {
    eigensystems({2, 3}, {x, y});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Check);
  }
}

TEST(SSLocus, GaloisClosureAndDescent) {
  // F_p systems are singleton orbits.
  Field f = make_field(7, 1);
  FMatrix d = zero_matrix(f, 2, 2);
  d(0, 0) = FieldElement(f, 1);
  d(1, 1) = FieldElement(f, 3);
  auto g1 = galois_closure_check(eigensystems({2}, {d}));
  EXPECT_TRUE(g1.closed);
  EXPECT_EQ(g1.orbits.size(), 2u);
  EXPECT_TRUE(g1.all_descended());
  // x^2 - 3 is irreducible mod 7: a conjugate pair over F_49.
  FMatrix c = zero_matrix(f, 2, 2);
  c(0, 1) = FieldElement(f, 1);
  c(1, 0) = FieldElement(f, 3);
  auto rc = eigensystems({2}, {c});
  ASSERT_EQ(rc.systems.size(), 2u);
  EXPECT_EQ(rc.systems[0].canonical[0].degree, 2);
  auto g2 = galois_closure_check(rc);
  EXPECT_TRUE(g2.closed);
  ASSERT_EQ(g2.orbits.size(), 1u);
  EXPECT_EQ(g2.orbits[0].members.size(), 2u);
  EXPECT_TRUE(g2.all_descended());
  // Hecke batches over F_{p^2}, including weights with non-rational entries.
  for (u64 p : {11, 13}) {
    SigmaSet s = build_sigma(p, 3);
    for (i64 k : {0, 2, 4}) {
      auto r = eigensystems({hecke_matrix(s, 2, k), hecke_matrix(s, 5, k)});
      auto g = galois_closure_check(r);
      EXPECT_TRUE(g.closed) << p << " " << k;
      EXPECT_TRUE(g.all_descended()) << p << " " << k;
    }
  }
}

TEST(SSLocus, RestrictionOfScalars) {
  // Res(T) for a scalar a in F_{p^2} is the multiplication-by-a matrix.
  Field f = make_field(5, 2);
  FieldElement a = FieldElement::gen(f) + FieldElement(f, 2);
  FMatrix t = scalar_mul(identity(f, 1), a);
  FMatrix r = restriction_of_scalars(t);
  ASSERT_EQ(r.rows(), 2u);
  for (int k = 0; k < 2; ++k) {
    std::vector<u64> e(2, 0);
    e[k] = 1;
    FieldElement img = a * FieldElement(f, e);
    for (int i = 0; i < 2; ++i) EXPECT_EQ(r(i, k).coeffs()[0], img.coeffs()[i]);
  }
  EXPECT_EQ(char_poly(r).coeffs().size(), 3u);
}
