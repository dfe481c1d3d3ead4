#include <gtest/gtest.h>

#include "ssmod/quatherm.hpp"

using namespace ssmod;

namespace {

// (a, b)_l = 1 iff z^2 = a x^2 + b y^2 has a primitive l-adic solution; for odd
// l and valuations <= 1 a primitive solution mod l^3 decides it.
int hilbert_bruteforce(i64 a, i64 b, u64 l) {
  const i64 L = static_cast<i64>(l), m = L * L * L;
  std::vector<char> square(m, 0), unit_square(m, 0);
  for (i64 z = 0; z < m; ++z) {
    square[z * z % m] = 1;
    if (z % L) unit_square[z * z % m] = 1;
  }
  for (i64 x = 0; x < m; ++x)
    for (i64 y = 0; y < m; ++y) {
      i64 rhs = mod_floor(a * x * x + b * y * y, m);
      if ((x % L || y % L) ? square[rhs] : unit_square[rhs]) return 1;
    }
  return -1;
}

QuatMatrix diag_matrix(const QuatAlgebra& B, std::vector<QuatQ> d) {
  QuatMatrix m(d.size(), d.size(), B.zero());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

}  // namespace

TEST(Quatherm, BuildAlgebraExamples) {
  QuatAlgebra b11 = build_algebra(11);
  EXPECT_EQ(b11.a, -1);
  EXPECT_EQ(b11.b, -11);
  EXPECT_EQ(hilbert_symbol(-1, -11, 11), -1);
  EXPECT_EQ(hilbert_symbol(-1, -11, 0), -1);
  EXPECT_EQ(hilbert_symbol(-1, -11, 2), 1);
  QuatAlgebra b2 = build_algebra(2);
  EXPECT_EQ(b2.a, -1);
  EXPECT_EQ(b2.b, -1);
  EXPECT_EQ(b2.ramified(), (std::vector<u64>{0, 2}));
  EXPECT_THROW(build_algebra(4), Error);
}

TEST(Quatherm, BuildAlgebraRamification) {
  for (u64 p = 2; p < 200; ++p) {
    if (!is_prime(p)) continue;
    QuatAlgebra B = build_algebra(p);
    EXPECT_EQ(B.ramified(), (std::vector<u64>{0, p})) << p;
    if (p % 4 == 3) {
      EXPECT_EQ(B.a, -1);
    }
  }
}

TEST(Quatherm, HilbertSymbolOracle) {
  for (u64 l : {3, 5, 7})
    for (i64 a : {-7, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10})
      for (i64 b : {-5, -3, -1, 2, 3, 7, 15})
        EXPECT_EQ(hilbert_symbol(a, b, l), hilbert_bruteforce(a, b, l)) << a << " " << b << " " << l;
  EXPECT_EQ(hilbert_symbol(-1, -1, 2), -1);
  EXPECT_EQ(hilbert_symbol(2, 3, 2), -1);
  EXPECT_EQ(hilbert_symbol(2, 7, 2), 1);
}

TEST(Quatherm, HilbertProductFormula) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<i64> d(-300, 300);
  int checked = 0;
  while (checked < 100) {
    i64 a = d(rng), b = d(rng);
    if (a == 0 || b == 0) continue;
    int prod = 1;
    for (u64 v : relevant_places(a, b)) prod *= hilbert_symbol(a, b, v);
    EXPECT_EQ(prod, 1) << a << " " << b;
    ++checked;
  }
}

TEST(Quatherm, NormAndConjugate) {
  QuatAlgebra H = build_algebra(2);
  EXPECT_EQ(norm(H.one()), 1);
  EXPECT_EQ(norm(H.element(1, 1)), 2);
  QuatAlgebra B = build_algebra(11);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    QuatQ x = random_quat(B, rng, 5), y = random_quat(B, rng, 5);
    EXPECT_EQ(norm(x * y), norm(x) * norm(y));
    EXPECT_EQ(conjugate(x * y), conjugate(y) * conjugate(x));
    EXPECT_TRUE(is_scalar(x * conjugate(x)));
  }
  QuatMatrix m(2, 2, B.zero()), n(2, 2, B.zero());
  for (auto& e : m.data()) e = random_quat(B, rng, 5);
  for (auto& e : n.data()) e = random_quat(B, rng, 5);
  EXPECT_EQ(adjoint(m * n), adjoint(n) * adjoint(m));
}

TEST(Quatherm, NormEquation) {
  QuatAlgebra H = build_algebra(2);
  EXPECT_EQ(norm_equation(H, 1), H.one());
  EXPECT_EQ(norm(norm_equation(H, 2)), 2);
  QuatAlgebra B = build_algebra(11);
  QuatQ x = norm_equation(B, 11, 10);
  EXPECT_EQ(norm(x), 11);
  for (Rational alpha : {Rational(1, 3), Rational(7, 5), Rational(25, 12), Rational(3)})
    EXPECT_EQ(norm(norm_equation(B, alpha)), alpha);
  EXPECT_THROW(norm_equation(B, Rational(-1)), Error);
}

TEST(Quatherm, HermitianExamples) {
  QuatAlgebra H = build_algebra(2);
  auto id = quat_identity(H, 2);
  EXPECT_EQ(hermitian_diagonalize(H, id).transform, id);
  QuatMatrix two = diag_matrix(H, {H.element(2), H.element(2)});
  auto d = hermitian_diagonalize(H, two);
  EXPECT_EQ(adjoint(d.transform) * two * d.transform, id);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(norm(d.transform(i, i)), Rational(1, 2));

  QuatMatrix bad = diag_matrix(H, {H.element(1), H.element(-1)});
  EXPECT_THROW(hermitian_diagonalize(H, bad), Error);
  QuatMatrix nonherm = id;
  nonherm(0, 1) = H.element(0, 1);
  EXPECT_FALSE(is_self_adjoint(nonherm));
  EXPECT_THROW(hermitian_diagonalize(H, nonherm), Error);
}

TEST(Quatherm, HermitianRandomForms) {
  QuatAlgebra B = build_algebra(11);
  std::mt19937_64 rng(11);
  for (std::size_t g : {2u, 3u})
    for (int t = 0; t < 10; ++t) {
      QuatMatrix gram = random_positive_definite(B, g, rng, 5);
      auto d = hermitian_diagonalize(B, gram);
      EXPECT_EQ(adjoint(d.transform) * gram * d.transform, quat_identity(B, g));
      for (const Rational& a : d.alphas) EXPECT_GT(a, 0);
    }
}

TEST(Quatherm, ScaledIntegralTransform) {
  QuatAlgebra B = build_algebra(11);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    QuatMatrix lambda = random_positive_definite(B, 2, rng, 5);
    QuatMatrix q = hermitian_diagonalize(B, lambda).transform;
    BigInt n = 1;
    for (const auto& e : q.data())
      for (const Rational* c : {&e.w, &e.x, &e.y, &e.z}) n = boost::multiprecision::lcm(n, denominator(*c));
    QuatMatrix phi = q;
    for (auto& e : phi.data()) {
      e = e.scale(Rational(n));
      for (const Rational* c : {&e.w, &e.x, &e.y, &e.z}) EXPECT_EQ(denominator(*c), 1);
    }
    QuatMatrix expect = quat_identity(B, 2);
    for (auto& e : expect.data()) e = e.scale(Rational(n * n));
    EXPECT_EQ(adjoint(phi) * lambda * phi, expect);
  }
}

TEST(Quatherm, IsGU) {
  QuatAlgebra H = build_algebra(2);
  auto id = quat_identity(H, 2);
  auto v = is_gu(id);
  EXPECT_TRUE(v.member);
  EXPECT_EQ(v.gamma, 1);
  QuatQ x = H.element(1, 1);
  v = is_gu(diag_matrix(H, {x, x}));
  EXPECT_TRUE(v.member);
  EXPECT_EQ(v.gamma, 2);
  EXPECT_FALSE(is_gu(diag_matrix(H, {x, H.one()})).member);
  // unequal norms on the diagonal: M^* M = diag(2, 1) is not scalar
}

TEST(Quatherm, Conjugator) {
  EXPECT_EQ(conjugator(1), permutation_matrix({0, 1}));
  for (std::size_t g = 1; g <= 6; ++g) {
    Matrix<int> P = conjugator(g);
    EXPECT_EQ(P.transpose() * block_j(g) * P, symplectic_j(g)) << g;
    EXPECT_EQ(P.transpose() * P, permutation_matrix([&] {
                std::vector<std::size_t> v(2 * g);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
                return v;
              }()));
  }
}

TEST(Quatherm, SplitModelRelations) {
  QuatAlgebra B = build_algebra(11);
  for (auto [l, m] : {std::pair<u64, int>{3, 2}, {5, 2}, {3, 1}, {7, 1}}) {
    SplitModel sm = split_model(B, l, m);
    FieldElement zero(sm.field), one(sm.field, 1);
    QuatF i = sm.element(zero, one, zero, zero);
    EXPECT_EQ(sm.image(i) * sm.image(i), scalar_mul(identity(sm.field, 2), sm.fa()));
    std::mt19937_64 rng(l * 100 + m);
    for (int t = 0; t < 200; ++t) {
      QuatF x = sm.random(rng), y = sm.random(rng);
      EXPECT_EQ(sm.image(x * y), sm.image(x) * sm.image(y));
      EXPECT_EQ(det(sm.image(x)), norm(x));
    }
  }
  EXPECT_THROW(split_model(B, 11, 1), Error);
  EXPECT_THROW(split_model(B, 2, 1), Error);
}

TEST(Quatherm, UnitarySimilitudesBecomeSymplectic) {
  QuatAlgebra B = build_algebra(11);
  for (auto [g, l, m] : {std::tuple<std::size_t, u64, int>{2, 3, 2}, {2, 5, 2}, {3, 3, 2}}) {
    SplitModel sm = split_model(B, l, m);
    FMatrix P = to_field(conjugator(g), sm.field);
    std::mt19937_64 rng(g * 1000 + l);
    for (int t = 0; t < 100; ++t) {
      QuatFMatrix u = random_gu(sm, g, rng);
      auto gamma = gu_factor(u);
      ASSERT_TRUE(gamma.has_value());
      FMatrix x = P.transpose() * split_matrix(sm, u) * P;
      auto sp = gsp_factor(x);
      ASSERT_TRUE(sp.has_value());
      EXPECT_EQ(*sp, *gamma);
    }
  }
}
