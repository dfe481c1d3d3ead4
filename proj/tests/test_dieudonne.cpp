#include <gtest/gtest.h>

#include "ssmod/dieudonne.hpp"

using namespace ssmod;

namespace {

WMatrix from_ints(const Witt& w, std::vector<std::vector<i64>> rows) {
  WMatrix m = wzero(w, rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = WittElement::from_signed(w, rows[i][j]);
  return m;
}

}  // namespace

TEST(Dieudonne, StandardModuleF) {
  auto [M, e0] = standard_supersingular(5, 2, 1);
  EXPECT_EQ(M.F.twist, 1);
  EXPECT_EQ(M.F.matrix, from_ints(M.w, {{0, 1}, {-5, 0}}));
  SemilinearMap ff = compose(M.F, M.F);
  EXPECT_EQ(ff.twist, 2);
  EXPECT_EQ(ff.matrix, from_ints(M.w, {{-5, 0}, {0, -5}}));
}

TEST(Dieudonne, StandardModuleFVAndGram) {
  auto [M, e0] = standard_supersingular(7, 3, 2);
  SemilinearMap fv = compose(M.F, M.V);
  EXPECT_EQ(fv.twist, 0);
  EXPECT_EQ(fv.matrix, wscale(widentity(M.w, 4), WittElement(M.w, 7)));
  EXPECT_EQ(e0.gram, from_ints(M.w, {{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}));
}

TEST(Dieudonne, ComposeExamples) {
  Witt w = make_witt(5, 2);
  SemilinearMap a{widentity(w, 2), 1}, b{widentity(w, 2), -1};
  SemilinearMap c = compose(a, b);
  EXPECT_EQ(c.twist, 0);
  EXPECT_EQ(c.matrix, widentity(w, 2));
  std::mt19937_64 rng(3);
  WMatrix A = wzero(w, 2, 2), B = wzero(w, 2, 2);
  for (auto& x : A.data()) x = WittElement::random(w, rng);
  for (auto& x : B.data()) x = WittElement::random(w, rng);
  EXPECT_EQ(compose({A, 0}, {B, 0}).matrix, A * B);
  EXPECT_THROW(compose({A, 0}, {widentity(w, 3), 0}), Error);
  // Composition agrees with applying the maps in turn.
  SemilinearMap s{A, 1}, t{B, -1};
  std::vector<WittElement> v{WittElement::random(w, rng), WittElement::random(w, rng)};
  EXPECT_EQ(compose(s, t)(v), s(t(v)));
}

TEST(Dieudonne, CertificateGrid) {
  for (u64 p : {3, 5, 7, 11})
    for (int n = 1; n <= 4; ++n)
      for (int g = 1; g <= 3; ++g) {
        auto [M, e0] = standard_supersingular(p, n, g);
        for (const auto& c : verify_module(M, e0)) EXPECT_TRUE(c.passed) << c.name << " p=" << p << " n=" << n << " g=" << g;
      }
}

TEST(Dieudonne, EndomorphismRankAndClosedForm) {
  auto [M, e0] = standard_supersingular(5, 2, 1);
  EndomorphismBasis e = endomorphism_ring(M);
  EXPECT_EQ(e.basis.size(), 4u);
  EXPECT_EQ(e.torsion_generators, 0u);
  for (const auto& b : e.basis) {
    EXPECT_TRUE(commutes_with(M, b));
    EXPECT_TRUE(quaternion_coordinates(b).has_value());
  }
  // Stored multiplication table reproduces products.
  for (std::size_t i = 0; i < e.basis.size(); ++i)
    for (std::size_t j = 0; j < e.basis.size(); ++j) {
      WMatrix acc = wzero(M.w, 2, 2);
      for (std::size_t k = 0; k < e.basis.size(); ++k)
        acc = acc + wscale(e.basis[k].matrix, WittElement(M.w, e.table[i][j][k]));
      EXPECT_EQ(acc, compose(e.basis[i], e.basis[j]).matrix);
    }
}

TEST(Dieudonne, EndomorphismRankGenus2) {
  auto [M, e0] = standard_supersingular(3, 2, 2);
  EndomorphismBasis e = endomorphism_ring(M);
  EXPECT_EQ(e.basis.size(), 16u);
  EXPECT_EQ(e.torsion_generators, 0u);
}

TEST(Dieudonne, PiSquaresToMinusP) {
  Witt w = make_witt(5, 2);
  SemilinearMap pi = closed_form(w, {{WittElement(w, 0)}}, {{WittElement(w, 1)}});
  EXPECT_TRUE(is_scalar_map(compose(pi, pi), -WittElement(w, 5), 0));
}

TEST(Dieudonne, SimilitudeExamples) {
  auto [M, e0] = standard_supersingular(5, 3, 2);
  const Witt& w = M.w;
  auto id = gu_membership(M, e0, {widentity(w, 4), 0});
  EXPECT_TRUE(id.unit_member);
  EXPECT_EQ(id.gamma, 1u);

  WittElement z(w, 0), o(w, 1);
  SemilinearMap pi = closed_form(w, {{z, z}, {z, z}}, {{o, z}, {z, o}});
  auto vp = gu_membership(M, e0, pi);
  EXPECT_TRUE(vp.member);
  EXPECT_FALSE(vp.unit_member);
  EXPECT_EQ(vp.gamma, 5u);  // +p under phi(T) = x + y pi with pi w = sigma(w) pi
  EXPECT_TRUE(vp.quaternion_agrees);

  // A genuine unitary element with an off-diagonal entry, then perturbed.
  std::mt19937_64 rng(9);
  WittElement u = WittElement::random(w, rng);
  while (!u.is_unit()) u = WittElement::random(w, rng);
  SemilinearMap member = closed_form(w, {{u, z}, {z, u}}, {{z, z}, {z, z}});
  auto vm = gu_membership(M, e0, member);
  EXPECT_TRUE(vm.unit_member);
  EXPECT_EQ(vm.gamma, witt_norm(u));
  SemilinearMap perturbed = closed_form(w, {{u, o}, {z, u}}, {{z, z}, {z, z}});
  auto vq = gu_membership(M, e0, perturbed);
  EXPECT_TRUE(vq.endomorphism);
  EXPECT_FALSE(vq.member);
  EXPECT_TRUE(vq.quaternion_agrees);

  WMatrix sing = wzero(w, 4, 4);
  auto vs = gu_membership(M, e0, {sing, 0});
  EXPECT_FALSE(vs.invertible);
  EXPECT_FALSE(vs.unit_member);
}

TEST(Dieudonne, ReductionToResidue) {
  auto [M, e0] = standard_supersingular(7, 2, 1);
  const Witt& w = M.w;
  FMatrix id = reduction_to_residue({widentity(w, 2), 0});
  EXPECT_EQ(id, identity(w->residue, 1));
  std::mt19937_64 rng(4);
  WittElement lam = WittElement::random(w, rng);
  FMatrix r = reduction_to_residue(closed_form(w, {{lam}}, {{WittElement(w, 0)}}));
  EXPECT_EQ(r(0, 0), reduce_mod_p(lam).pow(7));
  // F composed with an endomorphism lands in FM.
  SemilinearMap T = closed_form(w, {{WittElement::random(w, rng)}}, {{WittElement::random(w, rng)}});
  SemilinearMap FT = compose(M.F, T);
  FT.twist = 0;  // the image is what matters here
  EXPECT_TRUE(is_zero(reduction_to_residue(FT)));
  // A map that moves an odd vector into an even one does not preserve FM.
  WMatrix bad = widentity(w, 2);
  bad(1, 0) = WittElement(w, 1);
  EXPECT_THROW(reduction_to_residue({bad, 0}), Error);
}

TEST(Dieudonne, HermitianForm) {
  for (int g : {1, 3}) {
    auto [M, e0] = standard_supersingular(5, 2, g);
    FMatrix h = hermitian_on_quotient(M, e0);
    const Field& f = M.w->residue;
    EXPECT_EQ(h, scalar_mul(identity(f, g), FieldElement(f, 4)));
    FieldElement lam = hermitian_normalizer(f);
    EXPECT_EQ(lam.pow(6), FieldElement(f, 4));
    EXPECT_EQ(hermitian_congruence(h, scalar_mul(identity(f, g), lam)), identity(f, g));
  }
}

TEST(Dieudonne, HermitianChangeOfBasis) {
  // Change of basis C = [[A, X], [pY, B]] in even/odd blocks; the hermitian
  // Gram on M/FM must transform by the odd block B.
  auto [M, e0] = standard_supersingular(5, 2, 2);
  const Witt& w = M.w;
  std::mt19937_64 rng(12);
  WMatrix C = wzero(w, 4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      C(2 * i, 2 * j) = WittElement::random(w, rng);
      C(2 * i, 2 * j + 1) = WittElement::random(w, rng);
      C(2 * i + 1, 2 * j) = WittElement::random(w, rng).scale(5);
      C(2 * i + 1, 2 * j + 1) = WittElement::random(w, rng);
    }
  for (int i = 0; i < 2; ++i) {
    C(2 * i, 2 * i) += WittElement(w, 1);
    C(2 * i + 1, 2 * i + 1) += WittElement(w, 1);
  }
  ASSERT_TRUE(w_invertible(C));
  // Pulled-back structure: F' = C^{-1} F sigma(C), e' = C^T e C.
  FMatrix Cr = C.map([](const WittElement& x) { return reduce_mod_p(x); });
  // invert C over W_n by Newton from the residue inverse
  FMatrix ci = *inverse(Cr);
  WMatrix X = ci.map([&](const FieldElement& x) { return lift_residue(w, x); });
  for (int it = 0; it < 3; ++it) X = X + X * (widentity(w, 4) - C * X);
  ASSERT_EQ(C * X, widentity(w, 4));
  DieudonneModule M2{w, 2, {X * M.F.matrix * wsigma(C), 1}, {X * M.V.matrix * wsigma(C, -1), -1}};
  QuasiPolarization e2{C.transpose() * e0.gram * C};
  for (const auto& c : verify_module(M2, e2)) EXPECT_TRUE(c.passed) << c.name;
  FMatrix h2 = hermitian_on_quotient(M2, e2);
  FMatrix B(2, 2, FieldElement(w->residue));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) B(i, j) = Cr(2 * i + 1, 2 * j + 1);
  EXPECT_EQ(h2, hermitian_congruence(hermitian_on_quotient(M, e0), B));
  EXPECT_TRUE(is_hermitian(h2));
}

TEST(Dieudonne, FullReportSmall) {
  for (auto [p, n, g] : std::vector<std::tuple<u64, int, int>>{{3, 2, 1}, {5, 2, 1}, {7, 3, 2}, {3, 1, 3}}) {
    DieudonneReport r = dieudonne_verify(p, n, g);
    for (const auto& c : r.checks) EXPECT_TRUE(c.passed) << c.name << " " << c.detail << " p=" << p << " n=" << n << " g=" << g;
    EXPECT_EQ(r.gamma_pi, p % ipow(p, n));
  }
}

TEST(Dieudonne, ProjectionTower) {
  auto [M, e0] = standard_supersingular(5, 3, 2);
  Witt lo = make_witt(5, 2);
  auto [Ml, el] = standard_supersingular(5, 2, 2);
  DieudonneModule pr = project_module(M, lo);
  EXPECT_EQ(pr.F.matrix, Ml.F.matrix);
  EXPECT_EQ(pr.V.matrix, Ml.V.matrix);
}
