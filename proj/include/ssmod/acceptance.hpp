#pragma once

#include <chrono>
#include <functional>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssmod/dieudonne.hpp"
#include "ssmod/ellcurve.hpp"
#include "ssmod/localhecke.hpp"
#include "ssmod/qexp.hpp"
#include "ssmod/quatherm.hpp"
#include "ssmod/sslocus.hpp"

// The acceptance suite: one pass/fail verdict per criterion, shared by the
// acceptance binary and `ssmod selftest`.

namespace ssmod {

inline constexpr u64 kDefaultSeed = 1;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

namespace acceptance {

using SystemSet = std::multiset<std::vector<CanonicalValue>>;

inline SystemSet system_set(const EigenResult& r) {
  SystemSet s;
  for (const auto& sys : r.systems)
    for (int i = 0; i < sys.multiplicity; ++i) s.insert(sys.canonical);
  return s;
}

inline std::vector<CanonicalValue> residues(u64 p, const std::vector<BigInt>& v) {
  Field f = make_field(p, 1);
  std::vector<CanonicalValue> out;
  for (const auto& x : v) out.push_back(canonical(FieldElement(f, reduce_big(x, p))));
  return out;
}

// Fails with a message; collected into the criterion detail.
struct Failure {
  std::string what;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

inline std::string c1_level_one(u64 seed) {
  (void)seed;
  const std::vector<u64> ls{2, 3, 5, 7};
  std::ostringstream out;
  for (u64 p : {11, 13, 17, 19, 23}) {
    auto t0 = std::chrono::steady_clock::now();
    SigmaSet s = build_sigma(p, 1);
    std::vector<HeckeMatrix> hs;
    std::vector<FMatrix> q;
    for (u64 l : ls) {
      hs.push_back(hecke_matrix(s, l, 0));
      q.push_back(qexp_hecke_matrix(static_cast<int>(p + 1), l, p));
    }
    SystemSet got = system_set(eigensystems(hs));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require(secs < 10, "p=" + std::to_string(p) + " took " + std::to_string(secs) + " s");
    require(got == system_set(eigensystems(ls, q)), "p=" + std::to_string(p) + ": systems differ from the q-expansion oracle");
    std::vector<BigInt> eis;
    for (u64 l : ls) eis.push_back(BigInt(1 + l));
    if (p == 11) {
      std::vector<BigInt> tau;
      for (u64 l : ls) tau.push_back(ramanujan_tau(l));
      require(got == SystemSet{residues(p, eis), residues(p, tau)}, "p=11: systems differ from {1+l} and {tau(l)}");
    }
    if (p == 13) require(got == SystemSet{residues(p, eis)}, "p=13: expected the single system {1+l}");
    out << "p=" << p << ": " << got.size() << " systems; ";
  }
  return out.str() + "all equal the oracle";
}

inline std::string c2_dieudonne(u64 seed) {
  int runs = 0;
  for (u64 p : {3, 5, 7, 11})
    for (int n = 1; n <= 4; ++n)
      for (int g = 1; g <= 3; ++g) {
        auto rep = dieudonne_verify(p, n, g, seed);
        for (const auto& c : rep.checks)
          require(c.passed, "p=" + std::to_string(p) + " n=" + std::to_string(n) + " g=" + std::to_string(g) + ": " + c.name);
        ++runs;
      }
  return std::to_string(runs) + " (p, n, g) certificates";
}

inline u64 class_count_formula(u64 p) {
  static const int extra[12] = {0, 0, 0, 0, 0, 1, 0, 1, 0, 0, 0, 2};
  return p / 12 + extra[p % 12];
}

inline std::string c3_mass(u64 seed) {
  for (u64 p : {11, 13, 17, 19, 23, 31, 37}) {
    ClassList cl = supersingular_classes(p);
    Rational mass = 0;
    for (const auto& c : cl.classes) mass += Rational(1, static_cast<i64>(c.aut_order));
    require(mass == Rational(static_cast<i64>(p - 1), 24), "mass mismatch at p=" + std::to_string(p));
    require(cl.classes.size() == class_count_formula(p), "class count mismatch at p=" + std::to_string(p));
  }
  SigmaSet s = build_sigma(11, 3, seed);
  // N = 3: only the identity fixes a level structure, so each class gives
  // |GL_2(Z/3)| / |Aut| orbits.
  u64 orbits = 0;
  for (const auto& c : s.classes) orbits += gl2_order(3) / c.aut_order;
  require(s.points.size() == 20 && orbits == 20, "|Sigma(3)| at p=11 is " + std::to_string(s.points.size()));
  return "mass (p-1)/24 for 7 primes; |Sigma(3)| = 20 at p = 11";
}

inline bool row_sums(const FMatrix& m, u64 v) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    FieldElement s(m(0, 0).field());
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j);
    if (s != FieldElement(m(0, 0).field(), v)) return false;
  }
  return true;
}

inline std::string c4_hecke(u64 seed) {
  const u64 p = 11;
  SigmaSet s1 = build_sigma(p, 1, seed), s3 = build_sigma(p, 3, seed);
  int pairs = 0;
  for (const SigmaSet* s : {&s1, &s3})
    for (i64 k : {0, 2, 4, 6}) {
      std::vector<HeckeMatrix> hs;
      for (u64 l : {2, 5, 7}) hs.push_back(hecke_matrix(*s, l, k));
      if (s->N == 1) hs.push_back(hecke_matrix(*s, 3, k));
      for (std::size_t i = 0; i < hs.size(); ++i)
        for (std::size_t j = i + 1; j < hs.size(); ++j) {
          require(hs[i].matrix * hs[j].matrix == hs[j].matrix * hs[i].matrix, "T_l do not commute");
          ++pairs;
        }
      if (k == 0 && s->N == 3)
        for (const auto& h : hs) require(row_sums(h.matrix, h.l + 1), "row sum != l+1 for l=" + std::to_string(h.l));
    }
  const i64 period = static_cast<i64>(p * p - 1);
  for (i64 k : {0, 4, 7}) {
    require(hecke_matrix(s3, 2, k).matrix == hecke_matrix(s3, 2, k + period).matrix, "weight periodicity fails");
  }
  FMatrix t = hecke_matrix(s3, 2, 0).matrix;
  for (const auto& g : gl2_elements(3)) {
    FMatrix P = gl2_matrix(s3, g, 0);
    require(P * t == t * P, "GL_2(Z/3) equivariance fails");
  }
  FMatrix R = raise_matrix(s3, s1, 0);
  require(hecke_matrix(s3, 2, 0).matrix * R == R * hecke_matrix(s1, 2, 0).matrix, "raise-level square does not commute");
  return std::to_string(pairs) + " commuting pairs; periodicity 120; 48 GL_2(Z/3) elements; raise-level square";
}

inline std::string c5_galois(u64 seed) {
  int batches = 0, orbits = 0;
  auto check = [&](const SigmaSet& s, i64 k) {
    auto r = eigensystems({hecke_matrix(s, 2, k), hecke_matrix(s, 5, k)});
    if (r.systems.empty()) return;
    auto g = galois_closure_check(r);
    std::string tag = "p=" + std::to_string(s.p) + " N=" + std::to_string(s.N) + " k=" + std::to_string(k);
    require(g.closed, tag + ": not Frobenius-closed");
    require(g.all_descended(), tag + ": descent failed");
    ++batches;
    orbits += static_cast<int>(g.orbits.size());
  };
  for (u64 p : {11, 13, 17, 19, 23}) {
    SigmaSet s = build_sigma(p, 1, seed);
    for (i64 k : {0, 4, 6, 8}) check(s, k);
  }
  for (u64 p : {11, 13}) {
    SigmaSet s = build_sigma(p, 3, seed);
    for (i64 k : {0, 2, 4}) check(s, k);
  }
  return std::to_string(batches) + " batches, " + std::to_string(orbits) + " orbits descended";
}

inline std::string c6_hermitian(u64 seed) {
  QuatAlgebra B = build_algebra(11);
  std::mt19937_64 rng(seed);
  int done = 0;
  for (std::size_t g : {2u, 3u})
    for (int t = 0; t < 50; ++t) {
      QuatMatrix gram = random_positive_definite(B, g, rng, 5);
      auto d = hermitian_diagonalize(B, gram);
      require(adjoint(d.transform) * gram * d.transform == quat_identity(B, g), "transform does not reach I");
      ++done;
    }
  return std::to_string(done) + " forms over (-1,-11) reduced to I";
}

inline std::string c7_similitude(u64 seed) {
  for (std::size_t g = 1; g <= 6; ++g) {
    Matrix<int> P = conjugator(g);
    require(P.transpose() * block_j(g) * P == symplectic_j(g), "conjugator identity fails at g=" + std::to_string(g));
  }
  QuatAlgebra B = build_algebra(11);
  int samples = 0;
  for (auto [g, l, m] : {std::tuple<std::size_t, u64, int>{2, 3, 2}, {2, 5, 2}, {3, 3, 2}}) {
    SplitModel sm = split_model(B, l, m);
    FMatrix P = to_field(conjugator(g), sm.field);
    std::mt19937_64 rng(seed * 1000 + g * 100 + l);
    for (int t = 0; t < 100; ++t) {
      QuatFMatrix u = random_gu(sm, g, rng);
      auto gamma = gu_factor(u);
      require(gamma.has_value(), "sample is not a unitary similitude");
      auto sp = gsp_factor(P.transpose() * split_matrix(sm, u) * P);
      require(sp.has_value() && *sp == *gamma, "conjugated sample is not in GSp with the same factor");
      ++samples;
    }
  }
  return "identity for g <= 6; " + std::to_string(samples) + " samples in GSp";
}

inline std::string c8_local(u64 seed) {
  for (u64 l : {2, 3, 5, 7, 11, 13}) require(decompose_gl2(l).count() == l + 1, "GL_2 degree at l=" + std::to_string(l));
  std::vector<std::pair<std::size_t, u64>> cases{{1, 2}, {1, 3}, {1, 5}, {1, 7}, {2, 2}, {2, 3}, {2, 5}, {3, 2}};
  for (auto [g, l] : cases) {
    CosetList c = decompose_gsp(g, l);
    require(c.count() == lagrangian_count(g, l) && pairwise_inequivalent(c),
            "GSp degree at g=" + std::to_string(g) + " l=" + std::to_string(l));
  }
  ClassList cl = supersingular_classes(11);
  for (u64 l : {2, 3})
    for (const auto& c : cl.classes) {
      KernelMatch m = match_gl2_kernels(c.model, l, seed);
      require(m.bijective && m.types_match, "kernel/coset matching fails at l=" + std::to_string(l));
    }
  return "GL_2 l <= 13; GSp 8 cases; kernels biject at p = 11";
}

inline std::string c9_ker_coker(u64 seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::tuple<u64, u64, int>> grid;
  for (u64 p : {11, 13})
    for (u64 l : {2, 3})
      for (int n : {1, 2}) grid.push_back({p, l, n});
  int done = 0;
  for (int t = 0; t < 20; ++t) {
    auto [p, l, n] = grid[t % grid.size()];
    ClassList cl = supersingular_classes(p);
    Curve e = cl.classes[rng() % cl.classes.size()].model;
    Isogeny phi = identity_isogeny(e);
    for (int step = 0; step < n; ++step) {
      SubgroupList sl = ell_subgroups(phi.codomain, l, seed);
      Isogeny next = to_canonical(velu(phi.codomain, sl.subgroups[rng() % sl.subgroups.size()].kernel_poly, l));
      phi = compose(next, phi);
    }
    KerCoker kc = ker_coker_check(phi, l, n, seed);
    require(kc.match, "|ker| != |coker| for p=" + std::to_string(p) + " l=" + std::to_string(l));
    ++done;
  }
  return std::to_string(done) + " isogenies";
}

inline std::string c10_canonical(u64 seed) {
  std::mt19937_64 rng(seed);
  int classes = 0;
  for (u64 p = 5; p <= 23; ++p) {
    if (!is_prime(p)) continue;
    for (const auto& c : supersingular_classes(p).classes) {
      require(count_points(c.model) == (p + 1) * (p + 1), "point count at p=" + std::to_string(p));
      require(verify_frobenius_minus_p(c.model, 20, rng), "Frobenius != [-p] at p=" + std::to_string(p));
      ++classes;
    }
  }
  return std::to_string(classes) + " classes, p in [5, 23]";
}

}  // namespace acceptance

inline std::vector<CriterionResult> run_acceptance(u64 seed = kDefaultSeed,
                                                   const std::function<void(const CriterionResult&)>& on_result = {}) {
  using Fn = std::string (*)(u64);
  const std::vector<std::pair<std::string, Fn>> criteria{
      {"level-1 eigensystems match q-expansions", acceptance::c1_level_one},
      {"Dieudonne structure certificates", acceptance::c2_dieudonne},
      {"class mass and |Sigma(3)|", acceptance::c3_mass},
      {"Hecke module structure", acceptance::c4_hecke},
      {"Galois closure and descent", acceptance::c5_galois},
      {"hermitian diagonalization", acceptance::c6_hermitian},
      {"unitary vs symplectic similitudes", acceptance::c7_similitude},
      {"local coset degrees", acceptance::c8_local},
      {"kernel and cokernel orders", acceptance::c9_ker_coker},
      {"canonical supersingular models", acceptance::c10_canonical},
  };
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    CriterionResult r;
    r.id = static_cast<int>(i + 1);
    r.name = criteria[i].first;
    auto t0 = std::chrono::steady_clock::now();
    try {
      r.detail = criteria[i].second(seed);
      r.passed = true;
    } catch (const acceptance::Failure& f) {
      r.detail = f.what;
    } catch (const std::exception& e) {
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

inline void print_result(std::ostream& os, const CriterionResult& r) {
  os << "criterion " << std::setw(2) << r.id << "  " << (r.passed ? "PASS" : "FAIL") << "  " << std::left
     << std::setw(42) << r.name << std::right << "  " << std::fixed << std::setprecision(2) << r.seconds << "s  " << r.detail
     << "\n";
  os.unsetf(std::ios::fixed);
}

}  // namespace ssmod
