#pragma once

#include <array>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ssmod/ellcurve.hpp"

// Supersingular points with level structure, Hecke operators on weight-k
// functions, and simultaneous eigensystems with Galois descent.

namespace ssmod {

struct SSClass {
  FieldElement j;
  Curve model;  // canonical model: (p+1)^2 points over F_{p^2}
  int aut_order = 2;
  std::vector<FieldElement> automorphisms;  // u for (x, y) -> (u^2 x, u^3 y), sorted
};

struct ClassList {
  u64 p = 0;
  std::vector<SSClass> classes;
  u64 mass24 = 0;  // 24 * sum 1/aut_order
};

inline u64 supersingular_scan_cap() { return scaled_cap(60); }

// Scan every j in F_{p^2} and keep those whose curve has trace = 0 mod p.
inline ClassList supersingular_classes(u64 p) {
  if (!is_prime(p)) config_error("sslocus", "p must be prime (got " + std::to_string(p) + ")");
  if (p < 5) config_error("sslocus", "p must be >= 5");
  if (p > supersingular_scan_cap())
    budget_error("sslocus", "p = " + std::to_string(p) + " exceeds the j-scan bound " + std::to_string(supersingular_scan_cap()));
  Field f = make_field(p, 2);
  auto chi = quadratic_character_table(f);
  ClassList out;
  out.p = p;
  const u64 q = p * p;
  for (u64 idx = 0; idx < q; ++idx) {
    FieldElement j = FieldElement::from_index(f, idx);
    Curve e = curve_from_j(j);
    i64 trace = static_cast<i64>(q + 1) - static_cast<i64>(count_points(e, chi));
    if (trace % static_cast<i64>(p) != 0) continue;
    SSClass c;
    c.j = j;
    c.model = canonical_model(j);
    c.automorphisms = isomorphisms(c.model, c.model);
    c.aut_order = static_cast<int>(c.automorphisms.size());
    out.classes.push_back(std::move(c));
  }
  std::sort(out.classes.begin(), out.classes.end(), [](const SSClass& a, const SSClass& b) { return a.j < b.j; });
  for (const auto& c : out.classes) out.mass24 += 24 / c.aut_order;
  return out;
}

// ---------------------------------------------------------------------------
// Level structures as 2x2 matrices over Z/N, row-major.

using LevelMat = std::array<u64, 4>;

namespace detail {

inline LevelMat lm_mul(const LevelMat& a, const LevelMat& b, u64 n) {
  return {(mulmod(a[0], b[0], n) + mulmod(a[1], b[2], n)) % n, (mulmod(a[0], b[1], n) + mulmod(a[1], b[3], n)) % n,
          (mulmod(a[2], b[0], n) + mulmod(a[3], b[2], n)) % n, (mulmod(a[2], b[1], n) + mulmod(a[3], b[3], n)) % n};
}

inline u64 lm_det(const LevelMat& a, u64 n) { return (mulmod(a[0], a[3], n) + n - mulmod(a[1], a[2], n)) % n; }

inline std::optional<LevelMat> lm_inverse(const LevelMat& a, u64 n) {
  if (n == 1) return LevelMat{0, 0, 0, 0};
  u64 d = lm_det(a, n);
  if (std::gcd(d, n) != 1) return std::nullopt;
  u64 di = invmod(d, n);
  return LevelMat{mulmod(a[3], di, n), mulmod((n - a[1]) % n, di, n), mulmod((n - a[2]) % n, di, n), mulmod(a[0], di, n)};
}

inline LevelMat lm_reduce(const LevelMat& a, u64 n) { return {a[0] % n, a[1] % n, a[2] % n, a[3] % n}; }

inline LevelMat lm_from(const ZMatrix& m, u64 n) { return {m(0, 0) % n, m(0, 1) % n, m(1, 0) % n, m(1, 1) % n}; }

}  // namespace detail

inline std::string level_to_string(const LevelMat& a) {
  return "[[" + std::to_string(a[0]) + "," + std::to_string(a[1]) + "],[" + std::to_string(a[2]) + "," + std::to_string(a[3]) + "]]";
}

// n^4 prod_{l | n} (1 - 1/l)(1 - 1/l^2)
inline u64 gl2_order(u64 n) {
  u64 r = n * n * n * n;
  for (auto [l, e] : factor_int(n)) r = r / (l * l * l) * (l - 1) * (l * l - 1);
  return r;
}

// GL_2(Z/n) in lexicographic order of (a00, a01, a10, a11).
inline std::vector<LevelMat> gl2_elements(u64 n) {
  if (n == 1) return {LevelMat{0, 0, 0, 0}};
  if (gl2_order(n) > scaled_cap(20000)) budget_error("sslocus", "GL_2(Z/" + std::to_string(n) + ") exceeds the enumeration budget");
  std::vector<LevelMat> out;
  for (u64 a = 0; a < n; ++a)
    for (u64 b = 0; b < n; ++b)
      for (u64 c = 0; c < n; ++c)
        for (u64 d = 0; d < n; ++d) {
          LevelMat m{a, b, c, d};
          if (std::gcd(detail::lm_det(m, n), n) == 1) out.push_back(m);
        }
  return out;
}

// ---------------------------------------------------------------------------
// The finite set of (E, alpha) orbits under Aut(E).
//
// (E, alpha, omega) and (E, alpha Z_u^{-1}, u omega) are isomorphic, where Z_u
// is the matrix of the automorphism u on the chosen basis of E[N]. For a
// weight-k function F(E, alpha) := f(E, alpha, dx/y) this gives
// F(alpha Z_u^{-1}) = u^k F(alpha), so each orbit is stored with its lex-least
// representative and every member records the u carrying the representative to it.

struct SigmaPoint {
  std::size_t cls = 0;
  LevelMat alpha{0, 0, 0, 0};
  std::vector<FieldElement> stabilizer;  // u with alpha Z_u^{-1} = alpha
};

struct SigmaSet {
  u64 p = 0, N = 1, seed = 1;
  Field f2;
  std::vector<SSClass> classes;
  u64 mass24 = 0;
  std::vector<TorsionBasis> torsion;              // per class, N >= 2
  std::vector<std::vector<LevelMat>> aut_inverse;  // per class: Z_u^{-1} for each automorphism u
  std::vector<SigmaPoint> points;
  std::map<std::pair<std::size_t, LevelMat>, std::pair<std::size_t, std::size_t>> members;  // -> (point, automorphism)

  u64 weight_period() const { return p * p - 1; }
  u64 reduce_weight(i64 k) const { return static_cast<u64>(mod_floor(k, static_cast<i64>(weight_period()))); }

  std::size_t class_of_j(const FieldElement& j) const {
    for (std::size_t i = 0; i < classes.size(); ++i)
      if (classes[i].j == j) return i;
    throw Error(ErrorKind::Internal, "sslocus", "j = " + j.to_string() + " is not a supersingular class");
  }

  // Orbit representative of (cls, alpha) and the u with alpha = rep Z_u^{-1}.
  std::pair<std::size_t, FieldElement> locate(std::size_t cls, const LevelMat& alpha) const {
    auto it = members.find({cls, detail::lm_reduce(alpha, N)});
    if (it == members.end()) throw Error(ErrorKind::Internal, "sslocus", "level structure not found");
    return {it->second.first, classes[cls].automorphisms[it->second.second]};
  }

  bool admissible(std::size_t point, u64 k) const {
    for (const auto& u : points[point].stabilizer)
      if (!u.pow(k).is_one()) return false;
    return true;
  }

  std::vector<std::size_t> admissible_points(u64 k) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i)
      if (admissible(i, k)) out.push_back(i);
    return out;
  }
};

inline SigmaSet build_sigma(u64 p, u64 N, u64 seed = 1) {
  if (N < 1) config_error("sslocus", "level must be >= 1");
  if (N % p == 0) config_error("sslocus", "level must be coprime to p");
  ClassList cl = supersingular_classes(p);
  SigmaSet s;
  s.p = p;
  s.N = N;
  s.seed = seed;
  s.f2 = make_field(p, 2);
  s.classes = cl.classes;
  s.mass24 = cl.mass24;
  auto group = gl2_elements(N);
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const SSClass& cls = s.classes[c];
    std::vector<LevelMat> zinv;
    if (N >= 2) {
      s.torsion.push_back(torsion_basis_canonical(cls.model, N, seed));
      for (const auto& u : cls.automorphisms) {
        LevelMat z = detail::lm_from(torsion_matrix(isomorphism(cls.model, u), s.torsion.back(), s.torsion.back()).m, N);
        zinv.push_back(*detail::lm_inverse(z, N));
      }
    } else {
      zinv.assign(cls.automorphisms.size(), LevelMat{0, 0, 0, 0});
    }
    std::size_t one = 0;
    while (!cls.automorphisms[one].is_one()) ++one;
    for (const auto& a : group) {
      if (s.members.count({c, a})) continue;
      std::size_t idx = s.points.size();
      SigmaPoint pt;
      pt.cls = c;
      pt.alpha = a;
      s.members[{c, a}] = {idx, one};
      for (std::size_t t = 0; t < zinv.size(); ++t) {
        LevelMat b = detail::lm_mul(a, zinv[t], N);
        if (b == a) pt.stabilizer.push_back(cls.automorphisms[t]);
        s.members.emplace(std::make_pair(c, b), std::make_pair(idx, t));
      }
      s.points.push_back(pt);
    }
    s.aut_inverse.push_back(std::move(zinv));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Hecke operators T_l.

struct HeckeEdge {
  std::size_t target = 0;  // class index
  FieldElement scalar;     // pullback of the target's dx/y
  LevelMat level{0, 0, 0, 0};  // matrix on the level-N bases
};

// For each class, its l+1 isogenies onto canonical models.
inline std::vector<std::vector<HeckeEdge>> hecke_edges(const SigmaSet& s, u64 l) {
  if (!is_prime(l)) config_error("sslocus", "l must be prime");
  if (l == s.p || s.N % l == 0) config_error("sslocus", "l must not divide pN");
  std::vector<std::vector<HeckeEdge>> out(s.classes.size());
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const Curve& e = s.classes[c].model;
    SubgroupList sl = ell_subgroups(e, l, s.seed);
    for (const auto& sg : sl.subgroups) {
      Isogeny phi = to_canonical(velu(e, sg.kernel_poly, l));
      HeckeEdge edge;
      edge.target = s.class_of_j(phi.codomain.j_invariant());
      if (!(phi.codomain == s.classes[edge.target].model))
        throw Error(ErrorKind::Internal, "sslocus", "isogeny codomain differs from the stored model");
      edge.scalar = phi.scalar;
      if (s.N >= 2) edge.level = detail::lm_from(torsion_matrix(phi, s.torsion[c], s.torsion[edge.target]).m, s.N);
      out[c].push_back(edge);
    }
  }
  return out;
}

// How the differential is carried along psi: C -> E/C. Pullback means
// psi^* eta_C = eta, giving the factor c^k; pushforward gives c^{-k}.
enum class DifferentialTransport { Pullback, Pushforward };

struct HeckeMatrix {
  u64 l = 0, k = 0, N = 1;
  std::vector<std::size_t> points;  // admissible points indexing rows and columns
  FMatrix matrix;                   // (T f)(x) = sum_y matrix(x, y) f(y)
};

inline constexpr DifferentialTransport kDefaultTransport = DifferentialTransport::Pullback;

inline std::vector<long> column_index(const SigmaSet& s, const std::vector<std::size_t>& pts) {
  std::vector<long> col(s.points.size(), -1);
  for (std::size_t i = 0; i < pts.size(); ++i) col[pts[i]] = static_cast<long>(i);
  return col;
}

inline HeckeMatrix hecke_matrix(const SigmaSet& s, const std::vector<std::vector<HeckeEdge>>& edges, u64 l, i64 k,
                                DifferentialTransport tr = kDefaultTransport) {
  HeckeMatrix h;
  h.l = l;
  h.k = s.reduce_weight(k);
  h.N = s.N;
  h.points = s.admissible_points(h.k);
  auto col = column_index(s, h.points);
  h.matrix = FMatrix(h.points.size(), h.points.size(), FieldElement(s.f2));
  for (std::size_t r = 0; r < h.points.size(); ++r) {
    const SigmaPoint& x = s.points[h.points[r]];
    for (const auto& e : edges[x.cls]) {
      LevelMat a = s.N >= 2 ? detail::lm_mul(x.alpha, *detail::lm_inverse(e.level, s.N), s.N) : x.alpha;
      auto [y, u] = s.locate(e.target, a);
      if (col[y] < 0) continue;
      FieldElement c = tr == DifferentialTransport::Pullback ? e.scalar : e.scalar.inverse();
      h.matrix(r, col[y]) += (c * u).pow(h.k);
    }
  }
  return h;
}

inline HeckeMatrix hecke_matrix(const SigmaSet& s, u64 l, i64 k, DifferentialTransport tr = kDefaultTransport) {
  return hecke_matrix(s, hecke_edges(s, l), l, k, tr);
}

// Aut-weighted variant at level 1: the transpose, equal to D^{-1} T D with D = diag(aut_order).
inline FMatrix brandt_matrix(const SigmaSet& s, u64 l) {
  if (s.N != 1) config_error("sslocus", "the Brandt normalization is defined at level 1");
  return hecke_matrix(s, l, 0).matrix.transpose();
}

// ---------------------------------------------------------------------------
// GL_2(Z/N) action and level raising.

inline std::pair<std::size_t, FieldElement> gl2_action(const SigmaSet& s, const LevelMat& g, std::size_t point) {
  if (!detail::lm_inverse(detail::lm_reduce(g, s.N), s.N)) config_error("sslocus", "g is not invertible mod N");
  const SigmaPoint& x = s.points[point];
  return s.locate(x.cls, detail::lm_mul(detail::lm_reduce(g, s.N), x.alpha, s.N));
}

// (P f)(x) = f(g x) on admissible points.
inline FMatrix gl2_matrix(const SigmaSet& s, const LevelMat& g, i64 k) {
  u64 kr = s.reduce_weight(k);
  auto pts = s.admissible_points(kr);
  auto col = column_index(s, pts);
  FMatrix m(pts.size(), pts.size(), FieldElement(s.f2));
  for (std::size_t r = 0; r < pts.size(); ++r) {
    auto [y, u] = gl2_action(s, g, pts[r]);
    if (col[y] >= 0) m(r, col[y]) = u.pow(kr);
  }
  return m;
}

// For each class, the matrix of multiplication by N'/N from the level-N' basis
// to the level-N basis.
inline std::vector<LevelMat> raise_matrices(const SigmaSet& hi, const SigmaSet& lo) {
  if (hi.p != lo.p || hi.N % lo.N != 0) config_error("sslocus", "raise_level needs N | N' at the same p");
  std::vector<LevelMat> out;
  u64 d = hi.N / lo.N;
  for (std::size_t c = 0; c < hi.classes.size(); ++c) {
    if (lo.N == 1) {
      out.push_back({0, 0, 0, 0});
      continue;
    }
    const TorsionBasis& th = hi.torsion[c];
    const TorsionBasis& tl = lo.torsion[c];
    Embedding emb(tl.field, th.field);
    Point P{emb.lift(tl.P.x), emb.lift(tl.P.y), false}, Q{emb.lift(tl.Q.x), emb.lift(tl.Q.y), false};
    auto table = detail::span_table(th.curve, P, Q, lo.N);
    if (!table) throw Error(ErrorKind::Internal, "sslocus", "lifted level-N basis does not span");
    auto a = table->at(mul(th.curve, th.P, d));
    auto b = table->at(mul(th.curve, th.Q, d));
    out.push_back({a.first, b.first, a.second, b.second});
  }
  return out;
}

// (E, alpha') at level N' to (E, alpha) at level N with alpha(d x) = alpha'(x) mod N.
inline std::pair<std::size_t, FieldElement> raise_level(const SigmaSet& hi, const SigmaSet& lo,
                                                        const std::vector<LevelMat>& rd, std::size_t point) {
  const SigmaPoint& x = hi.points[point];
  if (lo.N == 1) return lo.locate(x.cls, {0, 0, 0, 0});
  LevelMat a = detail::lm_mul(detail::lm_reduce(x.alpha, lo.N), *detail::lm_inverse(rd[x.cls], lo.N), lo.N);
  return lo.locate(x.cls, a);
}

// Pullback of functions: (R f)(x') = f(raise(x')); rows are admissible level-N'
// points, columns admissible level-N points.
inline FMatrix raise_matrix(const SigmaSet& hi, const SigmaSet& lo, i64 k) {
  auto rd = raise_matrices(hi, lo);
  u64 kr = hi.reduce_weight(k);
  auto rows = hi.admissible_points(kr);
  auto cols = lo.admissible_points(kr);
  auto col = column_index(lo, cols);
  FMatrix m(rows.size(), cols.size(), FieldElement(hi.f2));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto [y, u] = raise_level(hi, lo, rd, rows[r]);
    if (col[y] >= 0) m(r, col[y]) = u.pow(kr);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Simultaneous eigensystems.

struct Eigensystem {
  std::vector<FieldElement> values;       // in the common field, ordered as the input matrices
  std::vector<CanonicalValue> canonical;  // each value in its minimal subfield
  int multiplicity = 0;                   // dimension of the common generalized eigenspace
  std::vector<FieldElement> eigenvector;  // common eigenvector over the common field
};

struct EigenResult {
  std::vector<u64> ells;
  Field base;    // field generated by the matrix entries
  Field common;  // holds every eigenvalue
  std::vector<FMatrix> matrices;  // over base
  std::vector<Eigensystem> systems;
};

namespace detail {

struct EigenBranch {
  Field field;
  std::vector<FMatrix> mats;
  FMatrix basis;  // columns span a subspace invariant under every matrix
  std::vector<FieldElement> values;
  FieldElement base_gen;  // image of the base field's generator
};

inline FMatrix matrix_power(const FMatrix& m, int e) {
  FMatrix r = identity(m(0, 0).field(), m.rows());
  for (int i = 0; i < e; ++i) r = r * m;
  return r;
}

inline EigenBranch lift_branch(const EigenBranch& b, const Field& to) {
  Embedding emb(b.field, to);
  EigenBranch r;
  r.field = to;
  for (const auto& m : b.mats) r.mats.push_back(lift(emb, m));
  r.basis = lift(emb, b.basis);
  for (const auto& v : b.values) r.values.push_back(emb.lift(v));
  r.base_gen = emb.lift(b.base_gen);
  return r;
}

inline void split_branch(const EigenBranch& br, std::size_t idx, std::vector<EigenBranch>& leaves) {
  if (idx == br.mats.size()) {
    leaves.push_back(br);
    return;
  }
  FMatrix M = *solve(br.basis, br.mats[idx] * br.basis);
  for (const auto& pf : factor(char_poly(M))) {
    int e = pf.factor.degree();
    EigenBranch nb;
    FieldElement a;
    if (e == 1) {
      nb = br;
      a = -pf.factor.monic().coeff(0);
    } else {
      Field to = make_field(br.field->p, br.field->m * e);
      nb = lift_branch(br, to);
      Embedding emb(br.field, to);
      a = roots(emb.lift(pf.factor)).front().root;
    }
    FMatrix ML = *solve(nb.basis, nb.mats[idx] * nb.basis);
    FMatrix S = ML - scalar_mul(identity(nb.field, ML.rows()), a);
    FMatrix K = kernel(matrix_power(S, pf.multiplicity));
    if (K.cols() != static_cast<std::size_t>(pf.multiplicity))
      throw Error(ErrorKind::Internal, "sslocus", "generalized eigenspace has the wrong dimension");
    nb.basis = nb.basis * K;
    nb.values.push_back(a);
    split_branch(nb, idx + 1, leaves);
  }
}

// Smallest field F_{p^b} containing every entry.
inline Field definition_field(const std::vector<FMatrix>& mats) {
  const Field& f = mats[0](0, 0).field();
  int b = 1;
  for (const auto& m : mats)
    for (const auto& x : m.data()) b = std::lcm(b, minimal_degree(x));
  return make_field(f->p, b);
}

inline bool tuple_less(const Eigensystem& a, const Eigensystem& b) {
  if (a.canonical != b.canonical) return a.canonical < b.canonical;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    if (a.values[i] != b.values[i]) return a.values[i] < b.values[i];
  return false;
}

}  // namespace detail

inline EigenResult eigensystems(const std::vector<u64>& ells, const std::vector<FMatrix>& mats_in) {
  if (ells.size() != mats_in.size() || mats_in.empty()) config_error("sslocus", "one matrix per l is required");
  EigenResult res;
  res.ells = ells;
  const std::size_t n = mats_in[0].rows();
  for (const auto& m : mats_in)
    if (m.rows() != n || m.cols() != n) config_error("sslocus", "matrices must be square of equal size");
  for (std::size_t i = 0; i < mats_in.size(); ++i)
    for (std::size_t j = i + 1; j < mats_in.size(); ++j)
      if (!(mats_in[i] * mats_in[j] == mats_in[j] * mats_in[i]))
        check_error("sslocus", "T_" + std::to_string(ells[i]) + " and T_" + std::to_string(ells[j]) + " do not commute");
  if (n == 0) {
    res.base = res.common = mats_in[0].data().empty() ? Field() : mats_in[0](0, 0).field();
    return res;
  }
  const Field& given = mats_in[0](0, 0).field();
  res.base = detail::definition_field(mats_in);
  Embedding down(res.base, given);
  for (const auto& m : mats_in) res.matrices.push_back(m.map([&](const FieldElement& x) { return *down.restrict(x); }));

  detail::EigenBranch root;
  root.field = res.base;
  root.mats = res.matrices;
  root.basis = identity(res.base, n);
  root.base_gen = FieldElement::gen(res.base);
  std::vector<detail::EigenBranch> leaves;
  detail::split_branch(root, 0, leaves);

  int D = res.base->m;
  for (const auto& lf : leaves) D = std::lcm(D, lf.field->m);
  res.common = make_field(res.base->p, D);
  Embedding base_up(res.base, res.common);
  const FieldElement gen_target = base_up.lift(root.base_gen);
  const int b = res.base->m;

  for (const auto& lf : leaves) {
    // A common eigenvector inside the generalized eigenspace.
    const std::size_t d = lf.basis.cols();
    FMatrix stack(n * lf.mats.size(), d, FieldElement(lf.field));
    for (std::size_t i = 0; i < lf.mats.size(); ++i) {
      FMatrix s = (lf.mats[i] - scalar_mul(identity(lf.field, n), lf.values[i])) * lf.basis;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) stack(i * n + r, c) = s(r, c);
    }
    FMatrix ker = kernel(stack);
    if (ker.cols() == 0) throw Error(ErrorKind::Internal, "sslocus", "no common eigenvector in a generalized eigenspace");
    FMatrix v = lf.basis * ker;

    // Move to the common field, aligning the image of the base field with the
    // standard embedding so the lifted matrices agree.
    Embedding up(lf.field, res.common);
    std::vector<FieldElement> vals, vec;
    for (const auto& x : lf.values) vals.push_back(up.lift(x));
    for (std::size_t r = 0; r < n; ++r) vec.push_back(up.lift(v(r, 0)));
    if (b > 1) {
      FieldElement g = up.lift(lf.base_gen);
      int shift = -1;
      for (int s = 0; s < D; ++s)
        if (frobenius(g, s) == gen_target) {
          shift = s;
          break;
        }
      if (shift < 0) throw Error(ErrorKind::Internal, "sslocus", "embeddings of the base field do not align");
      for (auto& x : vals) x = frobenius(x, shift);
      for (auto& x : vec) x = frobenius(x, shift);
    }
    // Conjugates over the base field.
    for (int s = 0; s < D / b; ++s) {
      Eigensystem sys;
      for (const auto& x : vals) sys.values.push_back(frobenius(x, s * b));
      bool dup = false;
      for (const auto& other : res.systems)
        if (other.values == sys.values) dup = true;
      if (dup) continue;
      for (const auto& x : vec) sys.eigenvector.push_back(frobenius(x, s * b));
      for (const auto& x : sys.values) sys.canonical.push_back(canonical(x));
      sys.multiplicity = static_cast<int>(d);
      res.systems.push_back(std::move(sys));
    }
  }
  std::sort(res.systems.begin(), res.systems.end(), detail::tuple_less);
  std::size_t total = 0;
  for (const auto& s : res.systems) total += s.multiplicity;
  if (total != n) throw Error(ErrorKind::Internal, "sslocus", "eigensystem multiplicities do not sum to the dimension");
  return res;
}

inline EigenResult eigensystems(const std::vector<HeckeMatrix>& hs) {
  std::vector<u64> ells;
  std::vector<FMatrix> mats;
  for (const auto& h : hs) {
    ells.push_back(h.l);
    mats.push_back(h.matrix);
  }
  return eigensystems(ells, mats);
}

// ---------------------------------------------------------------------------
// Galois closure and descent.

struct GaloisOrbit {
  std::vector<std::size_t> members;  // system indices, x -> x^p order
  bool descended = false;            // every conjugate eigenvector verified over F_p
};

struct GaloisReport {
  bool closed = false;
  std::vector<GaloisOrbit> orbits;
  bool all_descended() const {
    for (const auto& o : orbits)
      if (!o.descended) return false;
    return true;
  }
};

// Matrix over F_p of T viewed as an F_p-linear map on base^n, with coordinates
// (j, i) -> j b + i on the basis t^i of the base field.
inline FMatrix restriction_of_scalars(const FMatrix& t) {
  const Field& K = t(0, 0).field();
  const int b = K->m;
  Field fp1 = make_field(K->p, 1);
  const std::size_t n = t.rows();
  FMatrix r(n * b, n * b, FieldElement(fp1));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l)
      for (int k = 0; k < b; ++k) {
        std::vector<u64> e(b, 0);
        e[k] = 1;
        FieldElement img = t(j, l) * FieldElement(K, e);
        for (int i = 0; i < b; ++i) r(j * b + i, l * b + k) = FieldElement(fp1, img.coeffs()[i]);
      }
  return r;
}

// The eigenvector of restriction_of_scalars(T) for the eigenvalue x^{p^s}
// built from the common eigenvector v of the system: coordinate (j, i) is
// sigma^s(a_i^* v_j) with a^* the trace-dual basis of t^i.
inline std::vector<FieldElement> descended_vector(const EigenResult& res, const Eigensystem& sys, int s) {
  const Field& K = res.base;
  const int b = K->m;
  Field fp1 = make_field(K->p, 1);
  FMatrix gram(b, b, FieldElement(fp1));
  auto basis_elt = [&](int i) {
    std::vector<u64> e(b, 0);
    e[i] = 1;
    return FieldElement(K, e);
  };
  for (int i = 0; i < b; ++i)
    for (int k = 0; k < b; ++k) gram(i, k) = FieldElement(fp1, trace_to_prime(basis_elt(i) * basis_elt(k)));
  FMatrix ginv = *inverse(gram);
  Embedding up(K, res.common);
  std::vector<FieldElement> dual;
  for (int i = 0; i < b; ++i) {
    FieldElement a(K);
    for (int k = 0; k < b; ++k) a += basis_elt(k) * FieldElement(K, ginv(i, k).coeffs()[0]);
    dual.push_back(up.lift(a));
  }
  std::vector<FieldElement> out;
  for (const auto& vj : sys.eigenvector)
    for (int i = 0; i < b; ++i) out.push_back(frobenius(dual[i] * vj, s));
  return out;
}

inline bool verify_descent(const EigenResult& res, const Eigensystem& sys) {
  const int D = res.common->m;
  std::vector<FMatrix> rs;
  for (const auto& m : res.matrices) {
    FMatrix r = restriction_of_scalars(m);
    rs.push_back(r.map([&](const FieldElement& x) { return FieldElement(res.common, x.coeffs()[0]); }));
  }
  for (int s = 0; s < D; ++s) {
    auto v = descended_vector(res, sys, s);
    bool nonzero = false;
    for (const auto& x : v) nonzero = nonzero || !x.is_zero();
    if (!nonzero) return false;
    for (std::size_t t = 0; t < rs.size(); ++t) {
      FieldElement a = frobenius(sys.values[t], s);
      for (std::size_t r = 0; r < v.size(); ++r) {
        FieldElement acc(res.common);
        for (std::size_t c = 0; c < v.size(); ++c)
          if (!rs[t](r, c).is_zero()) acc += rs[t](r, c) * v[c];
        if (acc != a * v[r]) return false;
      }
    }
  }
  return true;
}

// Closure under x -> x^p and the orbit partition; descent is verified for the
// first member of every orbit.
inline GaloisReport galois_closure_check(const EigenResult& res) {
  GaloisReport rep;
  rep.closed = true;
  const std::size_t m = res.systems.size();
  std::vector<long> next(m, -1);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<FieldElement> img;
    for (const auto& x : res.systems[i].values) img.push_back(frobenius(x, 1));
    for (std::size_t j = 0; j < m; ++j)
      if (res.systems[j].values == img && res.systems[j].multiplicity == res.systems[i].multiplicity) next[i] = static_cast<long>(j);
    if (next[i] < 0) rep.closed = false;
  }
  std::vector<bool> seen(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (seen[i]) continue;
    GaloisOrbit o;
    long cur = static_cast<long>(i);
    while (cur >= 0 && !seen[cur]) {
      seen[cur] = true;
      o.members.push_back(static_cast<std::size_t>(cur));
      cur = next[cur];
    }
    o.descended = verify_descent(res, res.systems[i]);
    rep.orbits.push_back(std::move(o));
  }
  return rep;
}

}  // namespace ssmod
