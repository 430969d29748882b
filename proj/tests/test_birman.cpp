#include <catch2/catch_amalgamated.hpp>

#include "ttg/birman.hpp"

using namespace ttg;
using Catch::Approx;

namespace {

// Independent oracle: assemble B_k as an explicit product of dense shift
// and resolvent matrices on an enlarged box, then restrict to the residue
// class inside the small box.  Interior paths are complete on the large
// box, so entries agree exactly with the direct assembly.
Matrix brute_force_Bk(cplx hop, double k1, double k2, const TwistConfig& tw,
                      const PotentialCoeffs& pot, int N) {
  int Nbig = N + 3 * int(std::max(std::abs(tw.p), std::abs(tw.p_tilde)));
  Basis big = full_basis(Nbig, 1);
  const ComponentBasis& cb = big.comps[0];
  auto shift_matrix = [&](long scale) {
    Matrix M = Matrix::Zero(big.dim, big.dim);
    for (const auto& t : shift_table(pot, scale))
      for (int j = 0; j < cb.size(); ++j) {
        auto [m, n] = cb.modes[j];
        int i = cb.find({m + t.da, n + t.db});
        if (i >= 0) M(i, j) += t.coeff;
      }
    return M;
  };
  Matrix R = Matrix::Zero(big.dim, big.dim);
  for (int i = 0; i < cb.size(); ++i) {
    auto [m, n] = cb.modes[i];
    R(i, i) = std::sqrt(3.0) / dirac_entry(double(m), double(n), k1, k2);
  }
  Matrix B = R * shift_matrix(-tw.p) * R * shift_matrix(tw.p) +
             hop * hop * R * shift_matrix(tw.p_tilde) * R * shift_matrix(-tw.p_tilde);
  // restrict to class (1,1) modes inside the small box
  Basis small = scalar_residue_basis(N);
  Matrix out(small.dim, small.dim);
  for (int i = 0; i < small.dim; ++i)
    for (int j = 0; j < small.dim; ++j)
      out(i, j) = B(cb.find(small.comps[0].modes[i]),
                    cb.find(small.comps[0].modes[j]));
  return out;
}

double leading_real_magic(const std::vector<MagicParameter>& magics) {
  for (const auto& m : magics)
    if (m.alpha12.real() > 0.05 && std::abs(m.alpha12.imag()) < 1e-6)
      return m.alpha12.real();
  return -1;
}

}  // namespace

TEST_CASE("B_k entries match the brute-force product oracle") {
  const auto& u0 = standard_potential_U0();
  for (auto ratio : {Rational(1, 1), Rational(3, 1)}) {
    auto tw = derive_config(1.0, ratio);
    auto Bk = assemble_Bk(cplx(0.7, 0.2), 0.31, 0.57, tw, u0, 3);
    Matrix oracle = brute_force_Bk(cplx(0.7, 0.2), 0.31, 0.57, tw, u0, 3);
    CHECK((Bk.mat - oracle).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("momentum exclusion radius") {
  auto tw = derive_config(1.0, Rational(1, 1));
  CHECK_THROWS(assemble_Bk(1.0, 1.0 + 1e-8, 2.0 - 1e-9, tw, standard_potential_U0(), 4));
  CHECK_NOTHROW(assemble_Bk(1.0, 1.0 + 1e-8, 0.5, tw, standard_potential_U0(), 4));
}

TEST_CASE("Hilbert-Schmidt norm is Cauchy in N") {
  auto tw = derive_config(1.0, Rational(1, 1));
  double prev = -1, prev_gap = -1;
  for (int N : {8, 12, 16}) {
    auto Bk = assemble_Bk(1.0, 0.311, 0.577, tw, standard_potential_U0(), N);
    double hs = Bk.mat.norm();
    if (prev > 0) {
      double gap = std::abs(hs - prev);
      if (prev_gap > 0) CHECK(gap < prev_gap);
      prev_gap = gap;
    }
    prev = hs;
  }
  CHECK(prev_gap < 0.05);
}

TEST_CASE("hop ratio 0 reduces to the bilayer operator") {
  auto tw = derive_config(1.0, Rational(1, 1));
  const auto& u0 = standard_potential_U0();
  auto Bk = assemble_Bk(0.0, 0.311, 0.577, tw, u0, 10);
  // bilayer: only the first product term
  Basis basis = scalar_residue_basis(10);
  auto lambda = [&](long m, long n) {
    return std::sqrt(3.0) / dirac_entry(double(m), double(n), 0.311, 0.577);
  };
  Matrix tbg = Matrix::Zero(basis.dim, basis.dim);
  for (int row = 0; row < basis.dim; ++row) {
    auto [m, n] = basis.comps[0].modes[row];
    for (const auto& o : shift_table(u0, -tw.p))
      for (const auto& i : shift_table(u0, tw.p)) {
        int col = basis.comps[0].find({m - o.da - i.da, n - o.db - i.db});
        if (col < 0) continue;
        tbg(row, col) += o.coeff * i.coeff * lambda(m, n) *
                         lambda(m - o.da, n - o.db);
      }
  }
  CHECK((Bk.mat - tbg).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("magic parameters for equal twist") {
  auto tw = derive_config(1.0, Rational(1, 1));
  auto Bk = assemble_Bk(1.0, 0.311, 0.577, tw, standard_potential_U0(), 16);
  auto magics = magic_from_Bk(Bk, 1.0, 40);
  double a = leading_real_magic(magics);
  REQUIRE(a > 0);
  CHECK(std::abs(a - 0.82825) < 5e-3);

  // set symmetry: -alpha exactly (emitted in pairs), conj(alpha) within the
  // finite-N tolerance of the k-independence of Spec(B_k)
  for (int i = 0; i < 6; ++i) {
    cplx al = magics[i].alpha12;
    bool neg = false, conj = false;
    for (const auto& m : magics) {
      if (std::abs(m.alpha12 + al) < 1e-8) neg = true;
      if (std::abs(m.alpha12 - std::conj(al)) < 1e-2 * std::abs(al)) conj = true;
    }
    CHECK(neg);
    CHECK(conj);
  }

  auto v = verify_magic(cplx(a, 0), cplx(a, 0), tw, standard_potential_U0(),
                        16, 1e-6);
  CHECK(v.verified);

  auto m = multiplicity(cplx(a, 0), cplx(a, 0), tw, standard_potential_U0(),
                        16, 1e-6);
  CHECK(m.resolved);
  CHECK(m.multiplicity == 2);

  // alpha = 0 is not magic
  auto v0 = verify_magic(0, 0, tw, standard_potential_U0(), 12, 1e-6);
  CHECK(!v0.verified);
  CHECK(v0.residual > 0.05);
}

TEST_CASE("eigenvalues nearly independent of k") {
  auto tw = derive_config(1.0, Rational(1, 1));
  auto B1 = assemble_Bk(1.0, 0.311, 0.577, tw, standard_potential_U0(), 16);
  auto B2 = assemble_Bk(1.0, 1.73, 2.19, tw, standard_potential_U0(), 16);
  auto e1 = eigenvalues(B1.mat);
  auto e2 = eigenvalues(B2.mat);
  auto bymod = [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); };
  std::sort(e1.begin(), e1.end(), bymod);
  std::sort(e2.begin(), e2.end(), bymod);
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(e1[i] - e2[i]) / std::abs(e1[i]) < 1e-2);
}

TEST_CASE("trace identity: sum of squared eigenvalues equals tr(B^2)") {
  auto tw = derive_config(1.0, Rational(3, 2));
  auto Bk = assemble_Bk(cplx(0.5, 0), 0.311, 0.577, tw, standard_potential_U0(), 10);
  auto eigs = eigenvalues(Bk.mat);
  cplx sum = 0;
  for (const auto& l : eigs) sum += l * l;
  cplx tr = (Bk.mat * Bk.mat).trace();
  CHECK(std::abs(sum - tr) < 1e-9 * std::max(1.0, std::abs(tr)));
}

TEST_CASE("bilayer limit against an independent two-layer assembly") {
  // r = 0: trilayer magic parameters coincide with the bilayer model's.
  auto tw = derive_config(1.0, Rational(1, 1));
  const auto& u0 = standard_potential_U0();
  const int N = 16;
  auto Bk = assemble_Bk(0.0, 0.311, 0.577, tw, u0, N);
  auto magics = magic_from_Bk(Bk, 0.0, 40);
  double a_bk = leading_real_magic(magics);
  REQUIRE(a_bk > 0);

  // independent route: two-component bilayer operator, minimize its
  // smallest singular value over real alpha
  ComponentBasis l1 = ComponentBasis::box(N, {{mod3i(-tw.p), mod3i(-tw.p)}});
  ComponentBasis l2 = ComponentBasis::box(N, {{0, 0}});
  Basis b2({l1, l2});
  double k1 = 0.41, k2 = 0.87;
  auto sigma_min = [&](double alpha) {
    Matrix D = Matrix::Zero(b2.dim, b2.dim);
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < b2.comps[c].size(); ++i) {
        auto [m, n] = b2.comps[c].modes[i];
        D(b2.offset(c) + i, b2.offset(c) + i) =
            dirac_entry(double(m), double(n), k1, k2) / std::sqrt(3.0);
      }
    D.block(b2.offset(0), b2.offset(1), l1.size(), l2.size()) =
        alpha * multiplication_block(u0, tw.p, l1, l2);
    D.block(b2.offset(1), b2.offset(0), l2.size(), l1.size()) =
        alpha * multiplication_block(u0, -tw.p, l2, l1);
    return smallest_singular_value(D);
  };
  double lo = a_bk - 0.03, hi = a_bk + 0.03;
  for (int it = 0; it < 60; ++it) {
    double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (sigma_min(m1) < sigma_min(m2)) hi = m2; else lo = m1;
  }
  double a_tbg = 0.5 * (lo + hi);
  CHECK(sigma_min(a_tbg) < 1e-6);
  CHECK(std::abs(a_tbg - a_bk) < 1e-4);
}
