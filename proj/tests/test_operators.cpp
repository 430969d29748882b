#include <catch2/catch_amalgamated.hpp>

#include "ttg/operators.hpp"

using namespace ttg;
using Catch::Approx;

namespace {

// Project grid values of a scalar function onto the plane wave (m,n) with a
// uniform M x M quadrature over [0,2pi)^2.
cplx quadrature_mode(const std::vector<std::vector<cplx>>& vals, int M, long m,
                     long n) {
  cplx acc = 0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double y1 = 2 * pi * i / M, y2 = 2 * pi * j / M;
      acc += vals[i][j] * std::polar(1.0, -(m * y1 + n * y2));
    }
  return acc / double(M * M);
}

}  // namespace

TEST_CASE("dirac diagonal entries") {
  Basis b = full_basis(2, 1);
  auto op = assemble_dirac(0, 0, b);
  int i00 = b.index(0, {0, 0});
  int i10 = b.index(0, {1, 0});
  CHECK(std::abs(op.mat(i00, i00)) < 1e-15);
  CHECK(std::abs(op.mat(i10, i10) - omega_bar) < 1e-15);

  // mu := omega^2 - omega = -i sqrt(3)
  auto op2 = assemble_dirac(1, 1, b);
  CHECK(std::abs(op2.mat(i00, i00) - cplx(0, -std::sqrt(3.0))) < 1e-14);
}

TEST_CASE("free Dirac spectrum is the embedded dual lattice") {
  Basis b = full_basis(3, 1);
  auto op = assemble_dirac(0, 0, b);
  for (int i = 0; i < b.comps[0].size(); ++i) {
    auto [m, n] = b.comps[0].modes[i];
    cplx expect = std::sqrt(3.0) * embed(DualIndex{m, n});
    CHECK(std::abs(op.mat(i, i) - expect) < 1e-13);
  }
}

TEST_CASE("multiplication operator vs quadrature oracle") {
  const auto& u0 = standard_potential_U0();
  const int N = 5, M = 64;
  Basis b = full_basis(N, 1);
  auto op = assemble_multiplication(u0, 1, b);

  // column of the plane wave (1,-2): pointwise product on the grid
  long cm = 1, cn = -2;
  std::vector<std::vector<cplx>> vals(M, std::vector<cplx>(M));
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      double y1 = 2 * pi * i / M, y2 = 2 * pi * j / M;
      cplx z = z_from_rect({y1, y2});
      vals[i][j] = eval(u0, z) * std::polar(1.0, cm * y1 + cn * y2);
    }
  int col = b.index(0, {cm, cn});
  REQUIRE(col >= 0);
  double worst = 0;
  for (int i = 0; i < b.comps[0].size(); ++i) {
    auto [m, n] = b.comps[0].modes[i];
    worst = std::max(worst, std::abs(op.mat(i, col) - quadrature_mode(vals, M, m, n)));
  }
  CHECK(worst < 1e-10);

  PotentialCoeffs zero;
  CHECK(assemble_multiplication(zero, 1, b).mat.norm() == 0.0);
}

TEST_CASE("U0 multiplication shifts are the sigma orbit of (p,p)") {
  const auto& u0 = standard_potential_U0();
  auto terms = shift_table(u0, 2);
  REQUIRE(terms.size() == 3);
  // shifts of U0(2z): coefficient at mu goes to mu + 2*(a,b), with
  // (a,b) in {(-1,-1),(2,-1),(-1,2)} weighted (1, omega, omega^2)
  for (const auto& t : terms) {
    if (t.da == -2 && t.db == -2) CHECK(std::abs(t.coeff - cplx(1, 0)) < 1e-15);
    else if (t.da == 4 && t.db == -2) CHECK(std::abs(t.coeff - omega) < 1e-15);
    else if (t.da == -2 && t.db == 4) CHECK(std::abs(t.coeff - omega_bar) < 1e-15);
    else FAIL("unexpected shift");
  }
}

TEST_CASE("assemble_D against a quadrature oracle at N=4") {
  auto tw = derive_config(1.0, Rational(1, 1));
  const auto& u0 = standard_potential_U0();
  const int N = 4, M = 32;
  Basis b = sector_basis(tw, 0, N);
  cplx a12(0.7, 0.0), a23(0.0, 1.3);
  double k1 = 0.3, k2 = 0.7;
  auto D = assemble_D(a12, a23, k1, k2, tw, u0, b);

  // pick a few columns; apply the operator analytically+pointwise and
  // re-project by quadrature
  for (int col : {0, b.dim / 3, b.dim / 2, b.dim - 1}) {
    // identify component and mode of this column
    int cc = 0;
    while (cc + 1 < 3 && col >= b.offset(cc + 1)) ++cc;
    auto [cm, cn] = b.comps[cc].modes[col - b.offset(cc)];

    // pointwise image of the basis function on the grid, per component
    std::vector<std::vector<std::vector<cplx>>> img(
        3, std::vector<std::vector<cplx>>(M, std::vector<cplx>(M, 0)));
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        double y1 = 2 * pi * i / M, y2 = 2 * pi * j / M;
        cplx z = z_from_rect({y1, y2});
        cplx wave = std::polar(1.0, cm * y1 + cn * y2);
        cplx diag = dirac_entry(double(cm), double(cn), k1, k2) / std::sqrt(3.0);
        img[cc][i][j] += diag * wave;
        if (cc == 1) {
          img[0][i][j] += a12 * eval(u0, z, tw.p) * wave;
          img[2][i][j] += a23 * eval(u0, z, -tw.p_tilde) * wave;
        } else if (cc == 0) {
          img[1][i][j] += a12 * eval(u0, z, -tw.p) * wave;
        } else {
          img[1][i][j] += a23 * eval(u0, z, tw.p_tilde) * wave;
        }
      }
    double worst = 0;
    for (int rc = 0; rc < 3; ++rc)
      for (int i = 0; i < b.comps[rc].size(); ++i) {
        auto [rm, rn] = b.comps[rc].modes[i];
        cplx expect = quadrature_mode(img[rc], M, rm, rn);
        worst = std::max(worst,
                         std::abs(D.mat(b.offset(rc) + i, col) - expect));
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("translation sectors give structural zeros") {
  auto tw = derive_config(1.0, Rational(1, 3));  // flipped Case I
  const auto& u0 = standard_potential_U0();
  const int N = 4;
  Basis full = full_basis(N, 3);
  auto D = assemble_D(cplx(1, 0), cplx(1, 0), 0.2, 0.4, tw, u0, full);

  // class of a (component, mode) entry: layer weights (p, 0, -q)
  const long w[3] = {tw.p, 0, -tw.q};
  auto klass = [&](int c, RectMode mode) {
    return std::pair<int, int>(mod3i(mode.first + w[c]), mod3i(mode.second + w[c]));
  };
  for (int cr = 0; cr < 3; ++cr)
    for (int i = 0; i < full.comps[cr].size(); ++i)
      for (int cc = 0; cc < 3; ++cc)
        for (int j = 0; j < full.comps[cc].size(); ++j) {
          cplx v = D.mat(full.offset(cr) + i, full.offset(cc) + j);
          if (std::abs(v) == 0.0) continue;
          CHECK(klass(cr, full.comps[cr].modes[i]) ==
                klass(cc, full.comps[cc].modes[j]));
        }

  // commutator with the twisted translations vanishes exactly
  for (CellIndex a : {CellIndex{1, 0}, CellIndex{0, 1}, CellIndex{2, -1}}) {
    Matrix L = translation_phases(a, tw, full);
    double comm = (D.mat * L - L * D.mat).cwiseAbs().maxCoeff();
    CHECK(comm == 0.0);
  }
}

TEST_CASE("rotation commutation D C = conj(omega) C D on a sigma-closed basis") {
  auto tw = derive_config(1.0, Rational(1, 1));
  Basis b = sector_basis(tw, 0, 6, /*sigma_closed=*/true);
  auto D = assemble_D(cplx(0.9, 0.2), cplx(0.5, 0), 0, 0, tw,
                      standard_potential_U0(), b);
  // C permutes modes by sigma: (Cf)_nu = f_{sigma nu}
  Matrix C = Matrix::Zero(b.dim, b.dim);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < b.comps[c].size(); ++i) {
      auto [m, n] = b.comps[c].modes[i];
      DualIndex s = sigma(DualIndex{m, n});
      int j = b.index(c, {s.k1, s.k2});
      REQUIRE(j >= 0);
      C(b.offset(c) + i, j) = 1.0;
    }
  double resid = (D.mat * C - omega_bar * C * D.mat).cwiseAbs().maxCoeff();
  CHECK(resid < 1e-14);

  // projector onto rotation weight 0 is idempotent
  Matrix P0 = rotation_sector_columns(b, 0);
  Matrix P = P0 * P0.adjoint();
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-13);
  // C restricted to the weight-ell columns acts as conj(omega)^ell
  for (int ell = 0; ell < 3; ++ell) {
    Matrix Cl = rotation_sector_columns(b, ell);
    CHECK((C * Cl - omega_pow(-ell) * Cl).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("kernel of free operator") {
  auto tw = derive_config(1.0, Rational(1, 1));
  Basis full = full_basis(3, 3);
  auto D = assemble_D(0, 0, 0, 0, tw, standard_potential_U0(), full);
  auto sv = singular_values(D.mat);
  CHECK(sv[0] < 1e-14);
  CHECK(sv[1] < 1e-14);
  CHECK(sv[2] < 1e-14);
  CHECK(sv[3] > 0.3);

  // generic k: minimum singular value is the distance of -k to the modes
  double k1 = 0.3, k2 = 0.55;
  auto Dk = assemble_D(0, 0, k1, k2, tw, standard_potential_U0(), full);
  double expect = 1e9;
  for (auto [m, n] : full.comps[0].modes)
    expect = std::min(expect,
                      std::abs(dirac_entry(double(m), double(n), k1, k2)) /
                          std::sqrt(3.0));
  CHECK(smallest_singular_value(Dk.mat) == Approx(expect).epsilon(1e-10));
}

TEST_CASE("chiral symmetry: H spectrum is symmetric, equals +-singular values") {
  auto tw = derive_config(1.0, Rational(1, 1));
  const auto& u0 = standard_potential_U0();
  Basis b = sector_basis(tw, 0, 5);
  cplx a12(0.8, 0.1), a23(0.8, 0.1);
  double k1 = 0.4, k2 = 0.9;
  Matrix H = assemble_H(a12, a23, 0, 0, k1, k2, tw, u0,
                        reference_potential_V0(), b);
  CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-13);
  auto ev = hermitian_eigenvalues(H);
  auto sv = singular_values(assemble_D(a12, a23, k1, k2, tw, u0, b).mat);
  // spectrum symmetric about zero
  int d = int(ev.size());
  for (int i = 0; i < d / 2; ++i)
    CHECK(std::abs(ev[i] + ev[d - 1 - i]) < 1e-10);
  // nonnegative half equals singular values
  for (int i = 0; i < d / 2; ++i)
    CHECK(std::abs(ev[d / 2 + i] - sv[i]) < 1e-10);
}

TEST_CASE("anti-chiral assembly matches the 6-component Hamiltonian") {
  auto tw = derive_config(1.0, Rational(1, 1));
  const auto& v0 = reference_potential_V0();
  const int N = 3;
  Basis full3 = full_basis(N, 3);
  double at12 = 1.0, at23 = 1.0, k1 = 0.37, k2 = 0.81;

  Matrix H = assemble_H(0, 0, at12, at23, k1, k2, tw, standard_potential_U0(),
                        v0, full3);
  auto Dac = assemble_antichiral(at12, at23, k1, k2, tw, v0, full3, full3);

  auto ev = hermitian_eigenvalues(H);
  auto sv = singular_values(Dac.mat);
  int d = int(sv.size());
  for (int i = 0; i < d; ++i)
    CHECK(std::abs(ev[d + i] - sv[i]) < 1e-10);

  // alpha_tilde = 0: diagonal blocks only; smallest singular value over a
  // sector is the free Dirac distance
  auto dom = antichiral_domain_basis(tw, 0, N);
  auto cod = antichiral_codomain_basis(tw, 0, N);
  auto free_op = assemble_antichiral(0, 0, k1, k2, tw, v0, dom, cod);
  double expect = 1e9;
  for (int c = 0; c < 3; ++c)
    for (auto [m, n] : dom.comps[c].modes)
      expect = std::min(expect,
                        std::abs(dirac_entry(double(m), double(n), k1, k2)) /
                            std::sqrt(3.0));
  CHECK(smallest_singular_value(free_op.mat) == Approx(expect).epsilon(1e-9));
}

TEST_CASE("Parseval on synthesis grid") {
  auto tw = derive_config(1.0, Rational(1, 1));
  Basis b = sector_basis(tw, 0, 3);
  Vector v = Vector::Zero(b.dim);
  // a few arbitrary coefficients
  v[0] = cplx(0.3, -0.4);
  v[b.dim / 2] = cplx(1.0, 0.25);
  v[b.dim - 1] = cplx(-0.7, 0.1);

  const int M = 32;
  double norm2 = 0;
  std::vector<cplx> pts;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      pts.push_back(z_from_rect({2 * pi * i / M, 2 * pi * j / M}));
  auto vals = synthesize_position(v, b, pts);
  for (int c = 0; c < 3; ++c)
    for (const cplx& u : vals[c]) norm2 += std::norm(u);
  norm2 /= double(M * M);
  CHECK(norm2 == Approx(v.squaredNorm()).epsilon(1e-6));

  // unit vector on mode (0,0) synthesizes to a constant field
  Vector e0 = Vector::Zero(b.dim);
  int i00 = b.index(1, {0, 0});
  REQUIRE(i00 >= 0);
  e0[i00] = 1.0;
  auto cvals = synthesize_position(e0, b, {cplx(0.1, 0.2), cplx(-1.0, 0.5)});
  CHECK(std::abs(cvals[1][0] - cvals[1][1]) < 1e-13);
  CHECK(std::abs(cvals[1][0] - cplx(1, 0)) < 1e-13);
}

TEST_CASE("smallest singular values are Cauchy in N") {
  auto tw = derive_config(1.0, Rational(1, 1));
  const auto& u0 = standard_potential_U0();
  cplx a(0.5, 0.0);
  double k1 = 0.31, k2 = 0.47;
  double prev = -1, prev_gap = -1;
  for (int N : {6, 9, 12}) {
    Basis b = sector_basis(tw, 0, N);
    double s = smallest_singular_value(
        assemble_D(a, a, k1, k2, tw, u0, b).mat);
    if (prev >= 0) {
      double gap = std::abs(s - prev);
      if (prev_gap >= 0) CHECK(gap < prev_gap + 1e-12);
      prev_gap = gap;
    }
    prev = s;
  }
  CHECK(prev_gap < 1e-4);
}
