#pragma once

#include <cassert>
#include <string>
#include <vector>

#include "ttg/basis.hpp"
#include "ttg/linalg.hpp"
#include "ttg/potential.hpp"

// Assembly of the truncated operators in rectangular Fourier coordinates.
//
// The free Dirac operator in these coordinates is
//    Dhat_k = omega^2 (D + k1) - omega (D + k2),
// acting diagonally with entry omega^2(m+k1) - omega(n+k2) on the plane
// wave (m,n); the physical operator is 2 D_zbar + k = Dhat_k / sqrt(3).
// Multiplication by a finite-Fourier potential acts by mode shifts; modes
// shifted out of the truncation box are dropped (Dirichlet truncation).

namespace ttg {

struct OperatorMatrix {
  Matrix mat;
  Basis rows;
  Basis cols;
  double k1 = 0, k2 = 0;
  std::string label;
};

inline cplx dirac_entry(double m, double n, double k1, double k2) {
  return omega_bar * (m + k1) - omega * (n + k2);
}

// Diagonal matrix of Dhat_k (one copy per component of the basis).
inline OperatorMatrix assemble_dirac(double k1, double k2, const Basis& basis) {
  OperatorMatrix op{Matrix::Zero(basis.dim, basis.dim), basis, basis, k1, k2,
                    "dirac"};
  for (int c = 0; c < basis.components(); ++c)
    for (int i = 0; i < basis.comps[c].size(); ++i) {
      auto [m, n] = basis.comps[c].modes[i];
      op.mat(basis.offset(c) + i, basis.offset(c) + i) =
          dirac_entry(double(m), double(n), k1, k2);
    }
  return op;
}

// Shift table of a potential at integer scale: multiplication by
// u(scale * z) sends the coefficient at mode mu to mode mu + scale*(a,b)
// with weight c_{nm}, where (a,b) is the rectangular label of (n,m).
struct ShiftTerm {
  long da, db;
  cplx coeff;
};

inline std::vector<ShiftTerm> shift_table(const PotentialCoeffs& pot,
                                          long scale) {
  std::vector<ShiftTerm> terms;
  for (const auto& [nm, c] : pot.coeffs) {
    auto [a, b] = rect_label(nm, pot.sym_j);
    terms.push_back({scale * a, scale * b, c});
  }
  return terms;
}

// Multiplication block between two component bases.
inline Matrix multiplication_block(const PotentialCoeffs& pot, long scale,
                                   const ComponentBasis& rows,
                                   const ComponentBasis& cols) {
  Matrix block = Matrix::Zero(rows.size(), cols.size());
  auto terms = shift_table(pot, scale);
  for (int j = 0; j < cols.size(); ++j) {
    auto [m, n] = cols.modes[j];
    for (const auto& t : terms) {
      int i = rows.find({m + t.da, n + t.db});
      if (i >= 0) block(i, j) += t.coeff;
    }
  }
  return block;
}

// Multiplication operator on a (possibly multi-component) basis, the same
// potential acting on each component.
inline OperatorMatrix assemble_multiplication(const PotentialCoeffs& pot,
                                              long scale, const Basis& basis) {
  OperatorMatrix op{Matrix::Zero(basis.dim, basis.dim), basis, basis, 0, 0,
                    "mult"};
  for (int c = 0; c < basis.components(); ++c) {
    op.mat.block(basis.offset(c), basis.offset(c), basis.comps[c].size(),
                 basis.comps[c].size()) =
        multiplication_block(pot, scale, basis.comps[c], basis.comps[c]);
  }
  return op;
}

// D(alpha) + k on a 3-component basis:
//   [ 2D_zbar + k     a12 U(pz)        0          ]
//   [ a12 U(-pz)      2D_zbar + k      a23 U(ptz) ]
//   [ 0               a23 U(-ptz)      2D_zbar + k]
inline OperatorMatrix assemble_D(cplx alpha12, cplx alpha23, double k1,
                                 double k2, const TwistConfig& tw,
                                 const PotentialCoeffs& pot,
                                 const Basis& basis) {
  assert(basis.components() == 3);
  const double s3 = std::sqrt(3.0);
  OperatorMatrix op{Matrix::Zero(basis.dim, basis.dim), basis, basis, k1, k2,
                    "D(alpha)+k"};
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < basis.comps[c].size(); ++i) {
      auto [m, n] = basis.comps[c].modes[i];
      op.mat(basis.offset(c) + i, basis.offset(c) + i) =
          dirac_entry(double(m), double(n), k1, k2) / s3;
    }
  auto put = [&](int cr, int cc, cplx w, long scale) {
    op.mat.block(basis.offset(cr), basis.offset(cc), basis.comps[cr].size(),
                 basis.comps[cc].size()) +=
        w * multiplication_block(pot, scale, basis.comps[cr], basis.comps[cc]);
  };
  put(0, 1, alpha12, tw.p);
  put(1, 0, alpha12, -tw.p);
  put(1, 2, alpha23, tw.p_tilde);
  put(2, 1, alpha23, -tw.p_tilde);
  return op;
}

// AA-coupling block W(alpha_tilde) (Hermitian for real alpha_tilde).
inline Matrix assemble_W(double at12, double at23, const TwistConfig& tw,
                         const PotentialCoeffs& potV, const Basis& basis3) {
  Matrix W = Matrix::Zero(basis3.dim, basis3.dim);
  auto blk = [&](int cr, int cc, long scale) {
    return multiplication_block(potV, scale, basis3.comps[cr], basis3.comps[cc]);
  };
  Matrix v12 = blk(0, 1, tw.p);
  Matrix v23 = blk(1, 2, tw.p_tilde);
  W.block(basis3.offset(0), basis3.offset(1), v12.rows(), v12.cols()) = at12 * v12;
  W.block(basis3.offset(1), basis3.offset(0), v12.cols(), v12.rows()) =
      at12 * v12.adjoint();
  W.block(basis3.offset(1), basis3.offset(2), v23.rows(), v23.cols()) = at23 * v23;
  W.block(basis3.offset(2), basis3.offset(1), v23.cols(), v23.rows()) =
      at23 * v23.adjoint();
  return W;
}

// Full 6-component Floquet Hamiltonian
//   H_k = [ W(at)      (D(alpha)+k)^* ]
//         [ D(alpha)+k  W(at)         ]
// assembled on two copies of a 3-component basis.
inline Matrix assemble_H(cplx alpha12, cplx alpha23, double at12, double at23,
                         double k1, double k2, const TwistConfig& tw,
                         const PotentialCoeffs& potU,
                         const PotentialCoeffs& potV, const Basis& basis3) {
  Matrix D = assemble_D(alpha12, alpha23, k1, k2, tw, potU, basis3).mat;
  Matrix W = assemble_W(at12, at23, tw, potV, basis3);
  int d = basis3.dim;
  Matrix H = Matrix::Zero(2 * d, 2 * d);
  H.topLeftCorner(d, d) = W;
  H.bottomRightCorner(d, d) = W;
  H.topRightCorner(d, d) = D.adjoint();
  H.bottomLeftCorner(d, d) = D;
  return H;
}

// Anti-chiral operator
//   D_ac,k = [ at12 V(pz)       2D_z + kbar      0           ]
//            [ 2D_zbar + k      (at12 V(pz))^*   at23 V(ptz) ]
//            [ (at23 V(ptz))^*  0                2D_z + kbar ]
// between the stated domain and codomain bases (they carry different
// residue classes, so the matrix is assembled rectangularly).
inline OperatorMatrix assemble_antichiral(double at12, double at23, double k1,
                                          double k2, const TwistConfig& tw,
                                          const PotentialCoeffs& potV,
                                          const Basis& dom, const Basis& cod) {
  assert(dom.components() == 3 && cod.components() == 3);
  const double s3 = std::sqrt(3.0);
  OperatorMatrix op{Matrix::Zero(cod.dim, dom.dim), cod, dom, k1, k2, "D_ac+k"};
  auto mult = [&](int cr, int cc, long scale) {
    return multiplication_block(potV, scale, cod.comps[cr], dom.comps[cc]);
  };
  auto mult_conj = [&](int cr, int cc, long scale) {
    // multiplication by conj(V(scale z)): conjugated coefficients, negated shifts
    Matrix blk = Matrix::Zero(cod.comps[cr].size(), dom.comps[cc].size());
    auto terms = shift_table(potV, scale);
    for (int j = 0; j < dom.comps[cc].size(); ++j) {
      auto [m, n] = dom.comps[cc].modes[j];
      for (const auto& t : terms) {
        int i = cod.comps[cr].find({m - t.da, n - t.db});
        if (i >= 0) blk(i, j) += std::conj(t.coeff);
      }
    }
    return blk;
  };
  auto dirac_blk = [&](int cr, int cc, bool holomorphic) {
    // diagonal in modes, between the (equal-class) row/col components
    Matrix blk = Matrix::Zero(cod.comps[cr].size(), dom.comps[cc].size());
    for (int j = 0; j < dom.comps[cc].size(); ++j) {
      auto [m, n] = dom.comps[cc].modes[j];
      int i = cod.comps[cr].find({m, n});
      if (i < 0) continue;
      cplx v = dirac_entry(double(m), double(n), k1, k2) / s3;
      blk(i, j) = holomorphic ? std::conj(v) : v;  // 2D_z + kbar vs 2D_zbar + k
    }
    return blk;
  };
  auto place = [&](int cr, int cc, const Matrix& blk) {
    op.mat.block(cod.offset(cr), dom.offset(cc), blk.rows(), blk.cols()) += blk;
  };
  place(0, 0, at12 * mult(0, 0, tw.p));
  place(0, 1, dirac_blk(0, 1, true));
  place(1, 0, dirac_blk(1, 0, false));
  place(1, 1, at12 * mult_conj(1, 1, tw.p));
  place(1, 2, at23 * mult(1, 2, tw.p_tilde));
  place(2, 0, at23 * mult_conj(2, 0, tw.p_tilde));
  place(2, 2, dirac_blk(2, 2, true));
  return op;
}

// Twisted translation L_a as a diagonal phase matrix on a 3-component
// basis with layer weights (p, 0, -q).
inline Matrix translation_phases(const CellIndex& a, const TwistConfig& tw,
                                 const Basis& basis) {
  Matrix L = Matrix::Zero(basis.dim, basis.dim);
  const long w[3] = {tw.p, 0, -tw.q};
  for (int c = 0; c < basis.components(); ++c)
    for (int i = 0; i < basis.comps[c].size(); ++i) {
      auto [m, n] = basis.comps[c].modes[i];
      L(basis.offset(c) + i, basis.offset(c) + i) =
          omega_pow(w[c % 3] * (a.a1 + a.a2) + a.a1 * m + a.a2 * n);
    }
  return L;
}

// Columns spanning the rotation sector of weight ell on a sigma-closed
// basis: Cu = conj(omega)^ell u with (Cf)_nu = f_{sigma nu}.
inline Matrix rotation_sector_columns(const Basis& basis, int ell) {
  std::vector<Vector> cols;
  const double inv_s3 = 1.0 / std::sqrt(3.0);
  for (int c = 0; c < basis.components(); ++c) {
    std::vector<bool> used(basis.comps[c].size(), false);
    for (int i = 0; i < basis.comps[c].size(); ++i) {
      if (used[i]) continue;
      auto [m, n] = basis.comps[c].modes[i];
      auto orbit = sigma_orbit(m, n);
      if (orbit[0] == orbit[1]) {  // fixed point (0,0)
        used[i] = true;
        if (mod3i(ell) != 0) continue;
        Vector v = Vector::Zero(basis.dim);
        v[basis.offset(c) + i] = 1.0;
        cols.push_back(std::move(v));
        continue;
      }
      int i1 = basis.comps[c].find({orbit[1].k1, orbit[1].k2});
      int i2 = basis.comps[c].find({orbit[2].k1, orbit[2].k2});
      if (i1 < 0 || i2 < 0)
        throw std::logic_error("rotation sector requires a sigma-closed basis");
      used[i] = used[i1] = used[i2] = true;
      Vector v = Vector::Zero(basis.dim);
      v[basis.offset(c) + i] = inv_s3;
      v[basis.offset(c) + i1] = omega_pow(-ell) * inv_s3;
      v[basis.offset(c) + i2] = omega_pow(-2 * ell) * inv_s3;
      cols.push_back(std::move(v));
    }
  }
  Matrix C(basis.dim, int(cols.size()));
  for (int j = 0; j < int(cols.size()); ++j) C.col(j) = cols[j];
  return C;
}

// Restriction of an operator to a rotation sector.  D(alpha) maps weight
// ell to weight ell-1, so rows are taken from `ell_out` and columns from
// `ell_in`.
inline Matrix rotation_project(const Matrix& op, const Basis& basis, int ell_in,
                               int ell_out) {
  Matrix Cin = rotation_sector_columns(basis, ell_in);
  Matrix Cout = rotation_sector_columns(basis, ell_out);
  return Cout.adjoint() * op * Cin;
}

// Pointwise synthesis of a coefficient vector at complex positions.
inline std::vector<std::vector<cplx>> synthesize_position(
    const Vector& coeffs, const Basis& basis, const std::vector<cplx>& points) {
  std::vector<std::vector<cplx>> values(basis.components(),
                                        std::vector<cplx>(points.size(), 0));
  for (size_t ip = 0; ip < points.size(); ++ip) {
    RectCoord y = rect_from_z(points[ip]);
    for (int c = 0; c < basis.components(); ++c)
      for (int i = 0; i < basis.comps[c].size(); ++i) {
        auto [m, n] = basis.comps[c].modes[i];
        values[c][ip] += coeffs[basis.offset(c) + i] *
                         std::polar(1.0, m * y.y1 + n * y.y2);
      }
  }
  return values;
}

inline std::vector<cplx> synthesize_component(const Vector& coeffs,
                                              const Basis& basis, int comp,
                                              const std::vector<cplx>& points) {
  std::vector<cplx> vals(points.size(), 0);
  for (size_t ip = 0; ip < points.size(); ++ip) {
    RectCoord y = rect_from_z(points[ip]);
    for (int i = 0; i < basis.comps[comp].size(); ++i) {
      auto [m, n] = basis.comps[comp].modes[i];
      vals[ip] += coeffs[basis.offset(comp) + i] *
                  std::polar(1.0, m * y.y1 + n * y.y2);
    }
  }
  return vals;
}

}  // namespace ttg
