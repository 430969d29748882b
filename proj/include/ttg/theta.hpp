#pragma once

#include <optional>
#include <vector>

#include "ttg/operators.hpp"
#include "ttg/parallel.hpp"

// Jacobi theta machinery: theta_1 with modulus omega, the flat-band
// multipliers F_k and G_k, the Gamma_3-periodic Weierstrass p-function,
// the theta-function argument producing Bloch functions at every momentum
// from a single kernel vector with a zero, and the Chern number of the
// flat-band bundle.
//
// F_k(z) = e^{-(i/2)(omega z + zbar) k} theta(w + k/(sqrt3 omega))/theta(w),
// w = 3z/(4 pi i omega).  (The exponent carries omega, not conj(omega):
// that choice is forced by F_k(z+a) = F_k(z) for a in Gamma_3.)

namespace ttg {

struct ThetaValue {
  cplx value;
  int terms_used = 0;
};

namespace detail_theta {

// Reduce zeta modulo Z + omega Z, tracking the quasi-periodicity factor:
// theta(zeta + m + n omega) = (-1)^{m+n} e^{-pi i n^2 omega - 2 pi i zeta n} theta(zeta).
struct Reduced {
  cplx zeta;
  cplx factor;  // theta(original) = factor * theta(reduced)
};

inline Reduced reduce_theta_arg(cplx zeta) {
  // lattice Z + omega Z: coordinates via the imaginary part
  long n = std::lround(zeta.imag() / omega.imag());
  cplx z1 = zeta - double(n) * omega;
  long m = std::lround(z1.real());
  cplx zr = z1 - double(m);
  // theta(zr + m + n omega) in terms of theta(zr)
  cplx factor = ((m + n) % 2 == 0) ? 1.0 : -1.0;
  factor *= std::exp(cplx(0, -pi) * double(n) * double(n) * omega +
                     cplx(0, -2 * pi) * zr * double(n));
  return {zr, factor};
}

}  // namespace detail_theta

// theta(zeta) = -sum_n exp(pi i (n+1/2)^2 omega + 2 pi i (n+1/2)(zeta+1/2)),
// odd, with simple zeros exactly at Z + omega Z.
inline ThetaValue theta1(cplx zeta) {
  auto red = detail_theta::reduce_theta_arg(zeta);
  cplx sum = 0;
  int used = 0;
  for (int n = 0; n < 100; ++n) {
    // symmetric pair n and -n-1
    cplx t1 = std::exp(cplx(0, pi) * (n + 0.5) * (n + 0.5) * omega +
                       cplx(0, 2 * pi) * (n + 0.5) * (red.zeta + 0.5));
    double nm = -n - 0.5;
    cplx t2 = std::exp(cplx(0, pi) * nm * nm * omega +
                       cplx(0, 2 * pi) * nm * (red.zeta + 0.5));
    sum += t1 + t2;
    used += 2;
    if (n > 1 && std::abs(t1) + std::abs(t2) < 1e-18 * (1.0 + std::abs(sum)))
      break;
  }
  return {-red.factor * sum, used};
}

// d^j/dzeta^j theta at zeta (no lattice reduction; adequate for the small
// arguments used by the Weierstrass quotients).
inline cplx theta1_deriv(int j, cplx zeta) {
  cplx sum = 0;
  for (int n = -60; n <= 60; ++n) {
    cplx term = std::exp(cplx(0, pi) * (n + 0.5) * (n + 0.5) * omega +
                         cplx(0, 2 * pi) * (n + 0.5) * (zeta + 0.5));
    sum += std::pow(cplx(0, 2 * pi) * (n + 0.5), j) * term;
  }
  return -sum;
}

struct MultiplierValue {
  cplx value;
  bool pole = false;  // z within 1e-8 of the pole lattice Gamma_3
};

inline cplx theta_w(cplx z) { return 3.0 * z / (4.0 * pi * cplx(0, 1) * omega); }

// F_k: Gamma_3 periodic in z, with (2 D_zbar) F_k = -k F_k away from the
// pole lattice Gamma_3.
inline MultiplierValue F_k(cplx k, cplx z) {
  cplx w = theta_w(z);
  auto den = theta1(w);
  MultiplierValue out;
  auto lat = detail_theta::reduce_theta_arg(w);
  if (std::abs(lat.zeta) < 1e-8) out.pole = true;
  cplx num = theta1(w + k / (std::sqrt(3.0) * omega)).value;
  cplx pref = std::exp(cplx(0, -0.5) * (omega * z + std::conj(z)) * k);
  out.value = pref * num / den.value;
  return out;
}

// G_k = tau(k) F_k: satisfies G_k(z + a) = e^{i<a,k>} G_k(z).
inline MultiplierValue G_k(cplx k, cplx z) {
  cplx w = theta_w(z);
  auto den = theta1(w);
  MultiplierValue out;
  auto lat = detail_theta::reduce_theta_arg(w);
  if (std::abs(lat.zeta) < 1e-8) out.pole = true;
  cplx num = theta1(w + k / (std::sqrt(3.0) * omega)).value;
  cplx pref = std::exp(cplx(0, 0.5) * (std::conj(k) - k * omega) * z);
  out.value = pref * num / den.value;
  return out;
}

// Gamma_3-periodic Weierstrass p-function with double pole at 0, from
// theta quotients: p(z) = (1/g1^2)[-d^2 log theta(v) + theta'''(0)/(3 theta'(0))],
// v = z/g1, g1 = (4 pi i/3) omega.
struct WeierstrassValue {
  cplx value;
  cplx derivative;
  bool pole = false;
};

inline WeierstrassValue weierstrass_p(cplx z) {
  const cplx g1 = (4.0 * pi / 3.0) * cplx(0, 1) * omega;
  cplx v = z / g1;
  auto red = detail_theta::reduce_theta_arg(v);
  WeierstrassValue out;
  if (std::abs(red.zeta) < 1e-8) { out.pole = true; }
  // logarithmic derivatives are lattice periodic up to affine terms that
  // cancel in the second and third derivatives; evaluate at the reduced point
  cplx t0 = theta1_deriv(0, red.zeta);
  cplx t1 = theta1_deriv(1, red.zeta);
  cplx t2 = theta1_deriv(2, red.zeta);
  cplx t3 = theta1_deriv(3, red.zeta);
  cplx dlog2 = t2 / t0 - (t1 / t0) * (t1 / t0);
  cplx dlog3 = t3 / t0 - 3.0 * t2 * t1 / (t0 * t0) +
               2.0 * (t1 / t0) * (t1 / t0) * (t1 / t0);
  cplx c = theta1_deriv(3, 0) / (3.0 * theta1_deriv(1, 0));
  out.value = (-dlog2 + c) / (g1 * g1);
  out.derivative = -dlog3 / (g1 * g1 * g1);
  return out;
}

// ---------------------------------------------------------------------------
// Boundary multipliers of the flat-band bundle over C/Gamma_3^*

// tau(a) for a = sqrt3(omega^2 a1 - omega a2) acts on coefficients as the
// mode shift (m,n) -> (m + 3 a1, n + 3 a2) (multiplication by
// e^{-3i(a1 y1 + a2 y2)}).
inline Vector tau_transport(const Vector& coeffs, const Basis& basis, long a1,
                            long a2) {
  Vector out = Vector::Zero(basis.dim);
  for (int c = 0; c < basis.components(); ++c)
    for (int i = 0; i < basis.comps[c].size(); ++i) {
      auto [m, n] = basis.comps[c].modes[i];
      int j = basis.comps[c].find({m + 3 * a1, n + 3 * a2});
      if (j >= 0) out[basis.offset(c) + i] = coeffs[basis.offset(c) + j];
    }
  return out;
}

// e_a(k) = (-1)^{a1-a2} exp(pi i a1^2 omega + 2 pi i a1 k/(sqrt3 omega)),
// the multiplier family with F_{k+a} = tau(a) e_a(k)^{-1} F_k.
inline cplx multiplier_e(long a1, long a2, cplx k) {
  cplx v = std::exp(cplx(0, pi) * double(a1) * double(a1) * omega +
                    cplx(0, 2 * pi) * double(a1) * k / (std::sqrt(3.0) * omega));
  return ((a1 - a2) % 2 == 0) ? v : -v;
}

// ---------------------------------------------------------------------------
// Theta-function argument

struct BlochResult {
  Vector coeffs;       // re-projected coefficients of F_k(z - z*) u(z)
  double residual = 0; // ||(D(alpha)+k) w|| / ||w||
  bool rejected = false;
  std::string message;
};

// Multiply a kernel vector u (sector basis, D(alpha) u ~ 0) by
// F_k(z - z_*) and re-project; reports the flat-band residual at the
// target momentum.  u must vanish at z_* for the product to be regular.
inline BlochResult bloch_from_kernel(const Vector& u, const Basis& basis,
                                     cplx alpha12, cplx alpha23,
                                     const TwistConfig& tw,
                                     const PotentialCoeffs& pot, cplx z_star,
                                     double k1, double k2, int grid = 96,
                                     double vanish_tol = 1e-3) {
  BlochResult res;
  // precondition: u(z_*) small compared to its sup
  {
    std::vector<cplx> pts = {z_star};
    auto vals = synthesize_position(u, basis, pts);
    double at_star = 0, sup = 0;
    const int probe = 12;
    for (int i = 0; i < probe; ++i)
      for (int j = 0; j < probe; ++j) {
        std::vector<cplx> q = {
            z_from_rect({2 * pi * i / probe + 0.013, 2 * pi * j / probe + 0.031})};
        auto v = synthesize_position(u, basis, q);
        for (int c = 0; c < basis.components(); ++c)
          sup = std::max(sup, std::abs(v[c][0]));
      }
    for (int c = 0; c < basis.components(); ++c)
      at_star = std::max(at_star, std::abs(vals[c][0]));
    if (at_star > vanish_tol * sup) {
      res.rejected = true;
      res.message = "kernel vector does not vanish at z_*";
      return res;
    }
  }
  cplx k = embed_momentum(k1, k2);
  const int M = grid;
  // pointwise product on a shifted grid (avoids the poles of F at z* + Gamma_3)
  Vector w = Vector::Zero(basis.dim);
  std::vector<std::vector<cplx>> pointvals(basis.components(),
                                           std::vector<cplx>(M * M));
  std::vector<cplx> pts(M * M);
  const double off = pi / (7.3 * M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j)
      pts[i * M + j] = z_from_rect({2 * pi * i / M + off, 2 * pi * j / M + off});
  auto uvals = synthesize_position(u, basis, pts);
  for (int ij = 0; ij < M * M; ++ij) {
    auto F = F_k(k, pts[ij] - z_star);
    for (int c = 0; c < basis.components(); ++c)
      pointvals[c][ij] = F.value * uvals[c][ij];
  }
  // project back onto the basis modes (grid is offset; divide the phases out)
  for (int c = 0; c < basis.components(); ++c)
    for (int ib = 0; ib < basis.comps[c].size(); ++ib) {
      auto [m, n] = basis.comps[c].modes[ib];
      cplx acc = 0;
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) {
          double y1 = 2 * pi * i / M + off, y2 = 2 * pi * j / M + off;
          acc += pointvals[c][i * M + j] * std::polar(1.0, -(m * y1 + n * y2));
        }
      w[basis.offset(c) + ib] = acc / double(M * M);
    }
  auto D = assemble_D(alpha12, alpha23, k1, k2, tw, pot, basis);
  res.coeffs = w;
  res.residual = (D.mat * w).norm() / w.norm();
  return res;
}

// ---------------------------------------------------------------------------
// Chern number

struct ChernReport {
  int chern = 0;
  double drift = 0;          // distance of the raw sum/2pi from the integer
  double raw_curvature_sum = 0;
  int grid = 0;
  int multiplicity = 0;
  double worst_frame_gap = 1e99;  // min over nodes of sigma_{m+1}/scale
  bool failed = false;
  std::string message;
};

// Plaquette (link-variable) Chern number of the m-dimensional flat-band
// bundle over C/Gamma_3^*, with the tau(a) boundary identification.
inline ChernReport chern_number(cplx alpha12, cplx alpha23,
                                const TwistConfig& tw,
                                const PotentialCoeffs& pot, int m, int grid,
                                int N, double offset = 0.5) {
  Basis basis = sector_basis(tw, 0, N);
  ChernReport rep;
  rep.grid = grid;
  rep.multiplicity = m;
  const int M = grid;
  // half-cell offset keeps the touching points off the grid
  auto knode = [&](int i, int j) {
    return std::pair<double, double>(3.0 * (i + offset) / M,
                                     3.0 * (j + offset) / M);
  };
  std::vector<Matrix> frames((M + 1) * (M + 1));
  std::vector<double> gaps(M * M, 1e99);
  parallel_for(std::size_t(M) * M, [&](std::size_t idx) {
    int i = int(idx / M), j = int(idx % M);
    auto [k1, k2] = knode(i, j);
    auto D = assemble_D(alpha12, alpha23, k1, k2, tw, pot, basis);
    auto pairs = smallest_singular_pairs(D.mat, m + 1);
    Matrix fr(basis.dim, m);
    for (int c = 0; c < m; ++c) fr.col(c) = pairs[c].right;
    frames[i * (M + 1) + j] = std::move(fr);
    gaps[idx] = pairs[m].sigma;
  });
  for (double g : gaps) rep.worst_frame_gap = std::min(rep.worst_frame_gap, g);
  // boundary frames via the tau transport
  for (int i = 0; i < M; ++i) {
    Matrix fr(basis.dim, m);
    const Matrix& src = frames[i * (M + 1)];
    for (int c = 0; c < m; ++c) fr.col(c) = tau_transport(src.col(c), basis, 0, 1);
    frames[i * (M + 1) + M] = std::move(fr);
  }
  for (int j = 0; j <= M; ++j) {
    const Matrix& src = frames[j];
    Matrix fr(basis.dim, m);
    for (int c = 0; c < m; ++c) fr.col(c) = tau_transport(src.col(c), basis, 1, 0);
    frames[M * (M + 1) + j] = std::move(fr);
  }
  auto link = [&](int i1, int j1, int i2, int j2) {
    Matrix ov = frames[i1 * (M + 1) + j1].adjoint() * frames[i2 * (M + 1) + j2];
    return ov.determinant();
  };
  double total = 0;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      cplx loop = link(i, j, i + 1, j) * link(i + 1, j, i + 1, j + 1) /
                  (link(i, j + 1, i + 1, j + 1) * link(i, j, i, j + 1));
      if (std::abs(loop) < 1e-12) {
        rep.failed = true;
        rep.message = "frame rank deficiency at a plaquette corner";
        return rep;
      }
      total += std::arg(loop);
    }
  double c = total / (2 * pi);
  rep.raw_curvature_sum = total;
  rep.chern = int(std::lround(c));
  rep.drift = std::abs(c - std::lround(c));
  return rep;
}

}  // namespace ttg
