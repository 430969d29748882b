#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ttg/operators.hpp"
#include "ttg/parallel.hpp"

// The Birman-Schwinger operator
//   B_k = R(k) U(-pz) R(k) U(pz) + r^2 R(k) U(pt z) R(k) U(-pt z),
//   R(k) = (2 D_zbar + k)^{-1},  r = alpha_23 / alpha_12,
// assembled on the scalar residue basis (m,n) = (1,1) mod 3.  A parameter
// alpha is magic iff 1/alpha_12^2 is an eigenvalue of B_k (k independent).

namespace ttg {

inline constexpr double k_exclusion_radius = 1e-6;

inline double dist_to_integer_pair(double k1, double k2) {
  double d1 = std::abs(k1 - std::round(k1));
  double d2 = std::abs(k2 - std::round(k2));
  return std::max(d1, d2);
}

inline OperatorMatrix assemble_Bk(cplx hop_ratio, double k1, double k2,
                                  const TwistConfig& tw,
                                  const PotentialCoeffs& pot, int N,
                                  int c1 = 1, int c2 = 1) {
  if (dist_to_integer_pair(k1, k2) < k_exclusion_radius)
    throw std::invalid_argument(
        "Birman-Schwinger momentum too close to the dual lattice");
  Basis basis = scalar_residue_basis(N, c1, c2);
  OperatorMatrix op{Matrix::Zero(basis.dim, basis.dim), basis, basis, k1, k2,
                    "B_k"};
  auto lambda = [&](long m, long n) {
    return 1.0 / dirac_entry(double(m), double(n), k1, k2);
  };
  auto add_term = [&](const std::vector<ShiftTerm>& outer,
                      const std::vector<ShiftTerm>& inner, cplx weight) {
    // R M_outer R M_inner: entry (nu, nu - s_o - s_i) with intermediate
    // resolvent at nu - s_o; the factor 3 is (sqrt 3)^2 from R = sqrt(3) Lambda.
    const ComponentBasis& cb = basis.comps[0];
    for (int row = 0; row < cb.size(); ++row) {
      auto [m, n] = cb.modes[row];
      cplx lam_row = lambda(m, n);
      for (const auto& o : outer) {
        cplx lam_mid = lambda(m - o.da, n - o.db);
        for (const auto& i : inner) {
          int col = cb.find({m - o.da - i.da, n - o.db - i.db});
          if (col < 0) continue;
          op.mat(row, col) += 3.0 * weight * o.coeff * i.coeff * lam_row * lam_mid;
        }
      }
    }
  };
  auto plus_p = shift_table(pot, tw.p);
  auto minus_p = shift_table(pot, -tw.p);
  auto plus_pt = shift_table(pot, tw.p_tilde);
  auto minus_pt = shift_table(pot, -tw.p_tilde);
  add_term(minus_p, plus_p, 1.0);
  add_term(plus_pt, minus_pt, hop_ratio * hop_ratio);
  return op;
}

struct MagicParameter {
  cplx alpha12;
  cplx hop_ratio;
  int multiplicity = 0;  // 0 = not yet determined
  bool verified = false;
  double residual = -1;  // max over sampled k of sigma_min(D(alpha)+k)
};

// Candidate magic parameters from the spectrum of B_k.  Both square roots
// are emitted (A = -A); eigenvalues below 1e-10 * ||B|| are numerical
// nullspace of the compact operator and are discarded.
inline std::vector<MagicParameter> magic_from_Bk(const OperatorMatrix& Bk,
                                                 cplx hop_ratio, int count) {
  auto eigs = eigenvalues(Bk.mat);
  double scale = 0;
  for (const auto& e : eigs) scale = std::max(scale, std::abs(e));
  std::vector<MagicParameter> out;
  for (const auto& lam : eigs) {
    if (std::abs(lam) < 1e-10 * scale) continue;
    cplx alpha = 1.0 / std::sqrt(lam);
    for (cplx a : {alpha, -alpha}) {
      MagicParameter mp;
      mp.alpha12 = a;
      mp.hop_ratio = hop_ratio;
      out.push_back(mp);
    }
  }
  std::sort(out.begin(), out.end(), [](const MagicParameter& a,
                                       const MagicParameter& b) {
    double ma = std::abs(a.alpha12), mb = std::abs(b.alpha12);
    if (std::abs(ma - mb) > 1e-12 * (ma + mb)) return ma < mb;
    return std::arg(a.alpha12) < std::arg(b.alpha12);
  });
  if (count > 0 && int(out.size()) > count) out.resize(count);
  return out;
}

// Default verification momenta: a 5x5 grid over the Gamma_3^* cell with an
// offset keeping every point away from the dual lattice and the protected
// points.
inline std::vector<std::pair<double, double>> default_k_samples(int per_side = 5) {
  std::vector<std::pair<double, double>> ks;
  for (int i = 0; i < per_side; ++i)
    for (int j = 0; j < per_side; ++j)
      ks.push_back({0.311 + 3.0 * i / per_side, 0.577 + 3.0 * j / per_side});
  return ks;
}

struct VerifyResult {
  bool verified = false;
  double residual = 0;
};

// alpha is magic iff sigma_min(D(alpha)+k) vanishes for every k; verify on
// a sample of momenta spread over the Brillouin zone.
inline VerifyResult verify_magic(cplx alpha12, cplx alpha23,
                                 const TwistConfig& tw,
                                 const PotentialCoeffs& pot, int N, double tol,
                                 const std::vector<std::pair<double, double>>&
                                     k_samples = default_k_samples()) {
  Basis basis = sector_basis(tw, 0, N);
  std::vector<double> worst(k_samples.size());
  parallel_for(k_samples.size(), [&](size_t i) {
    auto [k1, k2] = k_samples[i];
    worst[i] = smallest_singular_value(
        assemble_D(alpha12, alpha23, k1, k2, tw, pot, basis).mat);
  });
  VerifyResult r;
  for (double w : worst) r.residual = std::max(r.residual, w);
  r.verified = r.residual < tol;
  return r;
}

struct MultiplicityResult {
  int multiplicity = 0;
  bool resolved = true;
  double gap = 0;  // separation between the kernel block and the next sigma
};

// Multiplicity of a magic parameter: minimum over sampled k (away from the
// protected points {0,+-i} + Gamma_3^*) of the number of singular values
// below tol.
inline MultiplicityResult multiplicity(cplx alpha12, cplx alpha23,
                                       const TwistConfig& tw,
                                       const PotentialCoeffs& pot, int N,
                                       double tol) {
  Basis basis = sector_basis(tw, 0, N);
  // generic sample points, none congruent to (r,r) mod 3
  const std::pair<double, double> ks[] = {
      {0.41, 1.13}, {1.67, 0.29}, {2.23, 1.71}, {0.87, 2.41}, {1.31, 2.03}};
  MultiplicityResult res;
  res.multiplicity = basis.dim;
  for (auto [k1, k2] : ks) {
    auto sv = singular_values(
        assemble_D(alpha12, alpha23, k1, k2, tw, pot, basis).mat);
    int count = 0;
    while (count < int(sv.size()) && sv[count] < tol) ++count;
    if (count < int(sv.size()) && sv[count] < 10 * tol) res.resolved = false;
    double gap = count < int(sv.size()) ? sv[count] : 1e99;
    if (count < res.multiplicity) {
      res.multiplicity = count;
      res.gap = gap;
    } else if (count == res.multiplicity) {
      res.gap = std::min(res.gap, gap);
    }
  }
  return res;
}

struct SweepRow {
  Rational ratio;
  cplx hop_ratio;
  cplx alpha12;
  int multiplicity = 0;
  double residual = -1;
  int N = 0;
  bool failed = false;
  std::string error;
};

// Magic-parameter sweep over twist ratios at fixed hopping ratio.  Rows are
// produced in deterministic order; per-row failures are recorded and the
// sweep continues.
inline std::vector<SweepRow> sweep_ratios(const std::vector<Rational>& ratios,
                                          cplx hop_ratio, int count, int N,
                                          double verify_tol = 1e-5) {
  std::vector<std::vector<SweepRow>> rows(ratios.size());
  parallel_for(ratios.size(), [&](size_t i) {
    SweepRow base;
    base.ratio = ratios[i];
    base.hop_ratio = hop_ratio;
    base.N = N;
    try {
      auto tw = derive_config(1.0, ratios[i]);
      auto Bk = assemble_Bk(hop_ratio, 0.311, 0.577, tw, standard_potential_U0(), N);
      auto magics = magic_from_Bk(Bk, hop_ratio, count);
      for (auto& mp : magics) {
        SweepRow row = base;
        row.alpha12 = mp.alpha12;
        auto v = verify_magic(mp.alpha12, hop_ratio * mp.alpha12, tw,
                              standard_potential_U0(), N, verify_tol);
        row.residual = v.residual;
        if (v.verified) {
          auto m = multiplicity(mp.alpha12, hop_ratio * mp.alpha12, tw,
                                standard_potential_U0(), N, verify_tol);
          row.multiplicity = m.resolved ? m.multiplicity : -1;
        }
        rows[i].push_back(row);
      }
    } catch (const std::exception& e) {
      SweepRow row = base;
      row.failed = true;
      row.error = e.what();
      rows[i].push_back(row);
    }
  });
  std::vector<SweepRow> flat;
  for (auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return flat;
}

}  // namespace ttg
