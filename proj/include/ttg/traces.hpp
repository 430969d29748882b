#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ttg/birman.hpp"

// Trace formulas for powers of the Birman-Schwinger operator.
//
// tr(B_k^l) over the residue class (1,1) equals the absolutely convergent
// lattice sum
//    sum_pi a_pi sum_{(M,N) in Z^2} prod_t 1/(kappa + 3 gamma(M,N) - P_t)
// where the product runs over the 2l prefix pairs of the admissible tuple
// pi, P_t = -gamma(c_t) - mu with mu = omega^2 - omega, gamma(a,b) =
// omega^2 a - omega b, and kappa = gamma(k1,k2).  The inner lattice sum is
// evaluated exactly by summing one index with the cotangent residue
// theorem and the other as a rapidly convergent theta-type series; the
// weighted total is independent of kappa.

namespace ttg {

inline cplx gamma_of(double a, double b) { return omega_bar * a - omega * b; }

// ---------------------------------------------------------------------------
// Admissible tuples

// Hopping directions A = sigma-orbit of (1,1), weights omega^index.
inline const std::array<std::pair<long, long>, 3>& hop_directions() {
  static const std::array<std::pair<long, long>, 3> A = {
      {{1, 1}, {-2, 1}, {1, -2}}};
  return A;
}

struct AdmissibleTuple {
  // per factor: weight tag (p or p_tilde) and the two couple indices in A
  std::vector<bool> tilde;
  std::vector<int> first_idx, second_idx;
  int s_count = 0;       // number of p_tilde factors
  long m_exponent = 0;   // weight exponent mod 3, from the orbit indices
  long m_formula = 0;    // (2/3) sum (gamma_i + beta_i); agrees with
                         // m_exponent mod 3 on pairwise-cancelling tuples
  cplx weight;           // omega^{m_exponent}
  std::vector<std::pair<long, long>> prefixes;  // 2l accumulated shifts
};

// Exhaustive enumeration of closed admissible tuples for tr(B^l).
inline std::vector<AdmissibleTuple> enumerate_Theta(int ell, long long p,
                                                    long long p_tilde) {
  const auto& A = hop_directions();
  std::vector<AdmissibleTuple> out;
  const int per_factor = 2 * 3 * 3;
  long total = 1;
  for (int i = 0; i < ell; ++i) total *= per_factor;
  for (long code = 0; code < total; ++code) {
    long c = code;
    AdmissibleTuple t;
    long sum1 = 0, sum2 = 0;
    long weight_exp = 0, m_num = 0;
    for (int i = 0; i < ell; ++i) {
      int tag = int(c % 2); c /= 2;
      int i1 = int(c % 3); c /= 3;
      int i2 = int(c % 3); c /= 3;
      long long n = tag ? p_tilde : p;
      // n = p: (alpha,beta) in -A, (gamma,delta) in A
      // n = p_tilde: (alpha,beta) in A, (gamma,delta) in -A
      long a1 = tag ? A[i1].first : -A[i1].first;
      long a2 = tag ? A[i1].second : -A[i1].second;
      long g1 = tag ? -A[i2].first : A[i2].first;
      long g2 = tag ? -A[i2].second : A[i2].second;
      t.tilde.push_back(tag);
      t.first_idx.push_back(i1);
      t.second_idx.push_back(i2);
      t.s_count += tag;
      weight_exp += i1 + i2;
      m_num += g1 + a2;  // gamma_i + beta_i
      t.prefixes.emplace_back(sum1, sum2);          // (alpha~_i, beta~_i)
      t.prefixes.emplace_back(sum1 + n * a1, sum2 + n * a2);  // (gamma~, delta~)
      sum1 += n * (a1 + g1);
      sum2 += n * (a2 + g2);
    }
    if (sum1 != 0 || sum2 != 0) continue;
    t.weight = omega_pow(weight_exp);
    t.m_exponent = ((weight_exp % 3) + 3) % 3;
    t.m_formula = (2 * m_num) / 3;
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lattice summation engine

namespace detail_trace {

// Polynomials P_t with d^t/dx^t cot(pi x) = pi^t P_t(cot(pi x)).
inline const std::vector<std::vector<double>>& cot_derivative_polys(int tmax) {
  static std::vector<std::vector<double>> polys = {{0.0, 1.0}};
  while (int(polys.size()) <= tmax) {
    const auto& p = polys.back();
    // p'(c) * (-(1+c^2))
    std::vector<double> dp(p.size() >= 2 ? p.size() - 1 : 1, 0.0);
    for (size_t k = 1; k < p.size(); ++k) dp[k - 1] = double(k) * p[k];
    std::vector<double> next(dp.size() + 2, 0.0);
    for (size_t k = 0; k < dp.size(); ++k) {
      next[k] -= dp[k];
      next[k + 2] -= dp[k];
    }
    polys.push_back(std::move(next));
  }
  return polys;
}

inline cplx cot_pi(cplx x) {
  // stable for large |Im x|
  if (x.imag() > 20) return cplx(0, -1);
  if (x.imag() < -20) return cplx(0, 1);
  cplx e = std::exp(cplx(0, 2 * pi) * x);
  return cplx(0, 1) * (e + 1.0) / (e - 1.0);
}

inline cplx cot_deriv(int t, cplx x) {
  const auto& polys = cot_derivative_polys(t);
  cplx c = cot_pi(x);
  cplx acc = 0, cp = 1;
  for (double coef : polys[t]) {
    acc += coef * cp;
    cp *= c;
  }
  return std::pow(pi, t) * acc;
}

// T_t(u) = sum_{N in Z} d^t/dx^t cot(pi x) at x = u + N tau, tau = omega^2,
// summed symmetrically.  For t = 0 the sum is quasi-periodic:
// T_0(u + tau) = T_0(u) + 2i; t >= 1 are periodic and absolutely
// convergent.
inline cplx cot_lattice_sum(int t, cplx u) {
  const cplx tau = omega_bar;
  // reduce along tau, tracking the t=0 quasi-periodic shift
  long s = std::lround(u.imag() / tau.imag());
  u -= double(s) * tau;
  u -= std::round(u.real() - u.imag() * tau.real() / tau.imag());
  cplx acc = cot_deriv(t, u);
  for (int N = 1; N <= 40; ++N) {
    // for t = 0 the +-i tails of the pair cancel, so the pair decays
    cplx pair = cot_deriv(t, u + double(N) * tau) +
                cot_deriv(t, u - double(N) * tau);
    acc += pair;
    if (N > 4 && std::abs(pair) < 1e-18) break;
  }
  if (t == 0) acc += cplx(0, 2.0) * double(s);
  return acc;
}

struct Pole {
  std::pair<long, long> index;  // prefix pair
  cplx value;                   // P = -gamma(c) - mu
  int order = 0;
};

// Laurent coefficients b_{-1}, ..., b_{-order} of f at the pole P.
// Simple poles use the closed-form product; coincident poles use a
// numerical contour integral with radius half the minimum pole separation.
inline std::vector<cplx> laurent_coeffs(const std::vector<Pole>& poles,
                                        size_t which) {
  const Pole& P = poles[which];
  if (P.order == 1) {
    cplx prod = 1;
    for (size_t j = 0; j < poles.size(); ++j) {
      if (j == which) continue;
      for (int rep = 0; rep < poles[j].order; ++rep)
        prod /= (P.value - poles[j].value);
    }
    return {prod};
  }
  double min_sep = 1e9;
  for (size_t j = 0; j < poles.size(); ++j)
    if (j != which)
      min_sep = std::min(min_sep, std::abs(P.value - poles[j].value));
  double radius = (min_sep > 1e8) ? 1.0 : 0.5 * min_sep;
  if (radius < 1e-8)
    throw std::runtime_error("pole clustering below contour resolution");
  const int M = 256;
  // b_{-1-t} = (1/2 pi i) oint f(w) (w-P)^t dw
  std::vector<cplx> out(P.order, 0.0);
  for (int q = 0; q < M; ++q) {
    cplx w = P.value + std::polar(radius, 2 * pi * q / M);
    cplx f = 1;
    for (const auto& pl : poles)
      for (int rep = 0; rep < pl.order; ++rep) f /= (w - pl.value);
    cplx dw = (w - P.value) * cplx(0, 2 * pi / M);  // dw = i (w-P) dtheta
    cplx pw = 1;
    for (int t = 0; t < P.order; ++t) {
      out[t] += f * pw * dw / cplx(0, 2 * pi);
      pw *= (w - P.value);
    }
  }
  return out;
}

}  // namespace detail_trace

// sum_{(M,N) in Z^2} prod_t 1/(kappa + 3 gamma(M,N) - P_t) for the prefix
// pairs of one admissible tuple.
inline cplx tuple_lattice_sum(const std::vector<std::pair<long, long>>& prefixes,
                              double k1, double k2) {
  using namespace detail_trace;
  const cplx mu = omega_bar - omega;
  const cplx kappa = gamma_of(k1, k2);
  // group coincident poles exactly via the integer prefix pairs
  std::vector<Pole> poles;
  for (const auto& c : prefixes) {
    bool found = false;
    for (auto& p : poles)
      if (p.index == c) { ++p.order; found = true; break; }
    if (!found)
      poles.push_back({c, -gamma_of(double(c.first), double(c.second)) - mu, 1});
  }
  const cplx scale = 3.0 * omega_bar;  // 3 omega^2, the M-direction period
  cplx total = 0;
  for (size_t ip = 0; ip < poles.size(); ++ip) {
    auto b = laurent_coeffs(poles, ip);
    cplx u = (poles[ip].value - kappa) / scale;
    double fact = 1.0;
    for (int t = 0; t < poles[ip].order; ++t) {
      if (t > 0) fact *= t;
      total += -pi * b[t] * std::pow(scale, -1.0 - t) / fact *
               cot_lattice_sum(t, u);
    }
  }
  return total;
}

// All reported traces use the per-moire-sector convention: 1/9 of the
// matrix trace over the residue class, which is what the closed forms of
// the l = 2 theorems evaluate.  The raw matrix trace (the eigenvalue sum
// of the assembled operator) is available with per_sector = false.
inline constexpr double sector_trace_normalization = 1.0 / 9.0;

// Combinatorial trace: enumerate Theta_l and evaluate every tuple's
// lattice sum in closed form.  Independent of the momentum used
// internally.
inline cplx combinatorial_trace(int ell, long long p, long long p_tilde,
                                cplx hop_ratio, bool per_sector = true,
                                double k1 = 0.2371, double k2 = 0.5113) {
  auto tuples = enumerate_Theta(ell, p, p_tilde);
  double three_l = std::pow(3.0, ell);
  cplx total = 0;
  for (const auto& t : tuples) {
    cplx a = three_l * std::pow(hop_ratio, 2 * t.s_count) * t.weight;
    total += a * tuple_lattice_sum(t.prefixes, k1, k2);
  }
  return per_sector ? total * sector_trace_normalization : total;
}

// Trace of the l-th power of an assembled B_k matrix.
inline cplx numeric_trace(const OperatorMatrix& Bk, int ell,
                          bool per_sector = true) {
  if (ell < 2) throw std::invalid_argument("trace requires l >= 2");
  Matrix acc = Bk.mat;
  for (int i = 1; i < ell; ++i) acc = acc * Bk.mat;
  cplx tr = acc.trace();
  return per_sector ? tr * sector_trace_normalization : tr;
}

// ---------------------------------------------------------------------------
// Closed forms for l = 2

// S_4 closed form; `rescaled` divides by (p/zeta1)^4, giving tr(B_k^2).
inline cplx closed_form_S4(cplx hop_ratio, Rational h, long long p,
                           double zeta1, bool rescaled) {
  if (h.num == 0) throw std::invalid_argument("zeta2/zeta1 must be nonzero");
  const double base = 4.0 * pi / (9.0 * std::sqrt(3.0));
  cplx r2 = hop_ratio * hop_ratio;
  cplx bracket;
  if (h == Rational(1, 1)) {
    bracket = 1.0 - r2 + r2 * r2;
  } else if (h == Rational(-1, 1)) {
    bracket = (1.0 + r2) * (1.0 + r2);
  } else {
    double hv = h.value();
    bracket = r2 * r2 / (hv * hv) + 3.0 * r2 / (1.0 - hv + hv * hv) + 1.0;
  }
  // S4 = 4 pi p^2/(9 sqrt3 zeta1^4) * bracket
  cplx unrescaled = base * double(p) * double(p) /
                    (zeta1 * zeta1 * zeta1 * zeta1) * bracket;
  if (!rescaled) return unrescaled;
  double pz = double(p) / zeta1;
  return unrescaled / (pz * pz * pz * pz);  // = 4 pi/(9 sqrt3 p^2) * bracket
}

// The limit constant of the discontinuity theorem: the generic-branch
// bracket evaluated at the limit ratio (not the closed form at that ratio,
// which is the point of the discontinuity).
inline cplx discontinuity_limit_constant(cplx hop_ratio, Rational h,
                                         double zeta1) {
  double hv = h.value();
  cplx r2 = hop_ratio * hop_ratio;
  cplx bracket = r2 * r2 / (hv * hv) + 3.0 * r2 / (1.0 - hv + hv * hv) + 1.0;
  return 4.0 * pi / (9.0 * std::sqrt(3.0)) * bracket /
         (zeta1 * zeta1 * zeta1 * zeta1);
}

struct DiscontinuityRow {
  int n = 0;
  Rational ratio_n;
  long long p_n = 0;
  cplx S4;
  cplx S4_over_pn2;
};

// Sequence zeta2^(n) = (zeta2/zeta1) * 3^n/(3^n - 1) * zeta1 along which
// S4 diverges like p_n^2; S4/p_n^2 converges to the limit constant.
inline std::vector<DiscontinuityRow> discontinuity_sequence(double zeta1,
                                                            Rational ratio,
                                                            int n_max,
                                                            cplx hop_ratio) {
  std::vector<DiscontinuityRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    long long pw = 1;
    for (int i = 0; i < n; ++i) pw *= 3;
    Rational h_n(ratio.num * pw, ratio.den * (pw - 1));
    auto cfg = derive_config(zeta1, h_n);
    DiscontinuityRow row;
    row.n = n;
    row.ratio_n = h_n;
    row.p_n = cfg.p;
    row.S4 = closed_form_S4(hop_ratio, h_n, cfg.p, zeta1, /*rescaled=*/false);
    row.S4_over_pn2 = row.S4 / double(cfg.p * cfg.p);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rationality

struct RationalityResult {
  Rational q;
  double distance = 0;   // |tau * sqrt(3)/pi - q|
  double imag_part = 0;  // |Im tau|
};

// Nearest rational with bounded denominator to tau * sqrt(3)/pi
// (continued-fraction best approximation).
inline RationalityResult rationality_check(cplx tau, long long max_den) {
  double x = tau.real() * std::sqrt(3.0) / pi;
  long long best_num = std::llround(x), best_den = 1;
  double best_err = std::abs(x - double(best_num));
  // continued fraction expansion
  double v = x;
  long long h0 = 1, h1 = std::llround(std::floor(v)), k0 = 0, k1 = 1;
  v -= std::floor(v);
  for (int it = 0; it < 40 && k1 <= max_den; ++it) {
    double err = std::abs(x - double(h1) / double(k1));
    if (err < best_err) { best_err = err; best_num = h1; best_den = k1; }
    if (v < 1e-15) break;
    v = 1.0 / v;
    long long a = (long long)std::floor(v);
    v -= std::floor(v);
    long long h2 = a * h1 + h0, k2 = a * k1 + k0;
    if (k2 > max_den || k2 <= 0) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
  }
  RationalityResult res;
  res.q = Rational(best_num, best_den);
  res.distance = best_err;
  res.imag_part = std::abs(tau.imag());
  return res;
}

}  // namespace ttg
