#pragma once

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <array>
#include <cstdint>

// Lattice arithmetic for the moire lattice Gamma_3 = Gamma/3, its dual,
// and the commensurability arithmetic of the twist-angle ratio.
//
// Conventions:
//   omega = exp(2*pi*i/3)
//   Gamma    = 4*pi*i * (omega Z + omega^2 Z),  Gamma_3 = Gamma/3
//   Gamma^*  = (1/sqrt(3)) * (omega Z + omega^2 Z), represented as
//              k(k1,k2) = (omega^2 k1 - omega k2)/sqrt(3)
//   Gamma_3^* = 3 Gamma^*
//   <a,k> = Re(a * conj(k))
//
// Rectangular coordinates: z = 2i(omega y1 + omega^2 y2).  A dual index
// (m,n) corresponds to the plane wave exp(i(m y1 + n y2)).

namespace ttg {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

inline const cplx omega{-0.5, 0.8660254037844386467637231707529362};
inline const cplx omega_bar{-0.5, -0.8660254037844386467637231707529362};

inline cplx omega_pow(long e) {
  long r = e % 3;
  if (r < 0) r += 3;
  if (r == 0) return cplx(1.0, 0.0);
  return r == 1 ? omega : omega_bar;
}

// a = (4*pi*i/3)(omega a1 + omega^2 a2) in Gamma_3
struct CellIndex {
  long a1 = 0;
  long a2 = 0;
};

// k = (omega^2 k1 - omega k2)/sqrt(3) in Gamma^*
struct DualIndex {
  long k1 = 0;
  long k2 = 0;
  friend bool operator==(const DualIndex&, const DualIndex&) = default;
};

inline cplx embed(CellIndex a) {
  return (4.0 * pi / 3.0) * cplx(0, 1) *
         (omega * double(a.a1) + omega_bar * double(a.a2));
}

inline cplx embed(DualIndex k) {
  return (omega_bar * double(k.k1) - omega * double(k.k2)) / std::sqrt(3.0);
}

// Momentum for real rectangular components (k1,k2), off-lattice allowed.
inline cplx embed_momentum(double k1, double k2) {
  return (omega_bar * k1 - omega * k2) / std::sqrt(3.0);
}

inline double pairing(cplx a, cplx k) { return std::real(a * std::conj(k)); }

// Stacking point z_S = (gamma_2 - gamma_1)/3 = 4*sqrt(3)*pi/9; the set
// {0, +z_S, -z_S} is fixed under rotation by omega in C/Gamma_3.
inline double stacking_point() { return 4.0 * std::sqrt(3.0) * pi / 9.0; }

// sigma(m,n) = (-(n+m), m); gamma_{sigma(m,n)} = omega * gamma_{(m,n)}.
inline DualIndex sigma(DualIndex d) { return DualIndex{-(d.k2 + d.k1), d.k1}; }

inline std::array<DualIndex, 3> sigma_orbit(long m, long n) {
  DualIndex d0{m, n};
  DualIndex d1 = sigma(d0);
  return {d0, d1, sigma(d1)};
}

// Rectangular coordinates y = (y1,y2) with z = 2i(omega y1 + omega^2 y2).
struct RectCoord {
  double y1 = 0;
  double y2 = 0;
};

inline cplx z_from_rect(RectCoord y) {
  return 2.0 * cplx(0, 1) * (omega * y.y1 + omega_bar * y.y2);
}

inline RectCoord rect_from_z(cplx z) {
  // Solve the 2x2 real system  z = 2i(omega y1 + omega^2 y2).
  const cplx c1 = 2.0 * cplx(0, 1) * omega;
  const cplx c2 = 2.0 * cplx(0, 1) * omega_bar;
  double det = c1.real() * c2.imag() - c2.real() * c1.imag();
  double y1 = (z.real() * c2.imag() - c2.real() * z.imag()) / det;
  double y2 = (c1.real() * z.imag() - z.real() * c1.imag()) / det;
  return {y1, y2};
}

// Exact rational with reduced representation, den > 0.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) { num = -num; den = -den; }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) { num /= g; den /= g; }
  }

  Rational inverse() const {
    if (num == 0) throw std::invalid_argument("inverse of zero ratio");
    return Rational(den, num);
  }
  double value() const { return double(num) / double(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(s), 1);
  return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

struct RatioFactorization {
  long j = 0;   // power of 3
  long long r1 = 1;
  long long r2 = 1;  // positive, both r1,r2 not divisible by 3
};

// ratio = 3^j * r1/r2 with r1, r2 coprime and neither divisible by 3.
inline RatioFactorization parse_ratio(Rational ratio) {
  if (ratio.num == 0) throw std::invalid_argument("twist ratio must be nonzero");
  RatioFactorization f;
  long long n = ratio.num, d = ratio.den;
  while (n % 3 == 0) { n /= 3; ++f.j; }
  while (d % 3 == 0) { d /= 3; --f.j; }
  f.r1 = n;
  f.r2 = d;
  return f;
}

enum class CaseTag { CaseI, CaseII };

// Twist configuration of Assumption 1: p, q derived from zeta2/zeta1, with
// the orientation flip applied whenever the raw p is divisible by 3 so that
// downstream code may assume p != 0 mod 3.
struct TwistConfig {
  double zeta1 = 1.0;
  Rational ratio;            // effective zeta2/zeta1 (post-flip)
  Rational ratio_input;      // as supplied
  long j = 0;
  long long r1 = 1, r2 = 1;
  long long p = 1;
  long long q = 0;
  long long p_tilde = 1;     // p * zeta2/zeta1, always an integer
  bool flipped = false;
  CaseTag case_tag = CaseTag::CaseII;
};

namespace detail {
inline long long mod3(long long x) {
  long long r = x % 3;
  return r < 0 ? r + 3 : r;
}
}  // namespace detail

inline TwistConfig derive_config(double zeta1, Rational ratio) {
  TwistConfig cfg;
  cfg.zeta1 = zeta1;
  cfg.ratio_input = ratio;
  cfg.ratio = ratio;

  auto f = parse_ratio(ratio);
  long long p_raw = (f.j > 0) ? f.r2 : [&] {
    long long v = f.r2;
    for (long i = 0; i < -f.j; ++i) v *= 3;
    return v;
  }();

  if (p_raw % 3 == 0) {
    // Remark 2.1: flip the trilayer, swapping the hopping roles and
    // inverting the ratio; the flipped p = |q| is coprime to 3.
    cfg.flipped = true;
    cfg.ratio = ratio.inverse();
    f = parse_ratio(cfg.ratio);
  }

  cfg.j = f.j;
  cfg.r1 = f.r1;
  cfg.r2 = f.r2;
  if (f.j > 0) {
    cfg.p = f.r2;
    cfg.q = 0;
  } else {
    long long v = f.r2;
    for (long i = 0; i < -f.j; ++i) v *= 3;
    cfg.p = v;
    cfg.q = f.r1;
  }

  // p_tilde = p * ratio; exact because the 3^j factor cancels.
  long long num = cfg.p * cfg.ratio.num;
  if (num % cfg.ratio.den != 0)
    throw std::logic_error("p * ratio is not an integer");
  cfg.p_tilde = num / cfg.ratio.den;

  bool distinct = detail::mod3(-cfg.q) != detail::mod3(cfg.p) &&
                  detail::mod3(-cfg.q) != 0 && detail::mod3(cfg.p) != 0;
  cfg.case_tag = distinct ? CaseTag::CaseII : CaseTag::CaseI;
  return cfg;
}

// Distinguished momenta K = {0, -i, i} = {-i r : r in Z_3}; -i*r has
// rectangular components (r, r).
inline cplx protected_momentum(long r) {
  return embed(DualIndex{r, r});
}

}  // namespace ttg
