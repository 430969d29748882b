#pragma once

#include <complex>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ttg/lattice.hpp"

// Finite-Fourier tunnelling potentials.  A potential with symmetry
// parameters (j, l) satisfies
//    u(z + a) = omega^{j(a1+a2)} u(z),   u(omega z) = conj(omega)^l u(z)
// for a in Gamma_3, and has Fourier modes c_{nm} attached to dual points
// k_{nm} = (omega^2(j+3n) - omega(j-3m))/sqrt(3).  The rotation symmetry
// closes the coefficients along the 3-cycle
//    (n,m) -> (-m, n-m+j) -> (m-n-j, -n) -> (n,m)
// with weight omega^l per step.

namespace ttg {

using ModeKey = std::pair<long, long>;  // (n, m)

struct PotentialCoeffs {
  int sym_j = -1;
  int sym_ell = -1;
  bool reflection = false;   // conj(u(conj(z))) == u(z)
  std::map<ModeKey, cplx> coeffs;
  std::string name;

  bool empty() const { return coeffs.empty(); }
};

inline ModeKey orbit_next(ModeKey nm, int j) {
  return {-nm.second, nm.first - nm.second + j};
}

// Rectangular plane-wave label of mode (n,m): exp(i(a y1 + b y2)).
inline ModeKey rect_label(ModeKey nm, int j) {
  return {j + 3 * nm.first, j - 3 * nm.second};
}

inline cplx mode_momentum(ModeKey nm, int j) {
  auto [a, b] = rect_label(nm, j);
  return embed(DualIndex{a, b});
}

// Close a seed coefficient set under the rotation orbit relation.
// Conflicting seed values on one orbit raise std::runtime_error naming it.
inline PotentialCoeffs close_symmetry(const std::map<ModeKey, cplx>& seed,
                                      int sym_j, int sym_ell,
                                      bool reflection = false,
                                      const std::string& name = "") {
  PotentialCoeffs pot;
  pot.sym_j = sym_j;
  pot.sym_ell = sym_ell;
  pot.reflection = reflection;
  pot.name = name;
  const cplx step = omega_pow(sym_ell);  // c_next = omega^l * c
  for (const auto& [nm, c] : seed) {
    ModeKey cur = nm;
    cplx val = c;
    for (int hop = 0; hop < 3; ++hop) {
      auto it = pot.coeffs.find(cur);
      if (it != pot.coeffs.end()) {
        if (std::abs(it->second - val) > 1e-12 * (1.0 + std::abs(val))) {
          std::ostringstream os;
          os << "inconsistent seed on orbit of (" << nm.first << "," << nm.second
             << "): coefficient at (" << cur.first << "," << cur.second
             << ") forced to " << val << " but seeded as " << it->second;
          throw std::runtime_error(os.str());
        }
      } else {
        pot.coeffs[cur] = val;
      }
      cur = orbit_next(cur, sym_j);
      val *= step;
    }
  }
  return pot;
}

// Standard potential U0: (j,l)=(-1,-1) closure of c_00 = 1, i.e.
// c_00 = 1, c_10 = omega, c_0(-1) = omega^2.
inline const PotentialCoeffs& standard_potential_U0() {
  static const PotentialCoeffs u0 =
      close_symmetry({{{0, 0}, cplx(1, 0)}}, -1, -1, true, "U0");
  return u0;
}

// Reference AA potential V0: the (j,l)=(-1,0) closure of c_00 = 1, so that
// V(omega z) = V(z) and conj(V(z)) = V(-z) = V(conj z).
inline const PotentialCoeffs& reference_potential_V0() {
  static const PotentialCoeffs v0 =
      close_symmetry({{{0, 0}, cplx(1, 0)}}, -1, 0, true, "V0");
  return v0;
}

// u(scale * z) by direct summation of the finite Fourier series.
inline cplx eval(const PotentialCoeffs& pot, cplx z, long scale = 1) {
  cplx sum = 0;
  for (const auto& [nm, c] : pot.coeffs) {
    cplx k = mode_momentum(nm, pot.sym_j);
    double phase = double(scale) * pairing(z, k);
    sum += c * std::polar(1.0, phase);
  }
  return sum;
}

// Holomorphic derivative (d/dz u)(scale * z).
inline cplx eval_dz(const PotentialCoeffs& pot, cplx z, long scale = 1) {
  cplx sum = 0;
  for (const auto& [nm, c] : pot.coeffs) {
    cplx k = mode_momentum(nm, pot.sym_j);
    double phase = double(scale) * pairing(z, k);
    sum += c * (cplx(0, 0.5) * std::conj(k)) * std::polar(1.0, phase);
  }
  return sum;
}

struct SymmetryReport {
  double translation = 0;
  double rotation = 0;
  double reflection = -1;  // negative when not flagged
  bool pass(double tol) const {
    return translation < tol && rotation < tol &&
           (reflection < 0 || reflection < tol);
  }
};

namespace detail {
// 2D Halton sequence (bases 2 and 3); fixed and reproducible.
inline double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}
}  // namespace detail

// Check translation/rotation/reflection symmetries of u(scale * z) on a
// deterministic low-discrepancy sample of the fundamental cell.
inline SymmetryReport validate_symmetries(const PotentialCoeffs& pot,
                                          long scale = 1, int samples = 64) {
  SymmetryReport rep;
  if (pot.reflection) rep.reflection = 0;
  const CellIndex shifts[] = {{1, 0}, {0, 1}, {1, 1}, {2, -1}};
  for (int s = 1; s <= samples; ++s) {
    RectCoord y{2 * pi * detail::halton(s, 2), 2 * pi * detail::halton(s, 3)};
    cplx z = z_from_rect(y);
    cplx u = eval(pot, z, scale);
    for (const CellIndex& a : shifts) {
      cplx lhs = eval(pot, z + embed(a), scale);
      cplx rhs = omega_pow(long(pot.sym_j) * scale * (a.a1 + a.a2)) * u;
      rep.translation = std::max(rep.translation, std::abs(lhs - rhs));
    }
    cplx rot = eval(pot, omega * z, scale) - omega_pow(-pot.sym_ell) * u;
    rep.rotation = std::max(rep.rotation, std::abs(rot));
    if (pot.reflection) {
      cplx refl = std::conj(eval(pot, std::conj(z), scale)) - u;
      rep.reflection = std::max(rep.reflection, std::abs(refl));
    }
  }
  return rep;
}

// Generalized potential data of the kind used for the generic-simplicity
// class: per-slot Fourier data with individual translation weights.  The
// rotation weight of every slot is the U-type one (u(omega z) = omega u(z)).
struct GeneralizedPotential {
  PotentialCoeffs U_plus, U_minus, Y_plus, Y_minus;           // tunnelling
  std::optional<PotentialCoeffs> W1, W2, W3, X_plus, X_minus;  // extensions

  // Expected translation weights (mod 3), derived from the twist data.
  static GeneralizedPotential from_twist(const TwistConfig& tw) {
    GeneralizedPotential g;
    auto w = [](long long e) { return int(((e % 3) + 3) % 3 == 2 ? -1 : ((e % 3) + 3) % 3); };
    g.U_plus.sym_j = w(-tw.p);
    g.U_minus.sym_j = w(tw.p);
    g.Y_plus.sym_j = w(-tw.p_tilde);
    g.Y_minus.sym_j = w(tw.p_tilde);
    for (PotentialCoeffs* s : {&g.U_plus, &g.U_minus, &g.Y_plus, &g.Y_minus})
      s->sym_ell = -1;
    return g;
  }

  // Max symmetry residual over all populated slots.
  double validate(int samples = 50) const {
    double worst = 0;
    auto check = [&](const PotentialCoeffs& p) {
      if (p.empty()) return;
      SymmetryReport r = validate_symmetries(p, 1, samples);
      worst = std::max({worst, r.translation, r.rotation});
    };
    check(U_plus); check(U_minus); check(Y_plus); check(Y_minus);
    for (const auto& s : {W1, W2, W3, X_plus, X_minus})
      if (s) check(*s);
    return worst;
  }
};

// Potential definition file: line-oriented key/value format.
//   sym_j = -1
//   sym_ell = -1
//   reflection = true
//   coeff = <n> <m> <re> <im>
// The loader closes the seed under the orbit relation and fails on
// conflicting seeds.
inline PotentialCoeffs load_potential_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open potential file: " + path);
  int sym_j = -1, sym_ell = -1;
  bool reflection = false;
  std::map<ModeKey, cplx> seed;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    std::istringstream val(line.substr(eq + 1));
    if (key == "sym_j") val >> sym_j;
    else if (key == "sym_ell") val >> sym_ell;
    else if (key == "reflection") { std::string b; val >> b; reflection = (b == "true" || b == "1"); }
    else if (key == "coeff") {
      long n, m; double re, im;
      if (!(val >> n >> m >> re >> im))
        throw std::runtime_error("malformed coeff line: " + line);
      seed[{n, m}] = cplx(re, im);
    } else if (!key.empty()) {
      throw std::runtime_error("unknown potential file key: " + key);
    }
  }
  return close_symmetry(seed, sym_j, sym_ell, reflection, path);
}

// Resolve a potential argument: builtin name or file path.
inline PotentialCoeffs resolve_potential(const std::string& spec) {
  if (spec == "U0") return standard_potential_U0();
  if (spec == "V0") return reference_potential_V0();
  return load_potential_file(spec);
}

}  // namespace ttg
