#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ttg/lattice.hpp"

// Finite Fourier bases in rectangular coordinates.  A mode is a pair
// (m, n) in Z^2 labelling the plane wave exp(i(m y1 + n y2)); matrices act
// on coefficient vectors indexed by (component, mode) with a deterministic
// row-major mode order.

namespace ttg {

using RectMode = std::pair<long, long>;  // (m, n)

inline int mod3i(long x) {
  long r = x % 3;
  return int(r < 0 ? r + 3 : r);
}

struct Truncation {
  int N = 16;  // box radius: |m| <= N, |n| <= N
};

// Mode list for one vector component, optionally restricted to a residue
// class (m mod 3, n mod 3).
struct ComponentBasis {
  std::vector<RectMode> modes;
  std::optional<std::pair<int, int>> residue;
  std::map<RectMode, int> index;

  static ComponentBasis box(int N, std::optional<std::pair<int, int>> residue = {},
                            bool sigma_closed = false) {
    ComponentBasis b;
    b.residue = residue;
    for (long m = -N; m <= N; ++m)
      for (long n = -N; n <= N; ++n) {
        if (residue && (mod3i(m) != residue->first || mod3i(n) != residue->second))
          continue;
        if (sigma_closed) {
          auto orbit = sigma_orbit(m, n);
          bool inside = true;
          for (auto d : orbit)
            inside &= std::abs(d.k1) <= N && std::abs(d.k2) <= N;
          if (!inside) continue;
        }
        b.modes.emplace_back(m, n);
      }
    for (int i = 0; i < int(b.modes.size()); ++i) b.index[b.modes[i]] = i;
    return b;
  }

  int find(RectMode mode) const {
    auto it = index.find(mode);
    return it == index.end() ? -1 : it->second;
  }
  int size() const { return int(modes.size()); }
};

// Multi-component basis; component c occupies rows [offset(c), offset(c)+size(c)).
struct Basis {
  std::vector<ComponentBasis> comps;
  std::vector<int> offsets;
  int dim = 0;

  explicit Basis(std::vector<ComponentBasis> parts) : comps(std::move(parts)) {
    offsets.resize(comps.size());
    for (size_t c = 0; c < comps.size(); ++c) {
      offsets[c] = dim;
      dim += comps[c].size();
    }
  }

  int components() const { return int(comps.size()); }
  int offset(int c) const { return offsets[c]; }
  int index(int c, RectMode mode) const {
    int i = comps[c].find(mode);
    return i < 0 ? -1 : offsets[c] + i;
  }
};

// Full box basis with `components` identical unrestricted components.
inline Basis full_basis(int N, int components) {
  std::vector<ComponentBasis> parts;
  for (int c = 0; c < components; ++c) parts.push_back(ComponentBasis::box(N));
  return Basis(std::move(parts));
}

// Translation-sector basis for D(alpha): the sector with
// L_a u = omega^{r(a1+a2)} u has per-layer residue classes
// (r-p, r-p), (r, r), (r+q, r+q) mod 3.
inline Basis sector_basis(const TwistConfig& tw, long r, int N,
                          bool sigma_closed = false) {
  int c1 = mod3i(r - tw.p), c2 = mod3i(r), c3 = mod3i(r + tw.q);
  std::vector<ComponentBasis> parts;
  parts.push_back(ComponentBasis::box(N, {{c1, c1}}, sigma_closed));
  parts.push_back(ComponentBasis::box(N, {{c2, c2}}, sigma_closed));
  parts.push_back(ComponentBasis::box(N, {{c3, c3}}, sigma_closed));
  return Basis(std::move(parts));
}

// Scalar residue basis for the Birman-Schwinger operator: modes with
// (m, n) = (1, 1) mod 3 (the space identified with L^2_i in the paper).
inline Basis scalar_residue_basis(int N, int c1 = 1, int c2 = 1) {
  std::vector<ComponentBasis> parts;
  parts.push_back(ComponentBasis::box(N, {{c1, c2}}));
  return Basis(std::move(parts));
}

// Domain/codomain bases of the anti-chiral operator D_ac in sector r:
// domain components carry classes (r, r-p, r+q), codomain (r-p, r, r+q).
inline Basis antichiral_domain_basis(const TwistConfig& tw, long r, int N) {
  int d1 = mod3i(r), d2 = mod3i(r - tw.p), d3 = mod3i(r + tw.q);
  std::vector<ComponentBasis> parts;
  parts.push_back(ComponentBasis::box(N, {{d1, d1}}));
  parts.push_back(ComponentBasis::box(N, {{d2, d2}}));
  parts.push_back(ComponentBasis::box(N, {{d3, d3}}));
  return Basis(std::move(parts));
}

inline Basis antichiral_codomain_basis(const TwistConfig& tw, long r, int N) {
  int d1 = mod3i(r - tw.p), d2 = mod3i(r), d3 = mod3i(r + tw.q);
  std::vector<ComponentBasis> parts;
  parts.push_back(ComponentBasis::box(N, {{d1, d1}}));
  parts.push_back(ComponentBasis::box(N, {{d2, d2}}));
  parts.push_back(ComponentBasis::box(N, {{d3, d3}}));
  return Basis(std::move(parts));
}

}  // namespace ttg
