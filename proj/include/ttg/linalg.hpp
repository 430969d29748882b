#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <vector>

#include "ttg/lattice.hpp"

namespace ttg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Singular values in ascending order, computed from the normal matrix.
// Adequate down to sigma ~ 1e-8 * ||A||, which covers every tolerance used
// in this project.
inline std::vector<double> singular_values(const Matrix& A) {
  Matrix gram = A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  std::vector<double> sv(es.eigenvalues().size());
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    sv[i] = std::sqrt(std::max(0.0, es.eigenvalues()[i]));
  return sv;  // ascending
}

inline double smallest_singular_value(const Matrix& A) {
  return singular_values(A).front();
}

struct SingularPair {
  double sigma;
  Vector right;  // unit right-singular vector
};

// The `count` smallest singular pairs (ascending).
inline std::vector<SingularPair> smallest_singular_pairs(const Matrix& A,
                                                         int count) {
  Matrix gram = A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  std::vector<SingularPair> out;
  for (int i = 0; i < count && i < es.eigenvalues().size(); ++i) {
    SingularPair p;
    p.sigma = std::sqrt(std::max(0.0, es.eigenvalues()[i]));
    p.right = es.eigenvectors().col(i);
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<cplx> eigenvalues(const Matrix& A) {
  Eigen::ComplexEigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("complex eigensolver failed to converge");
  std::vector<cplx> ev(es.eigenvalues().size());
  for (int i = 0; i < es.eigenvalues().size(); ++i) ev[i] = es.eigenvalues()[i];
  return ev;
}

inline std::vector<double> hermitian_eigenvalues(const Matrix& A) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().size());
  for (int i = 0; i < es.eigenvalues().size(); ++i) ev[i] = es.eigenvalues()[i];
  return ev;
}

// Fix the phase of a vector: largest-magnitude entry made real positive.
inline Vector phase_fixed(const Vector& v) {
  int imax = 0;
  double best = -1;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best) { best = std::abs(v[i]); imax = i; }
  if (best <= 0) return v;
  cplx u = v[imax] / std::abs(v[imax]);
  return v / u;
}

}  // namespace ttg
