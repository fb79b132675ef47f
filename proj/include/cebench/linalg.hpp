// SPDX-License-Identifier: Apache-2.0
//
// Small dense complex matrix helpers for antenna-sized problems (n <= 32):
// products, Hermitian eigendecomposition (cyclic Jacobi) and Moore-Penrose
// pseudo-inverse via regular normal equations.

#pragma once

#include <complex>
#include <vector>

namespace cebench {

using cd = std::complex<double>;

struct CMat {
  int rows = 0;
  int cols = 0;
  std::vector<cd> a;  // row-major

  CMat() = default;
  CMat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}

  cd& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const cd& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static CMat identity(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

CMat matmul(const CMat& x, const CMat& y);
CMat adjoint(const CMat& x);  // conjugate transpose

/// True when max |A - A^H| element is below tol.
bool is_hermitian(const CMat& x, double tol);

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
/// On return evecs columns are orthonormal eigenvectors, evals[i] the
/// matching eigenvalue (unsorted). Throws std::invalid_argument when the
/// input is not Hermitian within 1e-9 of its scale.
void eigh(const CMat& x, std::vector<double>& evals, CMat& evecs);

/// Pseudo-inverse (A^H A)^-1 A^H for full-column-rank A. rank_ok is set
/// false (and the returned matrix is zero) when a pivot falls below
/// tol * scale during elimination, signalling rank deficiency.
CMat pinv(const CMat& x, double tol, bool& rank_ok);

}  // namespace cebench
