// SPDX-License-Identifier: Apache-2.0

#include "cebench/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace cebench {

CMat matmul(const CMat& x, const CMat& y) {
  if (x.cols != y.rows) throw std::invalid_argument("matmul: shape mismatch");
  CMat out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int k = 0; k < x.cols; ++k) {
      const cd v = x.at(i, k);
      if (v == cd{}) continue;
      for (int j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(k, j);
    }
  }
  return out;
}

CMat adjoint(const CMat& x) {
  CMat out(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) out.at(j, i) = std::conj(x.at(i, j));
  return out;
}

bool is_hermitian(const CMat& x, double tol) {
  if (x.rows != x.cols) return false;
  for (int i = 0; i < x.rows; ++i)
    for (int j = i; j < x.cols; ++j)
      if (std::abs(x.at(i, j) - std::conj(x.at(j, i))) > tol) return false;
  return true;
}

namespace {

double offdiag_norm(const CMat& m) {
  double s = 0.0;
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j)
      if (i != j) s += std::norm(m.at(i, j));
  return std::sqrt(s);
}

}  // namespace

void eigh(const CMat& x, std::vector<double>& evals, CMat& evecs) {
  const int n = x.rows;
  if (n != x.cols) throw std::invalid_argument("eigh: matrix not square");
  double scale = 0.0;
  for (const cd& v : x.a) scale = std::max(scale, std::abs(v));
  if (!is_hermitian(x, 1e-9 * std::max(scale, 1.0)))
    throw std::invalid_argument("eigh: matrix not Hermitian");

  CMat a = x;
  evecs = CMat::identity(n);
  const double tol = 1e-14 * std::max(scale, 1e-300) * n;

  for (int sweep = 0; sweep < 100 && offdiag_norm(a) > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cd apq = a.at(p, q);
        const double b = std::abs(apq);
        if (b <= tol) continue;
        // Phase the (p,q) block to a real symmetric 2x2, then apply the
        // classic Jacobi rotation. Net unitary: J[p][p]=c*u, J[p][q]=s*u,
        // J[q][p]=-s, J[q][q]=c with u = apq/|apq|.
        const cd u = apq / b;
        const double app = a.at(p, p).real();
        const double aqq = a.at(q, q).real();
        const double tau = (aqq - app) / (2.0 * b);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const cd jpp = c * u, jpq = s * u;
        const double jqp = -s, jqq = c;
        // rows: a <- J^H a
        for (int k = 0; k < n; ++k) {
          const cd rp = a.at(p, k), rq = a.at(q, k);
          a.at(p, k) = std::conj(jpp) * rp + jqp * rq;
          a.at(q, k) = std::conj(jpq) * rp + jqq * rq;
        }
        // cols: a <- a J, and accumulate evecs <- evecs J
        for (int k = 0; k < n; ++k) {
          const cd cp = a.at(k, p), cq = a.at(k, q);
          a.at(k, p) = cp * jpp + cq * jqp;
          a.at(k, q) = cp * jpq + cq * jqq;
          const cd vp = evecs.at(k, p), vq = evecs.at(k, q);
          evecs.at(k, p) = vp * jpp + vq * jqp;
          evecs.at(k, q) = vp * jpq + vq * jqq;
        }
      }
    }
  }

  evals.assign(n, 0.0);
  for (int i = 0; i < n; ++i) evals[i] = a.at(i, i).real();
}

CMat pinv(const CMat& x, double tol, bool& rank_ok) {
  const int m = x.rows, n = x.cols;
  rank_ok = true;
  const CMat xh = adjoint(x);
  CMat g = matmul(xh, x);  // n x n, Hermitian PSD

  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(g.at(i, i)));
  const double pivot_floor = tol * std::max(scale, 1e-300);

  // Gauss-Jordan inverse of g with partial pivoting.
  CMat inv = CMat::identity(n);
  CMat w = g;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(w.at(col, col));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(w.at(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < pivot_floor) {
      rank_ok = false;
      return CMat(n, m);
    }
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(w.at(piv, j), w.at(col, j));
        std::swap(inv.at(piv, j), inv.at(col, j));
      }
    }
    const cd d = w.at(col, col);
    for (int j = 0; j < n; ++j) {
      w.at(col, j) /= d;
      inv.at(col, j) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const cd f = w.at(r, col);
      if (f == cd{}) continue;
      for (int j = 0; j < n; ++j) {
        w.at(r, j) -= f * w.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return matmul(inv, xh);
}

}  // namespace cebench
