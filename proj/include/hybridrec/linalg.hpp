// Small dense linear algebra used by the LSA baseline: column
// orthonormalization and a cyclic Jacobi eigensolver for symmetric
// matrices. Desk-scale sizes only.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace hybridrec {

struct MatrixD {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major

  MatrixD() = default;
  MatrixD(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Modified Gram-Schmidt, in place. Columns with norm below `eps` are
// zeroed rather than normalized.
inline void orthonormalize_columns(MatrixD& m, double eps = 1e-12) {
  for (std::size_t j = 0; j < m.cols; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      double proj = 0.0;
      for (std::size_t i = 0; i < m.rows; ++i)
        proj += m.at(i, k) * m.at(i, j);
      for (std::size_t i = 0; i < m.rows; ++i)
        m.at(i, j) -= proj * m.at(i, k);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i)
      norm += m.at(i, j) * m.at(i, j);
    norm = std::sqrt(norm);
    if (norm < eps) {
      for (std::size_t i = 0; i < m.rows; ++i) m.at(i, j) = 0.0;
    } else {
      for (std::size_t i = 0; i < m.rows; ++i) m.at(i, j) /= norm;
    }
  }
}

struct SymmetricEigen {
  std::vector<double> values;  // descending
  MatrixD vectors;             // column k = eigenvector of values[k]
};

// Cyclic Jacobi rotations on a symmetric matrix. Converges to machine
// precision for the small Gram matrices this is used on.
inline SymmetricEigen symmetric_eigen(MatrixD a, int max_sweeps = 64,
                                      double tol = 1e-14) {
  const std::size_t n = a.rows;
  MatrixD v(n, n);
  for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += a.at(i, i) * a.at(i, i);
    if (off <= tol * tol * (diag + 1e-300)) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a.at(i, p);
          const double aiq = a.at(i, q);
          a.at(i, p) = c * aip - s * aiq;
          a.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a.at(p, j);
          const double aqj = a.at(q, j);
          a.at(p, j) = c * apj - s * aqj;
          a.at(q, j) = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v.at(i, p);
          const double viq = v.at(i, q);
          v.at(i, p) = c * vip - s * viq;
          v.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a.at(i, i);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return out.values[x] > out.values[y];
  });
  SymmetricEigen sorted;
  sorted.values.resize(n);
  sorted.vectors = MatrixD(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted.values[k] = out.values[order[k]];
    for (std::size_t i = 0; i < n; ++i)
      sorted.vectors.at(i, k) = v.at(i, order[k]);
  }
  return sorted;
}

}  // namespace hybridrec
