#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"

namespace mtg {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(int(rows.size()), int(rows[0].size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      fail(Errc::shape_mismatch, "ragged rows: row 0 has " + std::to_string(rows[0].size()) +
                                     " entries, row " + std::to_string(i) + " has " +
                                     std::to_string(rows[i].size()));
    std::copy(rows[i].begin(), rows[i].end(), m.row(int(i)));
  }
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(c_, r_);
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < c_; ++j) t.at(j, i) = at(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    fail(Errc::shape_mismatch, "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                   " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* br = b.row(k);
      double* cr = c.row(i);
      for (int j = 0; j < b.cols(); ++j) cr[j] += aik * br[j];
    }
  }
  return c;
}

double squared_distance(const double* a, const double* b, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double dot(const double* a, const double* b, int n) {
  double s = 0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double norm2(const double* a, int n) { return std::sqrt(dot(a, a, n)); }

EigenSym jacobi_eigen_sym(const Matrix& a, int max_sweeps, double tol) {
  if (a.rows() != a.cols())
    fail(Errc::shape_mismatch,
         "eigendecomposition needs a square matrix, got " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()));
  int n = a.rows();
  Matrix m = a;
  Matrix v(n, n);
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

  // scale-aware convergence threshold
  double frob = 0;
  for (double x : m.data()) frob += x * x;
  double stop = tol * (std::sqrt(frob) + 1e-300);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * m.at(p, q) * m.at(p, q);
    if (std::sqrt(off) <= stop) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = m.at(p, q);
        if (apq == 0.0) continue;
        double app = m.at(p, p), aqq = m.at(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        // smaller-magnitude root keeps rotations stable
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (int k = 0; k < n; ++k) {
          double mkp = m.at(k, p), mkq = m.at(k, q);
          m.at(k, p) = c * mkp - s * mkq;
          m.at(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = m.at(p, k), mqk = m.at(q, k);
          m.at(p, k) = c * mpk - s * mqk;
          m.at(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = v.at(k, p), vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(size_t(n), 0);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(size_t(n), 0.0);
  for (int i = 0; i < n; ++i) diag[size_t(i)] = m.at(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return diag[size_t(x)] < diag[size_t(y)]; });

  EigenSym out;
  out.values.resize(size_t(n));
  out.vectors = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[size_t(j)] = diag[size_t(order[size_t(j)])];
    for (int i = 0; i < n; ++i) out.vectors.at(i, j) = v.at(i, order[size_t(j)]);
  }
  return out;
}

}  // namespace mtg
