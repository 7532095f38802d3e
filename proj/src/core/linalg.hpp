#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mtg {

// Dense row-major double matrix. Sized for task-embedding work (hundreds of
// rows), not for large numerics.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : r_(rows), c_(cols), a_(size_t(rows) * size_t(cols), fill) {}

  int rows() const { return r_; }
  int cols() const { return c_; }
  double& at(int i, int j) { return a_[size_t(i) * size_t(c_) + size_t(j)]; }
  double at(int i, int j) const { return a_[size_t(i) * size_t(c_) + size_t(j)]; }
  double* row(int i) { return a_.data() + size_t(i) * size_t(c_); }
  const double* row(int i) const { return a_.data() + size_t(i) * size_t(c_); }
  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  Matrix transposed() const;

 private:
  int r_ = 0, c_ = 0;
  std::vector<double> a_;
};

Matrix matmul(const Matrix& a, const Matrix& b);

double squared_distance(const double* a, const double* b, int n);
double dot(const double* a, const double* b, int n);
double norm2(const double* a, int n);

// Eigendecomposition of a symmetric matrix by the cyclic Jacobi method.
// Eigenpairs come back sorted by ascending eigenvalue; eigenvectors are the
// columns of `vectors`.
struct EigenSym {
  std::vector<double> values;
  Matrix vectors;
};

EigenSym jacobi_eigen_sym(const Matrix& a, int max_sweeps = 100, double tol = 1e-14);

}  // namespace mtg
