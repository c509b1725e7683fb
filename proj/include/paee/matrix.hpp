#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "paee/error.hpp"

namespace paee {

// Dense row-major double matrix. Thin owner over a flat vector; heavy products
// and factorizations are delegated to Eigen maps over the same storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}
  Matrix(size_t rows, size_t cols, std::initializer_list<double> vals)
      : rows_(rows), cols_(cols), d_(vals) {
    if (d_.size() != rows * cols) throw ShapeMismatch("initializer size mismatch");
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  double& operator()(size_t r, size_t c) { return d_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return d_[r * cols_ + c]; }
  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  double* row(size_t r) { return d_.data() + r * cols_; }
  const double* row(size_t r) const { return d_.data() + r * cols_; }

  void fill(double v) { std::fill(d_.begin(), d_.end(), v); }
  void zero() { fill(0.0); }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  Matrix& operator+=(const Matrix& o) {
    check_same(o, "+=");
    for (size_t i = 0; i < d_.size(); ++i) d_[i] += o.d_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same(o, "-=");
    for (size_t i = 0; i < d_.size(); ++i) d_[i] -= o.d_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (auto& v : d_) v *= s;
    return *this;
  }

  using EMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  using CEMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  EMap emap() { return EMap(d_.data(), (Eigen::Index)rows_, (Eigen::Index)cols_); }
  CEMap emap() const { return CEMap(d_.data(), (Eigen::Index)rows_, (Eigen::Index)cols_); }

 private:
  void check_same(const Matrix& o, const char* op) const {
    if (!same_shape(o)) throw ShapeMismatch(std::string("shape mismatch in ") + op);
  }
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

// out = a · b
inline void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw ShapeMismatch("matmul inner dims");
  if (out.rows() != a.rows() || out.cols() != b.cols()) out = Matrix(a.rows(), b.cols());
  out.emap().noalias() = a.emap() * b.emap();
}

// out = aᵀ · b
inline void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw ShapeMismatch("matmul_tn inner dims");
  if (out.rows() != a.cols() || out.cols() != b.cols()) out = Matrix(a.cols(), b.cols());
  out.emap().noalias() = a.emap().transpose() * b.emap();
}

// out = a · bᵀ
inline void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw ShapeMismatch("matmul_nt inner dims");
  if (out.rows() != a.rows() || out.cols() != b.rows()) out = Matrix(a.rows(), b.rows());
  out.emap().noalias() = a.emap() * b.emap().transpose();
}

// out += a · b
inline void matmul_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.rows()) throw ShapeMismatch("matmul_acc inner dims");
  if (out.rows() != a.rows() || out.cols() != b.cols()) throw ShapeMismatch("matmul_acc out shape");
  out.emap().noalias() += a.emap() * b.emap();
}

// out += aᵀ · b
inline void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows() != b.rows()) throw ShapeMismatch("matmul_tn_acc inner dims");
  if (out.rows() != a.cols() || out.cols() != b.cols()) throw ShapeMismatch("matmul_tn_acc out shape");
  out.emap().noalias() += a.emap().transpose() * b.emap();
}

// out += a · bᵀ
inline void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols() != b.cols()) throw ShapeMismatch("matmul_nt_acc inner dims");
  if (out.rows() != a.rows() || out.cols() != b.rows()) throw ShapeMismatch("matmul_nt_acc out shape");
  out.emap().noalias() += a.emap() * b.emap().transpose();
}

// Adds row vector `bias` (1×cols) to every row of m.
inline void add_row_bias(Matrix& m, const Matrix& bias) {
  if (bias.rows() != 1 || bias.cols() != m.cols()) throw ShapeMismatch("bias shape");
  for (size_t r = 0; r < m.rows(); ++r) {
    double* p = m.row(r);
    const double* b = bias.row(0);
    for (size_t c = 0; c < m.cols(); ++c) p[c] += b[c];
  }
}

// bias_grad (1×cols) += column sums of m.
inline void sum_rows_acc(const Matrix& m, Matrix& bias_grad) {
  if (bias_grad.rows() != 1 || bias_grad.cols() != m.cols()) throw ShapeMismatch("bias grad shape");
  double* b = bias_grad.row(0);
  for (size_t r = 0; r < m.rows(); ++r) {
    const double* p = m.row(r);
    for (size_t c = 0; c < m.cols(); ++c) b[c] += p[c];
  }
}

}  // namespace paee
