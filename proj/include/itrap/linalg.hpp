#pragma once

// Small dense linear algebra: row-major matrix, column-pivoted Householder
// QR least squares, one-sided Jacobi SVD and a symmetric Jacobi eigensolver.
// Sizes here are a few hundred rows by a few tens of columns at most.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace itrap::linalg {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Copy of the listed columns, in order.
  Matrix select_columns(std::span<const std::size_t> idx) const {
    Matrix s(rows_, idx.size());
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < idx.size(); ++k) s(i, k) = (*this)(i, idx[k]);
    return s;
  }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline Vector matvec(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

/// y = A^T x
inline Vector matvec_t(const Matrix& a, std::span<const double> x) {
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

inline Matrix gram(const Matrix& a) {
  Matrix g(a.cols(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = j; k < a.cols(); ++k) g(j, k) += r[j] * r[k];
  }
  for (std::size_t j = 0; j < a.cols(); ++j)
    for (std::size_t k = 0; k < j; ++k) g(j, k) = g(k, j);
  return g;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) {
  // Scaled to avoid overflow for large physical entries.
  double scale = 0.0, ssq = 1.0;
  for (double v : a) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

inline double frobenius(const Matrix& a) { return norm2(a.data()); }

/// Column-pivoted Householder QR of an m x n matrix, A P = Q R.
class PivotedQR {
 public:
  explicit PivotedQR(Matrix a, double rank_tol = -1.0) : qr_(std::move(a)) {
    const std::size_t m = qr_.rows(), n = qr_.cols();
    const std::size_t kmax = std::min(m, n);
    tau_.assign(kmax, 0.0);
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    Vector cn(n);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += qr_(i, j) * qr_(i, j);
      cn[j] = s;
    }
    for (std::size_t k = 0; k < kmax; ++k) {
      // Recompute remaining norms exactly; the matrices are small.
      std::size_t best = k;
      double bestn = -1.0;
      for (std::size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += qr_(i, j) * qr_(i, j);
        cn[j] = s;
        if (s > bestn) {
          bestn = s;
          best = j;
        }
      }
      if (best != k) {
        for (std::size_t i = 0; i < m; ++i) std::swap(qr_(i, k), qr_(i, best));
        std::swap(perm_[k], perm_[best]);
        std::swap(cn[k], cn[best]);
      }
      const double alpha = std::sqrt(std::max(bestn, 0.0));
      if (alpha == 0.0) {
        tau_[k] = 0.0;
        continue;
      }
      const double beta = qr_(k, k) > 0 ? -alpha : alpha;
      // v = x - beta e1, stored below the diagonal with v_k = 1.
      const double v0 = qr_(k, k) - beta;
      for (std::size_t i = k + 1; i < m; ++i) qr_(i, k) /= v0;
      tau_[k] = (beta - qr_(k, k)) / beta;
      qr_(k, k) = beta;
      for (std::size_t j = k + 1; j < n; ++j) {
        double s = qr_(k, j);
        for (std::size_t i = k + 1; i < m; ++i) s += qr_(i, k) * qr_(i, j);
        s *= tau_[k];
        qr_(k, j) -= s;
        for (std::size_t i = k + 1; i < m; ++i) qr_(i, j) -= s * qr_(i, k);
      }
    }
    const double r00 = kmax > 0 ? std::abs(qr_(0, 0)) : 0.0;
    const double tol = rank_tol >= 0 ? rank_tol
                                     : r00 * static_cast<double>(std::max(m, n)) *
                                           std::numeric_limits<double>::epsilon();
    rank_ = 0;
    for (std::size_t k = 0; k < kmax; ++k) {
      if (std::abs(qr_(k, k)) > tol && r00 > 0) ++rank_;
      else break;
    }
  }

  std::size_t rank() const { return rank_; }
  std::span<const std::size_t> permutation() const { return perm_; }

  /// Apply Q^T to a vector of length m.
  Vector apply_qt(std::span<const double> b) const {
    Vector y(b.begin(), b.end());
    const std::size_t m = qr_.rows();
    for (std::size_t k = 0; k < tau_.size(); ++k) {
      if (tau_[k] == 0.0) continue;
      double s = y[k];
      for (std::size_t i = k + 1; i < m; ++i) s += qr_(i, k) * y[i];
      s *= tau_[k];
      y[k] -= s;
      for (std::size_t i = k + 1; i < m; ++i) y[i] -= s * qr_(i, k);
    }
    return y;
  }

  /// Basic least-squares solution: columns beyond the numerical rank are
  /// set to zero, so collinear columns never cause a division by a tiny pivot.
  Vector solve(std::span<const double> b) const {
    const std::size_t n = qr_.cols();
    Vector y = apply_qt(b);
    Vector z(n, 0.0);
    for (std::size_t kk = rank_; kk-- > 0;) {
      double s = y[kk];
      for (std::size_t j = kk + 1; j < rank_; ++j) s -= qr_(kk, j) * z[j];
      z[kk] = s / qr_(kk, kk);
    }
    Vector x(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) x[perm_[j]] = z[j];
    return x;
  }

 private:
  Matrix qr_;
  Vector tau_;
  std::vector<std::size_t> perm_;
  std::size_t rank_ = 0;
};

inline Vector lstsq(const Matrix& a, std::span<const double> b) {
  if (a.cols() == 0) return {};
  return PivotedQR(a).solve(b);
}

/// Singular values (descending) by one-sided Jacobi rotations.
inline Vector singular_values(const Matrix& a_in) {
  // Work on the orientation with fewer columns.
  Matrix a = a_in.rows() >= a_in.cols() ? a_in : a_in.transpose();
  const std::size_t m = a.rows(), n = a.cols();
  // Column-major copy for cache-friendly column rotations.
  std::vector<Vector> col(n, Vector(m));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) col[j][i] = a(i, j);
  const double eps = std::numeric_limits<double>::epsilon();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = dot(col[p], col[p]);
        const double beta = dot(col[q], col[q]);
        const double gamma = dot(col[p], col[q]);
        if (gamma == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        off = std::max(off, rel);
        if (rel < eps) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double u = col[p][i], v = col[q][i];
          col[p][i] = cs * u - sn * v;
          col[q][i] = sn * u + cs * v;
        }
      }
    }
    if (off < eps * static_cast<double>(m)) break;
  }
  Vector s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = norm2(col[j]);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues; eigenvectors are stored column-wise in `vecs`.
inline Vector symmetric_eigen(Matrix s, Matrix& vecs) {
  const std::size_t n = s.rows();
  vecs = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += s(i, i) * s(i, i);
      for (std::size_t j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
    }
    if (off <= 1e-32 * diag || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (s(p, q) == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s(k, p), skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s(p, k), sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vecs(k, p), vkq = vecs(k, q);
          vecs(k, p) = c * vkp - sn * vkq;
          vecs(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
  return ev;
}

}  // namespace itrap::linalg
