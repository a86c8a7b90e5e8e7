#ifndef CFSTAB_LINALG_HPP
#define CFSTAB_LINALG_HPP

// Small dense real linear algebra. Sizes of interest are d <= 16 for the
// square operators; Matrix also stores n x d sample blocks (one sample per row).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "cfstab/error.hpp"

namespace cfstab {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : v_(dim, fill) {}
  Vector(std::initializer_list<double> values) : v_(values) {}
  explicit Vector(std::vector<double> values) : v_(std::move(values)) {}
  explicit Vector(std::span<const double> values) : v_(values.begin(), values.end()) {}

  std::size_t size() const noexcept { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  const double* data() const noexcept { return v_.data(); }
  double* data() noexcept { return v_.data(); }
  auto begin() const noexcept { return v_.begin(); }
  auto end() const noexcept { return v_.end(); }
  auto begin() noexcept { return v_.begin(); }
  auto end() noexcept { return v_.end(); }
  std::span<const double> span() const noexcept { return v_; }
  const std::vector<double>& values() const noexcept { return v_; }

  static Vector unit(std::size_t dim, std::size_t k) {
    Vector e(dim);
    e[k] = 1.0;
    return e;
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> v_;
};

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}
inline double norm1(const Vector& v) { return norm1(v.span()); }

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline Vector operator+(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vector operator-(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}
inline Vector operator*(double s, Vector a) {
  for (double& x : a) x *= s;
  return a;
}

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
      : rows_(rows), cols_(cols), a_(std::move(entries)) {
    require(a_.size() == rows_ * cols_, ErrorKind::InvalidArgument, "entry count does not match shape");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) : rows_(rows.size()) {
    cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
    a_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      require(r.size() == cols_, ErrorKind::InvalidArgument, "ragged matrix literal");
      a_.insert(a_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t d) {
    Matrix m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, c); }
  static Matrix diagonal(const Vector& diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return a_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {a_.data() + i * cols_, cols_}; }
  Vector row_vector(std::size_t i) const { return Vector(row(i)); }
  Vector column(std::size_t j) const {
    Vector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  Vector diagonal_entries() const {
    Vector d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
    return d;
  }

  const std::vector<double>& entries() const noexcept { return a_; }
  const double* data() const noexcept { return a_.data(); }
  double* data() noexcept { return a_.data(); }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::InvalidArgument, "shape mismatch in +");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require(rows_ == o.rows_ && cols_ == o.cols_, ErrorKind::InvalidArgument, "shape mismatch in -");
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> a_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), ErrorKind::InvalidArgument, "shape mismatch in matrix product");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline Vector operator*(const Matrix& a, const Vector& v) {
  require(a.cols() == v.size(), ErrorKind::InvalidArgument, "shape mismatch in matrix-vector product");
  Vector r(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

/// Applies `m` to every row of an n x d block: out.row(i) = m * block.row(i).
inline Matrix apply_rows(const Matrix& m, const Matrix& block) {
  require(m.cols() == block.cols(), ErrorKind::InvalidArgument, "shape mismatch in apply_rows");
  Matrix out(block.rows(), m.rows());
  for (std::size_t i = 0; i < block.rows(); ++i) {
    auto x = block.row(i);
    auto y = out.row(i);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * x[c];
      y[r] = s;
    }
  }
  return out;
}

inline double max_abs(const Matrix& m) {
  double r = 0.0;
  for (double x : m.entries()) r = std::max(r, std::abs(x));
  return r;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::InvalidArgument, "shape mismatch");
  double r = 0.0;
  for (std::size_t i = 0; i < a.entries().size(); ++i) r = std::max(r, std::abs(a.entries()[i] - b.entries()[i]));
  return r;
}

inline bool all_finite(const Matrix& m) {
  return std::all_of(m.entries().begin(), m.entries().end(), [](double x) { return std::isfinite(x); });
}

inline constexpr double kPivotThreshold = 1e-12;
inline constexpr double kSymmetryTolerance = 1e-10;

/// Gauss-Jordan elimination with partial pivoting.
inline Matrix invert(const Matrix& m) {
  require(m.is_square(), ErrorKind::InvalidArgument, "invert needs a square matrix");
  const std::size_t d = m.rows();
  Matrix a = m;
  Matrix inv = Matrix::identity(d);
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (!(std::abs(a(piv, col)) > kPivotThreshold)) fail(ErrorKind::SingularMatrix, "pivot below 1e-12 in column " + std::to_string(col));
    if (piv != col)
      for (std::size_t j = 0; j < d; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const double p = a(col, col);
    for (std::size_t j = 0; j < d; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

inline bool is_invertible(const Matrix& m) {
  try {
    invert(m);
    return true;
  } catch (const Error&) {
    return false;
  }
}

inline bool is_symmetric(const Matrix& q, double tol = kSymmetryTolerance) {
  if (!q.is_square()) return false;
  const double scale = std::max(1.0, max_abs(q));
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = i + 1; j < q.cols(); ++j)
      if (std::abs(q(i, j) - q(j, i)) > tol * scale) return false;
  return true;
}

struct SymEigen {
  Vector eigenvalues;  // descending
  Matrix eigenvectors; // orthonormal columns, column k pairs with eigenvalues[k]
};

inline constexpr int kJacobiMaxSweeps = 100;

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
inline SymEigen sym_eigen(const Matrix& q) {
  require(q.is_square(), ErrorKind::InvalidArgument, "sym_eigen needs a square matrix");
  if (!is_symmetric(q)) fail(ErrorKind::NotSymmetric, "matrix is not symmetric within 1e-10");
  const std::size_t d = q.rows();
  Matrix a = q;
  // use the exact symmetric part
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) a(i, j) = a(j, i) = 0.5 * (q(i, j) + q(j, i));
  Matrix v = Matrix::identity(d);

  auto off_diagonal = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) s += a(i, j) * a(i, j);
    return s;
  };
  double total = 0.0;
  for (double x : a.entries()) total += x * x;

  bool converged = d < 2;
  for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
    if (off_diagonal() <= 1e-30 * total) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p + 1 < d; ++p)
      for (std::size_t r = p + 1; r < d; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a(k, p), akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a(p, k), ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v(k, p), vkr = v(k, r);
          v(k, p) = c * vkp - s * vkr;
          v(k, r) = s * vkp + c * vkr;
        }
      }
  }
  if (!converged && off_diagonal() > 1e-30 * total)
    fail(ErrorKind::NoConvergence, "Jacobi did not converge in " + std::to_string(kJacobiMaxSweeps) + " sweeps");

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymEigen out{Vector(d), Matrix(d, d)};
  for (std::size_t k = 0; k < d; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < d; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

inline Matrix reconstruct(const SymEigen& e, const Vector& mapped) {
  const std::size_t d = mapped.size();
  Matrix r(d, d);
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < d; ++i) {
      const double vik = e.eigenvectors(i, k) * mapped[k];
      if (vik == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) r(i, j) += vik * e.eigenvectors(j, k);
    }
  return r;
}

inline constexpr double kMinEigenvalue = 1e-12;

/// q^alpha = V diag(lambda^alpha) V^T. Negative or fractional powers need q positive definite.
inline Matrix sym_power(const Matrix& q, double alpha) {
  const SymEigen e = sym_eigen(q);
  const bool integral = alpha == std::floor(alpha);
  const bool needs_pd = alpha < 0.0 || !integral;
  if (needs_pd && !(e.eigenvalues[e.eigenvalues.size() - 1] > kMinEigenvalue))
    fail(ErrorKind::NotPositiveDefinite, "minimum eigenvalue not above 1e-12");
  Vector mapped(e.eigenvalues.size());
  for (std::size_t k = 0; k < mapped.size(); ++k) mapped[k] = std::pow(e.eigenvalues[k], alpha);
  return reconstruct(e, mapped);
}

/// max over columns of the column 1-norm (the norm induced by the vector 1-norm).
inline double induced_norm_1(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline bool is_orthogonal(const Matrix& v, double tol) {
  require(v.is_square(), ErrorKind::InvalidArgument, "is_orthogonal needs a square matrix");
  return max_abs_diff(v.transpose() * v, Matrix::identity(v.rows())) <= tol;
}

inline constexpr double kScaledPermutationTolerance = 1e-9;

/// True when every row and every column holds exactly one entry with |entry| > tol (M = D P).
inline bool is_scaled_permutation(const Matrix& m, double tol = kScaledPermutationTolerance) {
  require(m.is_square(), ErrorKind::InvalidArgument, "is_scaled_permutation needs a square matrix");
  const std::size_t d = m.rows();
  std::vector<int> per_col(d, 0);
  for (std::size_t i = 0; i < d; ++i) {
    int per_row = 0;
    for (std::size_t j = 0; j < d; ++j)
      if (std::abs(m(i, j)) > tol) {
        ++per_row;
        ++per_col[j];
      }
    if (per_row != 1) return false;
  }
  return std::all_of(per_col.begin(), per_col.end(), [](int c) { return c == 1; });
}

}  // namespace cfstab

#endif  // CFSTAB_LINALG_HPP
