#pragma once

// Small dense complex linear algebra: just enough for K x n_T channel
// matrices with K <= n_T and the row-wise LQ factorization H = R Q used
// by the precoder (R lower triangular with positive real diagonal, Q
// with orthonormal rows).

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>
#include <cmath>

namespace thp {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

/// Thrown when a channel (or quantized channel) matrix is numerically
/// rank deficient and no triangular factorization exists.
class DegenerateChannelError : public std::runtime_error {
 public:
  explicit DegenerateChannelError(const std::string& what)
      : std::runtime_error(what) {}
};

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<cplx> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const cplx> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  void set_row(std::size_t i, std::span<const cplx> v) {
    for (std::size_t j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
  }

  bool operator==(const CMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// <a, b> = sum_i a_i conj(b_i)  (row-vector inner product a b^H)
inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

inline double norm(std::span<const cplx> a) {
  double s = 0.0;
  for (const cplx& v : a) s += std::norm(v);
  return std::sqrt(s);
}

inline double frobenius_norm(const CMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::norm(m(i, j));
  return std::sqrt(s);
}

inline CMatrix matmul(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  CMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// y = A x  (A: m x n, x: n)
inline CVector matvec(const CMatrix& a, std::span<const cplx> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec: shape mismatch");
  CVector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

inline CMatrix conj_transpose(const CMatrix& a) {
  CMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = std::conj(a(i, j));
  return t;
}

/// Gaussian elimination with partial pivoting. Square inputs only; used
/// for the K x K Gram matrix in the ZF baseline, never on anything large.
inline CMatrix inverse(const CMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("inverse: not square");
  const std::size_t n = a.rows();
  CMatrix w = a;
  CMatrix inv = CMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(w(i, col)) > std::abs(w(piv, col))) piv = i;
    if (std::abs(w(piv, col)) < 1e-13)
      throw DegenerateChannelError("inverse: singular matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(w(piv, j), w(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    }
    const cplx d = w(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      w(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const cplx f = w(i, col);
      if (f == cplx(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        w(i, j) -= f * w(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

/// H = R Q with R (K x K) lower triangular, positive real diagonal, and
/// Q (K x n_T) with orthonormal rows. The positive-diagonal convention
/// makes the factorization unique for full-row-rank H.
struct LQFactors {
  CMatrix R;  // K x K lower triangular
  CMatrix Q;  // K x n_T semi-unitary (Q Q^H = I)
};

inline LQFactors lq_decompose(const CMatrix& h) {
  const std::size_t k = h.rows();
  const std::size_t nt = h.cols();
  if (k > nt) throw std::invalid_argument("lq_decompose: requires K <= n_T");
  const double scale = frobenius_norm(h);
  const double tol = 1e-10 * (scale > 0 ? scale : 1.0);

  LQFactors f{CMatrix(k, k), CMatrix(k, nt)};
  CVector u(nt);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < nt; ++j) u[j] = h(i, j);
    // Modified Gram-Schmidt with one reorthogonalization pass.
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t l = 0; l < i; ++l) {
        const cplx c = inner(u, f.Q.row(l));
        f.R(i, l) += c;
        for (std::size_t j = 0; j < nt; ++j) u[j] -= c * f.Q(l, j);
      }
    }
    const double d = norm(u);
    if (d < tol)
      throw DegenerateChannelError("lq_decompose: rank-deficient row " +
                                   std::to_string(i));
    f.R(i, i) = d;
    for (std::size_t j = 0; j < nt; ++j) f.Q(i, j) = u[j] / d;
  }
  return f;
}

}  // namespace thp
