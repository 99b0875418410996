#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qnforce/errors.hpp"

namespace qnforce {

// Dense column-ordered-by-row complex matrix, sized at runtime.  Small
// systems only (the frequency-domain solves are 6x6); no attempt at blocking.
template <typename Real>
struct ComplexMatrix {
  using Scalar = std::complex<Real>;

  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Scalar> a;  // row-major

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c) {}

  Scalar& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const Scalar& operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = Scalar(1);
    return m;
  }
};

template <typename Real>
ComplexMatrix<Real> operator*(const ComplexMatrix<Real>& lhs,
                              const ComplexMatrix<Real>& rhs) {
  ComplexMatrix<Real> out(lhs.rows, rhs.cols);
  for (std::size_t i = 0; i < lhs.rows; ++i)
    for (std::size_t k = 0; k < lhs.cols; ++k) {
      const auto v = lhs(i, k);
      if (v == std::complex<Real>(0)) continue;
      for (std::size_t j = 0; j < rhs.cols; ++j) out(i, j) += v * rhs(k, j);
    }
  return out;
}

// Maximum absolute row sum.
template <typename Real>
Real inf_norm(const ComplexMatrix<Real>& m) {
  Real best = 0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    Real s = 0;
    for (std::size_t j = 0; j < m.cols; ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

// Maximum absolute column sum.
template <typename Real>
Real one_norm(const ComplexMatrix<Real>& m) {
  Real best = 0;
  for (std::size_t j = 0; j < m.cols; ++j) {
    Real s = 0;
    for (std::size_t i = 0; i < m.rows; ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

// LU factorization with partial pivoting, kept in place.
template <typename Real>
struct LuFactors {
  ComplexMatrix<Real> lu;
  std::vector<std::size_t> perm;
  Real min_pivot = 0;
  Real max_pivot = 0;
};

template <typename Real>
LuFactors<Real> lu_factor(ComplexMatrix<Real> m) {
  if (m.rows != m.cols) throw DomainError("lu_factor: matrix must be square");
  const std::size_t n = m.rows;
  LuFactors<Real> f{std::move(m), std::vector<std::size_t>(n), 0, 0};
  for (std::size_t i = 0; i < n; ++i) f.perm[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    Real best = std::abs(f.lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const Real v = std::abs(f.lu(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (!(best > Real(0)) || !std::isfinite(static_cast<double>(best)))
      throw SingularMatrixError("matrix singular to working precision",
                                static_cast<double>(best));
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(f.lu(k, j), f.lu(piv, j));
      std::swap(f.perm[k], f.perm[piv]);
    }
    f.min_pivot = (k == 0) ? best : std::min(f.min_pivot, best);
    f.max_pivot = std::max(f.max_pivot, best);
    const auto d = f.lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const auto l = f.lu(i, k) / d;
      f.lu(i, k) = l;
      if (l == std::complex<Real>(0)) continue;
      for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= l * f.lu(k, j);
    }
  }
  return f;
}

template <typename Real>
ComplexMatrix<Real> lu_solve(const LuFactors<Real>& f,
                             const ComplexMatrix<Real>& b) {
  const std::size_t n = f.lu.rows;
  if (b.rows != n) throw DomainError("lu_solve: dimension mismatch");
  ComplexMatrix<Real> x(n, b.cols);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) x(i, j) = b(f.perm[i], j);
  // forward substitution (unit lower triangle)
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = k + 1; i < n; ++i) {
      const auto l = f.lu(i, k);
      if (l == std::complex<Real>(0)) continue;
      for (std::size_t j = 0; j < b.cols; ++j) x(i, j) -= l * x(k, j);
    }
  // back substitution
  for (std::size_t k = n; k-- > 0;) {
    const auto d = f.lu(k, k);
    for (std::size_t j = 0; j < b.cols; ++j) x(k, j) /= d;
    for (std::size_t i = 0; i < k; ++i) {
      const auto u = f.lu(i, k);
      if (u == std::complex<Real>(0)) continue;
      for (std::size_t j = 0; j < b.cols; ++j) x(i, j) -= u * x(k, j);
    }
  }
  return x;
}

template <typename Real>
struct SolveResult {
  ComplexMatrix<Real> x;
  double condition = 0;  // 1-norm condition estimate of the coefficient matrix
};

// Solve M X = B by LU with partial pivoting.  The condition number is the
// exact 1-norm condition computed from the inverse; systems here are tiny so
// the extra solve is cheap.
template <typename Real>
SolveResult<Real> complex_solve(const ComplexMatrix<Real>& m,
                                const ComplexMatrix<Real>& b) {
  const auto f = lu_factor(m);
  auto x = lu_solve(f, b);
  const auto inv = lu_solve(f, ComplexMatrix<Real>::identity(m.rows));
  const double cond =
      static_cast<double>(one_norm(m)) * static_cast<double>(one_norm(inv));
  return SolveResult<Real>{std::move(x), cond};
}

}  // namespace qnforce
