#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

namespace detail {

// Gaussian elimination with partial pivoting. Works on a copy; a zero pivot
// column short-circuits to an exact zero determinant.
template <typename Scalar>
Scalar lu_determinant(MatrixX<Scalar> a) {
  using std::abs;
  const Eigen::Index n = a.rows();
  Scalar det(1);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index pivot = k;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      if (abs(a(i, k)) > abs(a(pivot, k))) pivot = i;
    }
    if (a(pivot, k) == Scalar(0)) return Scalar(0);
    if (pivot != k) {
      a.row(k).swap(a.row(pivot));
      det = -det;
    }
    det *= a(k, k);
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const Scalar factor = a(i, k) / a(k, k);
      a.row(i).tail(n - k - 1) -= factor * a.row(k).tail(n - k - 1);
    }
  }
  return det;
}

template <typename Scalar>
MatrixX<Scalar> minor_matrix(const MatrixX<Scalar>& a, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index n = a.rows();
  MatrixX<Scalar> out(n - 1, n - 1);
  for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
    if (i == row) continue;
    for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
      if (j == col) continue;
      out(oi, oj++) = a(i, j);
    }
    ++oi;
  }
  return out;
}

}  // namespace detail

/// Determinant of a square matrix. Closed forms up to 3x3, pivoted LU above.
template <typename Derived>
typename Derived::Scalar determinant(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_square(m, "determinant");
  const Eigen::Index n = m.rows();
  switch (n) {
    case 0:
      return Scalar(1);
    case 1:
      return m(0, 0);
    case 2:
      return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      return detail::lu_determinant<Scalar>(m.eval());
  }
}

/// Classical adjugate (transpose of the cofactor matrix). Valid for singular
/// input, so M * adj(M) = det(M) I holds even when M has no inverse.
template <typename Derived>
MatrixX<typename Derived::Scalar> adjugate(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  require_square(m, "adjugate");
  const Eigen::Index n = m.rows();
  MatrixX<Scalar> adj(n, n);
  if (n == 1) {
    adj(0, 0) = Scalar(1);
    return adj;
  }
  if (n == 2) {
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return adj;
  }
  if (n == 3) {
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return adj;
  }
  const MatrixX<Scalar> a = m.eval();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Scalar sign = ((i + j) % 2 == 0) ? Scalar(1) : Scalar(-1);
      // adj(j, i) is the (i, j) cofactor
      adj(j, i) = sign * determinant(detail::minor_matrix<Scalar>(a, i, j));
    }
  }
  return adj;
}

/// Numerical rank via SVD with a relative tolerance.
template <typename Derived>
Eigen::Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-10) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixX<typename Derived::Scalar>> svd(m.eval());
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

/// Observability matrix [C; C A; ...; C A^{n-1}].
template <typename Scalar>
MatrixX<Scalar> observability_matrix(const MatrixX<Scalar>& a, const MatrixX<Scalar>& c) {
  require_square(a, "observability_matrix");
  const Eigen::Index n = a.rows();
  const Eigen::Index p = c.rows();
  MatrixX<Scalar> obs(n * p, n);
  MatrixX<Scalar> block = c;
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.middleRows(i * p, p) = block;
    block = block * a;
  }
  return obs;
}

template <typename Derived>
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixBase<Derived>& m) {
  require_square(m, "eigenvalues");
  Eigen::EigenSolver<Matrix> solver(m.template cast<double>().eval(), false);
  std::vector<std::complex<double>> out;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()(i));
  return out;
}

/// Largest real part of the spectrum.
template <typename Derived>
double spectral_abscissa(const Eigen::MatrixBase<Derived>& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& ev : eigenvalues(m)) best = std::max(best, ev.real());
  return best;
}

template <typename Derived>
bool is_hurwitz(const Eigen::MatrixBase<Derived>& m) {
  return spectral_abscissa(m) < 0.0;
}

/// Monic polynomial coefficients (highest power first, leading 1) with the
/// given roots. Complex roots must come in conjugate pairs.
inline std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& root : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= root * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> out;
  out.reserve(c.size());
  for (const auto& v : c) out.push_back(v.real());
  return out;
}

/// Evaluates a polynomial (highest power first) at a square matrix by Horner.
template <typename Scalar>
MatrixX<Scalar> polyvalm(const std::vector<double>& coeffs, const MatrixX<Scalar>& a) {
  const Eigen::Index n = a.rows();
  MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(n, n);
  for (double c : coeffs) {
    acc = acc * a;
    acc.diagonal().array() += Scalar(c);
  }
  return acc;
}

/// Characteristic polynomial coefficients of a square matrix, highest power
/// first, computed from its eigenvalues.
template <typename Derived>
std::vector<double> characteristic_polynomial(const Eigen::MatrixBase<Derived>& m) {
  return poly_from_roots(eigenvalues(m));
}

}  // namespace uiodrem
