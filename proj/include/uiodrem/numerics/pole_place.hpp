#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "uiodrem/numerics/linalg.hpp"
#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

using PoleSet = std::vector<std::complex<double>>;

/// Throws unless every non-real pole has its conjugate in the set (as a multiset).
inline void require_self_conjugate(const PoleSet& poles, double tol = 1e-12) {
  std::vector<bool> used(poles.size(), false);
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (used[i] || std::abs(poles[i].imag()) <= tol) continue;
    used[i] = true;
    bool matched = false;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (!used[j] && std::abs(poles[j] - std::conj(poles[i])) <= tol * (1.0 + std::abs(poles[i]))) {
        used[j] = true;
        matched = true;
        break;
      }
    }
    if (!matched) throw DesignError("pole_place: complex poles must appear in conjugate pairs");
  }
}

/// Observer gain by Ackermann's formula: returns L (n x 1) such that the
/// spectrum of M - L C equals `poles`. C must be a single row and (M, C)
/// observable.
template <typename Scalar>
VectorX<Scalar> place_observer(const MatrixX<Scalar>& m, const MatrixX<Scalar>& c, const PoleSet& poles) {
  require_square(m, "place_observer");
  const Eigen::Index n = m.rows();
  if (c.rows() != 1 || c.cols() != n) throw ShapeError("place_observer: C must be 1 x n");
  if (static_cast<Eigen::Index>(poles.size()) != n) {
    throw DesignError("place_observer: expected " + std::to_string(n) + " poles, got " +
                      std::to_string(poles.size()));
  }
  require_self_conjugate(poles);
  const MatrixX<Scalar> obs = observability_matrix<Scalar>(m, c);
  if (numerical_rank(obs, 1e-12) < n) throw DesignError("place_observer: pair (M, C) is not observable");

  VectorX<Scalar> en = VectorX<Scalar>::Zero(n);
  en(n - 1) = Scalar(1);
  const VectorX<Scalar> q = obs.fullPivLu().solve(en);
  return polyvalm<Scalar>(poly_from_roots(poles), m) * q;
}

}  // namespace uiodrem
