#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// e^{A t} by scaling and squaring with a diagonal [6/6] Pade approximant.
/// The scaled matrix has 1-norm at most 1/2, which puts the Pade truncation
/// error well below double precision.
template <typename Derived>
MatrixX<typename Derived::Scalar> matrix_exponential(const Eigen::MatrixBase<Derived>& a,
                                                     typename Derived::Scalar t = 1) {
  using Scalar = typename Derived::Scalar;
  using std::ceil;
  using std::log2;
  using std::max;
  require_square(a, "matrix_exponential");
  const Eigen::Index n = a.rows();
  const MatrixX<Scalar> identity = MatrixX<Scalar>::Identity(n, n);
  if (n == 0) return identity;

  MatrixX<Scalar> x = a * t;
  const Scalar norm = x.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > Scalar(0.5)) {
    squarings = static_cast<int>(max(Scalar(0), ceil(log2(norm / Scalar(0.5)))));
    x /= std::ldexp(Scalar(1), squarings);
  }

  // c_k = (2q - k)! q! / ((2q)! k! (q - k)!), q = 6
  constexpr int kOrder = 6;
  Scalar c = 1;
  MatrixX<Scalar> power = identity;
  MatrixX<Scalar> numer = identity;
  MatrixX<Scalar> denom = identity;
  for (int k = 1; k <= kOrder; ++k) {
    c *= Scalar(kOrder - k + 1) / Scalar(k * (2 * kOrder - k + 1));
    power = power * x;
    numer += c * power;
    denom += ((k % 2 == 0) ? c : -c) * power;
  }
  MatrixX<Scalar> result = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace uiodrem
