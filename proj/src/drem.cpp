#include "uiodrem/drem.hpp"

namespace uiodrem {

ParameterEstimate extract_parameters(const Vector& k_hat, Eigen::Index xi_dim, double tol) {
  if (xi_dim < 1 || k_hat.size() != 2 * xi_dim + 1) {
    throw ShapeError("extract_parameters: expected " + std::to_string(2 * xi_dim + 1) + " entries, got " +
                     std::to_string(k_hat.size()));
  }
  ParameterEstimate p;
  p.xi0 = k_hat.head(xi_dim);
  p.omega_squared = k_hat(xi_dim);
  const Vector tail = k_hat.tail(xi_dim);
  p.consistency = (p.omega_squared * p.xi0 - tail).norm();
  if (p.omega_squared < -tol) {
    p.negative_frequency = true;
    p.diagnostic = "negative squared frequency " + std::to_string(p.omega_squared);
  }
  p.omega = std::sqrt(std::max(p.omega_squared, 0.0));
  if (p.consistency > tol * std::max(1.0, tail.norm())) {
    p.inconsistent = true;
    if (!p.diagnostic.empty()) p.diagnostic += "; ";
    p.diagnostic += "redundant block inconsistent by " + std::to_string(p.consistency);
  }
  return p;
}

}  // namespace uiodrem
