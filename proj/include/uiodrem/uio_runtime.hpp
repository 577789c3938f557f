#pragma once

#include <span>
#include <vector>

#include "uiodrem/numerics/lti_filter.hpp"
#include "uiodrem/plant.hpp"
#include "uiodrem/uio_design.hpp"

namespace uiodrem {

/// Terminal variable z_r of the auxiliary chain
///   z_r' = F (z_r + F^{r-1} G y) + L y,
/// from which the state estimate is
///   xhat = z_r + F^{r-1} G y + ... + F G y^(r-2) + G y^(r-1).
class AuxChain {
 public:
  explicit AuxChain(UioGains gains);
  AuxChain(UioGains gains, Vector z0);

  const UioGains& gains() const noexcept { return gains_; }
  int relative_degree() const noexcept { return gains_.r; }
  const Vector& z() const noexcept { return z_; }
  /// F^k G for k = 0..r.
  const std::vector<Vector>& powers() const noexcept { return powers_; }
  /// F^r G + L, the output gain of the chain dynamics.
  const Vector& output_gain() const noexcept { return output_gain_; }

  Vector derivative(const Vector& z, double y) const { return gains_.F * z + output_gain_ * y; }

  /// One RK4 step, output linearly interpolated between the two samples.
  void step(double y0, double y1, double dt);
  /// Zero-order hold on y.
  void step(double y, double dt) { step(y, y, dt); }

  /// Needs exactly r - 1 derivatives y^(1), ..., y^(r-1).
  Vector assemble_estimate(double y, std::span<const double> derivatives) const;
  Vector assemble_estimate(const Vector& z, double y, std::span<const double> derivatives) const;

 private:
  UioGains gains_;
  std::vector<Vector> powers_;
  Vector output_gain_;
  Vector z_;
};

/// Source of output derivatives y^(1), ..., y^(r-1) at the current sample.
class DerivativeProvider {
 public:
  virtual ~DerivativeProvider() = default;
  virtual std::vector<double> derivatives() const = 0;
};

/// Exact, noise-free derivatives C A^k x from the true state.
class OracleDerivatives final : public DerivativeProvider {
 public:
  explicit OracleDerivatives(const Plant& plant);
  void update(const Vector& x);
  std::vector<double> derivatives() const override { return values_; }

 private:
  std::vector<RowVector> rows_;
  std::vector<double> values_;
};

/// Dirty derivatives lambda^{r-1} p^k / (p + lambda)^{r-1} [y] for k = 1..r-1.
class DirtyDerivatives final : public DerivativeProvider {
 public:
  DirtyDerivatives(double lambda, int r);
  void update(double y0, double y1, double dt);
  std::vector<double> derivatives() const override;

 private:
  int r_;
  LtiFilter<double> filter_;
};

}  // namespace uiodrem
