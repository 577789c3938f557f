#include "uiodrem/uio_runtime.hpp"

namespace uiodrem {

AuxChain::AuxChain(UioGains gains) : AuxChain(gains, Vector::Zero(gains.F.rows())) {}

AuxChain::AuxChain(UioGains gains, Vector z0) : gains_(std::move(gains)), z_(std::move(z0)) {
  const Eigen::Index n = gains_.F.rows();
  if (z_.size() != n) throw ShapeError("AuxChain: z0 dimension mismatch");
  powers_.reserve(static_cast<std::size_t>(gains_.r + 1));
  powers_.push_back(gains_.G);
  for (int k = 1; k <= gains_.r; ++k) powers_.push_back(gains_.F * powers_.back());
  output_gain_ = powers_.back() + gains_.L;
}

void AuxChain::step(double y0, double y1, double dt) {
  const double ym = 0.5 * (y0 + y1);
  const double h = 0.5 * dt;
  const Vector k1 = derivative(z_, y0);
  const Vector k2 = derivative(z_ + h * k1, ym);
  const Vector k3 = derivative(z_ + h * k2, ym);
  const Vector k4 = derivative(z_ + dt * k3, y1);
  z_ += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Vector AuxChain::assemble_estimate(double y, std::span<const double> derivatives) const {
  return assemble_estimate(z_, y, derivatives);
}

Vector AuxChain::assemble_estimate(const Vector& z, double y, std::span<const double> derivatives) const {
  const int r = gains_.r;
  if (static_cast<int>(derivatives.size()) != r - 1) {
    throw ConfigError("assemble_estimate: expected " + std::to_string(r - 1) + " output derivatives, got " +
                      std::to_string(derivatives.size()));
  }
  // y^(k) enters with F^{r-1-k} G
  Vector xhat = z + powers_[static_cast<std::size_t>(r - 1)] * y;
  for (int k = 1; k < r; ++k) {
    xhat += powers_[static_cast<std::size_t>(r - 1 - k)] * derivatives[static_cast<std::size_t>(k - 1)];
  }
  return xhat;
}

OracleDerivatives::OracleDerivatives(const Plant& plant) {
  const int r = plant.relative_degree();
  RowVector row = plant.C;
  for (int k = 1; k < r; ++k) {
    row = row * plant.A;
    rows_.push_back(row);
  }
  values_.assign(rows_.size(), 0.0);
}

void OracleDerivatives::update(const Vector& x) {
  for (std::size_t k = 0; k < rows_.size(); ++k) values_[k] = rows_[k].dot(x);
}

DirtyDerivatives::DirtyDerivatives(double lambda, int r) : r_(r) {
  if (r < 1) throw ConfigError("DirtyDerivatives: relative degree must be >= 1");
  if (r > 1) filter_ = LtiFilter<double>(lambda, r - 1, 0, 1);
}

void DirtyDerivatives::update(double y0, double y1, double dt) {
  if (r_ > 1) filter_.step_scalar(y0, y1, dt);
}

std::vector<double> DirtyDerivatives::derivatives() const {
  std::vector<double> out;
  for (int k = 1; k < r_; ++k) out.push_back(filter_.output_scalar(k));
  return out;
}

}  // namespace uiodrem
