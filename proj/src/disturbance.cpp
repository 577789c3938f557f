#include "uiodrem/disturbance.hpp"

#include <cmath>

namespace uiodrem {

double compute_fbar(double bbar_q, const RowVector& s_bar, const Vector& xi0_hat) {
  if (s_bar.size() != xi0_hat.size()) throw ShapeError("compute_fbar: S_bar and xi0 dimension mismatch");
  return bbar_q - s_bar.dot(xi0_hat);
}

std::complex<double> inverse_filter_gain(double omega, double lambda, int r) {
  if (!(lambda > 0.0)) throw ConfigError("inverse_filter_gain: bandwidth must be positive");
  if (r < 1) throw ConfigError("inverse_filter_gain: order must be >= 1");
  const std::complex<double> ratio(1.0, omega / lambda);
  std::complex<double> out(1.0, 0.0);
  for (int i = 0; i < r; ++i) out *= ratio;
  return out;
}

SinusoidEvaluator reconstruct_f(double a1, double a2, double omega, double lambda, int r) {
  const std::complex<double> c = std::complex<double>(a1, a2) * inverse_filter_gain(omega, lambda, r);
  return {omega, c.real(), c.imag()};
}

SinusoidEvaluator filter_sinusoid(double a1, double a2, double omega, double lambda, int r) {
  const std::complex<double> c = std::complex<double>(a1, a2) / inverse_filter_gain(omega, lambda, r);
  return {omega, c.real(), c.imag()};
}

AmplitudeEstimator::AmplitudeEstimator(double omega_hat, AmplitudeConfig config)
    : omega_(omega_hat), config_(config), extension_(2, config.h), smoother_(config.sigma, 2) {
  if (!(omega_hat > 0.0)) {
    throw ConfigError("AmplitudeEstimator: frequency estimate must be positive, the regressor degenerates at 0");
  }
  raw_ = drem_extract(extension_, config_.epsilon);
}

Vector AmplitudeEstimator::regressor(double t) const {
  Vector psi(2);
  psi << std::sin(omega_ * t), std::cos(omega_ * t);
  return psi;
}

void AmplitudeEstimator::step(double t0, double fbar0, double fbar1, double dt, std::optional<double> fbar_mid) {
  const Vector k_prev = raw_.k_hat;
  const Vector psi0 = regressor(t0);
  const Vector psi1 = regressor(t0 + dt);
  if (fbar_mid) {
    extension_.step(psi0, fbar0, regressor(t0 + 0.5 * dt), *fbar_mid, psi1, fbar1, dt);
  } else {
    extension_.step(psi0, fbar0, psi1, fbar1, dt);
  }
  raw_ = drem_extract(extension_, config_.epsilon);
  if (raw_.clamped) {
    smoother_.settle(raw_.k_hat);
  } else {
    smoother_.step(k_prev, raw_.k_hat, dt);
  }
}

}  // namespace uiodrem
