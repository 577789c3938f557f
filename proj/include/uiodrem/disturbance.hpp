#pragma once

#include <cmath>
#include <complex>
#include <optional>

#include "uiodrem/drem.hpp"
#include "uiodrem/numerics/lti_filter.hpp"
#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// fbar = Bbar q_r - S_bar xi0_hat, pointwise.
double compute_fbar(double bbar_q, const RowVector& s_bar, const Vector& xi0_hat);

/// Pure sinusoid a1 sin(w t) + a2 cos(w t), immutable once built.
class SinusoidEvaluator {
 public:
  SinusoidEvaluator() = default;
  SinusoidEvaluator(double omega, double sine, double cosine) : omega_(omega), sine_(sine), cosine_(cosine) {}

  double operator()(double t) const { return sine_ * std::sin(omega_ * t) + cosine_ * std::cos(omega_ * t); }
  double frequency() const noexcept { return omega_; }
  double sine() const noexcept { return sine_; }
  double cosine() const noexcept { return cosine_; }
  double amplitude() const { return std::hypot(sine_, cosine_); }
  /// phase phi in amplitude * sin(w t + phi)
  double phase() const { return std::atan2(cosine_, sine_); }

 private:
  double omega_ = 0.0;
  double sine_ = 0.0;
  double cosine_ = 0.0;
};

/// (i w + lambda)^r / lambda^r, the inverse of lambda^r/(p + lambda)^r at s = i w.
std::complex<double> inverse_filter_gain(double omega, double lambda, int r);

/// Applies (p + lambda)^r / lambda^r to fbar = a1 sin(w t) + a2 cos(w t) in
/// closed form: with c = a1 + i a2, fbar = Im(c e^{i w t}) and the operator
/// multiplies c by its value at i w.
SinusoidEvaluator reconstruct_f(double a1, double a2, double omega, double lambda, int r);

/// Steady-state coefficients of lambda^r/(p + lambda)^r applied to
/// a1 sin(w t) + a2 cos(w t).
SinusoidEvaluator filter_sinusoid(double a1, double a2, double omega, double lambda, int r);

struct AmplitudeConfig {
  double h = 0.5;
  double epsilon = 1e-3;
  double sigma = 0.7;
};

/// Second DREM stage on fbar = psi^T a with psi = [sin w t, cos w t].
class AmplitudeEstimator {
 public:
  AmplitudeEstimator(double omega_hat, AmplitudeConfig config);

  double frequency() const noexcept { return omega_; }
  Vector regressor(double t) const;

  /// Consumes fbar at t0 and t0 + dt; the midpoint is taken from the
  /// argument when given, otherwise linearly interpolated.
  void step(double t0, double fbar0, double fbar1, double dt, std::optional<double> fbar_mid = std::nullopt);

  const DremEstimate<double>& raw() const noexcept { return raw_; }
  Vector smoothed() const { return smoother_.value(); }
  bool clamped() const noexcept { return raw_.clamped; }
  const KreisselmeierExtension<double>& extension() const noexcept { return extension_; }
  const AmplitudeConfig& config() const noexcept { return config_; }

 private:
  double omega_;
  AmplitudeConfig config_;
  KreisselmeierExtension<double> extension_;
  LowPass<double> smoother_;
  DremEstimate<double> raw_;
};

}  // namespace uiodrem
