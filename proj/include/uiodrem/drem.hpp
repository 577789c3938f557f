#pragma once

#include <cmath>
#include <optional>
#include <type_traits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uiodrem/numerics/linalg.hpp"
#include "uiodrem/numerics/lti_filter.hpp"
#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// Kreisselmeier regressor extension
///   Phi' = -h Phi + m m^T,   Y' = -h Y + m q,
/// from Phi(t0) = 0, Y(t0) = 0. h = 0 is accepted (pure integration).
template <typename Scalar>
class KreisselmeierExtension {
 public:
  KreisselmeierExtension() = default;
  KreisselmeierExtension(Eigen::Index dim, Scalar h)
      : h_(h), phi_(MatrixX<Scalar>::Zero(dim, dim)), y_(VectorX<Scalar>::Zero(dim)) {
    if (dim < 1) throw ConfigError("KreisselmeierExtension: dimension must be >= 1");
    if (!(h >= Scalar(0))) throw ConfigError("KreisselmeierExtension: forgetting rate must be >= 0");
  }

  Eigen::Index dim() const noexcept { return y_.size(); }
  Scalar forgetting() const noexcept { return h_; }
  const MatrixX<Scalar>& phi() const noexcept { return phi_; }
  const VectorX<Scalar>& y() const noexcept { return y_; }

  void reset() {
    phi_.setZero();
    y_.setZero();
  }

  /// RK4 with the regressor and measurement given at the start, midpoint and
  /// end of the step.
  void step(const VectorX<Scalar>& m0, Scalar q0, const VectorX<Scalar>& mm, Scalar qm, const VectorX<Scalar>& m1,
            Scalar q1, Scalar dt) {
    if (m0.size() != dim() || mm.size() != dim() || m1.size() != dim()) {
      throw ShapeError("KreisselmeierExtension: regressor dimension mismatch");
    }
    // The forcing does not depend on the state, so RK4 reduces to a fixed
    // combination of the decay and the three forcing samples.
    const MatrixX<Scalar> g0 = m0 * m0.transpose(), gm = mm * mm.transpose(), g1 = m1 * m1.transpose();
    const VectorX<Scalar> v0 = m0 * q0, vm = mm * qm, v1 = m1 * q1;
    const Scalar hdt = Scalar(0.5) * dt;
    auto rk4 = [&](auto& s, const auto& f0, const auto& fm, const auto& f1) {
      using T = std::decay_t<decltype(s)>;
      const T k1 = -h_ * s + f0;
      const T k2 = -h_ * (s + hdt * k1) + fm;
      const T k3 = -h_ * (s + hdt * k2) + fm;
      const T k4 = -h_ * (s + dt * k3) + f1;
      s += dt / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    };
    rk4(phi_, g0, gm, g1);
    rk4(y_, v0, vm, v1);
    phi_ = Scalar(0.5) * (phi_ + phi_.transpose());
  }

  /// First-order hold: the midpoint regressor and measurement are the
  /// averages of the end samples.
  void step(const VectorX<Scalar>& m0, Scalar q0, const VectorX<Scalar>& m1, Scalar q1, Scalar dt) {
    const VectorX<Scalar> mm = Scalar(0.5) * (m0 + m1);
    step(m0, q0, mm, Scalar(0.5) * (q0 + q1), m1, q1, dt);
  }

  void step(const VectorX<Scalar>& m, Scalar q, Scalar dt) { step(m, q, m, q, dt); }

 private:
  Scalar h_ = 0;
  MatrixX<Scalar> phi_;
  VectorX<Scalar> y_;
};

template <typename Scalar>
struct DremEstimate {
  VectorX<Scalar> k_hat;
  Scalar delta = 0;
  VectorX<Scalar> upsilon;
  bool clamped = true;
  std::optional<double> frozen_at;
};

/// Delta = det(Phi), Upsilon = adj(Phi) Y, k_i = Upsilon_i / max(Delta, eps).
template <typename Scalar>
DremEstimate<Scalar> drem_extract(const MatrixX<Scalar>& phi, const VectorX<Scalar>& y, Scalar eps) {
  if (!(eps > Scalar(0))) throw ConfigError("drem_extract: clamp must be positive");
  require_square(phi, "drem_extract");
  if (y.size() != phi.rows()) throw ShapeError("drem_extract: Y dimension mismatch");
  DremEstimate<Scalar> est;
  est.delta = determinant(phi);
  est.upsilon = adjugate(phi) * y;
  est.clamped = !(est.delta > eps);
  est.k_hat = est.upsilon / std::max(est.delta, eps);
  return est;
}

template <typename Scalar>
DremEstimate<Scalar> drem_extract(const KreisselmeierExtension<Scalar>& s, Scalar eps) {
  return drem_extract<Scalar>(s.phi(), s.y(), eps);
}

/// Elementwise sigma/(p + sigma) over a uniformly sampled stream, zero start.
template <typename Scalar>
std::vector<VectorX<Scalar>> smooth(const std::vector<VectorX<Scalar>>& stream, Scalar sigma, Scalar dt) {
  std::vector<VectorX<Scalar>> out;
  if (stream.empty()) return out;
  LowPass<Scalar> lp(sigma, stream.front().size());
  out.reserve(stream.size());
  out.push_back(lp.value());
  for (std::size_t i = 1; i < stream.size(); ++i) {
    lp.step(stream[i - 1], stream[i], dt);
    out.push_back(lp.value());
  }
  return out;
}

/// Holds an estimate constant from t_D on. If the estimate is still clamped
/// at t_D the freeze is deferred to the first unclamped sample and a warning
/// is recorded.
class Freezer {
 public:
  explicit Freezer(double freeze_time = 0.0) : freeze_time_(freeze_time) {
    if (!(freeze_time >= 0.0)) throw ConfigError("Freezer: freeze time must be >= 0");
  }

  /// Returns true on the sample where the freeze happens.
  bool offer(double t, const Vector& value, bool clamped) {
    if (frozen_at_) return false;
    if (t + 1e-12 < freeze_time_) return false;
    if (clamped) {
      if (!deferred_) {
        deferred_ = true;
        warnings_.push_back("freeze deferred: estimate still clamped at t_D = " + std::to_string(freeze_time_));
      }
      return false;
    }
    value_ = value;
    frozen_at_ = t;
    if (deferred_) warnings_.push_back("freeze taken at t = " + std::to_string(t));
    return true;
  }

  bool frozen() const noexcept { return frozen_at_.has_value(); }
  std::optional<double> frozen_at() const noexcept { return frozen_at_; }
  const Vector& value() const noexcept { return value_; }
  bool deferred() const noexcept { return deferred_; }
  double freeze_time() const noexcept { return freeze_time_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  double freeze_time_;
  std::optional<double> frozen_at_;
  Vector value_;
  bool deferred_ = false;
  std::vector<std::string> warnings_;
};

struct ParameterEstimate {
  Vector xi0;
  double omega = 0.0;
  double omega_squared = 0.0;
  /// |k_{m+1} xi0 - k_{m+2..2m+1}|
  double consistency = 0.0;
  bool negative_frequency = false;
  bool inconsistent = false;
  std::string diagnostic;
};

/// Splits k = [xi0; w^2; w^2 xi0]. The frequency comes from the w^2 entry;
/// the redundant block only feeds the consistency score. A negative w^2 below
/// -tol is flagged and gives w = 0; the score is flagged above
/// tol * max(1, |last block|).
ParameterEstimate extract_parameters(const Vector& k_hat, Eigen::Index xi_dim, double tol = 1e-2);

}  // namespace uiodrem
