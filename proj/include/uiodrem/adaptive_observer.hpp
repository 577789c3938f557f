#pragma once

#include <optional>

#include "uiodrem/plant.hpp"

namespace uiodrem {

struct GainSchedule {
  double gamma = 0.0;
  double mu = 1.0;
};

/// Tight Lyapunov schedules gamma = alpha(y, t)^2 / k, mu = 1 + k theta^T N theta.
GainSchedule gain_schedules(double y, double t, const Vector& theta_hat, const Matrix& N, double k,
                            const RegressorWeight& alpha);

/// N' = 2 gamma N + N A^T + A N - 2 N C^T C N + mu B B^T, K = N C^T.
class RiccatiGain {
 public:
  RiccatiGain(Matrix A, Vector B, RowVector C, Matrix N0);

  Matrix derivative(const Matrix& N, double gamma, double mu) const;
  /// One RK4 step with constant gamma, mu; N is re-symmetrized afterwards.
  /// Throws DivergenceError if N stops being positive definite.
  void step(double gamma, double mu, double dt, double t = 0.0);
  /// Replaces N after an external step; symmetrizes and checks definiteness.
  void assign(const Matrix& N, double t);

  const Matrix& N() const noexcept { return N_; }
  Vector K() const { return N_ * C_.transpose(); }
  double min_eigenvalue() const noexcept { return min_eig_; }
  /// ||N - N^T|| before the last re-symmetrization.
  double asymmetry() const noexcept { return asymmetry_; }

 private:
  Matrix A_;
  Vector B_;
  RowVector C_;
  Matrix N_;
  double min_eig_ = 0.0;
  double asymmetry_ = 0.0;
};

enum class ObserverGainMode { fixed, riccati };
enum class ObserverStart { deferred, immediate };

struct ObserverConfig {
  ObserverGainMode mode = ObserverGainMode::fixed;
  Vector K;
  double young_k = 1.0;
  /// Empty means identity.
  Matrix N0;
  ObserverStart start = ObserverStart::deferred;
  double divergence_bound = 1e6;
};

/// Observer inputs at one time node.
struct ObserverSample {
  double t = 0.0;
  double y = 0.0;
  double u = 0.0;
  Vector theta_hat;
  double f_hat = 0.0;
};

/// xbar' = A xbar + B [u + alpha(y, t) xbar^T theta_hat + f_hat] + K (y - C xbar),
/// with K fixed or K = N C^T from the Riccati equation integrated jointly.
class AdaptiveObserver {
 public:
  AdaptiveObserver(Plant plant, ObserverConfig config, Vector xbar0);

  /// RK4 over [s0.t, s1.t] with inputs at the start, midpoint and end.
  void step(const ObserverSample& s0, const ObserverSample& sm, const ObserverSample& s1);

  const Vector& state() const noexcept { return xbar_; }
  Vector gain() const;
  ObserverGainMode mode() const noexcept { return config_.mode; }
  const ObserverConfig& config() const noexcept { return config_; }
  /// Only meaningful in Riccati mode.
  const RiccatiGain& riccati() const;
  const GainSchedule& schedule() const noexcept { return schedule_; }

 private:
  Vector state_derivative(const Vector& x, const Matrix& N, const ObserverSample& s) const;

  Plant plant_;
  ObserverConfig config_;
  Vector xbar_;
  std::optional<RiccatiGain> riccati_;
  GainSchedule schedule_;
};

}  // namespace uiodrem
