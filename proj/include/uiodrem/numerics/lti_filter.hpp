#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// Bank of identical filters lambda^r p^k / (p + lambda)^r, one per channel,
/// realized in controllable canonical form. The state row i holds the i-th
/// derivative of w = 1/(p + lambda)^r [u], so every numerator order
/// k = 0..r is available from the same state: lambda^r w^(k).
///
/// Advanced with classical RK4. The three-sample step takes the input at the
/// start, midpoint and end of the interval; the two-sample step linearly
/// interpolates the midpoint (first-order hold).
template <typename Scalar>
class LtiFilter {
 public:
  using Row = RowVectorX<Scalar>;

  LtiFilter() = default;

  LtiFilter(Scalar lambda, int order, int numerator_order = 0, Eigen::Index channels = 1)
      : lambda_(lambda), order_(order), numerator_order_(numerator_order) {
    if (!(lambda > Scalar(0))) throw ConfigError("LtiFilter: bandwidth must be positive");
    if (order < 1) throw ConfigError("LtiFilter: order must be >= 1");
    if (numerator_order < 0 || numerator_order > order) {
      throw ConfigError("LtiFilter: improper request, numerator order " + std::to_string(numerator_order) +
                        " exceeds denominator order " + std::to_string(order));
    }
    if (channels < 1) throw ConfigError("LtiFilter: at least one channel required");
    // (p + lambda)^r = p^r + sum_i coeffs_[i] p^i
    coeffs_.resize(order);
    Scalar binom = 1;
    for (int i = 0; i < order; ++i) {
      coeffs_[i] = binom * std::pow(lambda, Scalar(order - i));
      binom = binom * Scalar(order - i) / Scalar(i + 1);
    }
    gain_ = std::pow(lambda, Scalar(order));
    state_ = MatrixX<Scalar>::Zero(order, channels);
    input_ = Row::Zero(channels);
  }

  Scalar bandwidth() const noexcept { return lambda_; }
  int order() const noexcept { return order_; }
  int numerator_order() const noexcept { return numerator_order_; }
  Eigen::Index channels() const noexcept { return state_.cols(); }
  const MatrixX<Scalar>& state() const noexcept { return state_; }

  void reset() {
    state_.setZero();
    input_.setZero();
  }

  /// Records the current input sample without advancing, so the biproper
  /// output (k = r) is defined before the first step.
  void prime(const Row& u) { input_ = u; }

  /// Steady state for the constant input u.
  void settle(const Row& u) {
    state_.setZero();
    state_.row(0) = u / gain_;
    input_ = u;
  }

  /// Output for numerator order k (defaults to the configured one).
  Row output(int k) const {
    if (k < 0 || k > order_) throw ConfigError("LtiFilter: numerator order out of range");
    if (k < order_) return gain_ * state_.row(k);
    return gain_ * highest_derivative(state_, input_);
  }
  Row output() const { return output(numerator_order_); }
  Scalar output_scalar(int k) const { return output(k)(0); }
  Scalar output_scalar() const { return output()(0); }

  void step(const Row& u0, const Row& umid, const Row& u1, Scalar dt) {
    const MatrixX<Scalar> k1 = derivative(state_, u0);
    const MatrixX<Scalar> k2 = derivative(state_ + Scalar(0.5) * dt * k1, umid);
    const MatrixX<Scalar> k3 = derivative(state_ + Scalar(0.5) * dt * k2, umid);
    const MatrixX<Scalar> k4 = derivative(state_ + dt * k3, u1);
    state_ += dt / Scalar(6) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
    input_ = u1;
  }

  void step(const Row& u0, const Row& u1, Scalar dt) { step(u0, Scalar(0.5) * (u0 + u1), u1, dt); }

  Scalar step_scalar(Scalar u0, Scalar u1, Scalar dt) {
    step(Row::Constant(1, u0), Row::Constant(1, u1), dt);
    return output_scalar();
  }
  Scalar step_scalar(Scalar u0, Scalar umid, Scalar u1, Scalar dt) {
    step(Row::Constant(1, u0), Row::Constant(1, umid), Row::Constant(1, u1), dt);
    return output_scalar();
  }

 private:
  Row highest_derivative(const MatrixX<Scalar>& w, const Row& u) const {
    Row top = u;
    for (int i = 0; i < order_; ++i) top -= coeffs_[i] * w.row(i);
    return top;
  }

  MatrixX<Scalar> derivative(const MatrixX<Scalar>& w, const Row& u) const {
    MatrixX<Scalar> dw(w.rows(), w.cols());
    if (order_ > 1) dw.topRows(order_ - 1) = w.bottomRows(order_ - 1);
    dw.row(order_ - 1) = highest_derivative(w, u);
    return dw;
  }

  Scalar lambda_ = 1;
  int order_ = 1;
  int numerator_order_ = 0;
  Scalar gain_ = 1;
  std::vector<Scalar> coeffs_;
  MatrixX<Scalar> state_;
  Row input_;
};

/// Convenience factory matching the single-channel use.
template <typename Scalar = double>
LtiFilter<Scalar> make_filter(Scalar lambda, int order, int numerator_order) {
  return LtiFilter<Scalar>(lambda, order, numerator_order, 1);
}

template <typename Scalar>
Scalar step_filter(LtiFilter<Scalar>& filter, Scalar u, Scalar dt) {
  return filter.step_scalar(u, u, dt);
}

/// First-order low-pass sigma/(p + sigma) on a vector stream, zero initial state.
template <typename Scalar>
class LowPass {
 public:
  LowPass() = default;
  LowPass(Scalar sigma, Eigen::Index dim) : filter_(sigma, 1, 0, dim) {}
  void step(const VectorX<Scalar>& u0, const VectorX<Scalar>& u1, Scalar dt) {
    filter_.step(u0.transpose(), u1.transpose(), dt);
  }
  VectorX<Scalar> value() const { return filter_.output(0).transpose(); }
  /// Jumps to the steady state of the constant input u.
  void settle(const VectorX<Scalar>& u) { filter_.settle(u.transpose()); }
  Scalar sigma() const noexcept { return filter_.bandwidth(); }

 private:
  LtiFilter<Scalar> filter_;
};

}  // namespace uiodrem
