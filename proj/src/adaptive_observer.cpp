#include "uiodrem/adaptive_observer.hpp"

#include <Eigen/Eigenvalues>

namespace uiodrem {

GainSchedule gain_schedules(double y, double t, const Vector& theta_hat, const Matrix& N, double k,
                            const RegressorWeight& alpha) {
  if (!(k > 0.0)) throw ConfigError("gain_schedules: Young constant must be positive");
  const double a = alpha(y, t);
  GainSchedule s;
  s.gamma = a * a / k;
  s.mu = 1.0 + k * theta_hat.dot(N * theta_hat);
  return s;
}

RiccatiGain::RiccatiGain(Matrix A, Vector B, RowVector C, Matrix N0)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)) {
  require_square(A_, "RiccatiGain");
  if (N0.size() == 0) N0 = Matrix::Identity(A_.rows(), A_.rows());
  if (N0.rows() != A_.rows() || N0.cols() != A_.rows()) throw ShapeError("RiccatiGain: N0 dimension mismatch");
  assign(N0, 0.0);
}

Matrix RiccatiGain::derivative(const Matrix& N, double gamma, double mu) const {
  const Vector nc = N * C_.transpose();
  return 2.0 * gamma * N + N * A_.transpose() + A_ * N - 2.0 * nc * nc.transpose() + mu * B_ * B_.transpose();
}

void RiccatiGain::assign(const Matrix& N, double t) {
  asymmetry_ = (N - N.transpose()).norm();
  N_ = 0.5 * (N + N.transpose());
  if (!N_.allFinite()) throw DivergenceError("RiccatiGain: N is not finite", t);
  min_eig_ = Eigen::SelfAdjointEigenSolver<Matrix>(N_, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (!(min_eig_ > 0.0)) {
    throw DivergenceError("RiccatiGain: N lost positive definiteness (min eigenvalue " + std::to_string(min_eig_) + ")",
                          t);
  }
}

void RiccatiGain::step(double gamma, double mu, double dt, double t) {
  const Matrix k1 = derivative(N_, gamma, mu);
  const Matrix k2 = derivative(N_ + 0.5 * dt * k1, gamma, mu);
  const Matrix k3 = derivative(N_ + 0.5 * dt * k2, gamma, mu);
  const Matrix k4 = derivative(N_ + dt * k3, gamma, mu);
  assign(N_ + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + dt);
}

AdaptiveObserver::AdaptiveObserver(Plant plant, ObserverConfig config, Vector xbar0)
    : plant_(std::move(plant)), config_(std::move(config)), xbar_(std::move(xbar0)) {
  const Eigen::Index n = plant_.order();
  if (xbar_.size() != n) throw ShapeError("AdaptiveObserver: initial state dimension mismatch");
  if (config_.mode == ObserverGainMode::fixed) {
    if (config_.K.size() != n) throw ShapeError("AdaptiveObserver: fixed gain K must have n entries");
  } else {
    riccati_.emplace(plant_.A, plant_.B, plant_.C, config_.N0);
  }
  if (!(config_.divergence_bound > 0.0)) throw ConfigError("AdaptiveObserver: divergence bound must be positive");
}

Vector AdaptiveObserver::gain() const { return riccati_ ? riccati_->K() : config_.K; }

const RiccatiGain& AdaptiveObserver::riccati() const {
  if (!riccati_) throw ConfigError("AdaptiveObserver: no Riccati state in fixed-gain mode");
  return *riccati_;
}

Vector AdaptiveObserver::state_derivative(const Vector& x, const Matrix& N, const ObserverSample& s) const {
  if (s.theta_hat.size() != x.size()) {
    throw ShapeError("AdaptiveObserver: theta estimate must have the state dimension");
  }
  const Vector K = riccati_ ? Vector(N * plant_.C.transpose()) : config_.K;
  const double drive = s.u + plant_.alpha(s.y, s.t) * x.dot(s.theta_hat) + s.f_hat;
  return plant_.A * x + plant_.B * drive + K * (s.y - plant_.C.dot(x));
}

void AdaptiveObserver::step(const ObserverSample& s0, const ObserverSample& sm, const ObserverSample& s1) {
  const double dt = s1.t - s0.t;
  if (!riccati_) {
    const Matrix none;
    const Vector k1 = state_derivative(xbar_, none, s0);
    const Vector k2 = state_derivative(xbar_ + 0.5 * dt * k1, none, sm);
    const Vector k3 = state_derivative(xbar_ + 0.5 * dt * k2, none, sm);
    const Vector k4 = state_derivative(xbar_ + dt * k3, none, s1);
    xbar_ += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  } else {
    const double kk = config_.young_k;
    auto n_dot = [&](const Matrix& N, const ObserverSample& s) {
      const GainSchedule g = gain_schedules(s.y, s.t, s.theta_hat, N, kk, plant_.alpha);
      return riccati_->derivative(N, g.gamma, g.mu);
    };
    const Matrix& N = riccati_->N();
    const Vector kx1 = state_derivative(xbar_, N, s0);
    const Matrix kn1 = n_dot(N, s0);
    const Vector x2 = xbar_ + 0.5 * dt * kx1;
    const Matrix n2 = N + 0.5 * dt * kn1;
    const Vector kx2 = state_derivative(x2, n2, sm);
    const Matrix kn2 = n_dot(n2, sm);
    const Vector x3 = xbar_ + 0.5 * dt * kx2;
    const Matrix n3 = N + 0.5 * dt * kn2;
    const Vector kx3 = state_derivative(x3, n3, sm);
    const Matrix kn3 = n_dot(n3, sm);
    const Vector x4 = xbar_ + dt * kx3;
    const Matrix n4 = N + dt * kn3;
    const Vector kx4 = state_derivative(x4, n4, s1);
    const Matrix kn4 = n_dot(n4, s1);
    xbar_ += dt / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    riccati_->assign(N + dt / 6.0 * (kn1 + 2.0 * kn2 + 2.0 * kn3 + kn4), s1.t);
    schedule_ = gain_schedules(s1.y, s1.t, s1.theta_hat, riccati_->N(), kk, plant_.alpha);
  }
  if (!xbar_.allFinite() || xbar_.norm() > config_.divergence_bound) {
    throw DivergenceError("AdaptiveObserver: estimate exceeded the divergence bound", s1.t);
  }
}

}  // namespace uiodrem
