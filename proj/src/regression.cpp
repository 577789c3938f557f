#include "uiodrem/regression.hpp"

#include <cmath>

namespace uiodrem {

namespace {

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

}  // namespace

RegressionBuilder::RegressionBuilder(const Plant& plant, const UioGains& gains, const ExoGenerator& generator,
                                     RegressionConfig config, double dt)
    : A_(plant.A),
      B_(plant.B),
      H_(generator.H),
      Gamma_(generator.Gamma),
      gains_(gains),
      config_(std::move(config)),
      dt_(dt),
      r_(gains.r),
      n_(plant.A.rows()),
      xi_dim_(generator.Gamma.rows()) {
  if (!plant.alpha.is_unit()) {
    throw ConfigError("RegressionBuilder: only the unit regressor weight (phi = x) is supported");
  }
  if (!(dt > 0.0)) throw ConfigError("RegressionBuilder: dt must be positive");
  generator.validate();
  if (H_.rows() != n_) throw ShapeError("RegressionBuilder: theta dimension must equal the state dimension");
  if (config_.Bbar.size() != n_) throw ShapeError("RegressionBuilder: Bbar must be 1 x n");
  if (std::abs(config_.Bbar.dot(B_) - 1.0) > 1e-12) throw ConfigError("RegressionBuilder: Bbar B must equal 1");

  realization_ = config_.swapping;
  if (realization_ == SwappingRealization::automatic) {
    realization_ = r_ <= 2 ? SwappingRealization::literal : SwappingRealization::modulated;
  }
  if (config_.harmonics != 0 && config_.harmonics != 1) {
    throw ConfigError("RegressionBuilder: only zero or one disturbance harmonic is supported");
  }
  if (realization_ == SwappingRealization::literal && r_ > 2) {
    throw ConfigError("RegressionBuilder: literal swapping is only available for r <= 2");
  }

  powers_.push_back(gains_.G);
  for (int k = 1; k <= r_; ++k) powers_.push_back(gains_.F * powers_.back());

  const double lambda = config_.lambda;
  z_filter_ = LtiFilter<double>(lambda, r_, 0, n_);
  y_filter_ = LtiFilter<double>(lambda, r_, 0, 1);
  u_filter_ = LtiFilter<double>(lambda, r_, 0, 1);
  s0_filter_ = LtiFilter<double>(lambda, r_, 0, xi_dim_);
  if (realization_ == SwappingRealization::literal && r_ == 2) {
    v_filter_ = LtiFilter<double>(lambda, 1, 1, 1);
    b_filter_ = LtiFilter<double>(lambda, 1, 0, xi_dim_);
    s1_filter_ = LtiFilter<double>(lambda, 1, 0, xi_dim_);
  }
  if (realization_ == SwappingRealization::modulated && r_ >= 2) {
    // y^(k) R_k e^{Gamma t} through lambda^r/(p+lambda)^r equals
    //   lambda^r R_k sum_j C(k,j) (-D)^{k-j} W_{r-j} e^{Gamma t},
    // where W_i = y ((p + lambda) I + Gamma)^{-i} and D = lambda I + Gamma.
    decay_ = lambda * Matrix::Identity(xi_dim_, xi_dim_) + Gamma_;
    w_.assign(static_cast<std::size_t>(r_), Matrix::Zero(xi_dim_, xi_dim_));
    w_weights_.assign(static_cast<std::size_t>(r_ + 1), Matrix::Zero(1, xi_dim_));
    const double gain = std::pow(lambda, r_);
    const Matrix neg_d = -decay_;
    for (int k = 1; k < r_; ++k) {
      const Matrix rk = powers_[static_cast<std::size_t>(r_ - 1 - k)].transpose() * H_;
      Matrix neg_d_pow = Matrix::Identity(xi_dim_, xi_dim_);
      for (int j = k; j >= 0; --j) {
        // neg_d_pow = (-D)^{k-j}
        w_weights_[static_cast<std::size_t>(r_ - j)] += gain * binomial(k, j) * rk * neg_d_pow;
        neg_d_pow = neg_d_pow * neg_d;
      }
    }
  }
  mix_q_filter_ = LtiFilter<double>(config_.lambda_r, 2, 2, 1);
  mix_s_filter_ = LtiFilter<double>(config_.lambda_r, 2, 2, xi_dim_);

  clock_ = GeneratorClock(Gamma_, dt_);
  z_ = Vector::Zero(n_);
  s_bar_ = RowVector::Zero(xi_dim_);
  s1_ = RowVector::Zero(xi_dim_);
  q_r_ = Vector::Zero(n_);
  m_ = Vector::Zero(regression_dim());
}

Vector RegressionBuilder::true_parameters(const Vector& xi0, double omega) {
  const Eigen::Index m = xi0.size();
  Vector k(2 * m + 1);
  k.head(m) = xi0;
  k(m) = omega * omega;
  k.tail(m) = omega * omega * xi0;
  return k;
}

RowVector RegressionBuilder::measurable_row(const Vector& z, double y, const Matrix& E) const {
  const Vector xpart = z + powers_[static_cast<std::size_t>(r_ - 1)] * y;
  return xpart.transpose() * H_ * E;
}

RowVector RegressionBuilder::modulated_derivative_row(const Matrix& E) const {
  RowVector row = RowVector::Zero(xi_dim_);
  for (int i = 1; i <= r_; ++i) {
    row += w_weights_[static_cast<std::size_t>(i)] * w_[static_cast<std::size_t>(i - 1)];
  }
  return row * E;
}

void RegressionBuilder::step_modulated(double y0, double ym, double y1, double dt) {
  const Eigen::Index m = xi_dim_;
  const Matrix eye = Matrix::Identity(m, m);
  auto deriv = [&](const std::vector<Matrix>& w, double y) {
    std::vector<Matrix> dw(w.size());
    dw[0] = -w[0] * decay_ + y * eye;
    for (std::size_t i = 1; i < w.size(); ++i) dw[i] = -w[i] * decay_ + w[i - 1];
    return dw;
  };
  auto axpy = [](const std::vector<Matrix>& w, double a, const std::vector<Matrix>& d) {
    std::vector<Matrix> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] + a * d[i];
    return out;
  };
  const auto k1 = deriv(w_, y0);
  const auto k2 = deriv(axpy(w_, 0.5 * dt, k1), ym);
  const auto k3 = deriv(axpy(w_, 0.5 * dt, k2), ym);
  const auto k4 = deriv(axpy(w_, dt, k3), y1);
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

void RegressionBuilder::compute_outputs() {
  const Matrix& E = clock_.now();
  s_bar_ = s0_filter_.output(0);
  if (r_ >= 2) {
    if (realization_ == SwappingRealization::literal) {
      s_bar_ += s1_filter_.output(0);
    } else {
      s_bar_ += modulated_derivative_row(E);
    }
  }
  const Vector zf0 = z_filter_.output(0).transpose();
  const Vector zf1 = z_filter_.output(1).transpose();
  Vector xf = zf0;
  Vector dxf = zf1;
  for (int k = 0; k < r_; ++k) {
    const Vector& c = powers_[static_cast<std::size_t>(r_ - 1 - k)];
    xf += c * y_filter_.output_scalar(k);
    dxf += c * y_filter_.output_scalar(k + 1);
  }
  q_r_ = dxf - A_ * xf - B_ * u_filter_.output_scalar(0);
}

void RegressionBuilder::update_mixed() {
  if (config_.harmonics == 0) {
    q_star_ = Bbar_q();
    m_ = s_bar_.transpose();
    return;
  }
  q_star_ = mix_q_filter_.output_scalar(2);
  m_.head(xi_dim_) = mix_s_filter_.output(2).transpose();
  m_(xi_dim_) = -mix_q_filter_.output_scalar(0);
  m_.tail(xi_dim_) = mix_s_filter_.output(0).transpose();
}

void RegressionBuilder::initialize(double y0, const Vector& z0, double u0) {
  if (z0.size() != n_) throw ShapeError("RegressionBuilder: z dimension mismatch");
  y_ = y0;
  z_ = z0;
  u_ = u0;
  z_filter_.prime(z0.transpose());
  y_filter_.prime(RowVector::Constant(1, y0));
  u_filter_.prime(RowVector::Constant(1, u0));
  if (realization_ == SwappingRealization::literal && r_ == 2) {
    v_filter_.prime(RowVector::Constant(1, y0));
    v_ = v_filter_.output_scalar(1);
    const RowVector R = gains_.G.transpose() * H_;
    s1_ = v_ * R * clock_.now();
    v_mid_.push(v_);
    s1_mid_.push(s1_);
  }
  y_mid_.push(y0);
  u_mid_.push(u0);
  z_mid_.push(z0);
  compute_outputs();
  mix_q_filter_.prime(RowVector::Constant(1, Bbar_q()));
  mix_s_filter_.prime(s_bar_);
  bq_mid_.push(Bbar_q());
  s_mid_.push(s_bar_);
  update_mixed();
  initialized_ = true;
}

void RegressionBuilder::step(double y1, const Vector& z1, double u1) {
  if (!initialized_) throw ConfigError("RegressionBuilder: step() before initialize()");
  if (z1.size() != n_) throw ShapeError("RegressionBuilder: z dimension mismatch");
  const Matrix E0 = clock_.now();
  const Matrix Em = clock_.midpoint();
  const Matrix E1 = clock_.next();
  const double ym = y_mid_.midpoint(y1);
  const Vector zm = z_mid_.midpoint(z1);
  const double um = u_mid_.midpoint(u1);

  z_filter_.step(z_.transpose(), zm.transpose(), z1.transpose(), dt_);
  y_filter_.step(Row::Constant(1, y_), Row::Constant(1, ym), Row::Constant(1, y1), dt_);
  u_filter_.step(Row::Constant(1, u_), Row::Constant(1, um), Row::Constant(1, u1), dt_);
  s0_filter_.step(measurable_row(z_, y_, E0), measurable_row(zm, ym, Em), measurable_row(z1, y1, E1), dt_);

  if (r_ == 2 && realization_ == SwappingRealization::literal) {
    // S1 = v G^T H E - 1/(p+lambda)[v G^T H Gamma E], v = lambda p/(p+lambda)[y]
    v_filter_.step_scalar(y_, ym, y1, dt_);
    const double v1 = v_filter_.output_scalar(1);
    const RowVector R = gains_.G.transpose() * H_;
    const RowVector RG = R * Gamma_;
    b_filter_.step(v_ * RG * E0, v_mid_.midpoint(v1) * RG * Em, v1 * RG * E1, dt_);
    const RowVector b = b_filter_.output(0) / config_.lambda;
    const RowVector s1_next = v1 * R * E1 - b;
    s1_filter_.step(s1_, s1_mid_.midpoint(s1_next), s1_next, dt_);
    s1_ = s1_next;
    v_ = v1;
    v_mid_.push(v1);
    s1_mid_.push(s1_next);
  } else if (r_ >= 2) {
    step_modulated(y_, ym, y1, dt_);
  }

  clock_.advance();
  ++steps_;
  t_ = static_cast<double>(steps_) * dt_;
  y_ = y1;
  z_ = z1;
  u_ = u1;
  y_mid_.push(y1);
  z_mid_.push(z1);
  u_mid_.push(u1);

  const double bq_prev = Bbar_q();
  const RowVector s_prev = s_bar_;
  compute_outputs();
  const double bq = Bbar_q();
  mix_q_filter_.step(Row::Constant(1, bq_prev), Row::Constant(1, bq_mid_.midpoint(bq)), Row::Constant(1, bq), dt_);
  mix_s_filter_.step(s_prev, s_mid_.midpoint(s_bar_), s_bar_, dt_);
  bq_mid_.push(bq);
  s_mid_.push(s_bar_);
  update_mixed();
}

RegressionSample RegressionBuilder::sample() const { return {t_, q_star_, m_, s_bar_, q_r_}; }

}  // namespace uiodrem
