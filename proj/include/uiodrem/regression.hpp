#pragma once

#include <vector>

#include "uiodrem/numerics/lti_filter.hpp"
#include "uiodrem/numerics/midpoint.hpp"
#include "uiodrem/plant.hpp"
#include "uiodrem/uio_design.hpp"

namespace uiodrem {

/// How the filtered products y^(k) R e^{Gamma t} are made measurable.
enum class SwappingRealization {
  /// literal for r <= 2, modulated above
  automatic,
  /// one swapping step per derivative, v = lambda p/(p + lambda)[y]; r <= 2 only
  literal,
  /// filters run in the frame demodulated by e^{Gamma t}, any r
  modulated,
};

struct RegressionConfig {
  double lambda = 5.0;
  double lambda_r = 5.0;
  /// Left annihilator row with Bbar B = 1.
  RowVector Bbar;
  SwappingRealization swapping = SwappingRealization::automatic;
  /// Number of disturbance harmonics, 0 or 1. With 0 the regression is the
  /// unmixed Bbar q_r = S_bar xi0 and k = xi0.
  int harmonics = 1;
};

/// One sample of the regression q* = m^T k with k = [xi0; w^2; w^2 xi0].
struct RegressionSample {
  double t = 0.0;
  double q_star = 0.0;
  Vector m;
  RowVector S_bar;
  Vector q_r;
};

/// Streaming builder of the measurable linear regression. Consumes y, the
/// chain variable z_r and the known input u on the simulation grid and
/// maintains:
///   q_r   = lambda^r/(p+lambda)^r [xhat' - A xhat - B u] realized with proper
///           filters only, where xhat = z_r + sum_k F^{r-1-k} G y^(k),
///   S_bar = lambda^r/(p+lambda)^r [xhat^T H e^{Gamma t}] with the derivative
///           terms moved across the filter by the swapping lemma,
/// so that Bbar q_r = S_bar xi0 + fbar after transients, and then mixes with
/// the second-order annihilator filter lambda_r^2/(p+lambda_r)^2 to fold the
/// unknown frequency into the regression.
///
/// Only the unit regressor weight (phi = x) is supported.
class RegressionBuilder {
 public:
  RegressionBuilder(const Plant& plant, const UioGains& gains, const ExoGenerator& generator, RegressionConfig config,
                    double dt);

  /// Sets the sample-0 inputs; must be called once before step().
  void initialize(double y0, const Vector& z0, double u0 = 0.0);
  /// Advances one grid step to the given new samples.
  void step(double y1, const Vector& z1, double u1 = 0.0);

  double time() const noexcept { return t_; }
  const RowVector& S_bar() const noexcept { return s_bar_; }
  const Vector& q_r() const noexcept { return q_r_; }
  double Bbar_q() const { return config_.Bbar.dot(q_r_); }
  double q_star() const noexcept { return q_star_; }
  const Vector& regressor() const noexcept { return m_; }
  RegressionSample sample() const;

  Eigen::Index regression_dim() const noexcept { return config_.harmonics == 0 ? xi_dim_ : 2 * xi_dim_ + 1; }
  const RegressionConfig& config() const noexcept { return config_; }
  SwappingRealization realization() const noexcept { return realization_; }

  /// True regression vector [xi0; w^2; w^2 xi0].
  static Vector true_parameters(const Vector& xi0, double omega);

 private:
  using Row = RowVector;

  void compute_outputs();
  void update_mixed();
  RowVector measurable_row(const Vector& z, double y, const Matrix& E) const;
  RowVector modulated_derivative_row(const Matrix& E) const;
  void step_modulated(double y0, double ym, double y1, double dt);

  Matrix A_;
  Vector B_;
  Matrix H_;
  Matrix Gamma_;
  UioGains gains_;
  std::vector<Vector> powers_;  // F^k G
  RegressionConfig config_;
  SwappingRealization realization_;
  double dt_;
  int r_;
  Eigen::Index n_;
  Eigen::Index xi_dim_;

  GeneratorClock clock_;
  double t_ = 0.0;
  std::size_t steps_ = 0;
  bool initialized_ = false;

  // q_r filters
  LtiFilter<double> z_filter_;
  LtiFilter<double> y_filter_;
  LtiFilter<double> u_filter_;
  // S0 = lambda^r/(p+lambda)^r [(z + F^{r-1} G y)^T H E]
  LtiFilter<double> s0_filter_;
  // literal swapping (r = 2)
  LtiFilter<double> v_filter_;
  LtiFilter<double> b_filter_;
  LtiFilter<double> s1_filter_;
  Row s1_;
  double v_ = 0.0;
  // modulated swapping
  std::vector<Matrix> w_;  // W_1..W_r
  Matrix decay_;           // lambda I + Gamma
  std::vector<Matrix> w_weights_;  // per W_j, summed R_k P_{k,j}
  // mixing
  LtiFilter<double> mix_q_filter_;
  LtiFilter<double> mix_s_filter_;

  // mid-step reconstruction of the sampled streams
  MidpointEstimator<double> y_mid_;
  MidpointEstimator<double> u_mid_;
  MidpointEstimator<Vector> z_mid_;
  MidpointEstimator<double> v_mid_;
  MidpointEstimator<RowVector> s1_mid_;
  MidpointEstimator<double> bq_mid_;
  MidpointEstimator<RowVector> s_mid_;

  // samples at the current grid point
  double y_ = 0.0;
  double u_ = 0.0;
  Vector z_;
  RowVector s_bar_;
  Vector q_r_;
  double q_star_ = 0.0;
  Vector m_;
};

}  // namespace uiodrem
