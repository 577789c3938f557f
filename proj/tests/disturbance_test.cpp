#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "uiodrem/disturbance.hpp"
#include "uiodrem/numerics/lti_filter.hpp"

namespace uiodrem {
namespace {

using namespace std::complex_literals;

constexpr double kPi = std::numbers::pi;

GTEST_TEST(ComputeFbar, Pointwise) {
  RowVector s(2);
  s << 0.5, -1.0;
  Vector xi(2);
  xi << 2.0, 3.0;
  EXPECT_DOUBLE_EQ(compute_fbar(1.0, s, xi), 1.0 - (1.0 - 3.0));
  EXPECT_EQ(compute_fbar(0.0, RowVector::Zero(2), xi), 0.0);
  EXPECT_THROW(compute_fbar(0.0, s, Vector::Zero(3)), ShapeError);
}

GTEST_TEST(SinusoidEvaluator, AmplitudeAndPhase) {
  const SinusoidEvaluator s(2.0, 3.0, 4.0);
  EXPECT_DOUBLE_EQ(s.amplitude(), 5.0);
  for (double t : {0.0, 0.3, 1.7, 12.0}) {
    EXPECT_NEAR(s(t), 5.0 * std::sin(2.0 * t + s.phase()), 1e-12);
  }
  const SinusoidEvaluator pure(2.0, 5.0, 0.0);
  EXPECT_EQ(pure.phase(), 0.0);
  EXPECT_EQ(pure(0.0), 0.0);
  EXPECT_NEAR(pure(kPi / 4.0), 5.0, 1e-14);
}

GTEST_TEST(InverseFilterGain, HandValues) {
  EXPECT_EQ(inverse_filter_gain(0.0, 5.0, 3), std::complex<double>(1.0, 0.0));
  const auto g = inverse_filter_gain(5.0, 5.0, 2);  // (1 + i)^2 = 2i
  EXPECT_NEAR(g.real(), 0.0, 1e-15);
  EXPECT_NEAR(g.imag(), 2.0, 1e-15);
  const auto g1 = inverse_filter_gain(2.0, 5.0, 1);
  EXPECT_NEAR(std::abs(g1), std::sqrt(1.0 + 0.16), 1e-15);
  EXPECT_NEAR(std::arg(g1), std::atan(0.4), 1e-15);
  EXPECT_THROW(inverse_filter_gain(1.0, 0.0, 2), ConfigError);
  EXPECT_THROW(inverse_filter_gain(1.0, 1.0, 0), ConfigError);
}

GTEST_TEST(ReconstructF, ExampleValues) {
  // lambda^2/(p + lambda)^2 at 2i with lambda = 5: 25/(5 + 2i)^2.
  const SinusoidEvaluator filtered = filter_sinusoid(5.0, 0.0, 2.0, 5.0, 2);
  const std::complex<double> expected = 5.0 * 25.0 / ((5.0 + 2.0i) * (5.0 + 2.0i));
  EXPECT_NEAR(filtered.sine(), expected.real(), 1e-14);
  EXPECT_NEAR(filtered.cosine(), expected.imag(), 1e-14);
  const SinusoidEvaluator back = reconstruct_f(filtered.sine(), filtered.cosine(), 2.0, 5.0, 2);
  EXPECT_NEAR(back.sine(), 5.0, 1e-13);
  EXPECT_NEAR(back.cosine(), 0.0, 1e-13);
}

GTEST_TEST(ReconstructF, WideBandwidthIsIdentity) {
  // The correction is first order in r w / lambda.
  const double bound = 1.01 * 3.0 * 3.0 / 1e6 * std::hypot(1.2, 0.7);
  const SinusoidEvaluator s = reconstruct_f(1.2, -0.7, 3.0, 1e6, 3);
  EXPECT_LE(std::hypot(s.sine() - 1.2, s.cosine() + 0.7), bound);
  const SinusoidEvaluator wider = reconstruct_f(1.2, -0.7, 3.0, 1e8, 3);
  EXPECT_LE(std::hypot(wider.sine() - 1.2, wider.cosine() + 0.7), 1e-2 * bound);
}

// Drives the filter numerically with the sinusoid, fits sin/cos coefficients
// to the steady-state output by least squares and undoes the filter in
// closed form.
struct FitResult {
  double a1, a2;
  double model_error;
};

FitResult filter_and_fit(double a1, double a2, double omega, double lambda, int r) {
  const double dt = std::min(1e-3, 0.02 / lambda);
  LtiFilter<double> filt(lambda, r);
  auto u = [&](double t) {
    RowVectorX<double> row(1);
    row(0) = a1 * std::sin(omega * t) + a2 * std::cos(omega * t);
    return row;
  };
  const double period = 2.0 * kPi / omega;
  const double t_settle = 45.0 / lambda + 2.0 * r / lambda;
  const auto settle_steps = static_cast<std::size_t>(std::ceil(t_settle / dt));
  const auto fit_steps = static_cast<std::size_t>(std::ceil(period / dt));
  double t = 0.0;
  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  std::vector<std::pair<double, double>> samples;
  for (std::size_t k = 0; k < settle_steps + fit_steps; ++k) {
    filt.step(u(t), u(t + 0.5 * dt), u(t + dt), dt);
    t = static_cast<double>(k + 1) * dt;
    if (k >= settle_steps) {
      const Eigen::Vector2d psi(std::sin(omega * t), std::cos(omega * t));
      const double out = filt.output_scalar();
      normal += psi * psi.transpose();
      rhs += psi * out;
      samples.emplace_back(t, out);
    }
  }
  const Eigen::Vector2d c = normal.ldlt().solve(rhs);
  const SinusoidEvaluator model = filter_sinusoid(a1, a2, omega, lambda, r);
  double model_error = 0.0;
  for (const auto& [ts, out] : samples) model_error = std::max(model_error, std::abs(out - model(ts)));
  return {c(0), c(1), model_error};
}

GTEST_TEST(ReconstructF, RoundTripThroughSimulatedFilter) {
  for (double omega : {0.5, 2.0, 10.0}) {
    for (double lambda : {1.0, 5.0, 20.0}) {
      for (int r : {1, 2, 3}) {
        const double a1 = 1.3, a2 = -0.4;
        const FitResult fit = filter_and_fit(a1, a2, omega, lambda, r);
        EXPECT_LE(fit.model_error, 1e-6) << omega << " " << lambda << " " << r;
        const SinusoidEvaluator rec = reconstruct_f(fit.a1, fit.a2, omega, lambda, r);
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
          const double t = 0.01 * i * 2.0 * kPi / omega;
          worst = std::max(worst, std::abs(rec(t) - (a1 * std::sin(omega * t) + a2 * std::cos(omega * t))));
        }
        EXPECT_LE(worst, 1e-6) << omega << " " << lambda << " " << r;
      }
    }
  }
}

GTEST_TEST(AmplitudeEstimator, RecoversCoefficients) {
  const double omega = 2.0, dt = 1e-3;
  AmplitudeEstimator est(omega, AmplitudeConfig{});
  EXPECT_TRUE(est.clamped());
  auto fbar = [&](double t) { return 3.0 * std::sin(omega * t) - 1.0 * std::cos(omega * t); };
  bool unclamped = false;
  for (int k = 0; k < 20000; ++k) {
    const double t0 = k * dt;
    est.step(t0, fbar(t0), fbar(t0 + dt), dt, fbar(t0 + 0.5 * dt));
    if (!est.clamped()) {
      unclamped = true;
      ASSERT_NEAR(est.raw().k_hat(0), 3.0, 1e-8);
      ASSERT_NEAR(est.raw().k_hat(1), -1.0, 1e-8);
    }
  }
  ASSERT_TRUE(unclamped);
  EXPECT_NEAR(est.smoothed()(0), 3.0, 1e-6);
  EXPECT_NEAR(est.smoothed()(1), -1.0, 1e-6);
}

GTEST_TEST(AmplitudeEstimator, ZeroInputAndBadFrequency) {
  AmplitudeEstimator est(2.0, AmplitudeConfig{});
  for (int k = 0; k < 5000; ++k) est.step(k * 1e-3, 0.0, 0.0, 1e-3);
  EXPECT_EQ(est.raw().k_hat, Vector::Zero(2));
  EXPECT_THROW(AmplitudeEstimator(0.0, AmplitudeConfig{}), ConfigError);
  EXPECT_THROW(AmplitudeEstimator(-1.0, AmplitudeConfig{}), ConfigError);
}

}  // namespace
}  // namespace uiodrem
