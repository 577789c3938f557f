#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "support/regression_sim.hpp"
#include "uiodrem/drem.hpp"
#include "uiodrem/pipeline.hpp"
#include "uiodrem/scenario.hpp"

namespace uiodrem {
namespace {

using Extension = KreisselmeierExtension<double>;

GTEST_TEST(Kreisselmeier, StartsAtZeroAndValidates) {
  Extension ext(3, 0.5);
  EXPECT_EQ(ext.phi(), Matrix::Zero(3, 3));
  EXPECT_EQ(ext.y(), Vector::Zero(3));
  EXPECT_THROW(Extension(0, 0.5), ConfigError);
  EXPECT_THROW(Extension(2, -1.0), ConfigError);
  EXPECT_THROW(ext.step(Vector::Zero(2), 0.0, 0.1), ShapeError);
}

GTEST_TEST(Kreisselmeier, ZeroRegressorDecays) {
  const double h = 0.5, dt = 1e-3;
  Extension ext(2, h);
  Vector m(2);
  m << 1.0, -0.4;
  for (int k = 0; k < 1000; ++k) ext.step(m, 2.0, dt);
  const Matrix phi0 = ext.phi();
  const Vector y0 = ext.y();
  for (int k = 0; k < 3000; ++k) ext.step(Vector::Zero(2), 0.0, dt);
  EXPECT_LE((ext.phi() - std::exp(-h * 3.0) * phi0).norm(), 1e-12 * phi0.norm());
  EXPECT_LE((ext.y() - std::exp(-h * 3.0) * y0).norm(), 1e-12 * y0.norm());
}

GTEST_TEST(Kreisselmeier, ConstantRegressorClosedForm) {
  const double h = 0.5, dt = 1e-3;
  Extension ext(1, h);
  const Vector e1 = Vector::Ones(1);
  for (int k = 1; k <= 4000; ++k) {
    ext.step(e1, 1.0, dt);
    const double t = k * dt;
    const double expected = (1.0 - std::exp(-h * t)) / h;
    ASSERT_NEAR(ext.phi()(0, 0), expected, 1e-12);
    ASSERT_NEAR(ext.y()(0), expected, 1e-12);
  }
  EXPECT_NEAR(drem_extract(ext, 1e-3).k_hat(0), 1.0, 1e-14);
}

GTEST_TEST(DremExtract, IdentityAndColdStart) {
  Vector k(3);
  k << 1.5, -2.0, 0.25;
  const auto est = drem_extract<double>(Matrix::Identity(3, 3), k, 1e-3);
  EXPECT_EQ(est.delta, 1.0);
  EXPECT_EQ(est.k_hat, k);
  EXPECT_FALSE(est.clamped);

  const auto cold = drem_extract<double>(Matrix::Zero(3, 3), Vector::Zero(3), 1e-3);
  EXPECT_TRUE(cold.clamped);
  EXPECT_EQ(cold.k_hat, Vector::Zero(3));
  EXPECT_THROW(drem_extract<double>(Matrix::Identity(2, 2), Vector::Zero(2), 0.0), ConfigError);
}

GTEST_TEST(DremExtract, ClampedEntriesDivideByEpsilon) {
  Matrix phi = 1e-2 * Matrix::Identity(2, 2);  // det 1e-4 < eps
  Vector y(2);
  y << 1, 2;
  const auto est = drem_extract<double>(phi, y, 1e-3);
  EXPECT_TRUE(est.clamped);
  EXPECT_LE((est.k_hat - est.upsilon / 1e-3).norm(), 1e-15);
  EXPECT_LE((est.upsilon - adjugate(phi) * y).norm(), 1e-15);
}

GTEST_TEST(DremExtract, SinCosRegressor) {
  const double dt = 1e-3;
  Extension ext(2, 0.5);
  Vector k(2);
  k << 3, -1;
  bool seen = false;
  for (int i = 0; i < 10000; ++i) {
    const double t0 = i * dt, t1 = t0 + dt;
    const Vector m0 = (Vector(2) << std::sin(t0), std::cos(t0)).finished();
    const Vector m1 = (Vector(2) << std::sin(t1), std::cos(t1)).finished();
    ext.step(m0, m0.dot(k), m1, m1.dot(k), dt);
    const auto est = drem_extract(ext, 1e-3);
    if (est.delta > 1e-3) {
      seen = true;
      ASSERT_LE((est.k_hat - k).norm(), 1e-8) << "t = " << t1;
    }
  }
  EXPECT_TRUE(seen);
}

// Persistently exciting regressor with incommensurate frequencies.
Vector excitation(Eigen::Index d, double t) {
  Vector m(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double w = 0.7 + 0.9 * static_cast<double>(i) + 0.13 * static_cast<double>(i * i);
    m(i) = std::sin(w * t + 0.3 * static_cast<double>(i)) + (i == 0 ? 0.5 : 0.0);
  }
  return m;
}

GTEST_TEST(DremExtract, SyntheticOracleAllDimensions) {
  std::mt19937_64 rng(12);
  const double dt = 1e-3;
  for (Eigen::Index d = 2; d <= 6; ++d) {
    const Vector k = testing::random_matrix(rng, d, 1, 3.0);
    Extension ext(d, 0.5);
    bool unclamped = false;
    double worst_k = 0.0, worst_cramer = 0.0;
    for (int i = 0; i < 30000; ++i) {
      const double t0 = i * dt, t1 = t0 + dt;
      const Vector m0 = excitation(d, t0), m1 = excitation(d, t1);
      ext.step(m0, m0.dot(k), m1, m1.dot(k), dt);
      const auto est = drem_extract(ext, 1e-3);
      if (!est.clamped) {
        unclamped = true;
        worst_k = std::max(worst_k, (est.k_hat - k).cwiseAbs().maxCoeff());
        const Vector resid = ext.phi() * (est.upsilon / est.delta) - ext.y();
        worst_cramer = std::max(worst_cramer, resid.norm() / std::max(1e-300, ext.y().norm()));
      }
    }
    EXPECT_TRUE(unclamped) << "d = " << d;
    EXPECT_LE(worst_k, 1e-8) << "d = " << d;
    EXPECT_LE(worst_cramer, 1e-6) << "d = " << d;
  }
}

GTEST_TEST(Kreisselmeier, PsdAndMonotoneDeterminantWithoutForgetting) {
  const double dt = 1e-3;
  Extension ext(4, 0.0);
  double prev = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double t0 = i * dt;
    ext.step(excitation(4, t0), 0.0, excitation(4, t0 + dt), 0.0, dt);
    const double delta = determinant(ext.phi());
    EXPECT_GE(delta, prev - 1e-14 * std::abs(prev) - 1e-20);
    prev = delta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(ext.phi());
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
}

GTEST_TEST(Kreisselmeier, ExampleRegressionStreamStaysPsd) {
  const Scenario s = builtin_scenario("paper_sec5");
  testing::RegressionRig rig;
  rig.plant = s.plant;
  rig.generator = s.generator;
  rig.disturbance = s.disturbance;
  rig.gains = design_gains(s.plant.A, s.plant.B, s.plant.C, 2, s.uio);
  rig.x0 = s.x0;
  rig.z0 = s.z0;
  rig.config = s.regression;
  rig.dt = s.dt;
  Extension ext(5, 0.5);
  Vector m_prev;
  double q_prev = 0.0;
  double worst = 0.0;
  std::size_t count = 0;
  testing::run_regression(rig, 100000, [&](const PlantSimulator& sim, const RegressionBuilder& b) {
    if (sim.time() > 4.0) {
      ext.step(m_prev, q_prev, b.regressor(), b.q_star(), rig.dt);
      if (++count % 100 == 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(ext.phi());
        worst = std::min(worst, es.eigenvalues().minCoeff());
      }
    }
    m_prev = b.regressor();
    q_prev = b.q_star();
  });
  EXPECT_GE(worst, -1e-10);
}

GTEST_TEST(Smooth, DcGainStepAndZero) {
  const double dt = 1e-3, sigma = 0.7;
  std::vector<Vector> constant(20000, Vector::Constant(1, 2.5));
  const auto out = smooth(constant, sigma, dt);
  EXPECT_NEAR(out.back()(0), 2.5, 1e-3);

  std::vector<Vector> step(5000, Vector::Ones(1));
  step.front().setZero();
  const auto rise = smooth(step, sigma, dt);
  std::size_t i63 = 0;
  while (i63 < rise.size() && rise[i63](0) < 1.0 - std::exp(-1.0)) ++i63;
  EXPECT_NEAR(static_cast<double>(i63) * dt, 1.0 / sigma, 2e-3);

  std::vector<Vector> zeros(100, Vector::Zero(3));
  for (const auto& v : smooth(zeros, sigma, dt)) EXPECT_EQ(v, Vector::Zero(3));
}

GTEST_TEST(Smooth, SettleJumpsToSteadyState) {
  LowPass<double> lp(0.7, 2);
  const Vector v = (Vector(2) << 3.0, -4.0).finished();
  lp.settle(v);
  EXPECT_LE((lp.value() - v).norm(), 1e-15);
  lp.step(v, v, 0.1);
  EXPECT_LE((lp.value() - v).norm(), 1e-14);
}

GTEST_TEST(Freezer, HoldsValueFromFreezeTime) {
  Freezer f(1.0);
  const Vector a = Vector::Constant(2, 1.0);
  EXPECT_FALSE(f.offer(0.5, a, false));
  EXPECT_FALSE(f.frozen());
  EXPECT_TRUE(f.offer(1.0, a, false));
  EXPECT_FALSE(f.offer(1.5, Vector::Constant(2, 9.0), false));
  EXPECT_EQ(f.value(), a);
  EXPECT_EQ(*f.frozen_at(), 1.0);
  EXPECT_TRUE(f.warnings().empty());
}

GTEST_TEST(Freezer, DeferredWhileClamped) {
  Freezer f(0.0);
  EXPECT_FALSE(f.offer(0.0, Vector::Zero(1), true));
  EXPECT_FALSE(f.offer(0.1, Vector::Zero(1), true));
  EXPECT_TRUE(f.deferred());
  EXPECT_EQ(f.warnings().size(), 1u);
  EXPECT_TRUE(f.offer(0.2, Vector::Ones(1), false));
  EXPECT_EQ(*f.frozen_at(), 0.2);
  EXPECT_EQ(f.warnings().size(), 2u);
  EXPECT_THROW(Freezer(-1.0), ConfigError);
}

GTEST_TEST(ExtractParameters, Examples) {
  const Vector k = (Vector(5) << -1, -2, 4, -4, -8).finished();
  const auto p = extract_parameters(k, 2);
  EXPECT_EQ(p.xi0, (Vector(2) << -1, -2).finished());
  EXPECT_EQ(p.omega, 2.0);
  EXPECT_EQ(p.consistency, 0.0);
  EXPECT_FALSE(p.inconsistent);

  const auto zero = extract_parameters(Vector::Zero(5), 2);
  EXPECT_EQ(zero.xi0, Vector::Zero(2));
  EXPECT_EQ(zero.omega, 0.0);

  const auto bad = extract_parameters((Vector(5) << 1, 0, 4, 0, 0).finished(), 2);
  EXPECT_DOUBLE_EQ(bad.consistency, 4.0);
  EXPECT_TRUE(bad.inconsistent);
  EXPECT_FALSE(bad.diagnostic.empty());
}

GTEST_TEST(ExtractParameters, NegativeFrequencySquared) {
  const auto p = extract_parameters((Vector(3) << 1, -0.5, -0.5).finished(), 1);
  EXPECT_TRUE(p.negative_frequency);
  EXPECT_EQ(p.omega, 0.0);
  EXPECT_FALSE(p.diagnostic.empty());
  const auto tiny = extract_parameters((Vector(3) << 1, -1e-4, -1e-4).finished(), 1);
  EXPECT_FALSE(tiny.negative_frequency);
  EXPECT_EQ(tiny.omega, 0.0);
  EXPECT_THROW(extract_parameters(Vector::Zero(4), 2), ShapeError);
}

// Noise-free example: once the determinant clears the clamp the raw estimate
// is already within the warm-up residual of the truth and stays there.
GTEST_TEST(DremPipeline, FiniteTimeOnExample) {
  Scenario s = builtin_scenario("paper_sec5");
  s.noise.enabled = false;
  s.duration = 16.0;
  const RunResult run = run_scenario(s);
  const Trajectory& traj = run.trajectory;
  const Vector k_true = (Vector(5) << -1, -2, 4, -4, -8).finished();
  bool unclamped = false;
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.samples(); ++i) {
    if (traj.at(i, "clamped") == 0.0) unclamped = true;
    if (unclamped) worst = std::max(worst, (traj.vector_at(i, "k_raw") - k_true).cwiseAbs().maxCoeff());
  }
  ASSERT_TRUE(unclamped);
  EXPECT_LE(worst, 1e-2);
  ASSERT_TRUE(run.report.freeze_time.has_value());
  const Vector frozen = traj.vector_at(traj.samples() - 1, "xi_hat");
  EXPECT_LE((frozen - k_true.head(2)).norm(), 1e-4);
  const auto p = extract_parameters(traj.vector_at(traj.samples() - 1, "k_smooth"), 2);
  EXPECT_LE(p.consistency, 1e-3);
}

}  // namespace
}  // namespace uiodrem
