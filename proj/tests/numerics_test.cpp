#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "uiodrem/numerics/expm.hpp"
#include "uiodrem/numerics/linalg.hpp"
#include "uiodrem/numerics/lti_filter.hpp"
#include "uiodrem/numerics/pole_place.hpp"
#include "uiodrem/numerics/rk4.hpp"

namespace uiodrem {
namespace {

using testing::cofactor_determinant;
using testing::series_expm;

GTEST_TEST(Determinant, SmallClosedForms) {
  EXPECT_EQ(determinant(Matrix::Identity(2, 2)), 1.0);
  Matrix nil(2, 2);
  nil << 0, 1, 0, 0;
  EXPECT_EQ(determinant(nil), 0.0);
  Matrix m3(3, 3);
  // clang-format off
  m3 << 2, -1, 0,
        1,  3, 4,
        0,  5, 6;
  // clang-format on
  EXPECT_NEAR(determinant(m3), cofactor_determinant(m3), 1e-12);
}

GTEST_TEST(Determinant, MatchesCofactorExpansion) {
  std::mt19937_64 rng(7);
  for (int n = 4; n <= 6; ++n) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix m = testing::random_matrix(rng, n, n, 2.0);
      const double ref = cofactor_determinant(m);
      EXPECT_NEAR(determinant(m), ref, 1e-10 * std::max(1.0, std::abs(ref))) << "n = " << n;
    }
  }
}

GTEST_TEST(Determinant, RejectsNonSquare) { EXPECT_THROW(determinant(Matrix::Zero(2, 3)), ShapeError); }

GTEST_TEST(Adjugate, ClosedFormsAndIdentity) {
  EXPECT_TRUE(adjugate(Matrix::Identity(3, 3)).isApprox(Matrix::Identity(3, 3)));
  Matrix m(2, 2);
  m << 1.5, -2, 3, 4;
  Matrix expected(2, 2);
  expected << 4, 2, -3, 1.5;
  EXPECT_EQ(adjugate(m), expected);
  EXPECT_THROW(adjugate(Matrix::Zero(3, 2)), ShapeError);
}

GTEST_TEST(Adjugate, DefiningIdentityUpToSix) {
  std::mt19937_64 rng(11);
  for (int n = 1; n <= 6; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const Matrix m = testing::well_conditioned(rng, n);
      const Matrix lhs = m * adjugate(m);
      const Matrix rhs = determinant(m) * Matrix::Identity(n, n);
      EXPECT_LE((lhs - rhs).norm(), 1e-9 * std::max(1.0, m.norm()) * std::max(1.0, std::abs(determinant(m))));
    }
  }
}

GTEST_TEST(Adjugate, SingularMatrixStillSatisfiesIdentity) {
  Matrix m(4, 4);
  // clang-format off
  m << 1, 2, 3, 4,
       2, 4, 6, 8,
       0, 1, 0, 1,
       5, 0, 2, 1;
  // clang-format on
  EXPECT_NEAR(determinant(m), 0.0, 1e-12);
  EXPECT_LE((m * adjugate(m)).norm(), 1e-9 * m.norm());
}

GTEST_TEST(MatrixExponential, ZeroTimeIsIdentity) {
  std::mt19937_64 rng(3);
  const Matrix g = testing::random_matrix(rng, 4, 4);
  EXPECT_TRUE(matrix_exponential(g, 0.0).isApprox(Matrix::Identity(4, 4)));
}

GTEST_TEST(MatrixExponential, HarmonicGenerator) {
  Matrix g(2, 2);
  g << 0, 1, -36, 0;
  for (double t : {0.1, 0.37, 1.0, 2.5, 10.0}) {
    Matrix expected(2, 2);
    // clang-format off
    expected << std::cos(6 * t),      std::sin(6 * t) / 6,
                -6 * std::sin(6 * t), std::cos(6 * t);
    // clang-format on
    EXPECT_LE((matrix_exponential(g, t) - expected).cwiseAbs().maxCoeff(), 1e-10) << "t = " << t;
  }
}

GTEST_TEST(MatrixExponential, Diagonal) {
  Matrix g = Matrix::Zero(2, 2);
  g(0, 0) = -1.3;
  g(1, 1) = 0.4;
  const Matrix e = matrix_exponential(g, 2.0);
  EXPECT_NEAR(e(0, 0), std::exp(-2.6), 1e-14);
  EXPECT_NEAR(e(1, 1), std::exp(0.8), 1e-14);
  EXPECT_EQ(e(0, 1), 0.0);
}

GTEST_TEST(MatrixExponential, AgreesWithSeries) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = testing::random_matrix(rng, 4, 4);
    const double t = 1.5;
    const Matrix ref = series_expm(g, t);
    EXPECT_LE((matrix_exponential(g, t) - ref).norm(), 1e-12 * std::max(1.0, ref.norm()));
  }
}

GTEST_TEST(MatrixExponential, Semigroup) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = testing::random_matrix(rng, 4, 4);
    const double s = u(rng), t = u(rng);
    const Matrix lhs = matrix_exponential(g, s + t);
    const Matrix rhs = matrix_exponential(g, s) * matrix_exponential(g, t);
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * std::max(1.0, lhs.norm()));
  }
}

GTEST_TEST(PolePlacement, DoubleIntegrator) {
  Matrix m(2, 2);
  m << 0, 1, 0, 0;
  Matrix c(1, 2);
  c << 1, 0;
  const Vector L = place_observer<double>(m, c, {{-15, 0}, {-10, 0}});
  // char(M - L C) = p^2 + L0 p + L1
  EXPECT_NEAR(L(0), 25.0, 1e-10);
  EXPECT_NEAR(L(1), 150.0, 1e-10);
  EXPECT_TRUE(testing::same_spectrum(eigenvalues(Matrix(m - L * c)), {{-15, 0}, {-10, 0}}, 1e-8));
}

GTEST_TEST(PolePlacement, OwnEigenvaluesGiveZeroGain) {
  Matrix m(2, 2);
  m << -1, 1, 0, -3;
  Matrix c(1, 2);
  c << 1, 0;
  const Vector L = place_observer<double>(m, c, {{-1, 0}, {-3, 0}});
  EXPECT_LE(L.norm(), 1e-12);
}

GTEST_TEST(PolePlacement, CompanionVieta) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = 1;
  m(1, 2) = 1;
  Matrix c(1, 3);
  c << 1, 0, 0;
  const Vector L = place_observer<double>(m, c, {{-1, 0}, {-2, 0}, {-3, 0}});
  const auto poly = characteristic_polynomial(Matrix(m - L * c));
  ASSERT_EQ(poly.size(), 4u);
  EXPECT_NEAR(poly[0], 1.0, 1e-12);
  EXPECT_NEAR(poly[1], 6.0, 1e-10);
  EXPECT_NEAR(poly[2], 11.0, 1e-10);
  EXPECT_NEAR(poly[3], 6.0, 1e-10);
}

GTEST_TEST(PolePlacement, RandomSpectraMatch) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const Matrix m = testing::random_matrix(rng, n, n);
    const Matrix c = testing::random_matrix(rng, 1, n);
    std::vector<std::complex<double>> poles = testing::real_poles(rng, n);
    if (n >= 2 && trial % 2 == 0) {
      poles[0] = {-2.0, 1.5};
      poles[1] = {-2.0, -1.5};
    }
    const Vector L = place_observer<double>(m, c, poles);
    EXPECT_TRUE(testing::same_spectrum(eigenvalues(Matrix(m - L * c)), poles, 1e-7)) << "trial " << trial;
  }
}

GTEST_TEST(PolePlacement, Errors) {
  Matrix m = Matrix::Identity(2, 2);
  Matrix c(1, 2);
  c << 1, 0;
  EXPECT_THROW(place_observer<double>(m, c, {{-1, 0}, {-2, 0}}), DesignError);
  Matrix m2(2, 2);
  m2 << 0, 1, 0, 0;
  EXPECT_THROW(place_observer<double>(m2, c, {{-1, 1}, {-2, 0}}), DesignError);
}

double simulate_filter(LtiFilter<double> f, double u, double t_end, double dt) {
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  double y = f.output_scalar();
  for (std::size_t k = 0; k < steps; ++k) y = step_filter(f, u, dt);
  return y;
}

GTEST_TEST(LtiFilter, DcGains) {
  for (int r = 1; r <= 4; ++r) {
    const double lambda = 5.0;
    const double y0 = simulate_filter(make_filter(lambda, r, 0), 3.0, 10.0 / lambda + r, 1e-3);
    EXPECT_NEAR(y0, 3.0, 0.03) << "r = " << r;
    const double yr = simulate_filter(make_filter(lambda, r, r), 3.0, 10.0 / lambda + r, 1e-3);
    EXPECT_NEAR(yr, 0.0, 0.03) << "r = " << r;
  }
}

GTEST_TEST(LtiFilter, SecondOrderStepResponse) {
  auto f = make_filter(5.0, 2, 0);
  const double dt = 1e-4;
  double worst = 0.0;
  for (int k = 1; k <= 20000; ++k) {
    const double y = step_filter(f, 1.0, dt);
    const double t = k * dt;
    worst = std::max(worst, std::abs(y - (1.0 - std::exp(-5.0 * t) * (1.0 + 5.0 * t))));
  }
  EXPECT_LE(worst, 1e-6);
}

GTEST_TEST(LtiFilter, Linearity) {
  auto f1 = make_filter(3.0, 3, 1);
  auto f2 = make_filter(3.0, 3, 1);
  const double a = 4.0;  // power of two keeps scaling exact
  for (int k = 0; k < 1000; ++k) {
    const double u = std::sin(0.01 * k) + 0.3;
    const double y1 = step_filter(f1, u, 1e-3);
    const double y2 = step_filter(f2, a * u, 1e-3);
    EXPECT_EQ(y2, a * y1);
  }
}

GTEST_TEST(LtiFilter, ImproperRequestRejected) {
  EXPECT_THROW(make_filter(1.0, 2, 3), ConfigError);
  EXPECT_THROW(make_filter(-1.0, 2, 0), ConfigError);
  EXPECT_THROW(make_filter(1.0, 0, 0), ConfigError);
}

GTEST_TEST(LtiFilter, BiproperOutputOfPrimedFilter) {
  // lambda p/(p + lambda) on a step jumps to lambda at t = 0 and decays as lambda e^{-lambda t}
  LtiFilter<double> f(2.0, 1, 1, 1);
  f.prime(RowVector::Constant(1, 1.0));
  EXPECT_DOUBLE_EQ(f.output_scalar(1), 2.0);
  const double dt = 1e-3;
  for (int k = 1; k <= 1000; ++k) f.step_scalar(1.0, 1.0, dt);
  EXPECT_NEAR(f.output_scalar(1), 2.0 * std::exp(-2.0), 1e-9);
}

GTEST_TEST(Rk4, ConstantField) {
  const auto traj = integrate_rk4([](double, const Vector& x) { return Vector(Vector::Zero(x.size())); },
                                  Vector::Constant(2, 1.5), {0.0, 1.0}, 0.1);
  for (std::size_t i = 0; i < traj.samples(); ++i) EXPECT_EQ(traj.vector_at(i, "x"), Vector::Constant(2, 1.5));
}

double decay_error(double dt) {
  const auto traj = integrate_rk4([](double, const Vector& x) { return Vector(-x); }, Vector::Ones(1), {0.0, 5.0}, dt);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.samples(); ++i) {
    worst = std::max(worst, std::abs(traj.at(i, "x") - std::exp(-traj.time(i))));
  }
  return worst;
}

GTEST_TEST(Rk4, ExponentialDecay) { EXPECT_LE(decay_error(1e-3), 1e-8); }

GTEST_TEST(Rk4, FourthOrderConvergence) {
  const double e1 = decay_error(0.1);
  const double e2 = decay_error(0.05);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 12.0);
  EXPECT_LE(ratio, 20.0);
}

GTEST_TEST(Rk4, OscillatorEnergyDrift) {
  const double w = 2.0;
  const double period = 2.0 * M_PI / w;
  const double dt = period / 1000.0;
  const auto field = [w](double, const Vector& x) {
    Vector d(2);
    d << x(1), -w * w * x(0);
    return d;
  };
  Vector x(2);
  x << 1.0, 0.0;
  const double e0 = 0.5 * (x(1) * x(1) + w * w * x(0) * x(0));
  for (int k = 0; k < 100 * 1000; ++k) x = rk4_step<double>(field, k * dt, x, dt);
  const double e1 = 0.5 * (x(1) * x(1) + w * w * x(0) * x(0));
  EXPECT_LE(std::abs(e1 - e0) / e0, 1e-6);
}

GTEST_TEST(Rk4, DivergenceReportsTime) {
  try {
    integrate_rk4([](double, const Vector& x) { return Vector(x.array().square() * 1e6); }, Vector::Ones(1),
                  {0.0, 10.0}, 0.01);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), 10.0);
  }
}

}  // namespace
}  // namespace uiodrem
