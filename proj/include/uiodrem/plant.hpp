#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "uiodrem/numerics/rk4.hpp"
#include "uiodrem/numerics/trajectory.hpp"
#include "uiodrem/numerics/types.hpp"

namespace uiodrem {

/// Scalar weight alpha(y, t) multiplying the state in the uncertain term
/// alpha(y, t) x^T theta(t).
struct RegressorWeight {
  std::string kind = "one";
  std::function<double(double y, double t)> fn = [](double, double) { return 1.0; };

  double operator()(double y, double t) const { return fn(y, t); }
  bool is_unit() const { return kind == "one"; }

  static RegressorWeight one();
  /// alpha(y) = offset + slope * y.
  static RegressorWeight affine_output(double offset, double slope);
  static RegressorWeight custom(std::string kind, std::function<double(double, double)> fn);
};

/// SISO plant x' = A x + B [u + alpha(y, t) x^T theta(t) + f(t)], y = C x.
struct Plant {
  Matrix A;
  Vector B;
  RowVector C;
  RegressorWeight alpha = RegressorWeight::one();

  Eigen::Index order() const noexcept { return A.rows(); }
  /// Cached on first call.
  int relative_degree() const;

 private:
  mutable int relative_degree_ = 0;
};

/// Linear parameter generator theta(t) = H xi(t), xi' = Gamma xi.
struct ExoGenerator {
  Matrix H;
  Matrix Gamma;
  Vector xi0;

  Eigen::Index state_dim() const noexcept { return Gamma.rows(); }
  Eigen::Index output_dim() const noexcept { return H.rows(); }
  void validate() const;
};

struct Harmonic {
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
};

/// f(t) = sum_i R_i sin(w_i t + phi_i).
struct HarmonicDisturbance {
  std::vector<Harmonic> harmonics;

  double operator()(double t) const;
  void validate() const;
};

struct NoiseModel {
  bool enabled = false;
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t seed = 0;
};

/// Seeded Gaussian measurement noise, one draw per output sample.
class NoiseSource {
 public:
  explicit NoiseSource(const NoiseModel& model);
  double sample();

 private:
  NoiseModel model_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Known input u(t).
struct InputSignal {
  std::string kind = "zero";
  std::function<double(double)> fn = [](double) { return 0.0; };

  double operator()(double t) const { return fn(t); }
  static InputSignal zero();
  static InputSignal sine(double amplitude, double frequency);
  static InputSignal step(double value);
};

double eval_disturbance(const HarmonicDisturbance& d, double t);

/// H e^{Gamma t} xi0.
Vector eval_theta(const ExoGenerator& g, double t);

/// C A^k x, the k-th output derivative, valid for k <= r - 1 where the
/// input does not yet appear.
double output_derivative_oracle(const Plant& p, const Vector& x, int k);

/// Propagates E(t) = e^{Gamma t} on a uniform grid with one constant
/// per-step factor, so no fresh exponential is needed per sample. The
/// half-step factor gives E at RK4 midpoints.
class GeneratorClock {
 public:
  GeneratorClock() = default;
  GeneratorClock(const Matrix& gamma, double dt, double t0 = 0.0);

  const Matrix& now() const noexcept { return e_; }
  Matrix midpoint() const { return e_ * half_; }
  Matrix next() const { return e_ * full_; }
  void advance() { e_ = e_ * full_; }
  const Matrix& step_factor() const noexcept { return full_; }

 private:
  Matrix e_;
  Matrix half_;
  Matrix full_;
};

/// Streaming ground-truth simulator for the plant driven by the generator,
/// the disturbance and a known input.
class PlantSimulator {
 public:
  PlantSimulator(Plant plant, ExoGenerator generator, HarmonicDisturbance disturbance, InputSignal input,
                 Vector x0, double dt, double t0 = 0.0);

  double time() const noexcept { return t_; }
  const Vector& state() const noexcept { return x_; }
  double output() const { return plant_.C.dot(x_); }
  Vector theta() const { return generator_.H * clock_.now() * generator_.xi0; }
  double disturbance() const { return disturbance_(t_); }
  double input() const { return input_(t_); }
  const Plant& plant() const noexcept { return plant_; }
  const ExoGenerator& generator() const noexcept { return generator_; }
  const HarmonicDisturbance& harmonic_disturbance() const noexcept { return disturbance_; }
  const InputSignal& input_signal() const noexcept { return input_; }
  const GeneratorClock& clock() const noexcept { return clock_; }

  /// Right-hand side of the plant for a given theta sample.
  Vector field(double t, const Vector& x, const Vector& theta) const;

  void step();

 private:
  Plant plant_;
  ExoGenerator generator_;
  HarmonicDisturbance disturbance_;
  InputSignal input_;
  Vector x_;
  double dt_;
  double t_;
  std::size_t steps_ = 0;
  double t0_;
  GeneratorClock clock_;
};

/// Trajectory with channels x, y_clean, y_noisy, theta, f.
Trajectory simulate_plant(const Plant& p, const ExoGenerator& g, const HarmonicDisturbance& d, const InputSignal& u,
                          const NoiseModel& noise, const Vector& x0, TimeSpan span, double dt);

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  std::vector<std::string> warnings;
  Eigen::Index observability_rank = 0;
  int relative_degree = 0;

  bool ok() const;
  const AssumptionCheck* find(const std::string& name) const;
  bool passed(const std::string& name) const;
  /// Throws AssumptionError naming every violated check.
  void require() const;
  std::string summary() const;
};

/// Runs every structural check: harmonic disturbance, observability of
/// (A, C), rank of B and C, finite relative degree, generator dimensions and
/// regressor-dimension compatibility. Never throws; inspect the report.
AssumptionReport check_assumptions(const Plant& p, const ExoGenerator& g, const HarmonicDisturbance& d);

namespace checks {
inline constexpr const char* kDisturbance = "harmonic_disturbance";
inline constexpr const char* kObservability = "observability";
inline constexpr const char* kRank = "input_output_rank";
inline constexpr const char* kRelativeDegree = "relative_degree";
inline constexpr const char* kGenerator = "generator_dimensions";
inline constexpr const char* kRegressor = "regressor_dimension";
}  // namespace checks

}  // namespace uiodrem
