#include "uiodrem/plant.hpp"

#include <cmath>
#include <sstream>

#include "uiodrem/numerics/expm.hpp"
#include "uiodrem/numerics/linalg.hpp"
#include "uiodrem/uio_design.hpp"

namespace uiodrem {

RegressorWeight RegressorWeight::one() { return {}; }

RegressorWeight RegressorWeight::affine_output(double offset, double slope) {
  return {"affine_output", [offset, slope](double y, double) { return offset + slope * y; }};
}

RegressorWeight RegressorWeight::custom(std::string kind, std::function<double(double, double)> fn) {
  return {std::move(kind), std::move(fn)};
}

int Plant::relative_degree() const {
  if (relative_degree_ == 0) relative_degree_ = uiodrem::relative_degree(A, B, C);
  return relative_degree_;
}

void ExoGenerator::validate() const {
  if (Gamma.rows() != Gamma.cols()) throw ShapeError("generator: Gamma must be square");
  if (H.cols() != Gamma.rows()) throw ShapeError("generator: H must have as many columns as Gamma has rows");
  if (xi0.size() != Gamma.rows()) throw ShapeError("generator: xi0 dimension must match Gamma");
}

double HarmonicDisturbance::operator()(double t) const {
  double sum = 0.0;
  for (const auto& h : harmonics) sum += h.amplitude * std::sin(h.frequency * t + h.phase);
  return sum;
}

void HarmonicDisturbance::validate() const {
  for (std::size_t i = 0; i < harmonics.size(); ++i) {
    if (!(harmonics[i].frequency > 0.0)) throw AssumptionError("disturbance: frequencies must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (harmonics[i].frequency == harmonics[j].frequency) {
        throw AssumptionError("disturbance: frequencies must be distinct");
      }
    }
  }
}

NoiseSource::NoiseSource(const NoiseModel& model)
    : model_(model), engine_(model.seed), normal_(model.mean, std::sqrt(std::max(model.variance, 0.0))) {
  if (model.variance < 0.0) throw ConfigError("noise: variance must be non-negative");
}

double NoiseSource::sample() {
  if (!model_.enabled) return 0.0;
  if (model_.variance == 0.0) return model_.mean;
  return normal_(engine_);
}

InputSignal InputSignal::zero() { return {}; }

InputSignal InputSignal::sine(double amplitude, double frequency) {
  return {"sine", [amplitude, frequency](double t) { return amplitude * std::sin(frequency * t); }};
}

InputSignal InputSignal::step(double value) {
  return {"step", [value](double t) { return t >= 0.0 ? value : 0.0; }};
}

double eval_disturbance(const HarmonicDisturbance& d, double t) { return d(t); }

Vector eval_theta(const ExoGenerator& g, double t) {
  g.validate();
  return g.H * matrix_exponential(g.Gamma, t) * g.xi0;
}

double output_derivative_oracle(const Plant& p, const Vector& x, int k) {
  const int r = p.relative_degree();
  if (k < 0 || k > r - 1) {
    throw ConfigError("output_derivative_oracle: order " + std::to_string(k) + " requires k <= r - 1 = " +
                      std::to_string(r - 1));
  }
  RowVector row = p.C;
  for (int i = 0; i < k; ++i) row = row * p.A;
  return row.dot(x);
}

GeneratorClock::GeneratorClock(const Matrix& gamma, double dt, double t0)
    : e_(t0 == 0.0 ? Matrix(Matrix::Identity(gamma.rows(), gamma.cols())) : matrix_exponential(gamma, t0)),
      half_(matrix_exponential(gamma, 0.5 * dt)),
      full_(matrix_exponential(gamma, dt)) {}

PlantSimulator::PlantSimulator(Plant plant, ExoGenerator generator, HarmonicDisturbance disturbance,
                               InputSignal input, Vector x0, double dt, double t0)
    : plant_(std::move(plant)),
      generator_(std::move(generator)),
      disturbance_(std::move(disturbance)),
      input_(std::move(input)),
      x_(std::move(x0)),
      dt_(dt),
      t_(t0),
      t0_(t0) {
  if (!(dt > 0.0)) throw ConfigError("PlantSimulator: dt must be positive");
  generator_.validate();
  if (x_.size() != plant_.order()) throw ShapeError("PlantSimulator: x0 dimension mismatch");
  if (generator_.output_dim() != plant_.order()) {
    throw ShapeError("PlantSimulator: theta dimension must equal the state dimension");
  }
  clock_ = GeneratorClock(generator_.Gamma, dt, t0);
}

Vector PlantSimulator::field(double t, const Vector& x, const Vector& theta) const {
  const double y = plant_.C.dot(x);
  const double w = input_(t) + plant_.alpha(y, t) * x.dot(theta) + disturbance_(t);
  return plant_.A * x + plant_.B * w;
}

void PlantSimulator::step() {
  const Vector xi0 = generator_.xi0;
  const Vector th0 = generator_.H * clock_.now() * xi0;
  const Vector thm = generator_.H * clock_.midpoint() * xi0;
  const Vector th1 = generator_.H * clock_.next() * xi0;
  const double t = t_;
  const double h = dt_;
  const Vector k1 = field(t, x_, th0);
  const Vector k2 = field(t + 0.5 * h, x_ + 0.5 * h * k1, thm);
  const Vector k3 = field(t + 0.5 * h, x_ + 0.5 * h * k2, thm);
  const Vector k4 = field(t + h, x_ + h * k3, th1);
  x_ += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  ++steps_;
  t_ = t0_ + static_cast<double>(steps_) * dt_;
  clock_.advance();
  if (!x_.allFinite()) throw DivergenceError("plant: non-finite state", t_);
}

Trajectory simulate_plant(const Plant& p, const ExoGenerator& g, const HarmonicDisturbance& d, const InputSignal& u,
                          const NoiseModel& noise, const Vector& x0, TimeSpan span, double dt) {
  check_assumptions(p, g, d).require();
  const std::size_t steps = step_count(span, dt);
  PlantSimulator sim(p, g, d, u, x0, dt, span.start);
  NoiseSource source(noise);
  const auto n = static_cast<std::size_t>(p.order());
  Trajectory traj(span.start, dt);
  traj.add_channel("x", n);
  traj.add_channel("y_clean");
  traj.add_channel("y_noisy");
  traj.add_channel("theta", static_cast<std::size_t>(g.output_dim()));
  traj.add_channel("f");
  traj.reserve(steps + 1);
  auto record = [&] {
    const double y = sim.output();
    RowWriter row(traj);
    row.set("x", sim.state()).set("y_clean", y).set("y_noisy", y + source.sample());
    row.set("theta", sim.theta()).set("f", sim.disturbance());
    traj.append_row(row.row());
  };
  record();
  for (std::size_t k = 0; k < steps; ++k) {
    sim.step();
    record();
  }
  return traj;
}

bool AssumptionReport::ok() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool AssumptionReport::passed(const std::string& name) const {
  const auto* c = find(name);
  return c != nullptr && c->passed;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.detail.empty()) os << ": " << c.detail;
    os << "\n";
  }
  for (const auto& w : warnings) os << "warn " << w << "\n";
  return os.str();
}

void AssumptionReport::require() const {
  if (ok()) return;
  std::ostringstream os;
  os << "assumption check failed:";
  for (const auto& c : checks) {
    if (!c.passed) os << " [" << c.name << ": " << c.detail << "]";
  }
  throw AssumptionError(os.str());
}

AssumptionReport check_assumptions(const Plant& p, const ExoGenerator& g, const HarmonicDisturbance& d) {
  AssumptionReport report;
  auto add = [&](const char* name, bool passed, std::string detail) {
    report.checks.push_back({name, passed, std::move(detail)});
  };

  try {
    d.validate();
    add(checks::kDisturbance, true, std::to_string(d.harmonics.size()) + " harmonic(s)");
  } catch (const Error& e) {
    add(checks::kDisturbance, false, e.what());
  }

  const Eigen::Index n = p.A.rows();
  const bool shapes_ok = p.A.cols() == n && p.B.size() == n && p.C.size() == n && n > 0;
  if (!shapes_ok) {
    add(checks::kObservability, false, "inconsistent A, B, C dimensions");
    return report;
  }

  report.observability_rank = numerical_rank(observability_matrix<double>(p.A, Matrix(p.C)), 1e-10);
  add(checks::kObservability, report.observability_rank == n,
      "rank " + std::to_string(report.observability_rank) + " of " + std::to_string(n));

  const bool b_ok = p.B.norm() > 0.0;
  const bool c_ok = p.C.norm() > 0.0;
  add(checks::kRank, b_ok && c_ok,
      std::string(b_ok ? "" : "B is rank deficient; ") + (c_ok ? "" : "C is rank deficient"));

  try {
    report.relative_degree = relative_degree(p.A, p.B, p.C);
    add(checks::kRelativeDegree, true, "r = " + std::to_string(report.relative_degree));
  } catch (const Error& e) {
    add(checks::kRelativeDegree, false, e.what());
  }

  try {
    g.validate();
    add(checks::kGenerator, true, "m = " + std::to_string(g.state_dim()) + ", w = " + std::to_string(g.output_dim()));
    const double abscissa = spectral_abscissa(g.Gamma);
    if (abscissa > 1e-12) {
      report.warnings.push_back("generator spectral abscissa " + std::to_string(abscissa) +
                                " > 0, theta may grow on the horizon");
    }
  } catch (const Error& e) {
    add(checks::kGenerator, false, e.what());
  }

  add(checks::kRegressor, g.H.rows() == n,
      "theta dimension " + std::to_string(g.H.rows()) + " must equal state dimension " + std::to_string(n));
  return report;
}

}  // namespace uiodrem
