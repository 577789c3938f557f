#include "uiodrem/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "uiodrem/adaptive_observer.hpp"
#include "uiodrem/disturbance.hpp"
#include "uiodrem/drem.hpp"
#include "uiodrem/numerics/linalg.hpp"
#include "uiodrem/plant.hpp"
#include "uiodrem/regression.hpp"
#include "uiodrem/uio_runtime.hpp"

namespace uiodrem {

namespace {

double time_or_missing(const std::optional<double>& t) { return t ? *t : -1.0; }

void require_finite(const Vector& v, const char* what, double t) {
  if (!v.allFinite()) throw DivergenceError(std::string(what) + " is not finite", t);
}

}  // namespace

std::vector<std::pair<std::string, double>> RunReport::metrics() const {
  std::vector<std::pair<std::string, double>> rows = {
      {"first_unclamp_time", time_or_missing(first_unclamp_time)},
      {"freeze_time", time_or_missing(freeze_time)},
      {"amplitude_unclamp_time", time_or_missing(amplitude_unclamp_time)},
      {"omega_hat", omega_hat},
      {"omega_error", omega_error},
      {"xi_error", xi_error},
      {"consistency", consistency},
      {"f_error_tail_sup", f_error_tail_sup},
      {"x_error_final", x_error_final},
      {"x_error_tail_rms", x_error_tail_rms},
      {"samples", static_cast<double>(samples)},
      {"wall_clock_seconds", wall_clock_seconds},
  };
  for (Eigen::Index i = 0; i < xi_hat.size(); ++i) {
    rows.emplace_back("xi_hat[" + std::to_string(i) + "]", xi_hat(i));
  }
  return rows;
}

double default_warmup(const UioGains& gains, const RegressionConfig& config) {
  // slowest filter or chain transient, with room for its polynomial factor
  const double rate = std::min({std::abs(spectral_abscissa(gains.F)), config.lambda, config.lambda_r});
  return 20.0 / rate;
}

double tail_start(const Trajectory& traj) {
  if (traj.samples() == 0) return traj.t0();
  const double t_end = traj.time(traj.samples() - 1);
  return traj.t0() + 0.8 * (t_end - traj.t0());
}

RunReport compute_metrics(const Trajectory& traj, const Vector& xi0_true, double omega_true) {
  RunReport r;
  r.samples = traj.samples();
  if (r.samples == 0) return r;
  const std::size_t last = r.samples - 1;
  const auto clamped = traj.column("clamped");
  const auto frozen = traj.column("frozen");
  const auto amp_clamped = traj.column("amplitude_clamped");
  for (std::size_t i = 0; i < r.samples; ++i) {
    if (!r.first_unclamp_time && clamped[i] == 0.0) r.first_unclamp_time = traj.time(i);
    if (!r.freeze_time && frozen[i] == 1.0) r.freeze_time = traj.time(i);
    if (!r.amplitude_unclamp_time && amp_clamped[i] == 0.0) r.amplitude_unclamp_time = traj.time(i);
  }
  r.xi_hat = traj.vector_at(last, "xi_hat");
  r.omega_hat = traj.at(last, "omega_hat");
  r.consistency = traj.at(last, "consistency");
  r.xi_error = (r.xi_hat - xi0_true).norm();
  r.omega_error = std::abs(r.omega_hat - omega_true);
  r.x_error_final = traj.at(last, "xtilde_norm");

  const double t_tail = tail_start(traj);
  const auto f = traj.column("f");
  const auto f_hat = traj.column("f_hat");
  const auto xe = traj.column("xtilde_norm");
  double sup = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < r.samples; ++i) {
    if (traj.time(i) < t_tail) continue;
    sup = std::max(sup, std::abs(f_hat[i] - f[i]));
    sum_sq += xe[i] * xe[i];
    ++count;
  }
  r.f_error_tail_sup = sup;
  r.x_error_tail_rms = count ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
  return r;
}

RunResult run_scenario(const Scenario& s) {
  const auto wall_start = std::chrono::steady_clock::now();
  check_assumptions(s.plant, s.generator, s.disturbance).require();

  const Plant& plant = s.plant;
  const ExoGenerator& gen = s.generator;
  const Eigen::Index n = plant.order();
  const Eigen::Index mx = gen.state_dim();
  const int r = plant.relative_degree();
  const double dt = s.dt;
  const std::size_t steps = s.steps();
  const bool harmonic = !s.disturbance.harmonics.empty();
  const double omega_true = harmonic ? s.disturbance.harmonics.front().frequency : 0.0;

  RunResult result;
  result.gains = design_gains(plant.A, plant.B, plant.C, r, s.uio);
  const UioGains& gains = result.gains;
  result.warmup = s.warmup >= 0.0 ? s.warmup : default_warmup(gains, s.regression);

  PlantSimulator sim(plant, gen, s.disturbance, s.input, s.x0, dt);
  NoiseSource noise(s.noise);
  AuxChain chain(gains, s.z0);
  RegressionConfig reg_cfg = s.regression;
  reg_cfg.harmonics = harmonic ? 1 : 0;
  RegressionBuilder builder(plant, gains, gen, reg_cfg, dt);
  const Eigen::Index d = builder.regression_dim();

  KreisselmeierExtension<double> extension(d, s.drem.h);
  LowPass<double> smoother(s.drem.sigma, d);
  Freezer freezer(s.drem.freeze_time);
  DremEstimate<double> est = drem_extract(extension, s.drem.epsilon);
  std::optional<AmplitudeEstimator> amplitude;
  bool amplitude_running = false;
  double fbar_prev = 0.0;
  SinusoidEvaluator f_eval;

  AdaptiveObserver observer(plant, s.observer, s.xbar0);
  bool observer_on = s.observer.start == ObserverStart::immediate;
  const bool riccati = s.observer.mode == ObserverGainMode::riccati;

  Vector xi_hat = Vector::Zero(mx);
  double omega_hat = 0.0;
  double consistency = 0.0;
  std::vector<std::string> warnings;
  GeneratorClock clock(gen.Gamma, dt);

  Trajectory& traj = result.trajectory;
  traj = Trajectory(0.0, dt * s.log_every);
  traj.add_channel("x", n);
  traj.add_channel("y", 1);
  traj.add_channel("y_meas", 1);
  traj.add_channel("theta", n);
  traj.add_channel("f", 1);
  traj.add_channel("u", 1);
  traj.add_channel("z", n);
  traj.add_channel("q_star", 1);
  traj.add_channel("m", d);
  traj.add_channel("bbar_q", 1);
  traj.add_channel("s_bar", mx);
  traj.add_channel("delta", 1);
  traj.add_channel("k_raw", d);
  traj.add_channel("k_smooth", d);
  traj.add_channel("clamped", 1);
  traj.add_channel("frozen", 1);
  traj.add_channel("xi_hat", mx);
  traj.add_channel("omega_hat", 1);
  traj.add_channel("consistency", 1);
  traj.add_channel("fbar", 1);
  traj.add_channel("delta_a", 1);
  traj.add_channel("amplitude_clamped", 1);
  traj.add_channel("a_hat", 2);
  traj.add_channel("f_hat", 1);
  traj.add_channel("observer_on", 1);
  traj.add_channel("xbar", n);
  traj.add_channel("xtilde_norm", 1);
  traj.add_channel("theta_hat", n);
  // delta = f - f_hat + alpha x^T (theta - theta_hat), drives the observer error
  traj.add_channel("mismatch", 1);
  traj.add_channel("K", n);
  if (riccati) {
    traj.add_channel("N", n * n);
    traj.add_channel("N_min_eig", 1);
    traj.add_channel("N_asymmetry", 1);
    traj.add_channel("lyapunov", 1);
    traj.add_channel("gamma", 1);
    traj.add_channel("mu", 1);
  }
  traj.reserve(steps / static_cast<std::size_t>(s.log_every) + 1);

  double y_meas = sim.output() + noise.sample();
  double u = s.input(0.0);
  builder.initialize(y_meas, chain.z(), u);
  double fbar = 0.0;

  auto log_row = [&]() {
    RowWriter w(traj);
    const Vector& x = sim.state();
    const Vector xbar = observer.state();
    w.set("x", x).set("y", sim.output()).set("y_meas", y_meas).set("theta", sim.theta());
    w.set("f", sim.disturbance()).set("u", u).set("z", chain.z());
    w.set("q_star", builder.q_star()).set("m", builder.regressor()).set("bbar_q", builder.Bbar_q());
    w.set("s_bar", builder.S_bar()).set("delta", est.delta).set("k_raw", est.k_hat);
    w.set("k_smooth", smoother.value()).set("clamped", est.clamped ? 1.0 : 0.0);
    w.set("frozen", freezer.frozen() ? 1.0 : 0.0).set("xi_hat", xi_hat).set("omega_hat", omega_hat);
    w.set("consistency", consistency).set("fbar", fbar);
    if (amplitude) {
      w.set("delta_a", amplitude->raw().delta).set("amplitude_clamped", amplitude->clamped() ? 1.0 : 0.0);
      w.set("a_hat", amplitude->smoothed());
    } else {
      w.set("delta_a", 0.0).set("amplitude_clamped", 1.0).set("a_hat", Vector::Zero(2));
    }
    w.set("f_hat", f_eval(sim.time())).set("observer_on", observer_on ? 1.0 : 0.0);
    w.set("xbar", xbar).set("xtilde_norm", (x - xbar).norm()).set("K", observer.gain());
    const Vector theta_hat = freezer.frozen() ? Vector(gen.H * clock.now() * xi_hat) : Vector(Vector::Zero(n));
    const double f_hat = f_eval(sim.time());
    const double mismatch =
        sim.disturbance() - f_hat + s.plant.alpha(sim.output(), sim.time()) * x.dot(sim.theta() - theta_hat);
    w.set("theta_hat", theta_hat).set("mismatch", mismatch);
    if (riccati) {
      const Matrix& N = observer.riccati().N();
      const Vector e = x - xbar;
      w.set("N", N.reshaped());
      w.set("N_min_eig", observer.riccati().min_eigenvalue());
      w.set("N_asymmetry", observer.riccati().asymmetry());
      w.set("lyapunov", e.dot(N.ldlt().solve(e)));
      w.set("gamma", observer.schedule().gamma).set("mu", observer.schedule().mu);
    }
    traj.append_row(w.row());
  };
  log_row();

  for (std::size_t k = 1; k <= steps; ++k) {
    const double t0 = static_cast<double>(k - 1) * dt;
    const double t1 = static_cast<double>(k) * dt;
    const double y0 = y_meas;
    const double u0 = u;
    const Vector m0 = builder.regressor();
    const double q0 = builder.q_star();

    sim.step();
    require_finite(sim.state(), "plant state", t1);
    y_meas = sim.output() + noise.sample();
    u = s.input(t1);
    chain.step(y0, y_meas, dt);
    require_finite(chain.z(), "chain state", t1);
    builder.step(y_meas, chain.z(), u);

    // stage 1
    if (t0 >= result.warmup - 1e-12) extension.step(m0, q0, builder.regressor(), builder.q_star(), dt);
    const Vector k_prev = est.k_hat;
    est = drem_extract(extension, s.drem.epsilon);
    // the smoother tracks the raw estimate until it first unclamps
    if (est.clamped) {
      smoother.settle(est.k_hat);
    } else {
      smoother.step(k_prev, est.k_hat, dt);
    }
    if (!est.k_hat.allFinite()) throw DivergenceError("stage-1 estimate is not finite", t1);
    const bool just_frozen = freezer.offer(t1, smoother.value(), est.clamped);
    if (!freezer.frozen()) {
      // provisional values until the freeze
      const Vector ks = smoother.value();
      xi_hat = ks.head(mx);
      if (harmonic) {
        const ParameterEstimate p = extract_parameters(ks, mx);
        omega_hat = p.omega;
        consistency = p.consistency;
      }
    }
    if (just_frozen) {
      const Vector& kf = freezer.value();
      xi_hat = kf.head(mx);
      if (harmonic) {
        const ParameterEstimate p = extract_parameters(kf, mx);
        omega_hat = p.omega;
        consistency = p.consistency;
        if (!p.diagnostic.empty()) warnings.push_back("frozen estimate: " + p.diagnostic);
        if (p.omega > 0.0) {
          amplitude.emplace(p.omega, s.amplitude);
        } else {
          warnings.push_back("frozen frequency estimate is zero, amplitude stage skipped");
        }
      }
      if (s.observer.start == ObserverStart::deferred) observer_on = true;
    }

    // stage 2
    if (freezer.frozen()) fbar = compute_fbar(builder.Bbar_q(), builder.S_bar(), xi_hat);
    if (amplitude) {
      if (amplitude_running) amplitude->step(t0, fbar_prev, fbar, dt);
      amplitude_running = true;
      fbar_prev = fbar;
      const Vector a = amplitude->smoothed();
      f_eval = reconstruct_f(a(0), a(1), omega_hat, s.regression.lambda, r);
    }

    // observer over [t0, t1]; the estimates are those available at t1
    if (observer_on && !just_frozen) {
      const bool have_theta = freezer.frozen();
      auto theta_at = [&](const Matrix& E) { return have_theta ? Vector(gen.H * E * xi_hat) : Vector(Vector::Zero(n)); };
      const double tm = t0 + 0.5 * dt;
      ObserverSample s0{t0, y0, u0, theta_at(clock.now()), f_eval(t0)};
      ObserverSample sm{tm, 0.5 * (y0 + y_meas), s.input(tm), theta_at(clock.midpoint()), f_eval(tm)};
      ObserverSample s1{t1, y_meas, u, theta_at(clock.next()), f_eval(t1)};
      observer.step(s0, sm, s1);
    }
    clock.advance();

    if (k % static_cast<std::size_t>(s.log_every) == 0) log_row();
  }

  for (const auto& w : freezer.warnings()) warnings.push_back(w);
  if (!freezer.frozen()) warnings.push_back("stage-1 estimate never froze");

  Vector xi0_true = gen.xi0;
  result.report = compute_metrics(traj, xi0_true, omega_true);
  result.report.scenario = s.name;
  result.report.warnings = std::move(warnings);
  result.report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return result;
}

}  // namespace uiodrem
