#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uiodrem/numerics/trajectory.hpp"
#include "uiodrem/regression.hpp"
#include "uiodrem/scenario.hpp"
#include "uiodrem/uio_design.hpp"

namespace uiodrem {

/// Summary of a pipeline run. Every field except the wall clock and the
/// warnings is recomputable from the logged trajectory (compute_metrics).
struct RunReport {
  std::string scenario;
  std::optional<double> first_unclamp_time;
  std::optional<double> freeze_time;
  std::optional<double> amplitude_unclamp_time;
  Vector xi_hat;
  double omega_hat = 0.0;
  double consistency = 0.0;
  double xi_error = 0.0;
  double omega_error = 0.0;
  /// sup |f_hat - f| over the last 20% of the horizon
  double f_error_tail_sup = 0.0;
  double x_error_final = 0.0;
  /// RMS of |x - xbar| over the last 20% of the horizon
  double x_error_tail_rms = 0.0;
  std::size_t samples = 0;
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;

  /// (metric, value) rows; absent times are reported as -1.
  std::vector<std::pair<std::string, double>> metrics() const;
};

struct RunResult {
  Trajectory trajectory;
  RunReport report;
  UioGains gains;
  double warmup = 0.0;
};

/// Plant, chain, regression, stage-1 DREM, freeze, amplitude DREM,
/// reconstruction and adaptive observer, stepped together on one grid.
/// Throws AssumptionError, DesignError, ConfigError or DivergenceError.
RunResult run_scenario(const Scenario& s);

/// Metrics from a logged pipeline trajectory.
RunReport compute_metrics(const Trajectory& trajectory, const Vector& xi0_true, double omega_true);

/// 20 / min(|spectral abscissa of F|, lambda, lambda_r).
double default_warmup(const UioGains& gains, const RegressionConfig& config);

/// Start of the tail window used by the tail metrics.
double tail_start(const Trajectory& trajectory);

}  // namespace uiodrem
