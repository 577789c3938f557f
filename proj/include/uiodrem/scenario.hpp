#pragma once

#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "uiodrem/adaptive_observer.hpp"
#include "uiodrem/disturbance.hpp"
#include "uiodrem/plant.hpp"
#include "uiodrem/regression.hpp"
#include "uiodrem/uio_design.hpp"

namespace uiodrem {

struct DremConfig {
  double h = 0.5;
  double epsilon = 1e-3;
  double sigma = 0.7;
  double freeze_time = 15.0;
};

/// Everything one pipeline run needs. Built from a YAML document; `source`
/// keeps the document for the config echo.
struct Scenario {
  std::string name;
  Plant plant;
  Vector x0;
  ExoGenerator generator;
  HarmonicDisturbance disturbance;
  NoiseModel noise;
  InputSignal input;

  GainSpec uio;
  Vector z0;

  RegressionConfig regression;
  /// Regression samples before this time are not fed to the extension.
  /// Negative selects 20 / min(|spectral abscissa of F|, lambda, lambda_r).
  double warmup = -1.0;

  DremConfig drem;
  AmplitudeConfig amplitude;

  ObserverConfig observer;
  Vector xbar0;

  double dt = 1e-4;
  double duration = 30.0;
  int log_every = 1;

  YAML::Node source;

  std::size_t steps() const;
};

/// Names accepted by builtin_scenario_node.
std::vector<std::string> builtin_scenario_names();
YAML::Node builtin_scenario_node(const std::string& name);
YAML::Node load_scenario_node(const std::string& path);

/// Validates shapes and ranges; throws ConfigError with the offending key.
Scenario parse_scenario(const YAML::Node& node);
Scenario builtin_scenario(const std::string& name);

/// Sets a scalar leaf addressed by a dotted path; numeric components index
/// sequences, e.g. "disturbance.harmonics.0.amplitude".
void set_field(YAML::Node& root, const std::string& path, double value);
double get_field(const YAML::Node& root, const std::string& path);

std::string emit_yaml(const YAML::Node& node);

}  // namespace uiodrem
