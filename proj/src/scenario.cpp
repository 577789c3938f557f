#include "uiodrem/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace uiodrem {

namespace {

constexpr const char* kExampleScenario = R"(name: paper_sec5
plant:
  A: [[0, 1], [-1, -2]]
  B: [0, 1]
  C: [1, 0]
  alpha: {kind: one}
  x0: [-2, 2]
generator:
  H: [[2, 0], [3, 0]]
  Gamma: [[0, 1], [-36, 0]]
  xi0: [-1, -2]
disturbance:
  harmonics:
    - {amplitude: 5, frequency: 2, phase: 0}
noise: {enabled: true, mean: 0.01, variance: 0.001, seed: 20240501}
input: {kind: zero}
uio:
  mode: explicit
  poles: [-15, -10]
  L: [25, 125]
  z0: [-0.5, 0.5]
regression:
  lambda: 5
  lambda_r: 5
  Bbar: [1, 1]
  swapping: automatic
  warmup: auto
drem: {h: 0.5, epsilon: 0.001, sigma: 0.7, freeze_time: 15}
amplitude: {h: 0.5, epsilon: 0.001, sigma: 0.7}
observer:
  mode: fixed
  K: [23, 103]
  young_k: 1
  start: deferred
  divergence_bound: 1.0e+6
  x0: [0, 0]
simulation: {dt: 1.0e-4, duration: 30, log_every: 1}
)";

std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

YAML::Node child(const YAML::Node& node, const std::string& key, const std::string& where, bool required = true) {
  if (!node.IsMap()) throw ConfigError("scenario: '" + where + "' must be a mapping");
  YAML::Node c = node[key];
  if (required && !c) throw ConfigError("scenario: missing key '" + join(where, key) + "'");
  return c;
}

double as_double(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError("scenario: '" + where + "' must be a number");
  }
}

double get_double(const YAML::Node& parent, const std::string& key, const std::string& where, double fallback) {
  const YAML::Node c = child(parent, key, where, false);
  return c ? as_double(c, join(where, key)) : fallback;
}

std::string get_string(const YAML::Node& parent, const std::string& key, const std::string& where,
                       const std::string& fallback) {
  const YAML::Node c = child(parent, key, where, false);
  if (!c) return fallback;
  if (!c.IsScalar()) throw ConfigError("scenario: '" + join(where, key) + "' must be a string");
  return c.as<std::string>();
}

Vector as_vector(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence()) throw ConfigError("scenario: '" + where + "' must be a list of numbers");
  Vector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_double(node[i], where);
  return v;
}

Matrix as_matrix(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence() || node.size() == 0) throw ConfigError("scenario: '" + where + "' must be a list of rows");
  const std::size_t rows = node.size();
  const YAML::Node first = node[0];
  if (!first.IsSequence() || first.size() == 0) throw ConfigError("scenario: '" + where + "' rows must be lists");
  const std::size_t cols = first.size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const YAML::Node row = node[i];
    if (!row.IsSequence() || row.size() != cols) throw ConfigError("scenario: '" + where + "' is ragged");
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = as_double(row[j], where);
    }
  }
  return m;
}

PoleSet as_poles(const YAML::Node& node, const std::string& where) {
  if (!node.IsSequence()) throw ConfigError("scenario: '" + where + "' must be a list of poles");
  PoleSet poles;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const YAML::Node p = node[i];
    if (p.IsSequence()) {
      if (p.size() != 2) throw ConfigError("scenario: complex pole in '" + where + "' must be [re, im]");
      poles.emplace_back(as_double(p[0], where), as_double(p[1], where));
    } else {
      poles.emplace_back(as_double(p, where), 0.0);
    }
  }
  return poles;
}

void require_size(const Vector& v, Eigen::Index n, const std::string& where) {
  if (v.size() != n) {
    throw ConfigError("scenario: '" + where + "' has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(n));
  }
}

RegressorWeight parse_alpha(const YAML::Node& node, const std::string& where) {
  if (!node) return RegressorWeight::one();
  const std::string kind = get_string(node, "kind", where, "one");
  if (kind == "one") return RegressorWeight::one();
  if (kind == "affine") {
    return RegressorWeight::affine_output(get_double(node, "offset", where, 1.0), get_double(node, "slope", where, 0.0));
  }
  throw ConfigError("scenario: unknown '" + join(where, "kind") + "' value '" + kind + "'");
}

InputSignal parse_input(const YAML::Node& node) {
  if (!node) return InputSignal::zero();
  const std::string kind = get_string(node, "kind", "input", "zero");
  if (kind == "zero") return InputSignal::zero();
  if (kind == "sine") {
    return InputSignal::sine(get_double(node, "amplitude", "input", 1.0), get_double(node, "frequency", "input", 1.0));
  }
  if (kind == "step") return InputSignal::step(get_double(node, "value", "input", 1.0));
  throw ConfigError("scenario: unknown 'input.kind' value '" + kind + "'");
}

}  // namespace

std::size_t Scenario::steps() const { return static_cast<std::size_t>(std::llround(duration / dt)); }

std::vector<std::string> builtin_scenario_names() { return {"paper_sec5"}; }

YAML::Node builtin_scenario_node(const std::string& name) {
  if (name == "paper_sec5") return YAML::Load(kExampleScenario);
  throw ConfigError("scenario: unknown builtin scenario '" + name + "'");
}

YAML::Node load_scenario_node(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario: cannot open '" + path + "'");
  try {
    return YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw ConfigError("scenario: parse error in '" + path + "': " + e.what());
  }
}

Scenario parse_scenario(const YAML::Node& root) {
  if (!root || !root.IsMap()) throw ConfigError("scenario: document must be a mapping");
  Scenario s;
  s.source = YAML::Clone(root);
  s.name = get_string(root, "name", "", "unnamed");

  const YAML::Node plant = child(root, "plant", "");
  s.plant.A = as_matrix(child(plant, "A", "plant"), "plant.A");
  const Eigen::Index n = s.plant.A.rows();
  if (s.plant.A.cols() != n) throw ConfigError("scenario: 'plant.A' must be square");
  s.plant.B = as_vector(child(plant, "B", "plant"), "plant.B");
  require_size(s.plant.B, n, "plant.B");
  s.plant.C = as_vector(child(plant, "C", "plant"), "plant.C").transpose();
  if (s.plant.C.size() != n) throw ConfigError("scenario: 'plant.C' must have n entries");
  s.plant.alpha = parse_alpha(child(plant, "alpha", "plant", false), "plant.alpha");
  const YAML::Node x0 = child(plant, "x0", "plant", false);
  s.x0 = x0 ? as_vector(x0, "plant.x0") : Vector::Zero(n);
  require_size(s.x0, n, "plant.x0");

  const YAML::Node gen = child(root, "generator", "");
  s.generator.H = as_matrix(child(gen, "H", "generator"), "generator.H");
  s.generator.Gamma = as_matrix(child(gen, "Gamma", "generator"), "generator.Gamma");
  s.generator.xi0 = as_vector(child(gen, "xi0", "generator"), "generator.xi0");

  const YAML::Node dist = child(root, "disturbance", "", false);
  if (dist) {
    const YAML::Node hs = child(dist, "harmonics", "disturbance", false);
    if (hs) {
      if (!hs.IsSequence()) throw ConfigError("scenario: 'disturbance.harmonics' must be a list");
      for (std::size_t i = 0; i < hs.size(); ++i) {
        const std::string where = "disturbance.harmonics." + std::to_string(i);
        Harmonic h;
        h.amplitude = get_double(hs[i], "amplitude", where, 0.0);
        h.frequency = get_double(hs[i], "frequency", where, 1.0);
        h.phase = get_double(hs[i], "phase", where, 0.0);
        // a silent component needs no annihilator
        if (h.amplitude != 0.0) s.disturbance.harmonics.push_back(h);
      }
    }
  }
  if (s.disturbance.harmonics.size() > 1) {
    throw ConfigError("scenario: more than one disturbance harmonic is not supported by the regression");
  }

  const YAML::Node noise = child(root, "noise", "", false);
  if (noise) {
    const YAML::Node en = child(noise, "enabled", "noise", false);
    s.noise.enabled = en ? en.as<bool>() : true;
    s.noise.mean = get_double(noise, "mean", "noise", 0.0);
    s.noise.variance = get_double(noise, "variance", "noise", 0.0);
    const YAML::Node seed = child(noise, "seed", "noise", false);
    s.noise.seed = seed ? seed.as<std::uint64_t>() : 0;
    if (s.noise.variance < 0.0) throw ConfigError("scenario: 'noise.variance' must be >= 0");
  }
  s.input = parse_input(child(root, "input", "", false));

  const YAML::Node uio = child(root, "uio", "", false);
  if (uio) {
    const std::string mode = get_string(uio, "mode", "uio", "poles");
    if (mode == "poles") {
      s.uio.mode = GainSpec::Mode::poles;
    } else if (mode == "star") {
      s.uio.mode = GainSpec::Mode::star;
    } else if (mode == "explicit") {
      s.uio.mode = GainSpec::Mode::explicit_gain;
    } else {
      throw ConfigError("scenario: unknown 'uio.mode' value '" + mode + "'");
    }
    const YAML::Node poles = child(uio, "poles", "uio", false);
    if (poles) s.uio.poles = as_poles(poles, "uio.poles");
    const YAML::Node L = child(uio, "L", "uio", false);
    if (L) s.uio.L = as_vector(L, "uio.L");
    if (s.uio.mode == GainSpec::Mode::explicit_gain) {
      if (!L) throw ConfigError("scenario: 'uio.L' is required in explicit mode");
      require_size(s.uio.L, n, "uio.L");
    } else if (s.uio.poles.empty()) {
      throw ConfigError("scenario: 'uio.poles' is required in poles and star modes");
    }
    const YAML::Node z0 = child(uio, "z0", "uio", false);
    s.z0 = z0 ? as_vector(z0, "uio.z0") : Vector::Zero(n);
  } else {
    throw ConfigError("scenario: missing key 'uio'");
  }
  require_size(s.z0, n, "uio.z0");

  const YAML::Node reg = child(root, "regression", "", false);
  s.regression.Bbar = RowVector::Zero(n);
  if (reg) {
    s.regression.lambda = get_double(reg, "lambda", "regression", 5.0);
    s.regression.lambda_r = get_double(reg, "lambda_r", "regression", 5.0);
    const YAML::Node bbar = child(reg, "Bbar", "regression", false);
    if (bbar) {
      const Vector b = as_vector(bbar, "regression.Bbar");
      require_size(b, n, "regression.Bbar");
      s.regression.Bbar = b.transpose();
    }
    const std::string swap = get_string(reg, "swapping", "regression", "automatic");
    if (swap == "automatic") {
      s.regression.swapping = SwappingRealization::automatic;
    } else if (swap == "literal") {
      s.regression.swapping = SwappingRealization::literal;
    } else if (swap == "modulated") {
      s.regression.swapping = SwappingRealization::modulated;
    } else {
      throw ConfigError("scenario: unknown 'regression.swapping' value '" + swap + "'");
    }
    const YAML::Node warm = child(reg, "warmup", "regression", false);
    if (warm && !(warm.IsScalar() && warm.as<std::string>() == "auto")) {
      s.warmup = as_double(warm, "regression.warmup");
      if (s.warmup < 0.0) throw ConfigError("scenario: 'regression.warmup' must be >= 0 or auto");
    }
  }
  if (s.regression.Bbar.isZero(0.0)) {
    // default left annihilator B^T / (B^T B)
    s.regression.Bbar = s.plant.B.transpose() / s.plant.B.squaredNorm();
  }
  s.regression.harmonics = static_cast<int>(s.disturbance.harmonics.size());

  const YAML::Node drem = child(root, "drem", "", false);
  if (drem) {
    s.drem.h = get_double(drem, "h", "drem", s.drem.h);
    s.drem.epsilon = get_double(drem, "epsilon", "drem", s.drem.epsilon);
    s.drem.sigma = get_double(drem, "sigma", "drem", s.drem.sigma);
    s.drem.freeze_time = get_double(drem, "freeze_time", "drem", s.drem.freeze_time);
  }
  const YAML::Node amp = child(root, "amplitude", "", false);
  if (amp) {
    s.amplitude.h = get_double(amp, "h", "amplitude", s.amplitude.h);
    s.amplitude.epsilon = get_double(amp, "epsilon", "amplitude", s.amplitude.epsilon);
    s.amplitude.sigma = get_double(amp, "sigma", "amplitude", s.amplitude.sigma);
  }
  if (!(s.drem.h > 0.0) || !(s.amplitude.h > 0.0)) throw ConfigError("scenario: forgetting rates h must be > 0");
  if (!(s.drem.epsilon > 0.0) || !(s.amplitude.epsilon > 0.0)) throw ConfigError("scenario: epsilon must be > 0");
  if (!(s.drem.sigma > 0.0) || !(s.amplitude.sigma > 0.0)) throw ConfigError("scenario: sigma must be > 0");
  if (!(s.drem.freeze_time >= 0.0)) throw ConfigError("scenario: 'drem.freeze_time' must be >= 0");

  const YAML::Node obs = child(root, "observer", "", false);
  s.xbar0 = Vector::Zero(n);
  s.observer.K = Vector::Zero(n);
  if (obs) {
    const std::string mode = get_string(obs, "mode", "observer", "fixed");
    if (mode == "fixed") {
      s.observer.mode = ObserverGainMode::fixed;
      s.observer.K = as_vector(child(obs, "K", "observer"), "observer.K");
      require_size(s.observer.K, n, "observer.K");
    } else if (mode == "riccati") {
      s.observer.mode = ObserverGainMode::riccati;
    } else {
      throw ConfigError("scenario: unknown 'observer.mode' value '" + mode + "'");
    }
    s.observer.young_k = get_double(obs, "young_k", "observer", 1.0);
    if (!(s.observer.young_k > 0.0)) throw ConfigError("scenario: 'observer.young_k' must be > 0");
    const YAML::Node n0 = child(obs, "N0", "observer", false);
    if (n0) {
      s.observer.N0 = as_matrix(n0, "observer.N0");
      if (s.observer.N0.rows() != n || s.observer.N0.cols() != n) throw ConfigError("scenario: 'observer.N0' must be n x n");
    }
    const std::string start = get_string(obs, "start", "observer", "deferred");
    if (start == "deferred") {
      s.observer.start = ObserverStart::deferred;
    } else if (start == "immediate") {
      s.observer.start = ObserverStart::immediate;
    } else {
      throw ConfigError("scenario: unknown 'observer.start' value '" + start + "'");
    }
    s.observer.divergence_bound = get_double(obs, "divergence_bound", "observer", 1e6);
    const YAML::Node xb = child(obs, "x0", "observer", false);
    if (xb) s.xbar0 = as_vector(xb, "observer.x0");
    require_size(s.xbar0, n, "observer.x0");
  } else {
    throw ConfigError("scenario: missing key 'observer'");
  }

  const YAML::Node sim = child(root, "simulation", "", false);
  if (sim) {
    s.dt = get_double(sim, "dt", "simulation", s.dt);
    s.duration = get_double(sim, "duration", "simulation", s.duration);
    s.log_every = static_cast<int>(get_double(sim, "log_every", "simulation", 1.0));
  }
  if (!(s.dt > 0.0)) throw ConfigError("scenario: 'simulation.dt' must be > 0");
  if (!(s.duration > 0.0)) throw ConfigError("scenario: 'simulation.duration' must be > 0");
  if (s.log_every < 1) throw ConfigError("scenario: 'simulation.log_every' must be >= 1");
  const double ratio = s.duration / s.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw ConfigError("scenario: dt must divide the duration");
  }
  if (s.steps() % static_cast<std::size_t>(s.log_every) != 0) {
    throw ConfigError("scenario: log_every must divide the number of steps");
  }
  return s;
}

Scenario builtin_scenario(const std::string& name) { return parse_scenario(builtin_scenario_node(name)); }

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("scenario: malformed field path '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("scenario: empty field path");
  return parts;
}

bool is_index(const std::string& s) { return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos; }

}  // namespace

void set_field(YAML::Node& root, const std::string& path, double value) {
  const auto parts = split_path(path);
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next;
    if (is_index(parts[i]) && cur.IsSequence()) {
      const std::size_t idx = std::stoul(parts[i]);
      if (idx >= cur.size()) throw ConfigError("scenario: index out of range in '" + path + "'");
      next = cur[idx];
    } else {
      if (!cur[parts[i]]) throw ConfigError("scenario: unknown field '" + path + "'");
      next = cur[parts[i]];
    }
    cur.reset(next);
  }
  const std::string& leaf = parts.back();
  if (is_index(leaf) && cur.IsSequence()) {
    const std::size_t idx = std::stoul(leaf);
    if (idx >= cur.size()) throw ConfigError("scenario: index out of range in '" + path + "'");
    cur[idx] = value;
  } else {
    if (!cur.IsMap() || !cur[leaf]) throw ConfigError("scenario: unknown field '" + path + "'");
    cur[leaf] = value;
  }
}

double get_field(const YAML::Node& root, const std::string& path) {
  const auto parts = split_path(path);
  YAML::Node cur = YAML::Clone(root);
  for (const auto& p : parts) {
    YAML::Node next;
    if (is_index(p) && cur.IsSequence()) {
      const std::size_t idx = std::stoul(p);
      if (idx >= cur.size()) throw ConfigError("scenario: index out of range in '" + path + "'");
      next = cur[idx];
    } else {
      if (!cur.IsMap() || !cur[p]) throw ConfigError("scenario: unknown field '" + path + "'");
      next = cur[p];
    }
    cur.reset(next);
  }
  return as_double(cur, path);
}

std::string emit_yaml(const YAML::Node& node) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << node;
  return std::string(out.c_str()) + "\n";
}

}  // namespace uiodrem
