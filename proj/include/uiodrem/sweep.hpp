#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "uiodrem/pipeline.hpp"

namespace uiodrem {

/// FIELD=lo:hi:n, a linear grid of n points over one scalar config leaf.
struct SweepSpec {
  std::string field;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 1;

  std::vector<double> values() const;
};

SweepSpec parse_sweep(const std::string& text);

struct SweepRow {
  std::size_t index = 0;
  double value = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  int exit_code = 0;
  std::string error;
  RunReport report;
};

/// One run per grid point with seed base + index. Failures are recorded per
/// row and do not stop the sweep. Rows run on up to `threads` workers
/// (0 = hardware concurrency); results are ordered by index.
std::vector<SweepRow> run_sweep(const YAML::Node& base, const SweepSpec& spec, unsigned threads = 0);

void emit_sweep_csv(const std::vector<SweepRow>& rows, const SweepSpec& spec, const std::string& path);

/// Exit code for an exception escaping a run: 2 for configuration,
/// assumption and design errors, 3 for divergence, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace uiodrem
