#include "uiodrem/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <thread>

#include "uiodrem/csv.hpp"

namespace uiodrem {

namespace {

double parse_number(const std::string& s, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError("sweep: malformed number '" + s + "' in '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<double> SweepSpec::values() const {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    v[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return v;
}

SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("sweep: expected FIELD=lo:hi:n, got '" + text + "'");
  SweepSpec spec;
  spec.field = text.substr(0, eq);
  const std::string range = text.substr(eq + 1);
  const auto c1 = range.find(':');
  const auto c2 = c1 == std::string::npos ? std::string::npos : range.find(':', c1 + 1);
  if (c2 == std::string::npos) throw ConfigError("sweep: expected FIELD=lo:hi:n, got '" + text + "'");
  spec.lo = parse_number(range.substr(0, c1), text);
  spec.hi = parse_number(range.substr(c1 + 1, c2 - c1 - 1), text);
  const double n = parse_number(range.substr(c2 + 1), text);
  if (n < 1 || n != static_cast<double>(static_cast<std::size_t>(n))) {
    throw ConfigError("sweep: point count must be a positive integer in '" + text + "'");
  }
  spec.count = static_cast<std::size_t>(n);
  return spec;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const AssumptionError*>(&e) ||
      dynamic_cast<const DesignError*>(&e) || dynamic_cast<const ShapeError*>(&e)) {
    return 2;
  }
  return 1;
}

std::vector<SweepRow> run_sweep(const YAML::Node& base, const SweepSpec& spec, unsigned threads) {
  // check the path once up front so a typo fails the whole sweep
  get_field(base, spec.field);
  const auto values = spec.values();
  std::uint64_t base_seed = 0;
  if (base["noise"] && base["noise"]["seed"]) base_seed = base["noise"]["seed"].as<std::uint64_t>();

  // yaml-cpp nodes are not safe to share across threads, so every row gets
  // its own clone made here.
  std::vector<YAML::Node> docs;
  std::vector<SweepRow> rows(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    YAML::Node doc = YAML::Clone(base);
    set_field(doc, spec.field, values[i]);
    rows[i].index = i;
    rows[i].value = values[i];
    rows[i].seed = base_seed + i;
    if (doc["noise"]) doc["noise"]["seed"] = rows[i].seed;
    docs.push_back(doc);
  }
  std::vector<Scenario> scenarios(values.size());
  std::vector<bool> parsed(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    try {
      scenarios[i] = parse_scenario(docs[i]);
      scenarios[i].noise.seed = rows[i].seed;
      parsed[i] = true;
    } catch (const std::exception& e) {
      rows[i].error = e.what();
      rows[i].exit_code = exit_code_for(e);
    }
  }

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, values.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      if (!parsed[i]) continue;
      try {
        RunResult res = run_scenario(scenarios[i]);
        rows[i].report = std::move(res.report);
        rows[i].ok = true;
      } catch (const std::exception& e) {
        rows[i].error = e.what();
        rows[i].exit_code = exit_code_for(e);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

void emit_sweep_csv(const std::vector<SweepRow>& rows, const SweepSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("sweep: cannot open '" + path + "' for writing");
  std::vector<std::string> metric_names;
  for (const auto& row : rows) {
    if (row.ok) {
      for (const auto& [name, value] : row.report.metrics()) metric_names.push_back(name);
      break;
    }
  }
  out << "index," << spec.field << ",seed,status,exit_code";
  for (const auto& name : metric_names) out << ',' << name;
  out << ",error\r\n";
  for (const auto& row : rows) {
    out << row.index << ',' << format_double(row.value) << ',' << row.seed << ',' << (row.ok ? "ok" : "failed") << ','
        << row.exit_code;
    if (row.ok) {
      const auto metrics = row.report.metrics();
      for (const auto& name : metric_names) {
        auto it = std::find_if(metrics.begin(), metrics.end(), [&](const auto& m) { return m.first == name; });
        out << ',' << (it == metrics.end() ? std::string() : format_double(it->second));
      }
    } else {
      for (std::size_t i = 0; i < metric_names.size(); ++i) out << ',';
    }
    std::string err = row.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << ",\"" << err << "\"\r\n";
  }
}

}  // namespace uiodrem
