#include "uiodrem/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace uiodrem {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError("csv: malformed number '" + s + "'");
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

// Splits "name[i]" into (name, i); plain names give index -1.
std::pair<std::string, long> split_column(const std::string& col) {
  if (col.size() > 3 && col.back() == ']') {
    const auto open = col.rfind('[');
    if (open != std::string::npos && open > 0) {
      const std::string idx = col.substr(open + 1, col.size() - open - 2);
      if (!idx.empty() && idx.find_first_not_of("0123456789") == std::string::npos) {
        return {col.substr(0, open), std::stol(idx)};
      }
    }
  }
  return {col, -1};
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (in_quotes) throw ConfigError("csv: unterminated quoted field");
  fields.push_back(cur);
  return fields;
}

void emit_csv(const Trajectory& traj, std::ostream& out) {
  out << "t";
  for (const auto& name : traj.column_names()) out << ',' << quote(name);
  out << "\r\n";
  std::string line;
  for (std::size_t i = 0; i < traj.samples(); ++i) {
    line = format_double(traj.time(i));
    for (double v : traj.row(i)) {
      line += ',';
      line += format_double(v);
    }
    line += "\r\n";
    out << line;
  }
  if (!out) throw Error("csv: write failed");
}

void emit_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot open '" + path + "' for writing: " + std::strerror(errno));
  emit_csv(traj, out);
}

Trajectory parse_csv(std::istream& in) {
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next_line()) throw ConfigError("csv: missing header");
  const auto header = split_csv_record(line);
  if (header.empty() || header.front() != "t") throw ConfigError("csv: first column must be t");

  std::vector<std::pair<std::string, std::size_t>> groups;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto [name, idx] = split_column(header[c]);
    if (idx < 0) {
      groups.emplace_back(name, 1);
    } else if (idx == 0) {
      groups.emplace_back(name, 1);
    } else {
      if (groups.empty() || groups.back().first != name || static_cast<long>(groups.back().second) != idx) {
        throw ConfigError("csv: column '" + header[c] + "' breaks its channel group");
      }
      ++groups.back().second;
    }
  }

  std::vector<double> times;
  std::vector<double> data;
  while (next_line()) {
    if (line.empty()) continue;
    const auto fields = split_csv_record(line);
    if (fields.size() != header.size()) throw ConfigError("csv: row width does not match header");
    times.push_back(parse_double(fields[0]));
    for (std::size_t c = 1; c < fields.size(); ++c) data.push_back(parse_double(fields[c]));
  }

  double t0 = times.empty() ? 0.0 : times.front();
  double dt = 1.0;
  if (times.size() >= 2) {
    const double n = static_cast<double>(times.size() - 1);
    const double candidates[] = {times[1] - times[0], (times.back() - times.front()) / n};
    bool found = false;
    for (double base : candidates) {
      double cand = base;
      for (int shift = -8; shift <= 8 && !found; ++shift) {
        cand = base;
        const double dir = shift < 0 ? -INFINITY : INFINITY;
        for (int s = 0; s < std::abs(shift); ++s) cand = std::nextafter(cand, dir);
        bool ok = cand > 0.0;
        for (std::size_t i = 0; ok && i < times.size(); ++i) {
          ok = same_bits(t0 + static_cast<double>(i) * cand, times[i]);
        }
        if (ok) {
          dt = cand;
          found = true;
        }
      }
      if (found) break;
    }
    if (!found) throw ConfigError("csv: time column is not a uniform grid");
  }

  Trajectory traj(t0, dt);
  for (const auto& [name, width] : groups) traj.add_channel(name, width);
  const std::size_t w = traj.row_width();
  traj.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) traj.append_row(std::span<const double>(data.data() + i * w, w));
  return traj;
}

Trajectory parse_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("csv: cannot open '" + path + "'");
  return parse_csv(in);
}

void emit_report_csv(const std::vector<std::pair<std::string, double>>& metrics, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << "metric,value\r\n";
  for (const auto& [name, value] : metrics) out << quote(name) << ',' << format_double(value) << "\r\n";
  if (!out) throw Error("csv: write failed");
}

}  // namespace uiodrem
