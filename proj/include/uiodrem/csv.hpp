#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "uiodrem/numerics/trajectory.hpp"

namespace uiodrem {

/// Formats with 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// RFC 4180 table: header "t" plus the trajectory column names, one CRLF
/// terminated row per sample.
void emit_csv(const Trajectory& trajectory, std::ostream& out);
void emit_csv(const Trajectory& trajectory, const std::string& path);

/// Inverse of emit_csv. Channels are rebuilt from the name[i] column groups
/// and the grid step is recovered exactly from the time column.
Trajectory parse_csv(std::istream& in);
Trajectory parse_csv_file(const std::string& path);

/// Two-column metric,value table.
void emit_report_csv(const std::vector<std::pair<std::string, double>>& metrics, const std::string& path);

/// Splits one CSV record, honoring quotes.
std::vector<std::string> split_csv_record(const std::string& line);

}  // namespace uiodrem
