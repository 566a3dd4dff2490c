/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Time-series CSV: a "#schema=1" comment line, a header row and one row per
// record in a fixed column order. Numbers use shortest round-trip formatting.

#include "pfc/sim_engine.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pfc::io {

inline constexpr int kCsvSchema = 1;

/// Shortest decimal that parses back to the same double.
std::string format_number(double x);
/// RFC 4180 field quoting (only when needed).
std::string csv_quote(std::string_view field);

const std::vector<std::string>& csv_columns();

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const TimeSeriesRecord& r);
void write_csv(std::ostream& out, std::span<const TimeSeriesRecord> records);

/// Inverse of write_csv. Throws ConfigError on a schema or column mismatch.
std::vector<TimeSeriesRecord> read_csv(std::istream& in);

} // namespace pfc::io
