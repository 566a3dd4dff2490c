/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/io/csv.hpp"

#include "pfc/errors.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace pfc::io {

namespace {

struct Column {
    std::string name;
    std::function<double(const TimeSeriesRecord&)> get;
    std::function<void(TimeSeriesRecord&, double)> set;
};

const std::vector<Column>& columns()
{
    static const std::vector<Column> cols = [] {
        std::vector<Column> c;
        auto scalar = [&c](const char* name, double TimeSeriesRecord::*m) {
            c.push_back({name, [m](const TimeSeriesRecord& r) { return r.*m; },
                         [m](TimeSeriesRecord& r, double v) { r.*m = v; }});
        };
        auto phases = [&c](const char* name, PhaseArray TimeSeriesRecord::*m) {
            static constexpr const char* suffix[] = {"_a", "_b", "_c"};
            for (std::size_t k = 0; k < 3; ++k) {
                c.push_back({std::string(name) + suffix[k],
                             [m, k](const TimeSeriesRecord& r) { return (r.*m)[k]; },
                             [m, k](TimeSeriesRecord& r, double v) { (r.*m)[k] = v; }});
            }
        };
        auto flags = [&c](const char* name, std::array<bool, 3> TimeSeriesRecord::*m) {
            static constexpr const char* suffix[] = {"_a", "_b", "_c"};
            for (std::size_t k = 0; k < 3; ++k) {
                c.push_back({std::string(name) + suffix[k],
                             [m, k](const TimeSeriesRecord& r) { return (r.*m)[k] ? 1.0 : 0.0; },
                             [m, k](TimeSeriesRecord& r, double v) { (r.*m)[k] = v != 0.0; }});
            }
        };
        scalar("t", &TimeSeriesRecord::t);
        phases("v1", &TimeSeriesRecord::v1);
        phases("v2", &TimeSeriesRecord::v2);
        phases("vs", &TimeSeriesRecord::vs);
        phases("i", &TimeSeriesRecord::i);
        phases("i_rms", &TimeSeriesRecord::i_rms);
        phases("vs_rms", &TimeSeriesRecord::vs_rms);
        phases("p1", &TimeSeriesRecord::p1);
        phases("q1", &TimeSeriesRecord::q1);
        phases("p2", &TimeSeriesRecord::p2);
        phases("q2", &TimeSeriesRecord::q2);
        phases("ps", &TimeSeriesRecord::ps);
        phases("qs", &TimeSeriesRecord::qs);
        phases("vdc", &TimeSeriesRecord::dc);
        phases("mab_phase", &TimeSeriesRecord::mab_phase);
        scalar("bus", &TimeSeriesRecord::bus);
        scalar("bus_upper", &TimeSeriesRecord::bus_upper);
        scalar("bus_lower", &TimeSeriesRecord::bus_lower);
        scalar("afe_id", &TimeSeriesRecord::afe_id);
        scalar("afe_iq", &TimeSeriesRecord::afe_iq);
        flags("active", &TimeSeriesRecord::active);
        flags("series_sat", &TimeSeriesRecord::series_saturated);
        c.push_back({"afe_sat", [](const TimeSeriesRecord& r) { return r.afe_saturated ? 1.0 : 0.0; },
                     [](TimeSeriesRecord& r, double v) { r.afe_saturated = v != 0.0; }});
        scalar("e_grid", &TimeSeriesRecord::e_grid);
        scalar("e_mab_primary", &TimeSeriesRecord::e_mab_primary);
        scalar("e_mab_secondary", &TimeSeriesRecord::e_mab_secondary);
        scalar("e_injection", &TimeSeriesRecord::e_injection);
        scalar("e_bus", &TimeSeriesRecord::e_bus);
        scalar("e_series_dc", &TimeSeriesRecord::e_series_dc);
        return c;
    }();
    return cols;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) {
        out.push_back(cur);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

} // namespace

std::string format_number(double x)
{
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    if (x == 0.0) {
        return "0";
    }
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string csv_quote(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

const std::vector<std::string>& csv_columns()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& c : columns()) {
            n.push_back(c.name);
        }
        return n;
    }();
    return names;
}

void write_csv_header(std::ostream& out)
{
    out << "#schema=" << kCsvSchema << "\r\n";
    const auto& names = csv_columns();
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << (i ? "," : "") << names[i];
    }
    out << "\r\n";
}

void write_csv_row(std::ostream& out, const TimeSeriesRecord& r)
{
    const auto& cols = columns();
    std::string line;
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) {
            line += ',';
        }
        line += format_number(cols[i].get(r));
    }
    line += "\r\n";
    out << line;
}

void write_csv(std::ostream& out, std::span<const TimeSeriesRecord> records)
{
    write_csv_header(out);
    for (const auto& r : records) {
        write_csv_row(out, r);
    }
}

std::vector<TimeSeriesRecord> read_csv(std::istream& in)
{
    auto next_line = [&in](std::string& line) {
        if (!std::getline(in, line)) {
            return false;
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        return true;
    };
    std::string line;
    if (!next_line(line) || line != "#schema=" + std::to_string(kCsvSchema)) {
        throw ConfigError("csv", "missing or unsupported schema line");
    }
    if (!next_line(line) || split(line) != csv_columns()) {
        throw ConfigError("csv", "column header does not match schema 1");
    }
    const auto& cols = columns();
    std::vector<TimeSeriesRecord> out;
    std::size_t row = 0;
    while (next_line(line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != cols.size()) {
            throw ConfigError("csv row " + std::to_string(row), "wrong number of fields");
        }
        TimeSeriesRecord r;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            double v = 0.0;
            const auto& f = fields[i];
            if (f == "nan") {
                v = std::nan("");
            } else if (f == "inf" || f == "-inf") {
                v = f[0] == '-' ? -INFINITY : INFINITY;
            } else {
                const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
                if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
                    throw ConfigError("csv row " + std::to_string(row) + "." + cols[i].name,
                                      "not a number");
                }
            }
            cols[i].set(r, v);
        }
        out.push_back(r);
    }
    return out;
}

} // namespace pfc::io
