/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/errors.hpp"
#include "pfc/io/cli.hpp"
#include "pfc/io/csv.hpp"
#include "pfc/io/scenario_file.hpp"
#include "pfc/io/summary_json.hpp"
#include "pfc/io/svg.hpp"
#include "pfc/mab_router.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace pfc;
using namespace pfc::io;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

CliRun cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "pfcsim");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    CliRun r;
    r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "pfcsim-cli-tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void dump(const fs::path& p, const Json& j)
{
    std::ofstream(p) << j.dump(2);
}

/// Value of a "key = value" line.
double keyed(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " = ", 0) == 0) {
            return std::stod(line.substr(key.size() + 3));
        }
    }
    FAIL("no line for " << key << " in\n" << text);
    return 0.0;
}

std::string keyed_text(const std::string& text, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " = ", 0) == 0) {
            return line.substr(key.size() + 3);
        }
    }
    return {};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

/// Structural equality with numbers compared to 1e-12 relative.
bool json_close(const Json& a, const Json& b)
{
    if (a.is_number() && b.is_number()) {
        const double x = a.get<double>();
        const double y = b.get<double>();
        return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
    }
    if (a.type() != b.type() || a.size() != b.size()) {
        return false;
    }
    if (a.is_object()) {
        for (auto it = a.begin(); it != a.end(); ++it) {
            if (!b.contains(it.key()) || !json_close(it.value(), b.at(it.key()))) {
                return false;
            }
        }
        return true;
    }
    if (a.is_array()) {
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (!json_close(a[k], b[k])) {
                return false;
            }
        }
        return true;
    }
    return a == b;
}

Json expect_config_error(const Json& doc, const std::string& path)
{
    try {
        scenario_from_json(doc);
    } catch (const ConfigError& e) {
        CHECK(e.path() == path);
        return Json(e.what());
    }
    FAIL("accepted a document with a problem at " << path);
    return {};
}

} // namespace

TEST_CASE("shipped preset files equal the built-in presets")
{
    const fs::path dir = fs::path(PFC_SOURCE_DIR) / "presets";
    for (const auto& name : preset_names()) {
        INFO(name);
        const Scenario file = load_scenario((dir / (name + ".json")).string());
        CHECK(json_close(scenario_to_json(file), scenario_to_json(scenario_preset(name))));
    }
}

TEST_CASE("scenario JSON round-trips")
{
    for (const auto& name : preset_names()) {
        INFO(name);
        const Json j = scenario_to_json(scenario_preset(name));
        CHECK(json_close(scenario_to_json(scenario_from_json(j)), j));
    }
}

TEST_CASE("every parameter block carries a provenance tag")
{
    const Json j = scenario_to_json(scenario_preset("case1"));
    for (const auto& [key, value] : j.items()) {
        if (value.is_object()) {
            INFO(key);
            CHECK(value.contains("provenance"));
        }
    }
    CHECK(j["load"]["provenance"] == "paper-table-2");
}

TEST_CASE("scenario files reject unknown and missing keys with their path")
{
    const Json good = scenario_to_json(scenario_preset("case2"));

    Json j = good;
    j["afe"]["foo"] = 1;
    expect_config_error(j, "afe.foo");

    j = good;
    j["extra"] = true;
    expect_config_error(j, "extra");

    j = good;
    j["afe"].erase("filter_inductance");
    expect_config_error(j, "afe.filter_inductance");

    j = good;
    j.erase("feeder2");
    expect_config_error(j, "feeder2");

    j = good;
    j["grid"].erase("provenance");
    expect_config_error(j, "grid.provenance");

    j = good;
    j["mab"]["capacitances"][1] = -1.0;
    expect_config_error(j, "mab.capacitances[1]");

    j = good;
    j["simulation"]["step"] = "fast";
    expect_config_error(j, "simulation.step");

    j = good;
    j["events"]["list"][0]["setpoints"][2]["w"] = 1.0;
    expect_config_error(j, "events.list[0].setpoints[2].w");

    j = good;
    j["events"]["list"][0]["action"] = "jump";
    expect_config_error(j, "events.list[0].action");

    j = good;
    j["topology"] = "mesh";
    expect_config_error(j, "topology");
}

TEST_CASE("a file may override blocks of a preset")
{
    const Json j = Json::parse(R"({"base": "case2", "simulation": {"duration": 0.2},
                                   "afe": {"provenance": "user", "current_limit": 90.0}})");
    const Scenario s = scenario_from_json(j);
    const Scenario base = scenario_preset("case2");
    CHECK(s.duration == 0.2);
    CHECK(s.step == base.step);
    CHECK(s.afe.current_limit == 90.0);
    CHECK(s.afe.filter_inductance == base.afe.filter_inductance);
    CHECK(s.provenance.at("afe") == "user");
    CHECK(s.events.size() == base.events.size());

    Json bad = j;
    bad["afe"]["bogus"] = 0;
    expect_config_error(bad, "afe.bogus");
    expect_config_error(Json::parse(R"({"base": "case9"})"), "");
}

TEST_CASE("missing scenario files are reported as such")
{
    try {
        load_scenario("definitely/not/here.json");
        FAIL("loaded a missing file");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("no such file") != std::string::npos);
    }
}

TEST_CASE("CSV formatting and quoting")
{
    CHECK(csv_quote("plain") == "plain");
    CHECK(csv_quote("a,b") == "\"a,b\"");
    CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_quote("two\nlines") == "\"two\nlines\"");

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int n = 0; n < 5000; ++n) {
        const double x = std::ldexp(mant(rng), expo(rng));
        REQUIRE(std::stod(format_number(x)) == x);
    }
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(50.0) == "50");
}

TEST_CASE("CSV schema line, header and round trip")
{
    Scenario s = scenario_preset("case3");
    s.duration = 0.05;
    const SimResult r = run_scenario(s);
    std::ostringstream os;
    write_csv(os, r.records);
    const std::string text = os.str();
    CHECK(text.rfind("#schema=1\r\n", 0) == 0);

    const auto rows = csv_rows(text);
    REQUIRE(rows.size() == r.records.size() + 1);
    CHECK(rows.front() == csv_columns());
    for (const auto& row : rows) {
        REQUIRE(row.size() == csv_columns().size());
    }
    CHECK(std::abs(static_cast<double>(r.records.size()) - s.duration / s.record_interval) <= 1.0);

    std::istringstream in(text);
    const auto back = read_csv(in);
    REQUIRE(back.size() == r.records.size());
    std::ostringstream again;
    write_csv(again, back);
    CHECK(again.str() == text);

    std::istringstream wrong("#schema=9\r\nt\r\n0\r\n");
    CHECK_THROWS_AS(read_csv(wrong), ConfigError);
}

TEST_CASE("summary document")
{
    Scenario s = scenario_preset("case2");
    s.duration = 0.4;
    const SimResult r = run_scenario(s);
    const Json j = summary_to_json(s, r);
    CHECK(j["schema"] == kSummarySchema);
    CHECK(j["scenario"] == "case2");
    CHECK(j["healthy"] == true);
    CHECK(j["fault"].is_null());
    CHECK(j["rows"] == r.records.size());
    CHECK(j["segments"].size() == 2);
    CHECK(j["segments"][1]["state"] == "active");
    CHECK(j["audit"]["relative_imbalance"].get<double>() < 1e-3);
}

TEST_CASE("SVG plots are self-contained")
{
    Scenario s = scenario_preset("case1");
    s.duration = 0.02;
    const SimResult r = run_scenario(s);
    const fs::path dir = scratch("svg");
    const auto files = write_svg_plots(dir, "case1", r.records);
    REQUIRE(files.size() == 4);
    for (const auto& f : files) {
        const std::string svg = slurp(f);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("href") == std::string::npos);
    }
}

TEST_CASE("run writes a bundle and reports config errors")
{
    const fs::path dir = scratch("run");
    const CliRun ok = cli({"run", "case1", "--duration", "0.05", "--out", dir.string(), "--svg"});
    CHECK(ok.code == kExitOk);
    CHECK(fs::exists(dir / "timeseries.csv"));
    CHECK(fs::exists(dir / "summary.json"));
    CHECK(fs::exists(dir / "scenario.json"));
    CHECK(fs::exists(dir / "currents.svg"));
    const auto rows = csv_rows(slurp(dir / "timeseries.csv"));
    CHECK(std::abs(static_cast<double>(rows.size() - 1) - 0.05 / 100e-6) <= 1.0);

    const CliRun missing = cli({"run", "missing.toml", "--out", dir.string()});
    CHECK(missing.code == kExitConfig);
    CHECK(missing.err.find("no such file") != std::string::npos);

    const CliRun bad_step = cli({"run", "case1", "--step", "1e-3", "--out", dir.string()});
    CHECK(bad_step.code == kExitConfig);

    CHECK(cli({"frobnicate"}).code == kExitConfig);
}

TEST_CASE("run exits 2 on a simulation fault and still writes the record")
{
    Scenario s = scenario_preset("case2");
    s.mab.phase_limit = deg_to_rad(0.05);
    s.events.front().time = 0.1;
    s.events.front().setpoints = s.events.back().setpoints;
    s.events.resize(1);
    const fs::path dir = scratch("fault");
    dump(dir / "starved.json", scenario_to_json(s));

    const CliRun r = cli({"run", (dir / "starved.json").string(), "--out", (dir / "out").string()});
    CHECK(r.code == kExitFault);
    const Json summary = Json::parse(slurp(dir / "out" / "summary.json"));
    CHECK(summary["healthy"] == false);
    CHECK(summary["fault"]["cause"].get<std::string>().find("collapsed") != std::string::npos);
}

TEST_CASE("identical runs write identical files")
{
    const fs::path a = scratch("golden-a");
    const fs::path b = scratch("golden-b");
    REQUIRE(cli({"run", "case4", "--duration", "0.55", "--out", a.string()}).code == 0);
    REQUIRE(cli({"run", "case4", "--duration", "0.55", "--out", b.string()}).code == 0);
    CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
    CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
}

TEST_CASE("halving the step through the CLI keeps the tail metrics")
{
    const fs::path a = scratch("step-a");
    const fs::path b = scratch("step-b");
    REQUIRE(cli({"run", "case2", "--out", a.string()}).code == 0);
    REQUIRE(cli({"run", "case2", "--step", "5e-6", "--out", b.string()}).code == 0);
    const Json ja = Json::parse(slurp(a / "summary.json"));
    const Json jb = Json::parse(slurp(b / "summary.json"));
    REQUIRE(ja["segments"].size() == jb["segments"].size());
    for (std::size_t k = 0; k < ja["segments"].size(); ++k) {
        for (std::size_t ph = 0; ph < 3; ++ph) {
            const auto& x = ja["segments"][k]["phases"][ph];
            const auto& y = jb["segments"][k]["phases"][ph];
            const double scale = std::hypot(x["p2"].get<double>(), x["q2"].get<double>());
            CHECK(std::abs(x["p2"].get<double>() - y["p2"].get<double>()) < 0.002 * scale);
            CHECK(std::abs(x["q2"].get<double>() - y["q2"].get<double>()) < 0.002 * scale);
        }
    }
}

TEST_CASE("opregion prints the limits and a verdict")
{
    const CliRun r = cli({"opregion", "--vdc", "50", "--v1", "230"});
    REQUIRE(r.code == 0);
    CHECK(keyed(r.out, "load_angle_limit_deg") == Approx(8.84).margin(0.01));
    CHECK(keyed(r.out, "amplitude_limit") == Approx(35.36).margin(0.01));

    const CliRun zero = cli({"opregion", "--vdc", "0", "--v1", "230"});
    REQUIRE(zero.code == 0);
    CHECK(keyed(zero.out, "load_angle_limit_deg") == 0.0);

    const CliRun two = cli({"opregion", "--vdc", "50", "--v1", "230.9", "--v2", "219.4"});
    REQUIRE(two.code == 0);
    CHECK(keyed(two.out, "amplitude_difference") == Approx(11.5));
    CHECK(keyed_text(two.out, "verdict") == "feasible");

    const CliRun far = cli({"opregion", "--vdc", "50", "--v1", "230.9", "--v2", "180"});
    CHECK(keyed_text(far.out, "verdict") == "bypass");

    CHECK(cli({"opregion", "--vdc", "50", "--v1", "0"}).code == kExitConfig);
    CHECK(cli({"opregion", "--vdc", "-1", "--v1", "230"}).code == kExitConfig);
}

TEST_CASE("mab-solve returns zero phases for zero targets and round-trips")
{
    const CliRun zero = cli({"mab-solve", "--targets", "0,0,0"});
    REQUIRE(zero.code == 0);
    const auto zrows = csv_rows(zero.out);
    REQUIRE(zrows.size() == 5);
    for (std::size_t k = 1; k < zrows.size(); ++k) {
        CHECK(std::stod(zrows[k][1]) == 0.0);
    }

    const CliRun r = cli({"mab-solve", "--targets", "1000,-2000,500"});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"bridge", "phase_rad", "phase_deg", "power_w"});
    MabOperatingPoint op;
    op.voltages = {800.0, 50.0, 50.0, 50.0};
    for (std::size_t k = 1; k < rows.size(); ++k) {
        op.phases.push_back(std::stod(rows[k][1]));
    }
    const auto p = bridge_powers(op, MabMagnetics::reference_design());
    CHECK(p[1] == Approx(1000.0).epsilon(1e-8));
    CHECK(p[2] == Approx(-2000.0).epsilon(1e-8));
    CHECK(p[3] == Approx(500.0).epsilon(1e-8));
    CHECK(r.out.find("# residual_w=") != std::string::npos);

    // Feeding the echoed powers back reproduces the phases.
    const CliRun again = cli({"mab-solve", "--targets", rows[2][3] + "," + rows[3][3] + "," + rows[4][3]});
    REQUIRE(again.code == 0);
    const auto rows2 = csv_rows(again.out);
    for (std::size_t k = 1; k < rows.size(); ++k) {
        CHECK(std::abs(std::stod(rows2[k][1]) - std::stod(rows[k][1])) < 1e-8);
    }
}

TEST_CASE("mab-solve exits 2 above the transfer ceiling")
{
    const CliRun r = cli({"mab-solve", "--targets", "1e7,0,0"});
    CHECK(r.code == kExitFault);
    CHECK(r.err.find("residual") != std::string::npos);
}

TEST_CASE("mab-solve reads a magnetics file")
{
    const fs::path dir = scratch("magnetics");
    MabMagnetics m = MabMagnetics::reference_design();
    m.switching_frequency = 50e3;
    dump(dir / "m.json", magnetics_to_json(m));
    const CliRun r = cli({"mab-solve", "--targets", "500,500,500", "--magnetics", (dir / "m.json").string()});
    REQUIRE(r.code == 0);
    const auto rows = csv_rows(r.out);
    MabOperatingPoint op;
    op.voltages = {800.0, 50.0, 50.0, 50.0};
    for (std::size_t k = 1; k < rows.size(); ++k) {
        op.phases.push_back(std::stod(rows[k][1]));
    }
    CHECK(bridge_powers(op, m)[1] == Approx(500.0).epsilon(1e-8));

    Json bad = magnetics_to_json(m);
    bad["turns"] = Json::array({16.0, 1.0});
    bad["extra"] = 1;
    dump(dir / "bad.json", bad);
    CHECK(cli({"mab-solve", "--targets", "0,0,0", "--magnetics", (dir / "bad.json").string()}).code ==
          kExitConfig);
}

TEST_CASE("loss and compare reports")
{
    const CliRun paper = cli({"loss"});
    REQUIRE(paper.code == 0);
    const auto rows = csv_rows(paper.out);
    CHECK(rows.back() == std::vector<std::string>{"total", "1180.92"});

    const CliRun upfc = cli({"loss", "upfc", "--format", "json"});
    REQUIRE(upfc.code == 0);
    CHECK(Json::parse(upfc.out)["total"].get<double>() == Approx(784.2).epsilon(1e-12));

    const fs::path dir = scratch("devices");
    StageDevices zero;
    zero.series = {SwitchParams{}};
    dump(dir / "zero.json", devices_to_json(zero));
    const CliRun z = cli({"loss", "--devices", (dir / "zero.json").string(), "--format", "json"});
    REQUIRE(z.code == 0);
    CHECK(Json::parse(z.out)["total"].get<double>() == 0.0);

    dump(dir / "paper.json", devices_to_json(paper_device_preset()));
    const CliRun d = cli({"loss", "--devices", (dir / "paper.json").string(), "--format", "json"});
    REQUIRE(d.code == 0);
    CHECK(Json::parse(d.out)["total"].get<double>() == Approx(1180.92).epsilon(1e-12));

    CHECK(cli({"loss", "nonsense"}).code == kExitConfig);

    const CliRun cmp = cli({"compare"});
    REQUIRE(cmp.code == 0);
    CHECK(cmp.out.find("\"HV 33 A, LV 222 A\"") != std::string::npos);
    CHECK(cmp.out.find("weight_ratio") != std::string::npos);
}

TEST_CASE("sweep runs scenarios concurrently into separate directories")
{
    const fs::path dir = scratch("sweep");
    const CliRun r = cli({"sweep", "case1", "case3", "--jobs", "2", "--duration", "0.05", "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "case1" / "summary.json"));
    CHECK(fs::exists(dir / "case3" / "summary.json"));

    const CliRun one = cli({"run", "case3", "--duration", "0.05", "--out", (dir / "single").string()});
    REQUIRE(one.code == 0);
    CHECK(slurp(dir / "case3" / "timeseries.csv") == slurp(dir / "single" / "timeseries.csv"));
}

TEST_CASE("output directory falls back to PFCSIM_OUT")
{
    CHECK(default_output_dir("given") == fs::path("given"));
    ::setenv("PFCSIM_OUT", "/tmp/from-env", 1);
    CHECK(default_output_dir("") == fs::path("/tmp/from-env"));
    ::unsetenv("PFCSIM_OUT");
    CHECK(default_output_dir("") == fs::path("out"));
}
