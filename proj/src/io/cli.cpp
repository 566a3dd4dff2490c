/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/io/cli.hpp"

#include "pfc/errors.hpp"
#include "pfc/io/csv.hpp"
#include "pfc/io/scenario_file.hpp"
#include "pfc/io/summary_json.hpp"
#include "pfc/io/svg.hpp"
#include "pfc/loss_bandwidth.hpp"
#include "pfc/series_stage.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace pfc::io {

namespace fs = std::filesystem;

namespace {

struct RunOptions {
    std::optional<double> step;
    std::optional<double> duration;
    std::string out;
    bool svg = false;
};

struct BundleOutcome {
    int code = kExitOk;
    std::string report;
    std::string error;
};

void apply_overrides(Scenario& s, const RunOptions& o)
{
    if (o.step) {
        const double ratio = s.record_interval / s.step;
        s.step = *o.step;
        // Keep the record interval when it stays a multiple of the new step.
        if (std::abs(s.record_interval / s.step - std::round(s.record_interval / s.step)) > 1e-9 * ratio) {
            s.record_interval = s.step;
        }
    }
    if (o.duration) {
        s.duration = *o.duration;
    }
    s.validate();
}

std::string segment_report(const SimSummary& sum)
{
    std::ostringstream os;
    for (const auto& g : sum.segments) {
        os << "  [" << format_number(g.t_start) << ", " << format_number(g.t_end) << "] " << g.state
           << (g.settled ? " settled" : " not settled")
           << "  P1=" << format_number(g.total.p1) << " W  Q1=" << format_number(g.total.q1)
           << " var  P2=" << format_number(g.total.p2) << " W  Q2=" << format_number(g.total.q2)
           << " var  Irms=" << format_number(g.total.i_rms) << " A\n";
    }
    return os.str();
}

BundleOutcome write_bundle(Scenario s, const fs::path& dir, const RunOptions& opts)
{
    BundleOutcome res;
    try {
        apply_overrides(s, opts);
        fs::create_directories(dir);
        std::ofstream csv(dir / "timeseries.csv", std::ios::binary);
        if (!csv) {
            throw ConfigError("", "cannot write to " + dir.string());
        }
        write_csv_header(csv);
        const SimResult r = run_scenario(s, [&csv](const TimeSeriesRecord& rec) { write_csv_row(csv, rec); });
        std::ofstream(dir / "summary.json", std::ios::binary) << summary_to_json(s, r).dump(2) << '\n';
        std::ofstream(dir / "scenario.json", std::ios::binary) << scenario_to_json(s).dump(2) << '\n';
        if (opts.svg) {
            write_svg_plots(dir, s.name, r.records);
        }
        std::ostringstream os;
        os << s.name << ": " << r.records.size() << " rows -> " << dir.string() << '\n'
           << segment_report(r.summary);
        for (const auto& w : r.summary.warnings) {
            os << "  warning: " << w << '\n';
        }
        res.report = os.str();
        if (r.summary.fault) {
            res.code = kExitFault;
            res.error = s.name + ": fault at t=" + format_number(r.summary.fault->time) +
                        " s: " + r.summary.fault->cause;
        }
    } catch (const ConfigError& e) {
        res.code = kExitConfig;
        res.error = e.what();
    } catch (const fs::filesystem_error& e) {
        res.code = kExitConfig;
        res.error = e.what();
    }
    return res;
}

std::vector<double> parse_list(const std::string& text, const std::string& what)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError(what, "not a number: '" + item + "'");
        }
    }
    return out;
}

void print_breakdown(std::ostream& out, const LossBreakdown& b, const std::string& format)
{
    if (format == "json") {
        Json j = {{"series", b.series},
                  {"mab_semiconductors", b.mab_semiconductors},
                  {"mab_transformer", b.mab_transformer},
                  {"mab", b.mab()},
                  {"afe", b.afe},
                  {"filters", b.filters},
                  {"total", b.total}};
        out << j.dump(2) << '\n';
        return;
    }
    out << "component,watts\r\n"
        << "series," << format_number(b.series) << "\r\n"
        << "mab_semiconductors," << format_number(b.mab_semiconductors) << "\r\n"
        << "mab_transformer," << format_number(b.mab_transformer) << "\r\n"
        << "afe," << format_number(b.afe) << "\r\n"
        << "filters," << format_number(b.filters) << "\r\n"
        << "total," << format_number(b.total) << "\r\n";
}

void print_comparison(std::ostream& out, const std::string& format)
{
    const TopologyComparison t = topology_comparison();
    if (format == "json") {
        Json rows = Json::array();
        for (const auto& r : t.rows) {
            rows.push_back({{"item", r.item}, {"mab", r.mab}, {"dab3", r.dab}});
        }
        Json j = {{"rows", rows},
                  {"weight_ratio", t.weight_ratio()},
                  {"volume_ratio", t.volume_ratio()},
                  {"hv_switch_ratio", t.hv_switch_ratio()}};
        out << j.dump(2) << '\n';
        return;
    }
    out << "item,mab,3x_dab\r\n";
    for (const auto& r : t.rows) {
        out << csv_quote(r.item) << ',' << csv_quote(r.mab) << ',' << csv_quote(r.dab) << "\r\n";
    }
    out << "weight_ratio," << format_number(t.weight_ratio()) << ",\r\n"
        << "volume_ratio," << format_number(t.volume_ratio()) << ",\r\n"
        << "hv_switch_ratio," << format_number(t.hv_switch_ratio()) << ",\r\n";
}

} // namespace

fs::path default_output_dir(const std::string& flag)
{
    if (!flag.empty()) {
        return flag;
    }
    if (const char* env = std::getenv("PFCSIM_OUT"); env && *env) {
        return env;
    }
    return "out";
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Averaged-model simulator of a series/shunt power-flow controller with a "
                 "multi-active-bridge router"};
    app.name("pfcsim");
    app.require_subcommand(1);

    RunOptions run_opts;
    std::string run_target;
    auto* run = app.add_subcommand("run", "Simulate a preset (case1..case4, bench) or scenario file");
    run->add_option("scenario", run_target, "preset name or scenario file")->required();
    run->add_option("--step", run_opts.step, "integration step, s");
    run->add_option("--duration", run_opts.duration, "simulated time, s");
    run->add_option("--out", run_opts.out, "output directory (default $PFCSIM_OUT or ./out)");
    run->add_flag("--svg", run_opts.svg, "also write SVG plots");

    double vdc = 0.0;
    double v1 = 0.0;
    std::optional<double> v2;
    double v2_angle = 0.0;
    std::optional<double> p_load;
    std::optional<double> q_load;
    auto* opregion = app.add_subcommand("opregion", "Operating region of one series module");
    opregion->add_option("--vdc", vdc, "module dc voltage, V")->required();
    opregion->add_option("--v1", v1, "feeder 1 rms phase voltage, V")->required();
    opregion->add_option("--v2", v2, "feeder 2 rms phase voltage, V");
    opregion->add_option("--v2-angle", v2_angle, "feeder 2 angle relative to feeder 1, deg");
    opregion->add_option("--p", p_load, "load active power, W");
    opregion->add_option("--q", q_load, "load reactive power, var");

    std::string targets_text;
    std::string magnetics_file;
    std::string voltages_text;
    auto* mab = app.add_subcommand("mab-solve", "Phase shifts for secondary power targets");
    mab->add_option("--targets", targets_text,
                    "secondary powers P1,P2,P3 in W (positive: the bridge sources power)")
        ->required();
    mab->add_option("--magnetics", magnetics_file, "magnetics JSON file");
    mab->add_option("--voltages", voltages_text, "bridge dc voltages V0,V1,V2,V3");

    std::string loss_preset_name = "paper";
    std::string devices_file;
    std::string loss_format = "csv";
    auto* loss = app.add_subcommand("loss", "Loss breakdown");
    loss->add_option("preset", loss_preset_name, "paper, paper-devices, upfc or zero");
    loss->add_option("--devices", devices_file, "device JSON file");
    loss->add_option("--format", loss_format)->check(CLI::IsMember({"csv", "json"}));

    std::string compare_format = "csv";
    auto* compare = app.add_subcommand("compare", "MAB versus three DABs at 15 kW");
    compare->add_option("--format", compare_format)->check(CLI::IsMember({"csv", "json"}));

    std::vector<std::string> sweep_targets;
    RunOptions sweep_opts;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* sweep = app.add_subcommand("sweep", "Run several scenarios concurrently");
    sweep->add_option("scenarios", sweep_targets, "preset names or scenario files")->required();
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_option("--step", sweep_opts.step, "integration step, s");
    sweep->add_option("--duration", sweep_opts.duration, "simulated time, s");
    sweep->add_option("--out", sweep_opts.out, "output directory; one subdirectory per scenario");
    sweep->add_flag("--svg", sweep_opts.svg, "also write SVG plots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run) {
            const Scenario s = load_scenario(run_target);
            const BundleOutcome r = write_bundle(s, default_output_dir(run_opts.out), run_opts);
            out << r.report;
            if (!r.error.empty()) {
                err << r.error << '\n';
            }
            return r.code;
        }

        if (*opregion) {
            if (!(v1 > 0.0) || vdc < 0.0 || (v2 && !(*v2 > 0.0))) {
                err << "opregion: --v1 and --v2 must be positive and --vdc nonnegative\n";
                return kExitConfig;
            }
            const OperatingRegion r = pq_load_operating_region(vdc, v1);
            out << "vdc = " << format_number(vdc) << '\n'
                << "v1 = " << format_number(v1) << '\n'
                << "load_angle_limit_deg = " << format_number(rad_to_deg(r.load_angle_limit)) << '\n'
                << "amplitude_limit = " << format_number(vdc / kSqrt2) << '\n'
                << "phase_limit_deg = " << format_number(rad_to_deg(r.load_angle_limit)) << '\n';
            if (r.saturated_argument) {
                out << "note = V_dc/(sqrt2 V1) above 1, limit saturated at 90 deg\n";
            }
            if (v2) {
                const Phasor a = Phasor::polar(v1, 0.0);
                const Phasor b = Phasor::polar(*v2, deg_to_rad(v2_angle));
                const OperatingRegion t = two_feeder_operating_region(vdc, a, b);
                out << "v2 = " << format_number(*v2) << '\n'
                    << "amplitude_difference = " << format_number(std::abs(v1 - *v2)) << '\n'
                    << "phase_difference_deg = " << format_number(std::abs(v2_angle)) << '\n'
                    << "verdict = " << (t.feasible ? "feasible" : "bypass") << '\n';
            } else if (p_load || q_load) {
                const double p = p_load.value_or(0.0);
                const double q = q_load.value_or(0.0);
                const OperatingRegion t = pq_load_operating_region(vdc, v1, p, q);
                out << "load_angle_deg = " << format_number(rad_to_deg(std::atan2(q, p))) << '\n'
                    << "verdict = " << (t.feasible ? "feasible" : "bypass") << '\n';
            }
            return kExitOk;
        }

        if (*mab) {
            const MabMagnetics m = magnetics_file.empty()
                                       ? MabMagnetics::reference_design()
                                       : magnetics_from_json(read_json_file(magnetics_file));
            const auto targets = parse_list(targets_text, "--targets");
            std::vector<double> volts;
            if (voltages_text.empty()) {
                volts.assign(m.ports(), 50.0);
                volts[0] = 50.0 * m.turns_ratio(0, 1);
            } else {
                volts = parse_list(voltages_text, "--voltages");
            }
            if (targets.size() + 1 != m.ports() || volts.size() != m.ports()) {
                err << "mab-solve: expected " << m.ports() - 1 << " targets and " << m.ports()
                    << " voltages\n";
                return kExitConfig;
            }
            try {
                const PhaseSolution sol = solve_phase_shifts(targets, m, volts);
                out << "bridge,phase_rad,phase_deg,power_w\r\n";
                for (std::size_t i = 0; i < sol.phases.size(); ++i) {
                    out << i << ',' << format_number(sol.phases[i]) << ','
                        << format_number(rad_to_deg(sol.phases[i])) << ','
                        << format_number(sol.powers[i]) << "\r\n";
                }
                out << "# residual_w=" << format_number(sol.residual)
                    << " iterations=" << sol.iterations
                    << " primary_power_w=" << format_number(sol.primary_power()) << '\n';
                return kExitOk;
            } catch (const InfeasibleError& e) {
                err << "mab-solve: " << e.what() << "; residual " << format_number(e.residual())
                    << " W\n";
                return kExitFault;
            }
        }

        if (*loss) {
            const LossBreakdown b = devices_file.empty()
                                        ? loss_preset(loss_preset_name)
                                        : system_loss_report(devices_from_json(read_json_file(devices_file)));
            print_breakdown(out, b, loss_format);
            return kExitOk;
        }

        if (*compare) {
            print_comparison(out, compare_format);
            return kExitOk;
        }

        if (*sweep) {
            const fs::path root = default_output_dir(sweep_opts.out);
            std::vector<BundleOutcome> results(sweep_targets.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&] {
                for (std::size_t i = next++; i < sweep_targets.size(); i = next++) {
                    try {
                        const Scenario s = load_scenario(sweep_targets[i]);
                        results[i] = write_bundle(s, root / s.name, sweep_opts);
                    } catch (const ConfigError& e) {
                        results[i] = {kExitConfig, "", sweep_targets[i] + ": " + e.what()};
                    }
                }
            };
            std::vector<std::thread> pool;
            const unsigned n = std::min<unsigned>(jobs, static_cast<unsigned>(sweep_targets.size()));
            for (unsigned k = 0; k < n; ++k) {
                pool.emplace_back(worker);
            }
            for (auto& t : pool) {
                t.join();
            }
            int code = kExitOk;
            for (const auto& r : results) {
                out << r.report;
                if (!r.error.empty()) {
                    err << r.error << '\n';
                }
                if (r.code == kExitConfig) {
                    code = kExitConfig;
                } else if (r.code == kExitFault && code == kExitOk) {
                    code = kExitFault;
                }
            }
            return code;
        }
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        err << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}

} // namespace pfc::io
