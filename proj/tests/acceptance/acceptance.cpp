/*
 * SPDX-License-Identifier: Apache-2.0
 */

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "pfc/io/cli.hpp"
#include "pfc/io/csv.hpp"
#include "pfc/loss_bandwidth.hpp"
#include "pfc/mab_router.hpp"
#include "pfc/sim_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

using namespace pfc;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct TimedRun {
    SimResult result;
    double wall = 0.0;
};

const TimedRun& preset_run(const std::string& name)
{
    static std::map<std::string, TimedRun> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        const auto t0 = std::chrono::steady_clock::now();
        TimedRun r{run_scenario(scenario_preset(name)), 0.0};
        r.wall = seconds_since(t0);
        it = cache.emplace(name, std::move(r)).first;
    }
    return it->second;
}

const SegmentSummary* segment_at(const SimSummary& s, double t)
{
    for (const auto& seg : s.segments) {
        if (t >= seg.t_start && t < seg.t_end) {
            return &seg;
        }
    }
    return nullptr;
}

std::string csv_of(const SimResult& r)
{
    std::ostringstream os;
    io::write_csv(os, r.records);
    return os.str();
}

MabMagnetics random_magnetics(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> l(1e-6, 20e-6);
    std::uniform_real_distribution<double> n(1.0, 20.0);
    std::uniform_real_distribution<double> lm(1e-3, 1e-1);
    MabMagnetics m;
    m.turns = {n(rng), n(rng), n(rng), n(rng)};
    m.star_inductance = {l(rng), l(rng), l(rng), l(rng)};
    m.magnetizing_inductance = lm(rng);
    return m;
}

Verdict operating_area()
{
    const char* argv[] = {"pfcsim", "opregion", "--vdc", "50", "--v1", "230"};
    std::ostringstream out, err;
    const auto t0 = std::chrono::steady_clock::now();
    const int code = io::run_cli(6, argv, out, err);
    const double wall = seconds_since(t0);
    std::istringstream in(out.str());
    std::string line;
    double limit = NAN;
    while (std::getline(in, line)) {
        if (line.rfind("load_angle_limit_deg = ", 0) == 0) {
            limit = std::stod(line.substr(23));
        }
    }
    return {code == 0 && std::abs(limit - 8.84) <= 0.01 && wall < 1.0,
            fmt("load angle limit +-%.4f deg (8.84 +- 0.01), %.1f ms", limit, wall * 1e3)};
}

Verdict case1_compensation()
{
    const TimedRun& r = preset_run("case1");
    const SegmentSummary* bypass = segment_at(r.result.summary, 0.2);
    const SegmentSummary* active = segment_at(r.result.summary, 0.9);
    if (!r.result.healthy() || !bypass || !active) {
        return {false, "run faulted or segments missing"};
    }
    const double s_load = std::abs(Complex(40e3, 5.621e3));
    double worst_q = 0.0;
    double worst_p = 0.0;
    for (const auto& ph : active->phases) {
        worst_q = std::max(worst_q, std::abs(ph.q1) / s_load);
        worst_p = std::max(worst_p, std::abs(ph.p1 - 40e3) / 40e3);
    }
    return {active->settled && worst_q < 0.02 && worst_p < 0.02 && r.wall < 30.0,
            fmt("Q1 before %.0f var/phase, after |Q1|/|S| %.2e (< 2%%), |P1-40kW|/40kW %.2e (< 2%%), "
                "wall %.2f s (< 30 s)",
                bypass->total.q1 / 3.0, worst_q, worst_p, r.wall)};
}

Verdict direction_reversal()
{
    std::string detail;
    bool pass = true;
    // Setpoints are +-5 kW per phase into feeder 2.
    for (const char* name : {"case2", "case3"}) {
        const TimedRun& r = preset_run(name);
        const SegmentSummary* before = segment_at(r.result.summary, 0.55);
        const SegmentSummary* after = segment_at(r.result.summary, 0.95);
        if (!r.result.healthy() || !before || !after) {
            return {false, std::string(name) + ": run faulted or segments missing"};
        }
        const double want_after = std::string(name) == "case2" ? -15e3 : 15e3;
        const double err_after = std::abs(after->total.p2 - want_after) / std::abs(want_after);
        bool ok = before->total.p2 * after->total.p2 < 0.0 && err_after < 0.05;
        double err_before = 0.0;
        if (before->state == "active") {
            err_before = std::abs(before->total.p2 - 15e3) / 15e3;
            ok = ok && err_before < 0.05;
        }
        pass = pass && ok;
        detail += fmt("%s%s P2 %+.0f W -> %+.0f W (setpoint error %.1e / %.1e)",
                      detail.empty() ? "" : "; ", name,
                      before->total.p2, after->total.p2, err_before, err_after);
    }
    return {pass, detail};
}

Verdict case4_balancing()
{
    const TimedRun& r = preset_run("case4");
    const SegmentSummary* before = segment_at(r.result.summary, 0.4);
    const SegmentSummary* after = segment_at(r.result.summary, 0.9);
    if (!r.result.healthy() || !before || !after) {
        return {false, "run faulted or segments missing"};
    }
    return {after->settled && after->current_spread < 0.02,
            fmt("rms current spread %.3f before, %.2e after (< 0.02)", before->current_spread,
                after->current_spread)};
}

Verdict mab_conservation()
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ph(-kPi / 2.0, kPi / 2.0);
    std::uniform_real_distribution<double> v(10.0, 1000.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const MabMagnetics m = random_magnetics(rng);
        MabOperatingPoint op;
        op.voltages = {v(rng), v(rng), v(rng), v(rng)};
        op.phases = {0.0, ph(rng), ph(rng), ph(rng)};
        const auto p = bridge_powers(op, m);
        double sum = 0.0;
        double gross = 0.0;
        for (double x : p) {
            sum += x;
            gross += std::abs(x);
        }
        worst = std::max(worst, gross > 0.0 ? std::abs(sum) / gross : 0.0);
    }
    return {worst < 1e-9, fmt("worst |sum P|/sum |P| %.2e over 1000 points (< 1e-9)", worst)};
}

Verdict linearization()
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ph(-1.2, 1.2);
    std::uniform_real_distribution<double> v(20.0, 900.0);
    const double h = 1e-6;
    double worst = 0.0;
    int points = 0;
    while (points < 100) {
        const MabMagnetics m = random_magnetics(rng);
        MabOperatingPoint op;
        op.voltages = {v(rng), v(rng), v(rng), v(rng)};
        op.phases = {0.0, ph(rng), ph(rng), ph(rng)};
        bool smooth = true;
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = a + 1; b < 4; ++b) {
                smooth = smooth && std::abs(op.phases[a] - op.phases[b]) > 1e-3;
            }
        }
        if (!smooth) {
            continue;
        }
        ++points;
        const MabGainMatrix g = small_signal_gains(op, m);
        const double scale = g.k_direct.cwiseAbs().maxCoeff();
        for (std::size_t j = 0; j < 4; ++j) {
            MabOperatingPoint up = op;
            MabOperatingPoint dn = op;
            up.phases[j] += h;
            dn.phases[j] -= h;
            const auto iu = bridge_currents(up, m);
            const auto id = bridge_currents(dn, m);
            for (std::size_t i = 0; i < 4; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                const double an = i == j ? g.k_direct(ii) : -g.k_cross(ii, static_cast<Eigen::Index>(j));
                const double fd = (iu[i] - id[i]) / (2.0 * h);
                worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), scale));
            }
        }
    }
    return {worst < 1e-9, fmt("worst relative gain error %.2e at 100 smooth points (< 1e-9)", worst)};
}

Verdict newton_round_trip()
{
    const MabMagnetics m = MabMagnetics::reference_design();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ph(-kPi / 4.0, kPi / 4.0);
    std::uniform_real_distribution<double> dv(45.0, 55.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        MabOperatingPoint op;
        op.voltages = {800.0, dv(rng), dv(rng), dv(rng)};
        op.phases = {0.0, ph(rng), ph(rng), ph(rng)};
        const auto p = bridge_powers(op, m);
        try {
            const PhaseSolution s = solve_phase_shifts({p[1], p[2], p[3]}, m, op.voltages);
            const auto back = bridge_powers({op.voltages, s.phases, {}, {}}, m);
            for (std::size_t k = 1; k < 4; ++k) {
                worst = std::max(worst, std::abs(back[k] - p[k]) / s.power_scale);
            }
        } catch (const std::exception&) {
            worst = INFINITY;
        }
    }
    const PhaseSolution zero = solve_phase_shifts({0.0, 0.0, 0.0}, m, {800.0, 50.0, 50.0, 50.0});
    const bool exact_zero = std::all_of(zero.phases.begin(), zero.phases.end(),
                                        [](double x) { return x == 0.0; });
    return {worst < 1e-8 && exact_zero,
            fmt("worst relative residual %.2e on 1000 targets (< 1e-8), zero target %s", worst,
                exact_zero ? "gives zero phases" : "does not give zero phases")};
}

Verdict dab_degenerate()
{
    double worst = 0.0;
    for (const auto& [l1, l2] : {std::pair{7e-6, 11e-6}, {1e-6, 1e-6}, {20e-6, 3e-6}}) {
        MabMagnetics dab;
        dab.turns = {1.0, 1.0};
        dab.star_inductance = {l1, l2};
        dab.magnetizing_inductance = 1e6 * std::max(l1, l2);
        const double l12 = delta_inductances(dab)(0, 1);
        worst = std::max(worst, std::abs(l12 - (l1 + l2)) / (l1 + l2));
    }
    return {worst < 1e-4, fmt("worst |L12 - (L1 + L2)|/(L1 + L2) %.2e (< 1e-4)", worst)};
}

Verdict loss_arithmetic()
{
    const LossBreakdown p = loss_preset("paper");
    const LossBreakdown u = loss_preset("upfc");
    const bool comp = p.series == 293.4 && p.mab() == 558.48 && p.mab_transformer == 36.5 &&
                      p.afe == 183.84 && p.filters == 145.2;
    const bool sums = p.total == p.series + p.mab_semiconductors + p.mab_transformer + p.afe + p.filters &&
                      u.total == u.series + u.mab_semiconductors + u.mab_transformer + u.afe + u.filters;
    const bool totals = std::abs(p.total - 1180.92) < 1e-9 && std::abs(u.total - 784.2) < 1e-9;
    return {comp && sums && totals,
            fmt("stated-loss preset %.2f W (1180.92), UPFC %.1f W (784.2), components %s", p.total, u.total,
                comp ? "as stated" : "differ")};
}

Verdict switch_loss_formula()
{
    SwitchParams p;
    p.r_on = 1.5e-3;
    p.i_rms = 100.0;
    p.dc_voltage = 50.0;
    p.i_avg = 90.0;
    p.switching_time = 20e-9;
    p.frequency = 50e3;
    p.c_oss = 5e-9;
    const double err = std::abs(switch_loss(p) - 17.5625);

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int n = 0; n < 2000; ++n) {
        SwitchParams q;
        q.r_on = 0.05 * u(rng);
        q.c_oss = 1e-8 * u(rng);
        q.switching_time = 1e-7 * u(rng);
        q.dc_voltage = 1000.0 * u(rng);
        q.frequency = 2e5 * u(rng);
        q.i_rms = 300.0 * u(rng);
        q.i_avg = 300.0 * u(rng);
        q.count = 1 + static_cast<int>(10.0 * u(rng));
        const double base = switch_loss(q);
        const double g = 1.0 + 2.0 * u(rng);
        const std::function<void(SwitchParams&)> bumps[] = {
            [&](SwitchParams& s) { s.r_on *= g; },        [&](SwitchParams& s) { s.c_oss *= g; },
            [&](SwitchParams& s) { s.switching_time *= g; }, [&](SwitchParams& s) { s.dc_voltage *= g; },
            [&](SwitchParams& s) { s.frequency *= g; },   [&](SwitchParams& s) { s.i_rms *= g; },
            [&](SwitchParams& s) { s.i_avg *= g; },       [&](SwitchParams& s) { s.count += 1; }};
        for (const auto& bump : bumps) {
            SwitchParams r = q;
            bump(r);
            violations += switch_loss(r) < base ? 1 : 0;
        }
        violations += base < 0.0 ? 1 : 0;
    }
    return {err < 1e-12 && violations == 0,
            fmt("example %.12f W (17.5625, error %.1e), %d monotonicity violations in 16000 bumps",
                switch_loss(p), err, violations)};
}

Verdict bandwidth_model()
{
    BertottiParams p;
    p.volume = kCalibratedCoreVolume;
    const BandwidthResult r = transformer_bandwidth(p);
    const double g_err = std::abs(transformer_gain(r.frequency, p) - 1.0 / std::sqrt(2.0));
    return {!r.unbounded && std::abs(r.frequency - 1e3) <= 10.0 && g_err < 1e-10,
            fmt("f_3dB %.2f Hz at calibrated volume %.4f m^3 (1 kHz +- 1%%), |G - 1/sqrt2| %.1e (< 1e-10)",
                r.frequency, p.volume, g_err)};
}

Verdict partial_power()
{
    double worst = 0.0;
    int segments = 0;
    for (const char* name : {"case2", "case3"}) {
        const TimedRun& r = preset_run(name);
        if (!r.result.healthy()) {
            return {false, std::string(name) + " faulted"};
        }
        for (const auto& seg : r.result.summary.segments) {
            if (seg.state == "active") {
                worst = std::max(worst, seg.partial_power_ratio);
                ++segments;
            }
        }
    }
    return {segments > 0 && worst < 0.15,
            fmt("worst |Vs I|/|V1 I| %.3f over %d active segments (< 0.15)", worst, segments)};
}

Verdict determinism_and_step()
{
    const TimedRun& base = preset_run("case2");
    const SimResult rerun = run_scenario(scenario_preset("case2"));
    const std::string a = csv_of(base.result);
    const std::string b = csv_of(rerun);
    const bool identical = a == b;

    Scenario s = scenario_preset("case2");
    s.step *= 0.5;
    const SimResult fine = run_scenario(s);
    double worst = 0.0;
    for (const auto& seg : base.result.summary.segments) {
        const SegmentSummary* f = segment_at(fine.summary, 0.5 * (seg.t_start + seg.t_end));
        if (!f) {
            return {false, "segment missing in the half-step run"};
        }
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& x = seg.phases[k];
            const auto& y = f->phases[k];
            const double scale = std::hypot(x.p2, x.q2);
            worst = std::max({worst, std::abs(x.p2 - y.p2) / scale, std::abs(x.q2 - y.q2) / scale});
        }
    }
    return {identical && fine.healthy() && worst < 0.002,
            fmt("reruns %s (hash %zx), half step moves tail P/Q by %.2e of |S| (< 2e-3)",
                identical ? "identical" : "differ", std::hash<std::string>{}(a), worst)};
}

} // namespace

int main()
{
    const std::pair<const char*, Verdict (*)()> criteria[] = {
        {"operating area", operating_area},
        {"Case 1 reactive compensation", case1_compensation},
        {"Case 2/3 direction reversal", direction_reversal},
        {"Case 4 current balancing", case4_balancing},
        {"MAB conservation", mab_conservation},
        {"linearization oracle", linearization},
        {"Newton-Raphson round trip", newton_round_trip},
        {"DAB degenerate case", dab_degenerate},
        {"loss arithmetic", loss_arithmetic},
        {"switch-loss formula", switch_loss_formula},
        {"bandwidth model", bandwidth_model},
        {"partial-power invariant", partial_power},
        {"determinism and step halving", determinism_and_step},
    };
    int failures = 0;
    int n = 0;
    for (const auto& [name, check] : criteria) {
        ++n;
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
    }
    std::printf("%d/%d criteria passed\n", n - failures, n);
    return failures == 0 ? 0 : 1;
}
