/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/io/summary_json.hpp"

#include "pfc/series_stage.hpp"

#include <cmath>

namespace pfc::io {

namespace {

Json num(double x)
{
    return std::isfinite(x) ? Json(x) : Json(nullptr);
}

Json metrics(const PhaseMetrics& m)
{
    return {{"p1", num(m.p1)},         {"q1", num(m.q1)},  {"p2", num(m.p2)},
            {"q2", num(m.q2)},         {"ps", num(m.ps)},  {"qs", num(m.qs)},
            {"i_rms", num(m.i_rms)},   {"vs_rms", num(m.vs_rms)}};
}

Json triple(const PhaseArray& a)
{
    return Json::array({num(a[0]), num(a[1]), num(a[2])});
}

Json operating_regions(const Scenario& s)
{
    Json out = Json::array();
    for (std::size_t k = 0; k < 3; ++k) {
        const Phasor& v1 = s.feeder1[k];
        Json j;
        j["phase"] = k;
        if (!(v1.magnitude() > 0.0)) {
            j["available"] = false;
            out.push_back(j);
            continue;
        }
        j["available"] = true;
        if (s.topology == Topology::PqLoad) {
            const Complex sl = s.load_power[k];
            const auto r = pq_load_operating_region(s.series_dc_voltage, v1.magnitude(),
                                                    sl.real(), sl.imag());
            j["load_angle_limit_deg"] = rad_to_deg(r.load_angle_limit);
            j["load_angle_deg"] = rad_to_deg(std::atan2(sl.imag(), sl.real()));
            j["feasible"] = r.feasible;
        } else {
            const auto r = two_feeder_operating_region(s.series_dc_voltage, v1, s.feeder2[k]);
            j["amplitude_limit"] = r.amplitude_limit;
            j["phase_limit_deg"] = rad_to_deg(r.phase_limit);
            j["feasible"] = r.feasible;
        }
        out.push_back(j);
    }
    return out;
}

} // namespace

Json summary_to_json(const Scenario& s, const SimResult& result)
{
    const SimSummary& sum = result.summary;
    Json j;
    j["schema"] = kSummarySchema;
    j["scenario"] = sum.scenario;
    j["topology"] = to_string(s.topology);
    j["rows"] = sum.rows;
    j["healthy"] = result.healthy();
    if (sum.fault) {
        j["fault"] = {{"time", sum.fault->time}, {"cause", sum.fault->cause}};
    } else {
        j["fault"] = nullptr;
    }
    j["warnings"] = sum.warnings;

    Json segs = Json::array();
    for (const auto& g : sum.segments) {
        Json sj;
        sj["t_start"] = g.t_start;
        sj["t_end"] = g.t_end;
        sj["state"] = g.state;
        sj["settled"] = g.settled;
        sj["rms_variation"] = num(g.rms_variation);
        sj["current_spread"] = num(g.current_spread);
        sj["partial_power_ratio"] = num(g.partial_power_ratio);
        sj["dc_min"] = num(g.dc_min);
        sj["dc_max"] = num(g.dc_max);
        sj["bus_min"] = num(g.bus_min);
        sj["bus_max"] = num(g.bus_max);
        Json ph = Json::array();
        for (const auto& m : g.phases) {
            ph.push_back(metrics(m));
        }
        sj["phases"] = ph;
        sj["total"] = metrics(g.total);

        const auto tail = record_window(result.records, std::max(g.t_start, g.t_end - 0.1),
                                        g.t_end + 0.5 * s.record_interval);
        const auto pred = predict_steady_state(s, g.t_start);
        const auto rep = steady_state_check(tail, pred, s.frequency);
        Json pj = Json::array();
        for (std::size_t k = 0; k < 3; ++k) {
            pj.push_back({{"i_rms", pred.current[k].magnitude()},
                          {"p2", pred.p2[k]},
                          {"q2", pred.q2[k]}});
        }
        sj["steady_state"] = {{"conclusive", rep.conclusive},
                              {"worst_error", num(rep.worst())},
                              {"current_error", triple(rep.current_error)},
                              {"p_error", triple(rep.p_error)},
                              {"q_error", triple(rep.q_error)},
                              {"prediction", pj}};
        segs.push_back(sj);
    }
    j["segments"] = segs;

    Json regions = Json::array();
    for (const auto& r : sum.regions) {
        regions.push_back({{"time", r.time},
                           {"phase", r.phase},
                           {"required_injection", r.required_injection},
                           {"limit", r.limit},
                           {"feasible", r.feasible}});
    }
    j["setpoint_regions"] = regions;
    j["operating_region"] = operating_regions(s);

    const auto& a = sum.audit;
    j["audit"] = {{"t0", a.t0},
                  {"t1", a.t1},
                  {"grid_to_afe", a.grid_to_afe},
                  {"bus_delta", a.bus_delta},
                  {"mab_primary", a.mab_primary},
                  {"mab_secondary", a.mab_secondary},
                  {"series_dc_delta", a.series_dc_delta},
                  {"injection", a.injection},
                  {"imbalance", a.imbalance},
                  {"gross", a.gross},
                  {"relative_imbalance", a.relative_imbalance()}};
    return j;
}

} // namespace pfc::io
