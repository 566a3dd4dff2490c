/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/scenario.hpp"

#include "pfc/errors.hpp"
#include "pfc/series_stage.hpp"

#include <cmath>
#include <string>

namespace pfc {

namespace {

int integer_ratio(double num, double den, const std::string& path)
{
    const double r = num / den;
    const double n = std::round(r);
    if (n < 1.0 || std::abs(r - n) > 1e-9 * n) {
        throw ConfigError(path, "must be an integer multiple of simulation.step");
    }
    return static_cast<int>(n);
}

std::string phase_path(const char* base, std::size_t k)
{
    return std::string(base) + "[" + std::to_string(k) + "]";
}

} // namespace

int Scenario::steps_per_sample() const
{
    return integer_ratio(sample_period, step, "simulation.sample_period");
}

int Scenario::steps_per_record() const
{
    return integer_ratio(record_interval, step, "simulation.record_interval");
}

std::size_t Scenario::total_steps() const
{
    return static_cast<std::size_t>(std::llround(duration / step));
}

Impedance Scenario::load_impedance(std::size_t phase) const
{
    const Complex s = load_power[phase];
    if (std::abs(s) == 0.0) {
        throw ConfigError(phase_path("load.power", phase), "load power must be nonzero");
    }
    const double v = phase_voltage();
    const Complex z = v * v / std::conj(s);
    return {z.real(), z.imag(), omega()};
}

Impedance Scenario::plant_impedance(std::size_t phase) const
{
    return topology == Topology::TwoFeeder ? line : load_impedance(phase);
}

Phasor Scenario::far_end_voltage(std::size_t phase) const
{
    return topology == Topology::TwoFeeder ? feeder2[phase] : Phasor();
}

void Scenario::validate() const
{
    if (!(grid_voltage_ll > 0.0)) {
        throw ConfigError("grid.voltage_ll", "must be positive");
    }
    if (!(frequency > 0.0)) {
        throw ConfigError("grid.frequency", "must be positive");
    }
    if (!(duration > 0.0)) {
        throw ConfigError("simulation.duration", "must be positive");
    }
    if (!(step > 0.0)) {
        throw ConfigError("simulation.step", "must be positive");
    }
    if (step > sample_period) {
        throw ConfigError("simulation.step", "must not exceed the controller sample period");
    }
    steps_per_sample();
    steps_per_record();
    if (!(series_dc_voltage > 0.0)) {
        throw ConfigError("series.dc_voltage", "must be positive");
    }
    if (!(series_tuning > 0.0)) {
        throw ConfigError("series.tuning_factor", "must be positive");
    }
    if (setpoint_ramp < 0.0) {
        throw ConfigError("series.setpoint_ramp", "must be nonnegative");
    }
    if (topology == Topology::TwoFeeder) {
        if (!(line.inductance() > 0.0) || line.resistance() < 0.0) {
            throw ConfigError("line", "needs positive inductance and nonnegative resistance");
        }
    } else {
        for (std::size_t k = 0; k < 3; ++k) {
            const Impedance z = load_impedance(k);
            if (!(z.inductance() > 0.0) || !(z.resistance() > 0.0)) {
                throw ConfigError(phase_path("load.power", k),
                                  "must describe an inductive load with P > 0 and Q > 0");
            }
        }
    }
    try {
        afe.tuning_factor();
    } catch (const DomainError& e) {
        throw ConfigError("afe.phase_margin", e.what());
    }
    if (!(afe.dc_voltage_ref > 0.0) || !(afe.dc_capacitance_per_half > 0.0) ||
        !(afe.filter_inductance > 0.0) || !(afe.filter_resistance > 0.0)) {
        throw ConfigError("afe", "bus reference, capacitance and filter must be positive");
    }
    try {
        mab.magnetics.validate();
    } catch (const DomainError& e) {
        throw ConfigError("mab.magnetics", e.what());
    }
    if (mab.magnetics.ports() != 4) {
        throw ConfigError("mab.magnetics.turns", "one primary and three secondaries are required");
    }
    if (mab.capacitances.size() != 3) {
        throw ConfigError("mab.capacitances", "one capacitance per secondary is required");
    }
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(mab.capacitances[k] > 0.0)) {
            throw ConfigError(phase_path("mab.capacitances", k), "must be positive");
        }
    }
    double last = 0.0;
    for (std::size_t e = 0; e < events.size(); ++e) {
        const auto path = phase_path("events", e);
        const auto& ev = events[e];
        if (!(ev.time >= last)) {
            throw ConfigError(path + ".time", "events must be nonnegative and time-sorted");
        }
        last = ev.time;
        if (ev.action != EventAction::Bypass) {
            for (std::size_t k = 0; k < 3; ++k) {
                try {
                    setpoint_current(*this, k, ev.setpoints[k]);
                } catch (const DomainError& err) {
                    throw ConfigError(path + phase_path(".setpoints", k), err.what());
                }
            }
        }
    }
}

Phasor setpoint_current(const Scenario& s, std::size_t phase, const Setpoint& sp)
{
    const Phasor& v1 = s.feeder1[phase];
    if (sp.kind == Setpoint::Kind::Current) {
        const double ref = v1.magnitude() > 0.0 ? v1.angle() : 0.0;
        return Phasor(sp.current * std::polar(1.0, ref));
    }
    const Phasor v = s.topology == Topology::TwoFeeder ? s.feeder2[phase] : v1;
    if (std::abs(sp.power) == 0.0) {
        return {};
    }
    if (!(v.magnitude() > 1e-9)) {
        throw DomainError("power setpoint needs a nonzero reference voltage");
    }
    return Phasor(std::conj(sp.power / v.value()));
}

Phasor bypass_current(const Scenario& s, std::size_t phase)
{
    return line_current(s.feeder1[phase], s.far_end_voltage(phase), Phasor(),
                        s.plant_impedance(phase));
}

Phasor required_injection(const Scenario& s, std::size_t phase, const Phasor& i)
{
    const Phasor zi(s.plant_impedance(phase).complex() * i.value());
    return zi - (s.feeder1[phase] - s.far_end_voltage(phase));
}

std::vector<RegionVerdict> scenario_region_verdicts(const Scenario& s)
{
    std::vector<RegionVerdict> out;
    const double limit = s.series_dc_voltage / kSqrt2;
    for (const auto& ev : s.events) {
        if (ev.action == EventAction::Bypass) {
            continue;
        }
        for (std::size_t k = 0; k < 3; ++k) {
            RegionVerdict v;
            v.time = ev.time;
            v.phase = k;
            v.required_injection =
                required_injection(s, k, setpoint_current(s, k, ev.setpoints[k])).magnitude();
            v.limit = limit;
            v.feasible = v.required_injection <= limit;
            out.push_back(v);
        }
    }
    return out;
}

namespace {

Scenario base_scenario(const std::string& name)
{
    Scenario s;
    s.name = name;
    s.feeder1 = balanced_set(s.phase_voltage());
    s.feeder2 = s.feeder1;
    s.line = Impedance(0.020, 0.050, s.omega());
    s.provenance = {
        {"grid", "paper-table-2"},
        {"line", "paper-table-2"},
        {"series", "paper-table-2"},
        {"afe", "user"},
        {"mab", "paper-table-1"},
        {"events", "user"},
        {"simulation", "user"},
    };
    return s;
}

ScenarioEvent power_event(double t, EventAction a, Complex s)
{
    ScenarioEvent ev;
    ev.time = t;
    ev.action = a;
    for (auto& sp : ev.setpoints) {
        sp.kind = Setpoint::Kind::Power;
        sp.power = s;
    }
    return ev;
}

} // namespace

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"case1", "case2", "case3", "case4", "bench"};
    return names;
}

Scenario scenario_preset(const std::string& name)
{
    Scenario s = base_scenario(name);
    if (name == "case1") {
        s.topology = Topology::PqLoad;
        s.load_power = {{Complex(40e3, 5.621e3), Complex(40e3, 5.621e3), Complex(40e3, 5.621e3)}};
        s.provenance["load"] = "paper-table-2";
        s.events = {power_event(0.3, EventAction::Activate, {40e3, 0.0})};
    } else if (name == "case2") {
        s.feeder2 = balanced_set(380.0 / kSqrt3);
        s.provenance["feeder2"] = "paper-table-2";
        s.events = {power_event(0.3, EventAction::Activate, {5e3, 0.0}),
                    power_event(0.6, EventAction::Retarget, {-5e3, 0.0})};
    } else if (name == "case3") {
        s.feeder2 = balanced_set(s.phase_voltage(), deg_to_rad(8.0));
        s.provenance["feeder2"] = "paper-table-2";
        s.events = {power_event(0.6, EventAction::Activate, {5e3, 2e3})};
    } else if (name == "case4") {
        s.topology = Topology::PqLoad;
        s.feeder1 = ThreePhaseSet<Phasor>{{Phasor::polar(200.0, 0.0),
                                           Phasor::polar(230.0, deg_to_rad(-120.0)),
                                           Phasor::polar(250.0, deg_to_rad(120.0))}};
        s.load_power = {{Complex(30e3, 4.5e3), Complex(30e3, 4.5e3), Complex(30e3, 4.5e3)}};
        s.provenance["feeder1"] = "paper-table-2";
        s.provenance["load"] = "paper-table-2";
        // Equal currents that put 225 V across each load.
        const Impedance z = s.load_impedance(0);
        ScenarioEvent ev;
        ev.time = 0.5;
        ev.action = EventAction::Activate;
        for (auto& sp : ev.setpoints) {
            sp.kind = Setpoint::Kind::Current;
            sp.current = std::polar(225.0 / z.magnitude(), -z.angle());
        }
        s.events = {ev};
    } else if (name == "bench") {
        s.line = Impedance::from_rl(0.040, 700e-6, s.omega());
        s.feeder2 = balanced_set(380.0 / kSqrt3);
        s.afe.dc_voltage_ref = 750.0;
        s.mab.magnetics.turns = {15.0, 1.0, 1.0, 1.0};
        s.mab.magnetics.switching_frequency = 50e3;
        s.provenance["line"] = "paper-table-3";
        s.provenance["afe"] = "paper-table-3";
        s.provenance["mab"] = "paper-table-3";
        s.provenance["feeder2"] = "user";
        s.events = {power_event(0.3, EventAction::Activate, {5e3, 0.0}),
                    power_event(0.6, EventAction::Retarget, {-5e3, 0.0})};
    } else {
        throw ConfigError("", "unknown preset '" + name + "'");
    }
    return s;
}

const char* to_string(Topology t)
{
    return t == Topology::TwoFeeder ? "two-feeder" : "pq-load";
}

const char* to_string(EventAction a)
{
    switch (a) {
    case EventAction::Bypass:
        return "bypass";
    case EventAction::Activate:
        return "activate";
    case EventAction::Retarget:
        return "retarget";
    }
    return "bypass";
}

} // namespace pfc
