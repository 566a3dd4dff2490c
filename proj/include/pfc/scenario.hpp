/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Scenario description shared by the simulator and the file layer.

#include "pfc/mab_router.hpp"
#include "pfc/phasor.hpp"
#include "pfc/shunt_afe.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pfc {

enum class Topology {
    TwoFeeder,  ///< feeder 1 -- series module -- line -- feeder 2
    PqLoad,     ///< feeder 1 -- series module -- R-L load
};

enum class EventAction { Bypass, Activate, Retarget };

/// Per-phase setpoint. Either a complex power or a current phasor.
///  - two-feeder: power delivered into feeder 2
///  - P-Q load:   power drawn from feeder 1
///  - current:    rms phasor in the frame of the phase's feeder-1 voltage
struct Setpoint {
    enum class Kind { Power, Current };
    Kind kind = Kind::Power;
    Complex power{0.0, 0.0};    ///< W + j var
    Complex current{0.0, 0.0};  ///< A rms
};

struct ScenarioEvent {
    double time = 0.0;
    EventAction action = EventAction::Bypass;
    std::array<Setpoint, 3> setpoints{};
};

struct Scenario {
    std::string name;

    double grid_voltage_ll = 400.0;  ///< V rms
    double frequency = 50.0;         ///< Hz
    Topology topology = Topology::TwoFeeder;

    ThreePhaseSet<Phasor> feeder1;
    ThreePhaseSet<Phasor> feeder2;
    /// Per-phase load power at nominal phase voltage (P-Q load topology).
    ThreePhaseSet<Complex> load_power;

    Impedance line;  ///< current-path impedance between the feeders

    double series_dc_voltage = 50.0;
    double series_inductance = 100e-6;  ///< module filter, inside the averaged source
    double series_tuning = 2.0;
    /// Raised-cosine ramp of the current reference after activate/retarget, s.
    double setpoint_ramp = 0.05;

    AfeParams afe;
    MabControllerConfig mab;

    std::vector<ScenarioEvent> events;
    double duration = 1.0;
    double step = 10e-6;
    double sample_period = 100e-6;
    double record_interval = 100e-6;

    /// Parameter-block provenance tags ("paper-table-2", "user", "calibrated", ...).
    std::map<std::string, std::string> provenance;

    double omega() const { return 2.0 * kPi * frequency; }
    double phase_voltage() const { return grid_voltage_ll / kSqrt3; }
    /// Steps per controller sample; validate() guarantees an integer ratio.
    int steps_per_sample() const;
    int steps_per_record() const;
    std::size_t total_steps() const;

    /// Per-phase R-L load impedance at nominal voltage.
    Impedance load_impedance(std::size_t phase) const;
    /// Impedance the series current flows through (line or load).
    Impedance plant_impedance(std::size_t phase) const;
    /// Voltage opposing feeder 1 across the plant (feeder 2, or zero for a load).
    Phasor far_end_voltage(std::size_t phase) const;

    /// Throws ConfigError with the offending field path.
    void validate() const;
};

/// Line current phasor demanded by `sp` in phase `phase`, absolute frame.
Phasor setpoint_current(const Scenario& s, std::size_t phase, const Setpoint& sp);
/// Steady-state current with the module bypassed.
Phasor bypass_current(const Scenario& s, std::size_t phase);
/// Injection voltage that holds current `i` in steady state.
Phasor required_injection(const Scenario& s, std::size_t phase, const Phasor& i);

struct RegionVerdict {
    double time = 0.0;
    std::size_t phase = 0;
    double required_injection = 0.0;  ///< V rms
    double limit = 0.0;               ///< V rms
    bool feasible = true;
};

/// Feasibility of every activate/retarget setpoint.
std::vector<RegionVerdict> scenario_region_verdicts(const Scenario& s);

const std::vector<std::string>& preset_names();
/// Built-in scenario. Throws ConfigError for an unknown name.
Scenario scenario_preset(const std::string& name);

const char* to_string(Topology t);
const char* to_string(EventAction a);

} // namespace pfc
