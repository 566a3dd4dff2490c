/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Fixed-step averaged-model simulation of the complete power-flow controller.
//
// Each phase is a single-phase circuit feeder 1 -> series source -> plant
// impedance -> feeder 2 (or load), integrated with the trapezoidal rule. A
// fictive beta circuit (same plant, quadrature drive) supplies the orthogonal
// current for the d-q regulators. The AFE is an averaged three-phase model on
// the nominal balanced grid; the MAB is its averaged phase-shift power model.
// Controllers run at the sample period with one sample of computation delay.

#include "pfc/scenario.hpp"

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pfc {

using PhaseArray = std::array<double, 3>;

struct TimeSeriesRecord {
    double t = 0.0;
    PhaseArray v1{}, v2{}, vs{}, i{};  ///< instantaneous, V and A
    PhaseArray i_rms{}, vs_rms{};      ///< one-cycle window
    PhaseArray p1{}, q1{};             ///< feeder-1 side, per phase, one-cycle window
    PhaseArray p2{}, q2{};             ///< feeder-2 / load side
    PhaseArray ps{}, qs{};             ///< series injection
    PhaseArray dc{};                   ///< series dc links
    PhaseArray mab_phase{};            ///< secondary phase shifts, rad
    double bus = 0.0, bus_upper = 0.0, bus_lower = 0.0;
    double afe_id = 0.0, afe_iq = 0.0; ///< converter-to-grid, A peak
    std::array<bool, 3> active{}, series_saturated{};
    bool afe_saturated = false;
    /// Cumulative energies from t = 0 and stored energies, J.
    double e_grid = 0.0;          ///< grid into the AFE bus
    double e_mab_primary = 0.0;   ///< drawn from the bus by the MAB primary
    double e_mab_secondary = 0.0; ///< delivered into the series dc links
    double e_injection = 0.0;     ///< series dc-side draw (all phases)
    double e_bus = 0.0;           ///< stored in the AFE bus
    double e_series_dc = 0.0;     ///< stored in the series dc links
};

struct FaultRecord {
    double time = 0.0;
    std::string cause;
};

struct PhaseMetrics {
    double p1 = 0.0, q1 = 0.0, p2 = 0.0, q2 = 0.0, ps = 0.0, qs = 0.0;
    double i_rms = 0.0, vs_rms = 0.0;
};

struct SegmentSummary {
    double t_start = 0.0;
    double t_end = 0.0;
    std::string state;  ///< "bypass" or "active"
    std::array<PhaseMetrics, 3> phases{};
    PhaseMetrics total;         ///< sums (i_rms and vs_rms: means)
    double current_spread = 0.0;  ///< (max - min) / mean of i_rms
    double rms_variation = 0.0;   ///< worst per-phase (max - min)/mean over the last 5 cycles
    bool settled = false;
    double partial_power_ratio = 0.0;  ///< worst |Vs I| / |V1 I|
    double dc_min = 0.0, dc_max = 0.0;
    double bus_min = 0.0, bus_max = 0.0;
};

struct EnergyLedger {
    double t0 = 0.0, t1 = 0.0;
    double grid_to_afe = 0.0;
    double bus_delta = 0.0;
    double mab_primary = 0.0;
    double mab_secondary = 0.0;
    double series_dc_delta = 0.0;
    double injection = 0.0;
    double imbalance = 0.0;  ///< sum of the absolute bus, MAB and series residuals
    double gross = 0.0;      ///< largest absolute flow in the window
    double relative_imbalance() const { return gross > 0.0 ? std::abs(imbalance) / gross : 0.0; }
};

struct SimSummary {
    std::string scenario;
    std::size_t rows = 0;
    std::vector<SegmentSummary> segments;
    std::vector<RegionVerdict> regions;
    EnergyLedger audit;
    std::vector<std::string> warnings;
    std::optional<FaultRecord> fault;
};

struct SimResult {
    std::vector<TimeSeriesRecord> records;
    SimSummary summary;
    bool healthy() const { return !summary.fault; }
};

using RecordSink = std::function<void(const TimeSeriesRecord&)>;

/// Runs `s` (validated first; ConfigError on bad input). Records are kept
/// in the result and, when `sink` is set, also streamed to it.
SimResult run_scenario(const Scenario& s, const RecordSink& sink = {});

/// Summary of a completed record stream.
SimSummary summarize(const Scenario& s, std::span<const TimeSeriesRecord> records);

/// Energy ledger over [t0, t1] from the cumulative record columns.
EnergyLedger power_audit(std::span<const TimeSeriesRecord> records, double t0, double t1);
EnergyLedger power_audit(std::span<const TimeSeriesRecord> records);

struct PhasorPrediction {
    std::array<Phasor, 3> current;
    PhaseArray p2{}, q2{};  ///< feeder-2 / load side
    PhaseArray p1{}, q1{};  ///< feeder-1 side
};

/// Phasor steady state of the segment starting at `t`, from the series-stage algebra.
PhasorPrediction predict_steady_state(const Scenario& s, double t);

struct SteadyStateReport {
    bool conclusive = false;
    PhaseArray current_error{};  ///< relative |I| error
    PhaseArray p_error{};        ///< relative to the predicted |S|
    PhaseArray q_error{};
    double worst() const;
};

/// Compares the tail of a segment (at least five cycles of records) with a prediction.
SteadyStateReport steady_state_check(std::span<const TimeSeriesRecord> tail,
                                     const PhasorPrediction& prediction, double frequency);

/// Records with t in [t0, t1).
std::span<const TimeSeriesRecord> record_window(std::span<const TimeSeriesRecord> records,
                                                double t0, double t1);

} // namespace pfc
