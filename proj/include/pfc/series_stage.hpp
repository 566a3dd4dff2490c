/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Per-phase series-injection H-bridge: line-current physics, d-q current
// control with grid-voltage feedforward, operating areas and power shares.

#include "pfc/phasor.hpp"
#include "pfc/pi_controller.hpp"

#include <utility>

namespace pfc {

struct SeriesModuleParams {
    double dc_voltage = 50.0;          ///< V, module dc link
    double series_inductance = 100e-6; ///< H, module output filter inductance
    Impedance line;                    ///< total current-path impedance of the plant
    double omega = 2.0 * kPi * 50.0;
    double sample_period = 100e-6;
    double a = 2.0;                    ///< tuning factor of the L/(1.5 a T_s) rule

    void validate() const;
    /// Largest injectable rms voltage without over-modulation.
    double max_injection_rms() const { return dc_voltage / kSqrt2; }
};

/// V_S = r |V1| e^{j(theta1 + gamma)}.
struct SeriesVoltageCommand {
    double r = 0.0;
    double gamma = 0.0;

    static double r_max(double dc_voltage, double v1_rms) { return dc_voltage / (kSqrt2 * v1_rms); }
    Phasor voltage(const Phasor& v1) const;
};

struct OperatingRegion {
    double load_angle_limit = 0.0;       ///< rad, admissible |atan(Q/P)|
    double amplitude_limit = 0.0;        ///< V rms, admissible |V1 - V2|
    double phase_limit = 0.0;            ///< rad, admissible |theta1 - theta2|
    bool feasible = true;                ///< verdict for the supplied candidate (if any)
    bool saturated_argument = false;     ///< V_dc/(sqrt2 V1) exceeded 1
};

struct PowerPair {
    double p = 0.0; ///< W
    double q = 0.0; ///< var
};

/// (V1 + Vs - V2) / Zg. Throws DomainError for |Zg| == 0.
Phasor line_current(const Phasor& v1, const Phasor& v2, const Phasor& vs, const Impedance& zg);

/// PI gains of the series current loop: K_P = L/(1.5 a T_s), tau_i = L/R.
std::pair<double, double> series_loop_gains(const SeriesModuleParams& params);

/// d-q current regulator of one series module. Runs in the frame of its own
/// phase; the feedforward follows the decoupling law plus the resistive drop
/// at the reference,
///   V_Sd = V2d - V1d + R I*_d - w L I_q + PI(e_d)
///   V_Sq = V2q - V1q + R I*_q + w L I_d + PI(e_q)
/// so activation from the bypass steady state is bumpless. The output is
/// clamped to the circle of radius V_dc (peak).
class SeriesCurrentController {
public:
    explicit SeriesCurrentController(const SeriesModuleParams& params);

    DqCommand step(const DqSample& i_ref, const DqSample& i_meas, const DqSample& v1,
                   const DqSample& v2, double dc_voltage);
    DqCommand step(const DqSample& i_ref, const DqSample& i_meas, const DqSample& v1,
                   const DqSample& v2)
    {
        return step(i_ref, i_meas, v1, v2, params_.dc_voltage);
    }
    void reset() { pi_.reset(); }

    const SeriesModuleParams& params() const { return params_; }
    double kp() const { return pi_.kp(); }
    double tau_i() const { return pi_.tau_i(); }

private:
    SeriesModuleParams params_;
    DqPiController pi_;
};

/// One-shot form of the controller step with a fresh integral.
DqCommand series_voltage_setpoint(const DqSample& i_ref, const DqSample& i_meas,
                                  const DqSample& v1, const DqSample& v2,
                                  const SeriesModuleParams& params);

/// Load-angle limit arcsin(V_dc/(sqrt2 V1)); the argument saturates at 1.
OperatingRegion pq_load_operating_region(double dc_voltage, double v1_rms);
/// Same, plus a verdict for the load (P, Q).
OperatingRegion pq_load_operating_region(double dc_voltage, double v1_rms, double p, double q);

/// Phase-difference and amplitude-difference limits for two feeders and a
/// verdict for the given pair (infeasible: the system would bypass).
OperatingRegion two_feeder_operating_region(double dc_voltage, const Phasor& v1, const Phasor& v2);

/// Feeder power share with a P-Q load |Z_L| at angle phi.
PowerPair pq_load_power(double v1_rms, const SeriesVoltageCommand& cmd, double load_impedance,
                        double phi);

/// Power injected into feeder 2 across a reactance X_g.
PowerPair two_feeder_injected_power(const Phasor& v1, const Phasor& v2,
                                    const SeriesVoltageCommand& cmd, double xg);

} // namespace pfc
