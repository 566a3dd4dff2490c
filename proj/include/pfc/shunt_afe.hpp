/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Averaged three-phase four-wire active front end: voltage-oriented inner
// current control, dc-bus outer loop and split-bus energy balance.
//
// Current sign: AfeState::current is the converter ac-side current flowing
// out of the converter into the grid, which is the convention under which
//   V_d = U_d - w L_f I_q + PI(I_d* - I_d),  V_q = U_q + w L_f I_d + PI(I_q* - I_q)
// decouples the filter. The outer loop works with the import-positive
// reference (positive charges the bus); the two differ by a sign.

#include "pfc/phasor.hpp"
#include "pfc/pi_controller.hpp"

#include <string>
#include <utility>
#include <vector>

namespace pfc {

struct AfeParams {
    double filter_inductance = 500e-6;        ///< H
    double filter_resistance = 0.1;           ///< ohm
    double sample_period = 100e-6;            ///< s
    double phase_margin = deg_to_rad(65.0);   ///< rad
    double dc_voltage_ref = 800.0;            ///< V, full bus
    double dc_capacitance_per_half = 1e-3;    ///< F
    double omega = 2.0 * kPi * 50.0;
    double current_limit = 150.0;             ///< A peak, outer-loop output clamp

    /// a = 1/(pi/2 - phase_margin).
    double tuning_factor() const;
    /// Equivalent capacitance of the two series halves.
    double bus_capacitance() const { return 0.5 * dc_capacitance_per_half; }
    /// Non-fatal findings (a <= 2, bus reference below 700 V).
    std::vector<std::string> warnings() const;
};

struct AfeState {
    Complex current{0.0, 0.0};  ///< I_d + j I_q, converter-to-grid, A peak
    double v_upper = 400.0;     ///< V
    double v_lower = 400.0;     ///< V
    bool fault = false;

    double bus_voltage() const { return v_upper + v_lower; }
};

/// K_P = L_f/(1.5 a T_s), tau_i = L_f/R_f.
std::pair<double, double> afe_gains(const AfeParams& params);

/// Inner-loop crossover w_ci = K_P / L_f.
double afe_inner_crossover(const AfeParams& params);

/// Outer-loop PI: crossover at a tenth of the inner crossover with the PI
/// zero placed there. Returns (K_P [A/V], tau_i [s]).
std::pair<double, double> dc_bus_loop_gains(const AfeParams& params, double grid_voltage_d);

/// Inner current controller, one PI per axis, circular clamp at V_bus/2.
class AfeCurrentController {
public:
    explicit AfeCurrentController(const AfeParams& params);

    DqCommand step(const Complex& i_ref, const Complex& i_meas, const DqSample& u,
                   double bus_voltage);
    void reset() { pi_.reset(); }

    double kp() const { return pi_.kp(); }
    double tau_i() const { return pi_.tau_i(); }

private:
    AfeParams params_;
    DqPiController pi_;
};

DqCommand afe_voltage_command(const AfeState& state, const DqSample& i_ref, const DqSample& u,
                              const AfeParams& params);

/// Outer dc-bus regulator producing the import-positive d-axis current reference.
class DcBusController {
public:
    DcBusController(const AfeParams& params, double grid_voltage_d);

    double step(double bus_voltage);
    void reset() { pi_.reset(); }

    const PiController& pi() const { return pi_; }
    double reference() const { return ref_; }

private:
    double ref_;
    PiController pi_;
};

double dc_bus_outer_loop(double bus_voltage, double bus_voltage_ref, PiController& outer);

/// Grid-side power of the averaged converter, import positive: -1.5 Re(U I*).
double afe_grid_power(const AfeState& state, const DqSample& u);

/// Advances the split bus by dt with the bus energy changing by
/// (P_grid_in - P_mab_draw) dt, shared equally between the halves.
AfeState afe_power_balance(const AfeState& state, double grid_power_in, double mab_draw,
                           double dt, const AfeParams& params);

/// Trapezoidal step of the L_f/R_f filter in the rotating frame.
Complex afe_filter_step(const Complex& current, const Complex& v_conv_prev,
                        const Complex& v_conv_next, const Complex& u_prev,
                        const Complex& u_next, double dt, const AfeParams& params);

} // namespace pfc
