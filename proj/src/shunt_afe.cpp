/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/shunt_afe.hpp"

#include "pfc/errors.hpp"

#include <cmath>

namespace pfc {

double AfeParams::tuning_factor() const
{
    if (!(phase_margin < 0.5 * kPi)) {
        throw DomainError("AFE phase margin must be below 90 degrees");
    }
    if (!(phase_margin > 0.0)) {
        throw DomainError("AFE phase margin must be positive");
    }
    return 1.0 / (0.5 * kPi - phase_margin);
}

std::vector<std::string> AfeParams::warnings() const
{
    std::vector<std::string> out;
    if (tuning_factor() <= 2.0) {
        out.emplace_back("AFE tuning factor a <= 2 (phase margin below ~61.4 deg)");
    }
    if (dc_voltage_ref < 700.0) {
        out.emplace_back("AFE dc voltage reference below 700 V raises current distortion");
    }
    return out;
}

std::pair<double, double> afe_gains(const AfeParams& params)
{
    if (!(params.sample_period > 0.0) || !(params.filter_resistance > 0.0)) {
        throw DomainError("AFE gains need T_s > 0 and R_f > 0");
    }
    const double a = params.tuning_factor();
    return {params.filter_inductance / (1.5 * a * params.sample_period),
            params.filter_inductance / params.filter_resistance};
}

double afe_inner_crossover(const AfeParams& params)
{
    return afe_gains(params).first / params.filter_inductance;
}

std::pair<double, double> dc_bus_loop_gains(const AfeParams& params, double grid_voltage_d)
{
    const double wv = 0.1 * afe_inner_crossover(params);
    const double k = 1.5 * grid_voltage_d / (params.bus_capacitance() * params.dc_voltage_ref);
    if (!(k > 0.0)) {
        throw DomainError("dc-bus loop needs positive grid voltage and bus reference");
    }
    return {wv / (kSqrt2 * k), 1.0 / wv};
}

AfeCurrentController::AfeCurrentController(const AfeParams& params) : params_(params)
{
    const auto [kp, tau_i] = afe_gains(params_);
    pi_ = DqPiController(kp, tau_i, params_.sample_period);
}

DqCommand AfeCurrentController::step(const Complex& i_ref, const Complex& i_meas,
                                     const DqSample& u, double bus_voltage)
{
    const double wl = params_.omega * params_.filter_inductance;
    const DqSample ff{u.d - wl * i_meas.imag(), u.q + wl * i_meas.real(), u.theta};
    const Complex e = i_ref - i_meas;
    return pi_.update({e.real(), e.imag(), u.theta}, ff, 0.5 * bus_voltage);
}

DqCommand afe_voltage_command(const AfeState& state, const DqSample& i_ref, const DqSample& u,
                              const AfeParams& params)
{
    AfeCurrentController ctl(params);
    return ctl.step(i_ref.as_complex(), state.current, u, state.bus_voltage());
}

DcBusController::DcBusController(const AfeParams& params, double grid_voltage_d)
    : ref_(params.dc_voltage_ref)
{
    const auto [kp, tau_i] = dc_bus_loop_gains(params, grid_voltage_d);
    pi_ = PiController(kp, tau_i, params.sample_period, -params.current_limit,
                       params.current_limit);
}

double DcBusController::step(double bus_voltage)
{
    return pi_.update(ref_ - bus_voltage);
}

double dc_bus_outer_loop(double bus_voltage, double bus_voltage_ref, PiController& outer)
{
    return outer.update(bus_voltage_ref - bus_voltage);
}

double afe_grid_power(const AfeState& state, const DqSample& u)
{
    return -1.5 * (u.d * state.current.real() + u.q * state.current.imag());
}

AfeState afe_power_balance(const AfeState& state, double grid_power_in, double mab_draw,
                           double dt, const AfeParams& params)
{
    if (!(dt > 0.0)) {
        throw DomainError("time step must be positive");
    }
    AfeState next = state;
    const double c = params.dc_capacitance_per_half;
    const double de_half = 0.5 * (grid_power_in - mab_draw) * dt;
    const double eu = 0.5 * c * state.v_upper * state.v_upper + de_half;
    const double el = 0.5 * c * state.v_lower * state.v_lower + de_half;
    if (eu <= 0.0 || el <= 0.0) {
        next.fault = true;
        next.v_upper = eu > 0.0 ? std::sqrt(2.0 * eu / c) : 0.0;
        next.v_lower = el > 0.0 ? std::sqrt(2.0 * el / c) : 0.0;
        return next;
    }
    next.v_upper = std::sqrt(2.0 * eu / c);
    next.v_lower = std::sqrt(2.0 * el / c);
    return next;
}

Complex afe_filter_step(const Complex& current, const Complex& v_conv_prev,
                        const Complex& v_conv_next, const Complex& u_prev, const Complex& u_next,
                        double dt, const AfeParams& params)
{
    const Complex z(params.filter_resistance, params.omega * params.filter_inductance);
    const double lh = params.filter_inductance / dt;
    const Complex drive = 0.5 * ((v_conv_prev - u_prev) + (v_conv_next - u_next));
    return ((lh - 0.5 * z) * current + drive) / (lh + 0.5 * z);
}

} // namespace pfc
