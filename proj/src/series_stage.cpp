/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/series_stage.hpp"

#include "pfc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pfc {

void SeriesModuleParams::validate() const
{
    if (!(dc_voltage > 0.0)) {
        throw DomainError("series module dc voltage must be positive");
    }
    if (!(series_inductance > 0.0)) {
        throw DomainError("series inductance must be positive");
    }
    if (!(sample_period > 0.0)) {
        throw DomainError("sample period must be positive");
    }
}

Phasor SeriesVoltageCommand::voltage(const Phasor& v1) const
{
    return Phasor::polar(r * v1.magnitude(), v1.angle() + gamma);
}

Phasor line_current(const Phasor& v1, const Phasor& v2, const Phasor& vs, const Impedance& zg)
{
    if (zg.magnitude() == 0.0) {
        throw DomainError("line impedance is zero");
    }
    return Phasor((v1.value() + vs.value() - v2.value()) / zg.complex());
}

std::pair<double, double> series_loop_gains(const SeriesModuleParams& params)
{
    const double l = params.line.inductance();
    const double r = params.line.resistance();
    if (!(l > 0.0)) {
        throw DomainError("series current loop needs a positive plant inductance");
    }
    const double kp = l / (1.5 * params.a * params.sample_period);
    const double tau_i = r > 0.0 ? l / r : std::numeric_limits<double>::infinity();
    return {kp, tau_i};
}

SeriesCurrentController::SeriesCurrentController(const SeriesModuleParams& params)
    : params_(params)
{
    const auto [kp, tau_i] = series_loop_gains(params_);
    pi_ = DqPiController(kp, tau_i, params_.sample_period);
}

DqCommand SeriesCurrentController::step(const DqSample& i_ref, const DqSample& i_meas,
                                        const DqSample& v1, const DqSample& v2,
                                        double dc_voltage)
{
    const double wl = params_.omega * params_.line.inductance();
    const double r = params_.line.resistance();
    const DqSample ff{v2.d - v1.d + r * i_ref.d - wl * i_meas.q,
                      v2.q - v1.q + r * i_ref.q + wl * i_meas.d, v1.theta};
    const DqSample err{i_ref.d - i_meas.d, i_ref.q - i_meas.q, v1.theta};
    return pi_.update(err, ff, std::max(dc_voltage, 0.0));
}

DqCommand series_voltage_setpoint(const DqSample& i_ref, const DqSample& i_meas,
                                  const DqSample& v1, const DqSample& v2,
                                  const SeriesModuleParams& params)
{
    SeriesCurrentController ctl(params);
    return ctl.step(i_ref, i_meas, v1, v2);
}

namespace {

double region_argument(double dc_voltage, double v1_rms, bool& saturated)
{
    if (!(v1_rms > 0.0) || dc_voltage < 0.0) {
        throw DomainError("operating region needs V1 > 0 and V_dc >= 0");
    }
    const double x = dc_voltage / (kSqrt2 * v1_rms);
    saturated = x > 1.0;
    return std::min(x, 1.0);
}

} // namespace

OperatingRegion pq_load_operating_region(double dc_voltage, double v1_rms)
{
    OperatingRegion region;
    const double x = region_argument(dc_voltage, v1_rms, region.saturated_argument);
    region.load_angle_limit = std::asin(x);
    region.phase_limit = region.load_angle_limit;
    region.amplitude_limit = dc_voltage / kSqrt2;
    return region;
}

OperatingRegion pq_load_operating_region(double dc_voltage, double v1_rms, double p, double q)
{
    OperatingRegion region = pq_load_operating_region(dc_voltage, v1_rms);
    const double angle = (p == 0.0 && q == 0.0) ? 0.0 : std::atan(q / p);
    region.feasible = std::abs(angle) <= region.load_angle_limit || region.saturated_argument;
    return region;
}

OperatingRegion two_feeder_operating_region(double dc_voltage, const Phasor& v1, const Phasor& v2)
{
    OperatingRegion region;
    const double x = region_argument(dc_voltage, v1.magnitude(), region.saturated_argument);
    region.phase_limit = std::asin(x);
    region.load_angle_limit = region.phase_limit;
    region.amplitude_limit = dc_voltage / kSqrt2;
    const double dtheta = normalize_angle(v1.angle() - v2.angle());
    const double dv = v1.magnitude() - v2.magnitude();
    region.feasible = std::abs(dtheta) <= region.phase_limit &&
                      std::abs(dv) <= region.amplitude_limit;
    return region;
}

PowerPair pq_load_power(double v1_rms, const SeriesVoltageCommand& cmd, double load_impedance,
                        double phi)
{
    if (load_impedance == 0.0) {
        throw DomainError("load impedance is zero");
    }
    const double s = v1_rms * v1_rms / load_impedance;
    return {s * std::cos(phi) + cmd.r * s * std::cos(phi - cmd.gamma),
            s * std::sin(phi) + cmd.r * s * std::sin(phi - cmd.gamma)};
}

PowerPair two_feeder_injected_power(const Phasor& v1, const Phasor& v2,
                                    const SeriesVoltageCommand& cmd, double xg)
{
    if (xg == 0.0) {
        throw DomainError("line reactance is zero");
    }
    const double k = v1.magnitude() * v2.magnitude() / xg;
    const double d = v1.angle() - v2.angle();
    return {k * std::sin(d) + cmd.r * k * std::sin(d + cmd.gamma),
            k * std::cos(d) + cmd.r * k * std::cos(d + cmd.gamma) -
                v2.magnitude() * v2.magnitude() / xg};
}

} // namespace pfc
