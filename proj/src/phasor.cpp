/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/phasor.hpp"

#include <cmath>

namespace pfc {

double normalize_angle(double rad)
{
    double a = std::remainder(rad, 2.0 * kPi);
    if (a <= -kPi) {
        a += 2.0 * kPi;
    }
    return a;
}

Phasor Phasor::polar(double magnitude, double angle_rad)
{
    return Phasor(std::polar(magnitude, angle_rad));
}

double Phasor::angle() const
{
    if (value_ == Complex(0.0, 0.0)) {
        return 0.0;
    }
    return normalize_angle(std::arg(value_));
}

double Phasor::instantaneous(double theta) const
{
    return kSqrt2 * (value_.real() * std::cos(theta) - value_.imag() * std::sin(theta));
}

Impedance::Impedance(double resistance, double reactance, double omega)
    : resistance_(resistance), reactance_(reactance), omega_(omega)
{
}

Impedance Impedance::from_rl(double resistance, double inductance, double omega)
{
    return {resistance, omega * inductance, omega};
}

ThreePhaseSet<Phasor> balanced_set(double magnitude_rms, double angle_rad)
{
    ThreePhaseSet<Phasor> s;
    for (std::size_t p = 0; p < 3; ++p) {
        s[p] = Phasor::polar(magnitude_rms, angle_rad - 2.0 * kPi / 3.0 * static_cast<double>(p));
    }
    return s;
}

DqSample to_dq(StationaryPair x, double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {x.alpha * c + x.beta * s, -x.alpha * s + x.beta * c, theta};
}

StationaryPair from_dq(const DqSample& y)
{
    const double c = std::cos(y.theta);
    const double s = std::sin(y.theta);
    return {y.d * c - y.q * s, y.d * s + y.q * c};
}

DqSample phasor_to_dq(const Phasor& rms, double frame_offset, double theta)
{
    const Complex peak = kSqrt2 * rms.value() * std::polar(1.0, -frame_offset);
    return {peak.real(), peak.imag(), theta};
}

Phasor dq_to_phasor(const DqSample& sample, double frame_offset)
{
    return Phasor(sample.as_complex() * std::polar(1.0, frame_offset) / kSqrt2);
}

QuadratureDelayLine::QuadratureDelayLine(double sample_period, double omega)
    : sample_period_(sample_period), delay_(0.5 * kPi / omega / sample_period)
{
    const auto whole = static_cast<std::size_t>(std::floor(delay_));
    buffer_.assign(whole + 2, 0.0);
}

double QuadratureDelayLine::push(double sample)
{
    const std::size_t n = buffer_.size();
    head_ = (head_ + 1) % n;
    buffer_[head_] = sample;

    const auto whole = static_cast<std::size_t>(std::floor(delay_));
    const double frac = delay_ - static_cast<double>(whole);
    const double x0 = buffer_[(head_ + n - whole) % n];
    if (frac == 0.0) {
        return x0;
    }
    const double x1 = buffer_[(head_ + n - whole - 1) % n];
    return x0 * (1.0 - frac) + x1 * frac;
}

std::vector<double> quadrature_of(std::span<const double> samples, double sample_period,
                                  double omega)
{
    QuadratureDelayLine line(sample_period, omega);
    std::vector<double> out;
    out.reserve(samples.size());
    for (double x : samples) {
        out.push_back(line.push(x));
    }
    return out;
}

} // namespace pfc
