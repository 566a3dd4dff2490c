/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/pi_controller.hpp"

#include <algorithm>
#include <cmath>

namespace pfc {

PiController::PiController(double kp, double tau_i, double sample_period, double out_min,
                           double out_max)
    : kp_(kp), tau_i_(tau_i), ts_(sample_period), out_min_(out_min), out_max_(out_max)
{
}

double PiController::update(double error, double feedforward)
{
    const double increment = kp_ * ts_ / tau_i_ * error;
    const double unclamped = feedforward + kp_ * error + integral_ + increment;
    const double out = std::clamp(unclamped, out_min_, out_max_);
    saturated_ = out != unclamped;
    const bool outward = (unclamped > out_max_ && increment > 0.0) ||
                         (unclamped < out_min_ && increment < 0.0);
    if (!outward) {
        integral_ += increment;
    }
    return std::clamp(feedforward + kp_ * error + integral_, out_min_, out_max_);
}

DqPiController::DqPiController(double kp, double tau_i, double sample_period)
    : kp_(kp), tau_i_(tau_i), ts_(sample_period)
{
}

DqCommand DqPiController::update(const DqSample& error, const DqSample& feedforward,
                                 double radius)
{
    const Complex e = error.as_complex();
    const Complex increment = kp_ * ts_ / tau_i_ * e;
    Complex u = feedforward.as_complex() + kp_ * e + integral_ + increment;
    bool saturated = std::abs(u) > radius;
    if (!saturated || (u.real() * increment.real() + u.imag() * increment.imag()) <= 0.0) {
        integral_ += increment;
    }
    u = feedforward.as_complex() + kp_ * e + integral_;
    const double mag = std::abs(u);
    saturated = mag > radius;
    if (saturated) {
        u *= radius / mag;
    }
    return {{u.real(), u.imag(), feedforward.theta}, saturated};
}

} // namespace pfc
