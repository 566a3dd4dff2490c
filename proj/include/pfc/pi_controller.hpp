/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "pfc/phasor.hpp"

#include <limits>

namespace pfc {

/// Discrete PI, K_P (1 + 1/(tau_i s)), forward-Euler integral at period T_s.
/// The integral is frozen while the output is clamped and the error would
/// drive it further into the clamp.
class PiController {
public:
    PiController() = default;
    PiController(double kp, double tau_i, double sample_period,
                 double out_min = -std::numeric_limits<double>::infinity(),
                 double out_max = std::numeric_limits<double>::infinity());

    double update(double error, double feedforward = 0.0);
    void reset(double integral = 0.0) { integral_ = integral; saturated_ = false; }

    /// Gain scheduling: later integral increments use the new gain.
    void set_gain(double kp) { kp_ = kp; }
    void set_tau_i(double tau_i) { tau_i_ = tau_i; }

    double kp() const { return kp_; }
    double tau_i() const { return tau_i_; }
    double sample_period() const { return ts_; }
    double integral() const { return integral_; }
    bool saturated() const { return saturated_; }

private:
    double kp_ = 0.0;
    double tau_i_ = std::numeric_limits<double>::infinity();
    double ts_ = 1e-4;
    double out_min_ = -std::numeric_limits<double>::infinity();
    double out_max_ = std::numeric_limits<double>::infinity();
    double integral_ = 0.0;
    bool saturated_ = false;
};

struct DqCommand {
    DqSample voltage;
    bool saturated = false;
};

/// Pair of identical PI channels on d and q with a circular output clamp.
/// The clamp scales the vector (angle preserved). Integration is skipped on
/// a clamped step when the increment points outward.
class DqPiController {
public:
    DqPiController() = default;
    DqPiController(double kp, double tau_i, double sample_period);

    DqCommand update(const DqSample& error, const DqSample& feedforward, double radius);
    void reset() { integral_ = {0.0, 0.0}; }

    double kp() const { return kp_; }
    double tau_i() const { return tau_i_; }
    Complex integral() const { return integral_; }

private:
    double kp_ = 0.0;
    double tau_i_ = std::numeric_limits<double>::infinity();
    double ts_ = 1e-4;
    Complex integral_{0.0, 0.0};
};

} // namespace pfc
