/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/mab_router.hpp"

#include "pfc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace pfc {

namespace {

constexpr double kEightPiSq = 8.0 * kPi * kPi;

void check_ports(const MabOperatingPoint& op, const MabMagnetics& mag)
{
    if (op.voltages.size() != mag.ports() || op.phases.size() != mag.ports()) {
        throw DomainError("operating point size does not match the magnetics");
    }
}

// L_ij referred to winding i.
double referred(const Eigen::MatrixXd& delta, const MabMagnetics& mag, std::size_t i,
                std::size_t j)
{
    const double k = mag.turns[i] / mag.turns[0];
    return delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * k * k;
}

double phase_diff(const MabOperatingPoint& op, std::size_t i, std::size_t j)
{
    const double d = op.phases[i] - op.phases[j];
    if (std::abs(d) >= kPi) {
        throw DomainError("phase-shift difference outside (-pi, pi)");
    }
    return d;
}

} // namespace

void MabMagnetics::validate() const
{
    if (turns.size() < 2 || star_inductance.size() != turns.size()) {
        throw DomainError("magnetics need at least two windings with one inductance each");
    }
    for (double l : star_inductance) {
        if (!(l > 0.0)) {
            throw DomainError("star inductances must be positive");
        }
    }
    for (double n : turns) {
        if (!(n > 0.0)) {
            throw DomainError("turns must be positive");
        }
    }
    if (!(magnetizing_inductance > 0.0) || !(switching_frequency > 0.0)) {
        throw DomainError("magnetizing inductance and switching frequency must be positive");
    }
}

MabMagnetics MabMagnetics::reference_design()
{
    // Equal star branches give L_ij = 4 L + L^2/L_m = 15 uH between any pair.
    MabMagnetics m;
    m.star_inductance.assign(4, 3.75e-6);
    m.magnetizing_inductance = 10e-3;
    m.turns = {16.0, 1.0, 1.0, 1.0};
    m.switching_frequency = 100e3;
    return m;
}

Eigen::MatrixXd delta_inductances(const MabMagnetics& mag)
{
    mag.validate();
    const auto n = static_cast<Eigen::Index>(mag.ports());
    double inv_sum = 1.0 / mag.magnetizing_inductance;
    for (double l : mag.star_inductance) {
        inv_sum += 1.0 / l;
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i != j) {
                out(i, j) = mag.star_inductance[static_cast<std::size_t>(i)] *
                            mag.star_inductance[static_cast<std::size_t>(j)] * inv_sum;
            }
        }
    }
    return out;
}

std::vector<double> bridge_powers(const MabOperatingPoint& op, const MabMagnetics& mag)
{
    check_ports(op, mag);
    const Eigen::MatrixXd delta = delta_inductances(mag);
    const std::size_t n = mag.ports();
    std::vector<double> p(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double d = phase_diff(op, i, j);
            p[i] += op.voltages[i] * mag.turns_ratio(i, j) * op.voltages[j] * d * (kPi - std::abs(d)) /
                    (kEightPiSq * mag.switching_frequency * referred(delta, mag, i, j));
        }
    }
    return p;
}

std::vector<double> bridge_currents(const MabOperatingPoint& op, const MabMagnetics& mag)
{
    check_ports(op, mag);
    const Eigen::MatrixXd delta = delta_inductances(mag);
    const std::size_t n = mag.ports();
    std::vector<double> cur(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double d = phase_diff(op, i, j);
            sum += mag.turns_ratio(i, j) * op.voltages[j] / referred(delta, mag, i, j) * d *
                   (kPi - std::abs(d));
        }
        cur[i] = sum / (kEightPiSq * mag.switching_frequency);
    }
    return cur;
}

std::complex<double> MabGainMatrix::dc_link_impedance(std::size_t i, std::complex<double> s) const
{
    const double r = loads.empty() ? std::numeric_limits<double>::infinity() : loads[i];
    const double c = capacitances.empty() ? 0.0 : capacitances[i];
    if (std::isinf(r)) {
        return 1.0 / (c * s);
    }
    return r / (r * c * s + 1.0);
}

std::complex<double> MabGainMatrix::g_direct(std::size_t i, std::complex<double> s) const
{
    return dc_link_impedance(i, s) * k_direct(static_cast<Eigen::Index>(i));
}

std::complex<double> MabGainMatrix::g_cross(std::size_t i, std::size_t j,
                                            std::complex<double> s) const
{
    return dc_link_impedance(i, s) *
           k_cross(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

MabGainMatrix small_signal_gains(const MabOperatingPoint& op, const MabMagnetics& mag)
{
    check_ports(op, mag);
    const Eigen::MatrixXd delta = delta_inductances(mag);
    const std::size_t n = mag.ports();
    MabGainMatrix g;
    g.k_direct = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    g.k_cross = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    g.loads = op.loads;
    g.capacitances = op.capacitances;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double d = phase_diff(op, i, j);
            const double k = mag.turns_ratio(i, j) * op.voltages[j] / referred(delta, mag, i, j) *
                             (kPi - 2.0 * std::abs(d)) /
                             (kEightPiSq * mag.switching_frequency);
            const auto ii = static_cast<Eigen::Index>(i);
            g.k_cross(ii, static_cast<Eigen::Index>(j)) = k;
            g.k_direct(ii) += k;
        }
    }
    return g;
}

std::vector<double> decoupling_terms(const MabGainMatrix& gains, const std::vector<double>& phases)
{
    const auto n = gains.k_direct.size();
    std::vector<double> out;
    for (Eigen::Index i = 1; i < n; ++i) {
        const double ki = gains.k_direct(i);
        if (ki == 0.0) {
            throw DegenerateError("K_phi_i is zero at this operating point");
        }
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) {
                sum += gains.k_cross(i, j) / ki * phases[static_cast<std::size_t>(j)];
            }
        }
        out.push_back(sum);
    }
    return out;
}

std::complex<double> mab_open_loop(double omega, double kp, double tau_i, double delay,
                                   double k_phi, double capacitance, double load)
{
    const std::complex<double> s(0.0, omega);
    const std::complex<double> z =
        std::isinf(load) ? 1.0 / (capacitance * s) : load / (load * capacitance * s + 1.0);
    return kp * (1.0 + 1.0 / (tau_i * s)) * std::exp(-s * delay) * k_phi * z;
}

namespace {

double loop_phase_unwrapped(double omega, double tau_i, double delay, double capacitance,
                            double load)
{
    const double pi_phase = -std::atan(1.0 / (omega * tau_i));
    const double z_phase = std::isinf(load) ? -0.5 * kPi : -std::atan(omega * load * capacitance);
    return pi_phase - omega * delay + z_phase;
}

} // namespace

MabPiTuning mab_pi_tuning(double k_phi, double delay, double phase_margin, double capacitance,
                          double load, CrossoverRule rule)
{
    if (!(phase_margin < kPi)) {
        throw DomainError("phase margin must be below 180 degrees");
    }
    if (!(delay > 0.0)) {
        throw DomainError("digital delay must be positive");
    }
    if (k_phi == 0.0) {
        throw DegenerateError("K_phi is zero");
    }
    MabPiTuning t;
    if (rule == CrossoverRule::Printed) {
        t.omega_c = (kPi - phase_margin) / delay;
        t.tau_i = 10.0 / t.omega_c;
        t.kp = capacitance * t.omega_c / k_phi;
    } else {
        // Phase lag is atan(0.1) (PI with tau_i w_c = 10) + w T_d + dc-link lag.
        const double target = kPi - phase_margin;
        auto lag = [&](double w) {
            return -loop_phase_unwrapped(w, 10.0 / w, delay, capacitance, load);
        };
        double lo = 0.0;
        double hi = target / delay;
        if (lag(hi) < target || lag(1e-9 * hi) > target) {
            throw DomainError("phase margin not reachable with this delay");
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (lag(mid) < target ? lo : hi) = mid;
        }
        t.omega_c = 0.5 * (lo + hi);
        t.tau_i = 10.0 / t.omega_c;
        const double mag = std::abs(mab_open_loop(t.omega_c, 1.0, t.tau_i, delay, k_phi,
                                                  capacitance, load));
        t.kp = 1.0 / mag;
    }
    if (!std::isinf(load) && load * capacitance * t.omega_c < 10.0) {
        t.warnings.emplace_back("R C w_c is not much larger than 1");
    }
    return t;
}

LoopMargin mab_loop_margin(double kp, double tau_i, double delay, double k_phi,
                           double capacitance, double load)
{
    auto gain = [&](double w) {
        return std::abs(mab_open_loop(w, kp, tau_i, delay, k_phi, capacitance, load));
    };
    double lo = 1e-3;
    double hi = 1e9;
    if (gain(lo) < 1.0 || gain(hi) > 1.0) {
        throw DomainError("no unity-gain crossover in range");
    }
    for (int it = 0; it < 300; ++it) {
        const double mid = std::sqrt(lo * hi);
        (gain(mid) > 1.0 ? lo : hi) = mid;
    }
    LoopMargin m;
    m.crossover = std::sqrt(lo * hi);
    m.phase_margin = kPi + loop_phase_unwrapped(m.crossover, tau_i, delay, capacitance, load);
    return m;
}

namespace {

double max_pair_gap(const std::vector<double>& phases)
{
    double gap = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        for (std::size_t j = i + 1; j < phases.size(); ++j) {
            gap = std::max(gap, std::abs(phases[i] - phases[j]));
        }
    }
    return gap;
}

double residual_norm(const std::vector<double>& powers, const std::vector<double>& targets)
{
    double r = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        r = std::max(r, std::abs(powers[k + 1] - targets[k]));
    }
    return r;
}

} // namespace

PhaseSolution solve_phase_shifts(const std::vector<double>& secondary_targets,
                                 const MabMagnetics& mag, const std::vector<double>& voltages)
{
    mag.validate();
    const std::size_t n = mag.ports();
    if (secondary_targets.size() + 1 != n || voltages.size() != n) {
        throw DomainError("target or voltage vector size does not match the magnetics");
    }
    const Eigen::MatrixXd delta = delta_inductances(mag);
    double scale = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        // Primary-secondary transfer at pi/2.
        const double pmax = voltages[0] * mag.turns_ratio(0, i) * voltages[i] * (kPi * kPi / 4.0) /
                            (kEightPiSq * mag.switching_frequency * delta(0, static_cast<Eigen::Index>(i)));
        scale = std::max(scale, std::abs(pmax));
    }

    MabOperatingPoint op;
    op.voltages = voltages;
    op.phases.assign(n, 0.0);

    PhaseSolution sol;
    sol.power_scale = scale;
    const double tol = 1e-12 * std::max(scale, 1.0);
    const double accept = 1e-9 * std::max(scale, 1.0);

    auto powers = bridge_powers(op, mag);
    double res = residual_norm(powers, secondary_targets);
    if (res > tol) {
        // Start just off the balanced point.
        for (std::size_t i = 1; i < n; ++i) {
            op.phases[i] = 1e-4;
        }
        powers = bridge_powers(op, mag);
        res = residual_norm(powers, secondary_targets);
    }

    const auto m = static_cast<Eigen::Index>(n - 1);
    int it = 0;
    for (; it < 50 && res > tol; ++it) {
        const MabGainMatrix g = small_signal_gains(op, mag);
        Eigen::MatrixXd jac(m, m);
        Eigen::VectorXd f(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            const double v = voltages[static_cast<std::size_t>(a + 1)];
            f(a) = powers[static_cast<std::size_t>(a + 1)] - secondary_targets[static_cast<std::size_t>(a)];
            for (Eigen::Index b = 0; b < m; ++b) {
                jac(a, b) = a == b ? v * g.k_direct(a + 1) : -v * g.k_cross(a + 1, b + 1);
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (lu.rank() < m) {
            throw DegenerateError("singular Jacobian in phase-shift solve");
        }
        const Eigen::VectorXd step = lu.solve(-f);

        auto trial_at = [&](double alpha) {
            std::vector<double> ph = op.phases;
            for (Eigen::Index a = 0; a < m; ++a) {
                ph[static_cast<std::size_t>(a + 1)] += alpha * step(a);
            }
            return ph;
        };
        double alpha = 1.0;
        // Stay on the monotone branch.
        for (int k = 0; k < 60 && max_pair_gap(trial_at(alpha)) > 0.5 * kPi; ++k) {
            alpha *= 0.5;
        }
        MabOperatingPoint trial = op;
        trial.phases = trial_at(alpha);
        auto trial_powers = bridge_powers(trial, mag);
        double trial_res = residual_norm(trial_powers, secondary_targets);
        for (int k = 0; k < 8 && trial_res > res; ++k) {
            alpha *= 0.5;
            trial.phases = trial_at(alpha);
            trial_powers = bridge_powers(trial, mag);
            trial_res = residual_norm(trial_powers, secondary_targets);
        }
        op = std::move(trial);
        powers = std::move(trial_powers);
        res = trial_res;
    }

    sol.phases = op.phases;
    sol.powers = powers;
    sol.residual = res;
    sol.iterations = it;
    if (res > accept) {
        throw InfeasibleError("phase-shift solve did not converge", res);
    }
    return sol;
}

DcLinkStep mab_dc_link_step(double voltage, double bridge_current, double load_current,
                            double capacitance, double dt, double nominal_voltage)
{
    if (!(dt > 0.0)) {
        throw DomainError("time step must be positive");
    }
    DcLinkStep out;
    const double dv = (-bridge_current - load_current) * dt / capacitance;
    out.voltage = voltage + dv;
    out.step_too_large = std::abs(dv) > 1e-3 * nominal_voltage;
    out.fault = !(out.voltage > 0.0);
    return out;
}

MabController::MabController(MabControllerConfig config) : config_(std::move(config))
{
    config_.magnetics.validate();
    const std::size_t ns = config_.magnetics.ports() - 1;
    if (config_.capacitances.size() != ns) {
        throw DomainError("one dc-link capacitance per secondary is required");
    }
    // Nominal design at the balanced no-load point; K_P is rescheduled each step.
    MabOperatingPoint op;
    op.voltages.assign(config_.magnetics.ports(), config_.voltage_ref);
    op.voltages[0] = config_.voltage_ref * config_.magnetics.turns_ratio(0, 1);
    op.phases.assign(config_.magnetics.ports(), 0.0);
    const MabGainMatrix g = small_signal_gains(op, config_.magnetics);
    const MabPiTuning t = mab_pi_tuning(g.k_direct(1), config_.delay, config_.phase_margin,
                                        config_.capacitances[0],
                                        std::numeric_limits<double>::infinity(), config_.rule);
    omega_c_ = t.omega_c;
    tau_i_ = t.tau_i;
    for (std::size_t i = 0; i < ns; ++i) {
        pi_.emplace_back(t.kp, t.tau_i, config_.sample_period, -config_.phase_limit,
                         config_.phase_limit);
    }
    phases_.assign(config_.magnetics.ports(), 0.0);
}

void MabController::reset()
{
    for (auto& p : pi_) {
        p.reset();
    }
    std::fill(phases_.begin(), phases_.end(), 0.0);
}

std::vector<double> MabController::step(const std::vector<double>& voltages,
                                        const std::vector<double>& load_powers)
{
    const std::size_t n = config_.magnetics.ports();
    const std::size_t ns = n - 1;

    std::vector<double> base(n, 0.0);
    if (config_.feedforward) {
        std::vector<double> targets(ns);
        for (std::size_t k = 0; k < ns; ++k) {
            targets[k] = -load_powers[k];
        }
        base = solve_phase_shifts(targets, config_.magnetics, voltages).phases;
    }

    MabOperatingPoint op;
    op.voltages = voltages;
    op.phases = config_.feedforward ? base : phases_;
    const MabGainMatrix g = small_signal_gains(op, config_.magnetics);

    Eigen::VectorXd u(static_cast<Eigen::Index>(ns));
    for (std::size_t k = 0; k < ns; ++k) {
        const double kphi = g.k_direct(static_cast<Eigen::Index>(k + 1));
        if (!(kphi > 0.0)) {
            throw DegenerateError("K_phi_i is not positive at this operating point");
        }
        const double scale = std::abs(mab_open_loop(omega_c_, 1.0, tau_i_, config_.delay, kphi,
                                                    config_.capacitances[k],
                                                    std::numeric_limits<double>::infinity()));
        pi_[k].set_gain(config_.rule == CrossoverRule::Printed
                            ? config_.capacitances[k] * omega_c_ / kphi
                            : 1.0 / scale);
        // Raising phi_k sends more power out of the link, so the loop is inverted.
        u(static_cast<Eigen::Index>(k)) = -pi_[k].update(config_.voltage_ref - voltages[k + 1]);
    }

    Eigen::VectorXd dphi = u;
    if (config_.decoupling) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(ns),
                                                      static_cast<Eigen::Index>(ns));
        for (std::size_t a = 0; a < ns; ++a) {
            const auto ia = static_cast<Eigen::Index>(a + 1);
            for (std::size_t b = 0; b < ns; ++b) {
                if (a != b) {
                    m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                        -g.k_cross(ia, static_cast<Eigen::Index>(b + 1)) / g.k_direct(ia);
                }
            }
        }
        dphi = m.partialPivLu().solve(u);
    }

    phases_[0] = 0.0;
    for (std::size_t k = 0; k < ns; ++k) {
        phases_[k + 1] = std::clamp(base[k + 1] + dphi(static_cast<Eigen::Index>(k)),
                                    -config_.phase_limit, config_.phase_limit);
    }
    return phases_;
}

} // namespace pfc
