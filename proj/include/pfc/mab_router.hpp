/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Multi-active-bridge power router with a single multi-winding transformer.
//
// Bridge 0 is the primary (phase reference, phi_0 = 0); bridges 1..n-1 are
// the secondaries. Star inductances are referred to the primary winding.
// Power and current signs: positive = out of the bridge's dc side into the
// transformer mesh (a leading bridge sources power).

#include "pfc/pi_controller.hpp"

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace pfc {

struct MabMagnetics {
    std::vector<double> star_inductance;  ///< H, per winding, referred to primary
    double magnetizing_inductance = std::numeric_limits<double>::infinity(); ///< H
    std::vector<double> turns;            ///< winding turns N_i
    double switching_frequency = 100e3;   ///< Hz

    std::size_t ports() const { return turns.size(); }
    double turns_ratio(std::size_t i, std::size_t j) const { return turns[i] / turns[j]; }
    void validate() const;

    /// 800 V : 3 x 50 V, 15 uH primary-to-secondary, 100 kHz.
    static MabMagnetics reference_design();
};

/// Delta-model inductances L_ij = L_i L_j (1/L_m + sum_k 1/L_k), primary base.
/// Symmetric; the diagonal is zero.
Eigen::MatrixXd delta_inductances(const MabMagnetics& mag);

struct MabOperatingPoint {
    std::vector<double> voltages;      ///< V, dc bridge voltages
    std::vector<double> phases;        ///< rad, phases[0] is the primary (0)
    std::vector<double> capacitances;  ///< F, dc-link capacitors
    std::vector<double> loads;         ///< ohm, equivalent loads (inf = open)

    std::size_t ports() const { return voltages.size(); }
};

std::vector<double> bridge_powers(const MabOperatingPoint& op, const MabMagnetics& mag);
std::vector<double> bridge_currents(const MabOperatingPoint& op, const MabMagnetics& mag);

struct MabGainMatrix {
    Eigen::VectorXd k_direct;   ///< K_phi_i, A/rad
    Eigen::MatrixXd k_cross;    ///< K_phi_ij, A/rad (zero diagonal)
    std::vector<double> loads;
    std::vector<double> capacitances;

    /// Dc-link impedance Z_i(s) = R_i / (R_i C_i s + 1); 1/(C_i s) for an open load.
    std::complex<double> dc_link_impedance(std::size_t i, std::complex<double> s) const;
    std::complex<double> g_direct(std::size_t i, std::complex<double> s) const;
    std::complex<double> g_cross(std::size_t i, std::size_t j, std::complex<double> s) const;
};

MabGainMatrix small_signal_gains(const MabOperatingPoint& op, const MabMagnetics& mag);

/// Decoupling offsets dphi_i = sum_{j != i} (K_ij / K_i) phi_j for every
/// secondary (index 0 of the result corresponds to bridge 1).
std::vector<double> decoupling_terms(const MabGainMatrix& gains, const std::vector<double>& phases);

enum class CrossoverRule {
    /// w_c = (pi - phi_m)/T_d and K_P = C w_c / K_phi, as a closed form.
    Printed,
    /// Solves the phase condition of the full open loop (PI, delay, dc link)
    /// and sets |G_OL(j w_c)| = 1 exactly.
    ExactPhase,
};

struct MabPiTuning {
    double kp = 0.0;       ///< rad/V
    double tau_i = 0.0;    ///< s
    double omega_c = 0.0;  ///< rad/s
    std::vector<std::string> warnings;
};

MabPiTuning mab_pi_tuning(double k_phi, double delay, double phase_margin, double capacitance,
                          double load = std::numeric_limits<double>::infinity(),
                          CrossoverRule rule = CrossoverRule::Printed);

/// G_OL(jw) = K_P (1 + 1/(tau_i jw)) e^{-jw T_d} K_phi Z(jw).
std::complex<double> mab_open_loop(double omega, double kp, double tau_i, double delay,
                                   double k_phi, double capacitance, double load);

struct LoopMargin {
    double crossover = 0.0;     ///< rad/s
    double phase_margin = 0.0;  ///< rad
};

/// Unity-gain crossover and phase margin of mab_open_loop (single crossover assumed).
LoopMargin mab_loop_margin(double kp, double tau_i, double delay, double k_phi,
                           double capacitance, double load);

struct PhaseSolution {
    std::vector<double> phases;  ///< all bridges, primary = 0
    std::vector<double> powers;  ///< all bridges at the solution
    double residual = 0.0;       ///< W, inf-norm over the secondaries
    double power_scale = 0.0;    ///< W, primary-secondary ceiling used for tolerances
    int iterations = 0;
    double primary_power() const { return powers.empty() ? 0.0 : powers.front(); }
};

/// Newton-Raphson from power targets of the secondaries (bridge_powers sign)
/// to phase shifts on the |phi_i - phi_j| <= pi/2 branch.
PhaseSolution solve_phase_shifts(const std::vector<double>& secondary_targets,
                                 const MabMagnetics& mag, const std::vector<double>& voltages);

struct DcLinkStep {
    double voltage = 0.0;
    bool step_too_large = false;  ///< |dV| above 0.1 % of nominal in one step
    bool fault = false;           ///< voltage collapsed to <= 0
};

/// Explicit step of C dV/dt = -I_bridge - I_load, with I_bridge from
/// bridge_currents (positive when the bridge draws from its dc link).
DcLinkStep mab_dc_link_step(double voltage, double bridge_current, double load_current,
                            double capacitance, double dt, double nominal_voltage);

struct MabControllerConfig {
    MabMagnetics magnetics = MabMagnetics::reference_design();
    std::vector<double> capacitances{200e-6, 200e-6, 200e-6};  ///< secondaries
    double voltage_ref = 50.0;
    double sample_period = 100e-6;
    double delay = 150e-6;
    double phase_margin = deg_to_rad(60.0);
    CrossoverRule rule = CrossoverRule::ExactPhase;
    double phase_limit = kPi / 4.0;
    bool feedforward = true;
    bool decoupling = true;
};

/// Per-secondary dc-link voltage regulation: Newton-Raphson feedforward of the
/// measured load powers, gain-scheduled PI and decoupling of the PI outputs.
class MabController {
public:
    explicit MabController(MabControllerConfig config);

    /// `voltages`: all bridges. `load_powers`: power drawn from each secondary
    /// dc link by its load (one per secondary). Returns all bridge phases.
    /// Throws InfeasibleError when the feedforward solve fails.
    std::vector<double> step(const std::vector<double>& voltages,
                             const std::vector<double>& load_powers);

    void reset();
    const MabControllerConfig& config() const { return config_; }
    double omega_c() const { return omega_c_; }
    double tau_i() const { return tau_i_; }
    const std::vector<PiController>& loops() const { return pi_; }
    const std::vector<double>& phases() const { return phases_; }

private:
    MabControllerConfig config_;
    double omega_c_ = 0.0;
    double tau_i_ = 0.0;
    std::vector<PiController> pi_;
    std::vector<double> phases_;
};

} // namespace pfc
