/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

// Phasor arithmetic, three-phase containers and synchronous-frame transforms.
//
// Conventions:
//   - Phasors are rms. d-q quantities are peak (amplitude invariant). The
//     factor sqrt(2) is applied only where a phasor meets a time signal.
//   - The stationary pair (alpha, beta) has beta lagging alpha by 90 degrees,
//     so x(t) = A cos(wt + p) maps to d + jq = A e^{jp} in a frame at wt.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace pfc {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kSqrt3 = std::numbers::sqrt3;

/// Wraps an angle into (-pi, pi]; -pi maps to +pi.
double normalize_angle(double rad);

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

class Phasor {
public:
    constexpr Phasor() = default;
    constexpr explicit Phasor(Complex value) : value_(value) {}

    static Phasor polar(double magnitude, double angle_rad);
    static Phasor rect(double re, double im) { return Phasor(Complex(re, im)); }

    double magnitude() const { return std::abs(value_); }
    double angle() const;
    double real() const { return value_.real(); }
    double imag() const { return value_.imag(); }
    const Complex& value() const { return value_; }
    Phasor conj() const { return Phasor(std::conj(value_)); }

    /// Instantaneous value sqrt(2)|X| cos(theta + angle) for frame angle theta.
    double instantaneous(double theta) const;

    Phasor& operator+=(const Phasor& o) { value_ += o.value_; return *this; }
    Phasor& operator-=(const Phasor& o) { value_ -= o.value_; return *this; }
    Phasor& operator*=(const Phasor& o) { value_ *= o.value_; return *this; }
    Phasor& operator/=(const Phasor& o) { value_ /= o.value_; return *this; }
    Phasor& operator*=(double s) { value_ *= s; return *this; }

    friend Phasor operator+(Phasor a, const Phasor& b) { return a += b; }
    friend Phasor operator-(Phasor a, const Phasor& b) { return a -= b; }
    friend Phasor operator*(Phasor a, const Phasor& b) { return a *= b; }
    friend Phasor operator/(Phasor a, const Phasor& b) { return a /= b; }
    friend Phasor operator*(Phasor a, double s) { return a *= s; }
    friend Phasor operator*(double s, Phasor a) { return a *= s; }
    friend Phasor operator-(const Phasor& a) { return Phasor(-a.value_); }

private:
    Complex value_{0.0, 0.0};
};

/// Series R + jX evaluated at `omega`.
class Impedance {
public:
    Impedance() = default;
    Impedance(double resistance, double reactance, double omega = 2.0 * kPi * 50.0);

    static Impedance from_rl(double resistance, double inductance, double omega);

    double resistance() const { return resistance_; }
    double reactance() const { return reactance_; }
    double omega() const { return omega_; }
    double inductance() const { return omega_ > 0.0 ? reactance_ / omega_ : 0.0; }
    double magnitude() const { return std::hypot(resistance_, reactance_); }
    double angle() const { return std::atan2(reactance_, resistance_); }
    Complex complex() const { return {resistance_, reactance_}; }

    Impedance operator+(const Impedance& o) const {
        return {resistance_ + o.resistance_, reactance_ + o.reactance_, omega_};
    }

private:
    double resistance_ = 0.0;
    double reactance_ = 0.0;
    double omega_ = 2.0 * kPi * 50.0;
};

/// Per-phase triple (a, b, c). No balance is implied.
template <typename T>
struct ThreePhaseSet {
    std::array<T, 3> phases{};

    T& operator[](std::size_t i) { return phases[i]; }
    const T& operator[](std::size_t i) const { return phases[i]; }
    T& a() { return phases[0]; }
    T& b() { return phases[1]; }
    T& c() { return phases[2]; }
    const T& a() const { return phases[0]; }
    const T& b() const { return phases[1]; }
    const T& c() const { return phases[2]; }
    auto begin() { return phases.begin(); }
    auto end() { return phases.end(); }
    auto begin() const { return phases.begin(); }
    auto end() const { return phases.end(); }
    static constexpr std::size_t size() { return 3; }
};

/// Balanced positive-sequence set of phase phasors (a at `angle_rad`).
ThreePhaseSet<Phasor> balanced_set(double magnitude_rms, double angle_rad = 0.0);

struct DqSample {
    double d = 0.0;
    double q = 0.0;
    double theta = 0.0;

    Complex as_complex() const { return {d, q}; }
    double magnitude() const { return std::hypot(d, q); }
};

struct StationaryPair {
    double alpha = 0.0;
    double beta = 0.0;
};

DqSample to_dq(StationaryPair signal, double theta);
StationaryPair from_dq(const DqSample& sample);

/// Peak d-q sample of an rms phasor expressed in a frame whose angle leads
/// the phasor reference by `frame_offset` (the phasor's own phase reference).
DqSample phasor_to_dq(const Phasor& rms, double frame_offset, double theta = 0.0);
/// Inverse of phasor_to_dq.
Phasor dq_to_phasor(const DqSample& sample, double frame_offset);

/// Streaming quarter-period delay line producing the orthogonal (lagging)
/// companion of a fundamental-dominated signal. Fractional delays are
/// linearly interpolated. Output is zero (or the prefilled history) during
/// the first quarter period.
class QuadratureDelayLine {
public:
    QuadratureDelayLine(double sample_period, double omega);

    /// Pushes x(t_k) and returns x(t_k - T/4).
    double push(double sample);
    /// Seeds the history as if `history(t)` had been sampled for t < 0.
    template <typename F>
    void prefill(F&& history) {
        for (std::size_t n = buffer_.size(); n-- > 0;) {
            push(history(-static_cast<double>(n + 1) * sample_period_));
        }
    }
    double delay_samples() const { return delay_; }

private:
    double sample_period_;
    double delay_;
    std::vector<double> buffer_;
    std::size_t head_ = 0;
};

/// Batch form of QuadratureDelayLine over a uniformly sampled stream.
std::vector<double> quadrature_of(std::span<const double> samples, double sample_period,
                                  double omega);

} // namespace pfc
