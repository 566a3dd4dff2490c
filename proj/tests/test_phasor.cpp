/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/phasor.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace pfc;
using Catch::Approx;

namespace {

double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

} // namespace

TEST_CASE("angles normalize into (-pi, pi]", "[phasor]")
{
    CHECK(normalize_angle(-kPi) == kPi);
    CHECK(normalize_angle(kPi) == kPi);
    CHECK(normalize_angle(3.0 * kPi) == Approx(kPi));
    CHECK(normalize_angle(2.0 * kPi + 0.25) == Approx(0.25));
    CHECK(normalize_angle(-0.5) == -0.5);
}

TEST_CASE("polar and rectangular forms round-trip", "[phasor]")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> mag(0.0, 1000.0);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int n = 0; n < 1000; ++n) {
        const double m = mag(rng);
        const double a = ang(rng);
        const Phasor p = Phasor::polar(m, a);
        CHECK(p.magnitude() == Approx(m).epsilon(1e-12));
        const Phasor back = Phasor::rect(p.real(), p.imag());
        CHECK(rel_err(back.value(), std::polar(m, a)) < 1e-12);
        CHECK(p.angle() > -kPi);
        CHECK(p.angle() <= kPi);
    }
}

TEST_CASE("phasor field axioms hold on random triples", "[phasor][property]")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int n = 0; n < 1000; ++n) {
        const Phasor a = Phasor::rect(u(rng), u(rng));
        const Phasor b = Phasor::rect(u(rng), u(rng));
        const Phasor c = Phasor::rect(u(rng), u(rng));
        CHECK(rel_err(((a + b) + c).value(), (a + (b + c)).value()) < 1e-12);
        CHECK(rel_err((a * (b + c)).value(), (a * b + a * c).value()) < 1e-12);
        CHECK(rel_err(((a * b) / b).value(), a.value()) < 1e-12);
        CHECK(rel_err((a - a).value(), Complex{}) < 1e-15);
    }
}

TEST_CASE("impedance from R and L", "[phasor]")
{
    const double w = 2.0 * kPi * 50.0;
    const Impedance z = Impedance::from_rl(0.02, 0.05 / w, w);
    CHECK(z.resistance() == 0.02);
    CHECK(z.reactance() == Approx(0.05));
    CHECK(z.inductance() == Approx(0.05 / w));
    CHECK(z.magnitude() == Approx(std::hypot(0.02, 0.05)));
}

TEST_CASE("balanced set is a positive sequence", "[phasor]")
{
    const auto s = balanced_set(230.0, 0.1);
    CHECK(s.a().angle() == Approx(0.1));
    CHECK(normalize_angle(s.a().angle() - s.b().angle()) == Approx(2.0 * kPi / 3.0));
    CHECK(normalize_angle(s.b().angle() - s.c().angle()) == Approx(2.0 * kPi / 3.0));
    CHECK(std::abs((s.a() + s.b() + s.c()).value()) < 1e-10);
}

TEST_CASE("to_dq of a frame-aligned unit signal", "[phasor]")
{
    for (double th : {0.0, 0.7, -2.0, 3.0}) {
        const DqSample s = to_dq({std::cos(th), std::sin(th)}, th);
        CHECK(s.d == Approx(1.0));
        CHECK(s.q == Approx(0.0).margin(1e-15));
    }
    const DqSample z = to_dq({0.0, 0.0}, 1.3);
    CHECK(z.d == 0.0);
    CHECK(z.q == 0.0);
}

TEST_CASE("rms phasor maps to a peak d-q value", "[phasor]")
{
    const DqSample s = phasor_to_dq(Phasor::polar(230.0, 0.0), 0.0);
    CHECK(s.d == Approx(230.0 * std::sqrt(2.0)));
    CHECK(s.q == Approx(0.0).margin(1e-12));
    const Phasor back = dq_to_phasor(phasor_to_dq(Phasor::polar(12.0, 0.4), 0.2), 0.2);
    CHECK(back.magnitude() == Approx(12.0));
    CHECK(back.angle() == Approx(0.4));
}

TEST_CASE("from_dq inverts to_dq and the Park transform is an isometry", "[phasor][property]")
{
    const StationaryPair unit = from_dq({1.0, 0.0, 0.0});
    CHECK(unit.alpha == 1.0);
    CHECK(unit.beta == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-500.0, 500.0);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const StationaryPair x{u(rng), u(rng)};
        const double th = ang(rng);
        const DqSample s = to_dq(x, th);
        const StationaryPair y = from_dq(s);
        worst = std::max({worst, std::abs(y.alpha - x.alpha), std::abs(y.beta - x.beta)});
        const double m2 = x.alpha * x.alpha + x.beta * x.beta;
        CHECK(s.d * s.d + s.q * s.q == Approx(m2).epsilon(1e-12));
    }
    CHECK(worst < 1e-12 * 500.0);
}

TEST_CASE("quadrature delay line lags a fundamental by 90 degrees", "[phasor]")
{
    const double w = 2.0 * kPi * 50.0;
    const double ts = 1e-4;
    const double amp = 230.0 * std::sqrt(2.0);
    std::vector<double> x;
    for (int k = 0; k < 2000; ++k) {
        x.push_back(amp * std::cos(w * k * ts + 0.3));
    }
    const auto y = quadrature_of(x, ts, w);
    REQUIRE(y.size() == x.size());
    double worst = 0.0;
    double ripple_lo = 1e300;
    double ripple_hi = 0.0;
    for (std::size_t k = 200; k < y.size(); ++k) {
        const double t = static_cast<double>(k) * ts;
        worst = std::max(worst, std::abs(y[k] - amp * std::sin(w * t + 0.3)));
        const DqSample s = to_dq({x[k], y[k]}, w * t);
        ripple_lo = std::min(ripple_lo, s.magnitude());
        ripple_hi = std::max(ripple_hi, s.magnitude());
    }
    CHECK(worst < 1e-3 * amp);
    CHECK((ripple_hi - ripple_lo) / amp < 1e-3);

    const std::vector<double> zeros(300, 0.0);
    for (double v : quadrature_of(zeros, ts, w)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("fractional quarter-period delays interpolate", "[phasor]")
{
    const double w = 2.0 * kPi * 60.0;
    const double ts = 1e-4;
    QuadratureDelayLine line(ts, w);
    CHECK(line.delay_samples() == Approx(0.25 * 2.0 * kPi / w / ts));
    line.prefill([w](double t) { return std::cos(w * t); });
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
        const double t = k * ts;
        worst = std::max(worst, std::abs(line.push(std::cos(w * t)) - std::sin(w * t)));
    }
    CHECK(worst < 1e-2);
}
