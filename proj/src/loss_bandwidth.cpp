/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/loss_bandwidth.hpp"

#include "pfc/errors.hpp"
#include "pfc/phasor.hpp"

#include <cmath>
#include <limits>

namespace pfc {

void SwitchParams::validate() const
{
    if (r_on < 0.0 || c_oss < 0.0 || switching_time < 0.0 || dc_voltage < 0.0 ||
        frequency < 0.0 || i_rms < 0.0 || i_avg < 0.0 || count < 0) {
        throw DomainError("switch parameters must be nonnegative");
    }
}

double conduction_loss(const SwitchParams& p)
{
    p.validate();
    return p.count * p.r_on * p.i_rms * p.i_rms;
}

double switching_loss(const SwitchParams& p)
{
    p.validate();
    const double overlap = 0.5 * p.dc_voltage * p.i_avg * p.switching_time * p.frequency;
    const double capacitive = 0.5 * p.c_oss * p.dc_voltage * p.dc_voltage * p.frequency;
    return p.count * (overlap + capacitive);
}

double switch_loss(const SwitchParams& p)
{
    return conduction_loss(p) + switching_loss(p);
}

LossBreakdown make_breakdown(double series, double mab_semiconductors, double mab_transformer,
                             double afe, double filters)
{
    LossBreakdown b{series, mab_semiconductors, mab_transformer, afe, filters, 0.0};
    b.total = series + mab_semiconductors + mab_transformer + afe + filters;
    return b;
}

namespace {

double group_loss(const std::vector<SwitchParams>& group)
{
    double sum = 0.0;
    for (const auto& s : group) {
        sum += switch_loss(s);
    }
    return sum;
}

} // namespace

LossBreakdown system_loss_report(const StageDevices& stages)
{
    return make_breakdown(group_loss(stages.series), group_loss(stages.mab),
                          stages.mab_transformer, group_loss(stages.afe), stages.filters);
}

void calibrate_switching_time(std::vector<SwitchParams>& group, double target)
{
    double fixed = 0.0;
    double per_second = 0.0;
    for (auto& s : group) {
        s.switching_time = 0.0;
        fixed += switch_loss(s);
        per_second += s.count * 0.5 * s.dc_voltage * s.i_avg * s.frequency;
    }
    if (fixed > target || per_second <= 0.0) {
        throw DomainError("switching time cannot reach the target loss");
    }
    const double t = (target - fixed) / per_second;
    for (auto& s : group) {
        s.switching_time = t;
    }
}

LossBreakdown paper_loss_preset()
{
    return make_breakdown(293.4, 558.48 - 36.5, 36.5, 183.84, 145.2);
}

LossBreakdown upfc_loss_preset()
{
    // Transformer no-load loss as the "series" entry, converters and filters
    // as the AFE entry.
    return make_breakdown(269.0, 0.0, 0.0, 515.2, 0.0);
}

StageDevices paper_device_preset()
{
    const double line_rms = 140.0;
    const double line_peak = line_rms * kSqrt2;

    // Low-voltage 100 V Si MOSFET and 1200 V SiC MOSFET, typical values.
    SwitchParams lv;
    lv.r_on = 1.2e-3;
    lv.c_oss = 3.8e-9;
    SwitchParams hv;
    hv.r_on = 40e-3;
    hv.c_oss = 115e-12;

    StageDevices st;

    // Three H-bridges; two devices conduct at a time.
    SwitchParams series = lv;
    series.count = 12;
    series.dc_voltage = 35.0;
    series.frequency = 100e3;
    series.i_rms = line_rms / kSqrt2;
    series.i_avg = line_peak / kPi;
    st.series = {series};
    calibrate_switching_time(st.series, 293.4);

    SwitchParams primary = hv;
    primary.count = 2;
    primary.dc_voltage = 800.0;
    primary.frequency = 100e3;
    primary.i_rms = 33.0;
    primary.i_avg = 33.0 * 2.0 * kSqrt2 / kPi;
    SwitchParams secondary = lv;
    secondary.count = 6;
    secondary.dc_voltage = 50.0;
    secondary.frequency = 100e3;
    secondary.i_rms = 222.0;
    secondary.i_avg = 222.0 * 2.0 * kSqrt2 / kPi;
    st.mab = {primary, secondary};
    st.mab_transformer = 36.5;
    calibrate_switching_time(st.mab, 558.48 - 36.5);

    const double afe_line = 15e3 / (3.0 * 230.0);
    SwitchParams afe = hv;
    afe.count = 6;
    afe.dc_voltage = 800.0;
    afe.frequency = 50e3;
    afe.i_rms = afe_line / kSqrt2;
    afe.i_avg = afe_line * kSqrt2 / kPi;
    st.afe = {afe};
    calibrate_switching_time(st.afe, 183.84);

    st.filters = 145.2;
    return st;
}

LossBreakdown loss_preset(std::string_view name)
{
    if (name == "paper") {
        return paper_loss_preset();
    }
    if (name == "paper-devices") {
        return system_loss_report(paper_device_preset());
    }
    if (name == "upfc") {
        return upfc_loss_preset();
    }
    if (name == "zero") {
        return make_breakdown(0.0, 0.0, 0.0, 0.0, 0.0);
    }
    throw DomainError("unknown loss preset '" + std::string(name) + "'");
}

TopologyComparison topology_comparison()
{
    TopologyComparison t;
    t.rows = {
        {"semiconductors", "2 HV MOSFET + 6 LV MOSFET", "12 HV MOSFET + 12 LV MOSFET"},
        {"capacitors", "2 HV + 6 LV", "3 HV + 3 LV"},
        {"switch rms current", "HV 33 A, LV 222 A", "HV 7 A, LV 111 A"},
        {"hf transformers", "1", "3"},
        {"weight", "960 g", "3 x 1250 g"},
        {"volume", "1932 cm3", "3 x 2226 cm3"},
    };
    return t;
}

void BertottiParams::validate() const
{
    if (!(eta > 0.0) || !(peak_flux > 0.0) || !(thickness > 0.0) || !(resistivity > 0.0) ||
        volume < 0.0 || !(input_power > 0.0)) {
        throw DomainError("Bertotti parameters must be positive");
    }
}

double BertottiParams::hysteresis_coefficient() const
{
    return eta * peak_flux * peak_flux;
}

double BertottiParams::eddy_coefficient() const
{
    return kPi * kPi * thickness * thickness * peak_flux * peak_flux / (6.0 * resistivity);
}

double bertotti_density(double f, const BertottiParams& p)
{
    if (f < 0.0) {
        throw DomainError("frequency must be nonnegative");
    }
    return p.hysteresis_coefficient() * f + p.eddy_coefficient() * f * f;
}

double eddy_crossover_frequency(const BertottiParams& p)
{
    return p.hysteresis_coefficient() / p.eddy_coefficient();
}

double transformer_gain(double f, const BertottiParams& p)
{
    return std::abs((p.input_power - bertotti_density(f, p) * p.volume) / p.input_power);
}

BandwidthResult transformer_bandwidth(const BertottiParams& p)
{
    p.validate();
    BandwidthResult r;
    const double a = p.hysteresis_coefficient() * p.volume;
    const double b = p.eddy_coefficient() * p.volume;
    const double c = (1.0 - 1.0 / kSqrt2) * p.input_power;
    if (a == 0.0 && b == 0.0) {
        r.unbounded = true;
        r.frequency = std::numeric_limits<double>::infinity();
        return r;
    }
    // Root of b f^2 + a f - c = 0 in the cancellation-free form.
    r.frequency = 2.0 * c / (a + std::sqrt(a * a + 4.0 * b * c));
    if (r.frequency > kBandwidthSearchLimit) {
        r.unbounded = true;
    }
    return r;
}

bool filter_resonance_check(double f_res, double f_sampling)
{
    if (!(f_res > 0.0) || !(f_sampling > 0.0)) {
        throw DomainError("frequencies must be positive");
    }
    return f_res > f_sampling / 3.0;
}

} // namespace pfc
