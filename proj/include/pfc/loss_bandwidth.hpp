/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pfc {

struct SwitchParams {
    double r_on = 0.0;            ///< ohm
    double c_oss = 0.0;           ///< F
    double switching_time = 0.0;  ///< T_on + T_off, s
    double dc_voltage = 0.0;      ///< V
    double frequency = 0.0;       ///< Hz
    double i_rms = 0.0;           ///< A, per device
    double i_avg = 0.0;           ///< A, per device
    int count = 1;

    void validate() const;
};

/// Conduction plus switching loss of `count` identical devices.
double switch_loss(const SwitchParams& p);
double conduction_loss(const SwitchParams& p);
double switching_loss(const SwitchParams& p);

struct LossBreakdown {
    double series = 0.0;
    double mab_semiconductors = 0.0;
    double mab_transformer = 0.0;
    double afe = 0.0;
    double filters = 0.0;
    double total = 0.0;

    double mab() const { return mab_semiconductors + mab_transformer; }
};

/// Fills `total` from the components.
LossBreakdown make_breakdown(double series, double mab_semiconductors, double mab_transformer,
                             double afe, double filters);

/// Device groups per stage plus the fixed magnetics entries.
struct StageDevices {
    std::vector<SwitchParams> series;
    std::vector<SwitchParams> mab;
    std::vector<SwitchParams> afe;
    double mab_transformer = 0.0;
    double filters = 0.0;
};

LossBreakdown system_loss_report(const StageDevices& stages);

/// Sets a common T_on + T_off on `group` so the group loss equals `target`.
/// Throws DomainError when conduction and C_oss losses already exceed it.
void calibrate_switching_time(std::vector<SwitchParams>& group, double target);

/// Stated stage totals at 15 kW.
LossBreakdown paper_loss_preset();
/// Conventional UPFC baseline: transformer no-load loss plus converters and filters.
LossBreakdown upfc_loss_preset();
/// Datasheet-like device groups with switching times back-fitted to the
/// stated stage totals.
StageDevices paper_device_preset();

/// "paper", "paper-devices", "upfc" or "zero". Throws DomainError otherwise.
LossBreakdown loss_preset(std::string_view name);

struct TopologyRow {
    std::string item;
    std::string mab;
    std::string dab;
};

struct TopologyComparison {
    std::vector<TopologyRow> rows;
    double mab_weight_g = 960.0;
    double dab_weight_g = 3.0 * 1250.0;
    double mab_volume_cm3 = 1932.0;
    double dab_volume_cm3 = 3.0 * 2226.0;
    int mab_hv_switches = 2;
    int dab_hv_switches = 12;
    int mab_lv_switches = 6;
    int dab_lv_switches = 12;
    int mab_transformers = 1;
    int dab_transformers = 3;

    double weight_ratio() const { return mab_weight_g / dab_weight_g; }
    double volume_ratio() const { return mab_volume_cm3 / dab_volume_cm3; }
    double hv_switch_ratio() const {
        return static_cast<double>(mab_hv_switches) / dab_hv_switches;
    }
};

/// MAB against three DABs at 15 kW.
TopologyComparison topology_comparison();

struct BertottiParams {
    double eta = 15.0;            ///< A m / (V s)
    double peak_flux = 1.5;       ///< T
    double thickness = 27e-6;     ///< m
    double resistivity = 0.48e-6; ///< ohm m
    double volume = 0.0;          ///< m^3
    double input_power = 15e3;    ///< W

    void validate() const;
    double hysteresis_coefficient() const;  ///< W/(m^3 Hz)
    double eddy_coefficient() const;        ///< W/(m^3 Hz^2)
};

/// Core volume that places the 3 dB point at 1 kHz for 15 kW with the
/// default material constants. Back-fitted, not a design value.
inline constexpr double kCalibratedCoreVolume = 0.1116;

double bertotti_density(double f, const BertottiParams& p);
/// Frequency where hysteresis and eddy densities are equal.
double eddy_crossover_frequency(const BertottiParams& p);
/// |(P_in - P_tra)/P_in| with P_tra = density * volume.
double transformer_gain(double f, const BertottiParams& p);

struct BandwidthResult {
    double frequency = 0.0;  ///< Hz, valid when !unbounded
    bool unbounded = false;
};

inline constexpr double kBandwidthSearchLimit = 10e6;

BandwidthResult transformer_bandwidth(const BertottiParams& p);

/// True iff f_res > f_sampling / 3.
bool filter_resonance_check(double f_res, double f_sampling);

} // namespace pfc
