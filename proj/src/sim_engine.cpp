/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/sim_engine.hpp"

#include "pfc/errors.hpp"
#include "pfc/series_stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pfc {

namespace {

/// Moving average over a fixed number of samples.
class Window {
public:
    explicit Window(std::size_t n = 1) : buf_(n, 0.0) {}

    template <typename F>
    void prefill(F&& history, double step)
    {
        const std::size_t n = buf_.size();
        for (std::size_t k = 0; k < n; ++k) {
            push(history(-static_cast<double>(n - k) * step));
        }
    }

    double push(double x)
    {
        sum_ += x - buf_[head_];
        buf_[head_] = x;
        head_ = (head_ + 1) % buf_.size();
        return mean();
    }

    double mean() const { return sum_ / static_cast<double>(buf_.size()); }

private:
    std::vector<double> buf_;
    std::size_t head_ = 0;
    double sum_ = 0.0;
};

enum W { kI2, kVs2, kP1, kQ1, kP2, kQ2, kPs, kQs, kWindowCount };

struct PhaseState {
    // Plant.
    double i = 0.0;
    double i_beta = 0.0;
    double u = 0.0;       // alpha drive at the last step
    double u_beta = 0.0;  // beta drive at the last step
    // Series module.
    double dc = 0.0;
    bool active = false;
    bool infeasible = false;
    Phasor ramp_from;
    Phasor ramp_to;
    double ramp_start = 0.0;
    bool ramp_from_measurement = false;
    DqSample applied{};
    DqSample pending{};
    bool saturated = false;
    double vs = 0.0;
    double vs_beta = 0.0;
    double p_dc = 0.0;
    std::optional<SeriesCurrentController> ctl;
    // Measurement.
    std::optional<QuadratureDelayLine> q_v1, q_v2, q_vs;
    double v1 = 0.0, v1_beta = 0.0, v2 = 0.0, v2_beta = 0.0, vs_q = 0.0;
    std::array<Window, kWindowCount> w;
};

double trapezoid(double x, double u_prev, double u_next, double l, double r, double h)
{
    const double lh = l / h;
    return ((lh - 0.5 * r) * x + 0.5 * (u_prev + u_next)) / (lh + 0.5 * r);
}

class Engine {
public:
    Engine(const Scenario& s, const RecordSink& sink) : s_(s), sink_(sink)
    {
        s_.validate();
        h_ = s_.step;
        omega_ = s_.omega();
        m_ = s_.steps_per_sample();
        r_ = s_.steps_per_record();
        n_total_ = s_.total_steps();
        regions_ = scenario_region_verdicts(s_);
        for (const auto& w : s_.afe.warnings()) {
            warn(w);
        }
        for (const auto& rv : regions_) {
            if (!rv.feasible) {
                warn("phase " + std::to_string(rv.phase) + " setpoint at t=" +
                     std::to_string(rv.time) + " s exceeds the operating region; expected bypass");
            }
        }
        init_phases();
        init_shunt();
    }

    SimResult run()
    {
        std::size_t next_event = 0;
        for (std::size_t n = 0;; ++n) {
            t_ = static_cast<double>(n) * h_;
            observe_grid();
            if (n > 0) {
                integrate();
                if (check_faults()) {
                    emit_record();
                    break;
                }
            }
            if (n % static_cast<std::size_t>(m_) == 0 && n < n_total_) {
                while (next_event < s_.events.size() &&
                       s_.events[next_event].time <= t_ + 0.5 * h_) {
                    apply_event(s_.events[next_event++]);
                }
                if (!control()) {
                    emit_record();
                    break;
                }
            }
            observe_series();
            if (n % static_cast<std::size_t>(r_) == 0) {
                emit_record();
            }
            if (n >= n_total_) {
                break;
            }
        }
        result_.summary = summarize(s_, result_.records);
        result_.summary.regions = regions_;
        result_.summary.warnings.insert(result_.summary.warnings.begin(), warnings_.begin(),
                                        warnings_.end());
        result_.summary.fault = fault_;
        return std::move(result_);
    }

private:
    double frame(std::size_t k, double t) const
    {
        const Phasor& v1 = s_.feeder1[k];
        return omega_ * t + (v1.magnitude() > 0.0 ? v1.angle() : 0.0);
    }

    void warn(const std::string& w)
    {
        if (std::find(warnings_.begin(), warnings_.end(), w) == warnings_.end()) {
            warnings_.push_back(w);
        }
    }

    void init_phases()
    {
        const double period = 1.0 / s_.frequency;
        const auto window = static_cast<std::size_t>(std::llround(period / h_));
        for (std::size_t k = 0; k < 3; ++k) {
            PhaseState& ph = ph_[k];
            const Impedance z = s_.plant_impedance(k);
            plant_l_[k] = z.inductance();
            plant_r_[k] = z.resistance();

            SeriesModuleParams sp;
            sp.dc_voltage = s_.series_dc_voltage;
            sp.series_inductance = s_.series_inductance;
            sp.line = z;
            sp.omega = omega_;
            sp.sample_period = s_.sample_period;
            sp.a = s_.series_tuning;
            ph.ctl.emplace(sp);
            ph.dc = s_.series_dc_voltage;

            // Bypass steady state for t <= 0.
            const Phasor ib = bypass_current(s_, k);
            const Phasor v1 = s_.feeder1[k];
            const Phasor v2 = s_.far_end_voltage(k);
            auto wave = [this](const Phasor& x) {
                return [this, x](double t) { return x.instantaneous(omega_ * t); };
            };
            auto quad = [this](const Phasor& x) {
                return [this, x](double t) { return x.instantaneous(omega_ * t - 0.5 * kPi); };
            };
            ph.i = ib.instantaneous(0.0);
            ph.i_beta = ib.instantaneous(-0.5 * kPi);

            ph.q_v1.emplace(h_, omega_);
            ph.q_v2.emplace(h_, omega_);
            ph.q_vs.emplace(h_, omega_);
            ph.q_v1->prefill(wave(v1));
            ph.q_v2->prefill(wave(v2));
            ph.q_vs->prefill([](double) { return 0.0; });

            const bool load = s_.topology == Topology::PqLoad;
            const Phasor vfar = load ? v1 : v2;
            for (auto& w : ph.w) {
                w = Window(window);
            }
            auto iw = wave(ib);
            auto v1w = wave(v1);
            auto v1q = quad(v1);
            auto vfw = wave(vfar);
            auto vfq = quad(vfar);
            ph.w[kI2].prefill([&](double t) { return iw(t) * iw(t); }, h_);
            ph.w[kVs2].prefill([](double) { return 0.0; }, h_);
            ph.w[kP1].prefill([&](double t) { return v1w(t) * iw(t); }, h_);
            ph.w[kQ1].prefill([&](double t) { return v1q(t) * iw(t); }, h_);
            ph.w[kP2].prefill([&](double t) { return vfw(t) * iw(t); }, h_);
            ph.w[kQ2].prefill([&](double t) { return vfq(t) * iw(t); }, h_);
            ph.w[kPs].prefill([](double) { return 0.0; }, h_);
            ph.w[kQs].prefill([](double) { return 0.0; }, h_);
        }
    }

    void init_shunt()
    {
        u_grid_ = DqSample{kSqrt2 * s_.phase_voltage(), 0.0, 0.0};
        afe_.v_upper = 0.5 * s_.afe.dc_voltage_ref;
        afe_.v_lower = 0.5 * s_.afe.dc_voltage_ref;
        afe_ctl_.emplace(s_.afe);
        bus_ctl_.emplace(s_.afe, u_grid_.d);
        afe_applied_ = Complex(u_grid_.d, u_grid_.q);
        afe_pending_ = afe_applied_;

        mab_.emplace(s_.mab);
        mab_applied_.assign(4, 0.0);
        mab_pending_.assign(4, 0.0);
    }

    // Grid voltages and their quadrature companions at t_.
    void observe_grid()
    {
        for (std::size_t k = 0; k < 3; ++k) {
            PhaseState& ph = ph_[k];
            ph.v1 = s_.feeder1[k].instantaneous(omega_ * t_);
            ph.v2 = s_.far_end_voltage(k).instantaneous(omega_ * t_);
            ph.v1_beta = ph.q_v1->push(ph.v1);
            ph.v2_beta = ph.q_v2->push(ph.v2);
        }
    }

    void update_source(PhaseState& ph, std::size_t k)
    {
        const StationaryPair v = from_dq({ph.applied.d, ph.applied.q, frame(k, t_)});
        ph.vs = v.alpha;
        ph.vs_beta = v.beta;
        ph.u = ph.v1 + ph.vs - ph.v2;
        ph.u_beta = ph.v1_beta + ph.vs_beta - ph.v2_beta;
        ph.p_dc = 0.5 * (ph.vs * ph.i + ph.vs_beta * ph.i_beta);
    }

    // Advances all states from t_ - h to t_.
    void integrate()
    {
        // Dc-side flows over the step, evaluated at its start.
        MabOperatingPoint op;
        op.voltages = {afe_.bus_voltage(), ph_[0].dc, ph_[1].dc, ph_[2].dc};
        op.phases = mab_applied_;
        const auto powers = bridge_powers(op, s_.mab.magnetics);
        const auto currents = bridge_currents(op, s_.mab.magnetics);

        double secondary = 0.0;
        double injection = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            PhaseState& ph = ph_[k];
            const double load_current = ph.p_dc / ph.dc;
            const DcLinkStep st = mab_dc_link_step(ph.dc, currents[k + 1], load_current,
                                                   s_.mab.capacitances[k], h_, s_.series_dc_voltage);
            if (st.step_too_large) {
                warn("series dc-link voltage step above 0.1 % of nominal in one integration step");
            }
            ph.dc = st.voltage;
            secondary -= powers[k + 1];
            injection += ph.p_dc;

            // Drives at t_ with the command held over the step.
            const StationaryPair v = from_dq({ph.applied.d, ph.applied.q, frame(k, t_)});
            const double u_next = ph.v1 + v.alpha - ph.v2;
            const double ub_next = ph.v1_beta + v.beta - ph.v2_beta;
            ph.i = trapezoid(ph.i, ph.u, u_next, plant_l_[k], plant_r_[k], h_);
            ph.i_beta = trapezoid(ph.i_beta, ph.u_beta, ub_next, plant_l_[k], plant_r_[k], h_);
        }

        const Complex u(u_grid_.d, u_grid_.q);
        const Complex i_prev = afe_.current;
        afe_.current =
            afe_filter_step(i_prev, afe_applied_, afe_applied_, u, u, h_, s_.afe);
        AfeState mid = afe_;
        mid.current = 0.5 * (i_prev + afe_.current);
        const double p_grid = afe_grid_power(mid, u_grid_);
        const double p_primary = powers[0];
        afe_ = afe_power_balance(afe_, p_grid, p_primary, h_, s_.afe);

        e_grid_ += p_grid * h_;
        e_primary_ += p_primary * h_;
        e_secondary_ += secondary * h_;
        e_injection_ += injection * h_;
    }

    bool check_faults()
    {
        for (std::size_t k = 0; k < 3; ++k) {
            const PhaseState& ph = ph_[k];
            if (!std::isfinite(ph.i) || !std::isfinite(ph.i_beta) || !std::isfinite(ph.dc)) {
                fault("non-finite state in phase " + std::to_string(k));
                return true;
            }
            if (!(ph.dc > 0.0)) {
                fault("series dc link " + std::to_string(k) + " collapsed");
                return true;
            }
        }
        if (afe_.fault || !std::isfinite(afe_.bus_voltage()) || !std::isfinite(afe_.current.real()) ||
            !std::isfinite(afe_.current.imag())) {
            fault("AFE dc bus collapsed");
            return true;
        }
        return false;
    }

    void fault(const std::string& cause)
    {
        if (!fault_) {
            fault_ = FaultRecord{t_, cause};
        }
    }

    void apply_event(const ScenarioEvent& ev)
    {
        for (std::size_t k = 0; k < 3; ++k) {
            PhaseState& ph = ph_[k];
            if (ev.action == EventAction::Bypass) {
                ph.active = false;
                ph.applied = ph.pending = DqSample{};
                continue;
            }
            const Phasor target = setpoint_current(s_, k, ev.setpoints[k]);
            ph.infeasible = required_injection(s_, k, target).magnitude() >
                            s_.series_dc_voltage / kSqrt2;
            ph.ramp_from = ph.active ? reference(ph) : Phasor();
            ph.ramp_from_measurement = !ph.active || ev.action == EventAction::Activate;
            ph.ramp_to = target;
            ph.ramp_start = t_;
            if (ph.infeasible) {
                ph.active = false;
                ph.applied = ph.pending = DqSample{};
            } else if (ev.action == EventAction::Activate || !ph.active) {
                ph.active = true;
                ph.ctl->reset();
            }
        }
    }

    Phasor reference(const PhaseState& ph) const
    {
        const double ramp = s_.setpoint_ramp;
        if (ramp <= 0.0 || t_ >= ph.ramp_start + ramp) {
            return ph.ramp_to;
        }
        // Raised cosine: no slope step at either end.
        const double x = 0.5 * (1.0 - std::cos(kPi * (t_ - ph.ramp_start) / ramp));
        return ph.ramp_from + (ph.ramp_to - ph.ramp_from) * x;
    }

    bool control()
    {
        for (std::size_t k = 0; k < 3; ++k) {
            PhaseState& ph = ph_[k];
            ph.applied = ph.pending;
            if (!ph.active) {
                ph.pending = DqSample{};
                ph.saturated = false;
                continue;
            }
            const double th = frame(k, t_);
            const DqSample i_meas = to_dq({ph.i, ph.i_beta}, th);
            const DqSample v1 = to_dq({ph.v1, ph.v1_beta}, th);
            const Phasor& v1_ph = s_.feeder1[k];
            const double offset = v1_ph.magnitude() > 0.0 ? v1_ph.angle() : 0.0;
            if (ph.ramp_from_measurement) {
                ph.ramp_from = dq_to_phasor(i_meas, offset);
                ph.ramp_from_measurement = false;
            }
            const DqSample i_ref = phasor_to_dq(reference(ph), offset, th);
            const DqSample v2 = to_dq({ph.v2, ph.v2_beta}, th);
            const DqCommand cmd = ph.ctl->step(i_ref, i_meas, v1, v2, ph.dc);
            ph.pending = cmd.voltage;
            ph.saturated = cmd.saturated;
        }

        const double bus = afe_.bus_voltage();
        const double id_import = bus_ctl_->step(bus);
        afe_applied_ = afe_pending_;
        const DqCommand afe_cmd =
            afe_ctl_->step(Complex(-id_import, 0.0), afe_.current, u_grid_, bus);
        afe_pending_ = afe_cmd.voltage.as_complex();
        afe_saturated_ = afe_cmd.saturated;

        mab_applied_ = mab_pending_;
        try {
            mab_pending_ = mab_->step({bus, ph_[0].dc, ph_[1].dc, ph_[2].dc},
                                      {ph_[0].p_dc, ph_[1].p_dc, ph_[2].p_dc});
        } catch (const InfeasibleError& e) {
            fault(std::string("MAB phase-shift solve failed: ") + e.what() +
                  " (residual " + std::to_string(e.residual()) + " W)");
            return false;
        } catch (const DegenerateError& e) {
            fault(std::string("MAB controller: ") + e.what());
            return false;
        }
        return true;
    }

    void observe_series()
    {
        const bool load = s_.topology == Topology::PqLoad;
        for (std::size_t k = 0; k < 3; ++k) {
            PhaseState& ph = ph_[k];
            update_source(ph, k);
            ph.vs_q = ph.q_vs->push(ph.vs);
            const double vfar = load ? ph.v1 + ph.vs : ph.v2;
            const double vfar_q = load ? ph.v1_beta + ph.vs_q : ph.v2_beta;
            ph.w[kI2].push(ph.i * ph.i);
            ph.w[kVs2].push(ph.vs * ph.vs);
            ph.w[kP1].push(ph.v1 * ph.i);
            ph.w[kQ1].push(ph.v1_beta * ph.i);
            ph.w[kP2].push(vfar * ph.i);
            ph.w[kQ2].push(vfar_q * ph.i);
            ph.w[kPs].push(ph.vs * ph.i);
            ph.w[kQs].push(ph.vs_q * ph.i);
        }
    }

    void emit_record()
    {
        TimeSeriesRecord r;
        r.t = t_;
        const bool load = s_.topology == Topology::PqLoad;
        double e_dc = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const PhaseState& ph = ph_[k];
            r.v1[k] = ph.v1;
            r.v2[k] = load ? ph.v1 + ph.vs : ph.v2;
            r.vs[k] = ph.vs;
            r.i[k] = ph.i;
            r.i_rms[k] = std::sqrt(std::max(ph.w[kI2].mean(), 0.0));
            r.vs_rms[k] = std::sqrt(std::max(ph.w[kVs2].mean(), 0.0));
            r.p1[k] = ph.w[kP1].mean();
            r.q1[k] = ph.w[kQ1].mean();
            r.p2[k] = ph.w[kP2].mean();
            r.q2[k] = ph.w[kQ2].mean();
            r.ps[k] = ph.w[kPs].mean();
            r.qs[k] = ph.w[kQs].mean();
            r.dc[k] = ph.dc;
            r.mab_phase[k] = mab_applied_[k + 1];
            r.active[k] = ph.active;
            r.series_saturated[k] = ph.saturated;
            e_dc += 0.5 * s_.mab.capacitances[k] * ph.dc * ph.dc;
        }
        r.bus = afe_.bus_voltage();
        r.bus_upper = afe_.v_upper;
        r.bus_lower = afe_.v_lower;
        r.afe_id = afe_.current.real();
        r.afe_iq = afe_.current.imag();
        r.afe_saturated = afe_saturated_;
        r.e_grid = e_grid_;
        r.e_mab_primary = e_primary_;
        r.e_mab_secondary = e_secondary_;
        r.e_injection = e_injection_;
        const double c = s_.afe.dc_capacitance_per_half;
        r.e_bus = 0.5 * c * (afe_.v_upper * afe_.v_upper + afe_.v_lower * afe_.v_lower);
        r.e_series_dc = e_dc;
        if (sink_) {
            sink_(r);
        }
        result_.records.push_back(r);
    }

    Scenario s_;
    const RecordSink& sink_;
    double h_ = 0.0;
    double omega_ = 0.0;
    int m_ = 1;
    int r_ = 1;
    std::size_t n_total_ = 0;
    double t_ = 0.0;

    std::array<PhaseState, 3> ph_;
    std::array<double, 3> plant_l_{};
    std::array<double, 3> plant_r_{};

    DqSample u_grid_{};
    AfeState afe_;
    std::optional<AfeCurrentController> afe_ctl_;
    std::optional<DcBusController> bus_ctl_;
    Complex afe_applied_{};
    Complex afe_pending_{};
    bool afe_saturated_ = false;

    std::optional<MabController> mab_;
    std::vector<double> mab_applied_;
    std::vector<double> mab_pending_;

    double e_grid_ = 0.0;
    double e_primary_ = 0.0;
    double e_secondary_ = 0.0;
    double e_injection_ = 0.0;

    std::vector<RegionVerdict> regions_;
    std::vector<std::string> warnings_;
    std::optional<FaultRecord> fault_;
    SimResult result_;
};

PhaseMetrics mean_metrics(std::span<const TimeSeriesRecord> recs, std::size_t k)
{
    PhaseMetrics m;
    if (recs.empty()) {
        return m;
    }
    for (const auto& r : recs) {
        m.p1 += r.p1[k];
        m.q1 += r.q1[k];
        m.p2 += r.p2[k];
        m.q2 += r.q2[k];
        m.ps += r.ps[k];
        m.qs += r.qs[k];
        m.i_rms += r.i_rms[k];
        m.vs_rms += r.vs_rms[k];
    }
    const double n = static_cast<double>(recs.size());
    m.p1 /= n;
    m.q1 /= n;
    m.p2 /= n;
    m.q2 /= n;
    m.ps /= n;
    m.qs /= n;
    m.i_rms /= n;
    m.vs_rms /= n;
    return m;
}

double rms_variation(std::span<const TimeSeriesRecord> recs)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        double sum = 0.0;
        for (const auto& r : recs) {
            lo = std::min(lo, r.i_rms[k]);
            hi = std::max(hi, r.i_rms[k]);
            sum += r.i_rms[k];
        }
        if (recs.empty()) {
            return std::numeric_limits<double>::infinity();
        }
        const double mean = sum / static_cast<double>(recs.size());
        const double v = mean > 1e-9 ? (hi - lo) / mean : (hi - lo);
        worst = std::max(worst, v);
    }
    return worst;
}

constexpr double kTailLength = 0.1;
constexpr double kSettleCycles = 5.0;
constexpr double kSettleTolerance = 0.005;

} // namespace

SimResult run_scenario(const Scenario& s, const RecordSink& sink)
{
    Engine e(s, sink);
    return e.run();
}

std::span<const TimeSeriesRecord> record_window(std::span<const TimeSeriesRecord> records,
                                                double t0, double t1)
{
    auto lo = std::lower_bound(records.begin(), records.end(), t0,
                               [](const TimeSeriesRecord& r, double t) { return r.t < t; });
    auto hi = std::lower_bound(lo, records.end(), t1,
                               [](const TimeSeriesRecord& r, double t) { return r.t < t; });
    return {lo, hi};
}

SimSummary summarize(const Scenario& s, std::span<const TimeSeriesRecord> records)
{
    SimSummary sum;
    sum.scenario = s.name;
    sum.rows = records.size();
    if (records.empty()) {
        return sum;
    }
    const double t_last = records.back().t;
    std::vector<double> bounds{0.0};
    for (const auto& ev : s.events) {
        if (ev.time > bounds.back() && ev.time < t_last) {
            bounds.push_back(ev.time);
        }
    }
    bounds.push_back(t_last);

    const double eps = 0.5 * s.record_interval;
    for (std::size_t g = 0; g + 1 < bounds.size(); ++g) {
        SegmentSummary seg;
        seg.t_start = bounds[g];
        seg.t_end = bounds[g + 1];
        const bool last = g + 2 == bounds.size();
        const double end = last ? seg.t_end + eps : seg.t_end - eps;
        const auto all = record_window(records, seg.t_start - eps, end);
        const auto tail = record_window(records, std::max(seg.t_start, seg.t_end - kTailLength) - eps, end);
        const auto settle = record_window(
            records, std::max(seg.t_start, seg.t_end - kSettleCycles / s.frequency) - eps, end);
        if (tail.empty()) {
            continue;
        }
        const auto& tail_last = tail.back();
        const bool any_active = tail_last.active[0] || tail_last.active[1] || tail_last.active[2];
        seg.state = any_active ? "active" : "bypass";

        double ppr = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            seg.phases[k] = mean_metrics(tail, k);
            const auto& m = seg.phases[k];
            seg.total.p1 += m.p1;
            seg.total.q1 += m.q1;
            seg.total.p2 += m.p2;
            seg.total.q2 += m.q2;
            seg.total.ps += m.ps;
            seg.total.qs += m.qs;
            seg.total.i_rms += m.i_rms / 3.0;
            seg.total.vs_rms += m.vs_rms / 3.0;
            const double v1 = s.feeder1[k].magnitude();
            if (v1 > 0.0) {
                ppr = std::max(ppr, m.vs_rms / v1);
            }
        }
        seg.partial_power_ratio = ppr;
        const auto [lo, hi] = std::minmax({seg.phases[0].i_rms, seg.phases[1].i_rms,
                                           seg.phases[2].i_rms});
        seg.current_spread = seg.total.i_rms > 1e-9 ? (hi - lo) / seg.total.i_rms : 0.0;
        seg.rms_variation = rms_variation(settle);
        seg.settled = seg.rms_variation < kSettleTolerance;

        seg.dc_min = std::numeric_limits<double>::infinity();
        seg.dc_max = -seg.dc_min;
        seg.bus_min = seg.dc_min;
        seg.bus_max = seg.dc_max;
        for (const auto& r : all) {
            for (double v : r.dc) {
                seg.dc_min = std::min(seg.dc_min, v);
                seg.dc_max = std::max(seg.dc_max, v);
            }
            seg.bus_min = std::min(seg.bus_min, r.bus);
            seg.bus_max = std::max(seg.bus_max, r.bus);
        }
        sum.segments.push_back(seg);
    }
    sum.audit = power_audit(records);
    return sum;
}

EnergyLedger power_audit(std::span<const TimeSeriesRecord> records, double t0, double t1)
{
    EnergyLedger l;
    if (records.empty()) {
        return l;
    }
    auto first = std::lower_bound(records.begin(), records.end(), t0,
                                  [](const TimeSeriesRecord& r, double t) { return r.t < t; });
    auto after = std::upper_bound(records.begin(), records.end(), t1,
                                  [](double t, const TimeSeriesRecord& r) { return t < r.t; });
    if (first == records.end() || after == records.begin() || after - 1 < first) {
        return l;
    }
    const TimeSeriesRecord& a = *first;
    const TimeSeriesRecord& b = *(after - 1);
    l.t0 = a.t;
    l.t1 = b.t;
    l.grid_to_afe = b.e_grid - a.e_grid;
    l.bus_delta = b.e_bus - a.e_bus;
    l.mab_primary = b.e_mab_primary - a.e_mab_primary;
    l.mab_secondary = b.e_mab_secondary - a.e_mab_secondary;
    l.series_dc_delta = b.e_series_dc - a.e_series_dc;
    l.injection = b.e_injection - a.e_injection;
    l.imbalance = std::abs(l.grid_to_afe - l.mab_primary - l.bus_delta) +
                  std::abs(l.mab_primary - l.mab_secondary) +
                  std::abs(l.mab_secondary - l.injection - l.series_dc_delta);
    l.gross = std::max({std::abs(l.grid_to_afe), std::abs(l.mab_primary),
                        std::abs(l.mab_secondary), std::abs(l.injection),
                        std::abs(l.bus_delta), std::abs(l.series_dc_delta)});
    return l;
}

EnergyLedger power_audit(std::span<const TimeSeriesRecord> records)
{
    if (records.empty()) {
        return {};
    }
    return power_audit(records, records.front().t, records.back().t);
}

PhasorPrediction predict_steady_state(const Scenario& s, double t)
{
    std::array<bool, 3> active{};
    std::array<Phasor, 3> ref{};
    for (const auto& ev : s.events) {
        if (ev.time > t) {
            break;
        }
        for (std::size_t k = 0; k < 3; ++k) {
            if (ev.action == EventAction::Bypass) {
                active[k] = false;
                continue;
            }
            ref[k] = setpoint_current(s, k, ev.setpoints[k]);
            active[k] = required_injection(s, k, ref[k]).magnitude() <=
                        s.series_dc_voltage / kSqrt2;
        }
    }
    PhasorPrediction p;
    for (std::size_t k = 0; k < 3; ++k) {
        const Phasor i = active[k] ? ref[k] : bypass_current(s, k);
        p.current[k] = i;
        const Complex s1 = s.feeder1[k].value() * std::conj(i.value());
        Complex s2;
        if (s.topology == Topology::TwoFeeder) {
            s2 = s.feeder2[k].value() * std::conj(i.value());
        } else {
            s2 = s.load_impedance(k).complex() * std::norm(i.value());
        }
        p.p1[k] = s1.real();
        p.q1[k] = s1.imag();
        p.p2[k] = s2.real();
        p.q2[k] = s2.imag();
    }
    return p;
}

double SteadyStateReport::worst() const
{
    double w = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        w = std::max({w, current_error[k], p_error[k], q_error[k]});
    }
    return w;
}

SteadyStateReport steady_state_check(std::span<const TimeSeriesRecord> tail,
                                     const PhasorPrediction& prediction, double frequency)
{
    SteadyStateReport rep;
    if (tail.empty()) {
        return rep;
    }
    const double t_end = tail.back().t;
    const auto settle = record_window(tail, t_end - kSettleCycles / frequency, t_end + 1.0);
    rep.conclusive = rms_variation(settle) < kSettleTolerance &&
                     t_end - tail.front().t >= kSettleCycles / frequency * (1.0 - 1e-9);
    auto rel = [](double got, double want, double scale) {
        return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got - want);
    };
    for (std::size_t k = 0; k < 3; ++k) {
        const PhaseMetrics m = mean_metrics(tail, k);
        const double i_pred = prediction.current[k].magnitude();
        const double s_pred = std::hypot(prediction.p2[k], prediction.q2[k]);
        rep.current_error[k] = rel(m.i_rms, i_pred, i_pred);
        rep.p_error[k] = rel(m.p2, prediction.p2[k], s_pred);
        rep.q_error[k] = rel(m.q2, prediction.q2[k], s_pred);
    }
    return rep;
}

} // namespace pfc
