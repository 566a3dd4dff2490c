/*
 * SPDX-License-Identifier: Apache-2.0
 */

#include "pfc/io/scenario_file.hpp"

#include "pfc/errors.hpp"

#include <fstream>
#include <set>

namespace pfc::io {

namespace {

/// Object reader that records consumed keys and rejects the rest. A partial
/// block (an override on top of a preset) may omit any parameter.
class Block {
public:
    Block(const Json& j, std::string path, bool partial = false)
        : j_(j), path_(std::move(path)), partial_(partial)
    {
        if (!j_.is_object()) {
            throw ConfigError(path_, "expected an object");
        }
    }

    std::string at(const std::string& key) const
    {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    /// Present, or required because the block is complete.
    bool wants(const std::string& key) const { return !partial_ || has(key); }

    const Json& raw(const std::string& key)
    {
        if (!j_.contains(key)) {
            throw ConfigError(at(key), "missing required key");
        }
        used_.insert(key);
        return j_.at(key);
    }

    double number(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_number()) {
            throw ConfigError(at(key), "expected a number");
        }
        return v.get<double>();
    }

    double number(const std::string& key, double fallback)
    {
        return has(key) ? number(key) : fallback;
    }

    /// Parameter that keeps `current` only in a partial block.
    double field(const std::string& key, double current)
    {
        return wants(key) ? number(key) : current;
    }

    bool boolean(const std::string& key, bool fallback)
    {
        if (!wants(key)) {
            return fallback;
        }
        const Json& v = raw(key);
        if (!v.is_boolean()) {
            throw ConfigError(at(key), "expected true or false");
        }
        return v.get<bool>();
    }

    std::string string(const std::string& key)
    {
        const Json& v = raw(key);
        if (!v.is_string()) {
            throw ConfigError(at(key), "expected a string");
        }
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& key, std::size_t n)
    {
        const Json& v = raw(key);
        if (!v.is_array() || (n != 0 && v.size() != n)) {
            throw ConfigError(at(key), n ? "expected an array of " + std::to_string(n) + " numbers"
                                         : "expected an array of numbers");
        }
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a number");
            }
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    /// A scalar (same for all phases) or an array of three.
    std::array<double, 3> per_phase(const std::string& key)
    {
        const Json& v = raw(key);
        if (v.is_number()) {
            const double x = v.get<double>();
            return {x, x, x};
        }
        const auto xs = numbers(key, 3);
        return {xs[0], xs[1], xs[2]};
    }

    Block child(const std::string& key) { return Block(raw(key), at(key), partial_); }

    void provenance(std::map<std::string, std::string>& out, const std::string& block)
    {
        if (!wants("provenance")) {
            return;
        }
        const std::string p = string("provenance");
        if (p.empty()) {
            throw ConfigError(at("provenance"), "must not be empty");
        }
        out[block] = p;
    }

    void finish() const
    {
        for (const auto& [key, value] : j_.items()) {
            if (!used_.count(key)) {
                throw ConfigError(at(key), "unknown key");
            }
        }
    }

private:
    const Json& j_;
    std::string path_;
    bool partial_;
    std::set<std::string> used_;
};

ThreePhaseSet<Phasor> read_feeder(Block& b)
{
    const auto mag = b.per_phase("magnitude");
    ThreePhaseSet<Phasor> out;
    // A single angle shifts the positive-sequence set.
    std::array<double, 3> ang{0.0, -120.0, 120.0};
    if (b.has("angle_deg") && b.raw("angle_deg").is_number()) {
        const double a = b.number("angle_deg");
        ang = {a, a - 120.0, a + 120.0};
    } else if (b.has("angle_deg")) {
        ang = b.per_phase("angle_deg");
    }
    for (std::size_t k = 0; k < 3; ++k) {
        out[k] = Phasor::polar(mag[k], deg_to_rad(ang[k]));
    }
    return out;
}

Json write_feeder(const ThreePhaseSet<Phasor>& f, const std::string& provenance)
{
    Json j;
    j["provenance"] = provenance;
    Json mag = Json::array();
    Json ang = Json::array();
    for (const auto& p : f) {
        mag.push_back(p.magnitude());
        ang.push_back(p.magnitude() > 0.0 ? rad_to_deg(p.angle()) : 0.0);
    }
    j["magnitude"] = mag;
    j["angle_deg"] = ang;
    return j;
}

Setpoint read_setpoint(Block b)
{
    Setpoint sp;
    if (b.has("current")) {
        sp.kind = Setpoint::Kind::Current;
        sp.current = std::polar(b.number("current"), deg_to_rad(b.number("angle_deg", 0.0)));
    } else {
        sp.kind = Setpoint::Kind::Power;
        sp.power = Complex(b.number("p"), b.number("q", 0.0));
    }
    b.finish();
    return sp;
}

Json write_setpoint(const Setpoint& sp)
{
    Json j;
    if (sp.kind == Setpoint::Kind::Current) {
        j["current"] = std::abs(sp.current);
        j["angle_deg"] = rad_to_deg(std::arg(sp.current));
    } else {
        j["p"] = sp.power.real();
        j["q"] = sp.power.imag();
    }
    return j;
}

std::string tag(const Scenario& s, const std::string& block)
{
    auto it = s.provenance.find(block);
    return it == s.provenance.end() ? "user" : it->second;
}

void read_mab_magnetics(Block& b, MabMagnetics& m)
{
    if (b.wants("star_inductance")) {
        m.star_inductance = b.numbers("star_inductance", 0);
    }
    if (b.wants("magnetizing_inductance")) {
        m.magnetizing_inductance = b.number("magnetizing_inductance");
    }
    if (b.wants("turns")) {
        m.turns = b.numbers("turns", 0);
    }
    m.switching_frequency = b.field("switching_frequency", m.switching_frequency);
}

} // namespace

Scenario scenario_from_json(const Json& doc)
{
    const bool based = doc.is_object() && doc.contains("base");
    Block root(doc, "", based);
    Scenario s;
    if (based) {
        s = scenario_preset(root.string("base"));
    }
    const bool req = !based;
    if (root.has("name")) {
        s.name = root.string("name");
    }

    if (req || root.has("topology")) {
        const std::string t = root.string("topology");
        if (t == "two-feeder") {
            s.topology = Topology::TwoFeeder;
        } else if (t == "pq-load") {
            s.topology = Topology::PqLoad;
        } else {
            throw ConfigError("topology", "expected \"two-feeder\" or \"pq-load\"");
        }
    }
    const bool two = s.topology == Topology::TwoFeeder;

    if (req || root.has("grid")) {
        Block b = root.child("grid");
        b.provenance(s.provenance, "grid");
        s.grid_voltage_ll = b.field("voltage_ll", s.grid_voltage_ll);
        s.frequency = b.field("frequency", s.frequency);
        b.finish();
        if (!based) {
            s.feeder1 = balanced_set(s.phase_voltage());
        }
    }
    const double omega = s.omega();

    if (req || root.has("feeder1")) {
        Block b = root.child("feeder1");
        b.provenance(s.provenance, "feeder1");
        s.feeder1 = read_feeder(b);
        b.finish();
    }
    if ((req && two) || root.has("feeder2")) {
        Block b = root.child("feeder2");
        b.provenance(s.provenance, "feeder2");
        s.feeder2 = read_feeder(b);
        b.finish();
    }
    if ((req && two) || root.has("line")) {
        Block b = root.child("line");
        b.provenance(s.provenance, "line");
        s.line = Impedance::from_rl(b.number("resistance"), b.number("inductance"), omega);
        b.finish();
    } else {
        s.line = Impedance::from_rl(s.line.resistance(), s.line.inductance(), omega);
    }
    if ((req && !two) || root.has("load")) {
        Block b = root.child("load");
        b.provenance(s.provenance, "load");
        const auto p = b.per_phase("p");
        const auto q = b.per_phase("q");
        for (std::size_t k = 0; k < 3; ++k) {
            s.load_power[k] = Complex(p[k], q[k]);
        }
        b.finish();
    }
    if (root.has("series")) {
        Block b = root.child("series");
        b.provenance(s.provenance, "series");
        s.series_dc_voltage = b.field("dc_voltage", s.series_dc_voltage);
        s.series_inductance = b.field("inductance", s.series_inductance);
        s.series_tuning = b.field("tuning_factor", s.series_tuning);
        s.setpoint_ramp = b.field("setpoint_ramp", s.setpoint_ramp);
        b.finish();
    }
    if (root.has("afe")) {
        Block b = root.child("afe");
        b.provenance(s.provenance, "afe");
        auto& a = s.afe;
        a.filter_inductance = b.field("filter_inductance", a.filter_inductance);
        a.filter_resistance = b.field("filter_resistance", a.filter_resistance);
        a.phase_margin = deg_to_rad(b.field("phase_margin_deg", rad_to_deg(a.phase_margin)));
        a.dc_voltage_ref = b.field("dc_voltage_ref", a.dc_voltage_ref);
        a.dc_capacitance_per_half = b.field("dc_capacitance_per_half", a.dc_capacitance_per_half);
        a.current_limit = b.field("current_limit", a.current_limit);
        b.finish();
    }
    if (root.has("mab")) {
        Block b = root.child("mab");
        b.provenance(s.provenance, "mab");
        auto& m = s.mab;
        read_mab_magnetics(b, m.magnetics);
        if (b.wants("capacitances")) {
            m.capacitances = b.numbers("capacitances", 3);
        }
        m.voltage_ref = b.field("voltage_ref", m.voltage_ref);
        m.delay = b.field("delay", m.delay);
        m.phase_margin = deg_to_rad(b.field("phase_margin_deg", rad_to_deg(m.phase_margin)));
        m.phase_limit = deg_to_rad(b.field("phase_limit_deg", rad_to_deg(m.phase_limit)));
        if (b.wants("crossover_rule")) {
            const std::string r = b.string("crossover_rule");
            if (r == "exact-phase") {
                m.rule = CrossoverRule::ExactPhase;
            } else if (r == "printed") {
                m.rule = CrossoverRule::Printed;
            } else {
                throw ConfigError(b.at("crossover_rule"), "expected \"exact-phase\" or \"printed\"");
            }
        }
        m.feedforward = b.boolean("feedforward", m.feedforward);
        m.decoupling = b.boolean("decoupling", m.decoupling);
        b.finish();
    }
    if (req || root.has("simulation")) {
        Block b = root.child("simulation");
        b.provenance(s.provenance, "simulation");
        s.duration = b.field("duration", s.duration);
        s.step = b.field("step", s.step);
        s.sample_period = b.field("sample_period", s.sample_period);
        s.record_interval = b.field("record_interval", s.record_interval);
        b.finish();
    }
    s.mab.sample_period = s.sample_period;
    s.afe.sample_period = s.sample_period;
    s.afe.omega = omega;

    if (req || root.has("events")) {
        Block b = root.child("events");
        b.provenance(s.provenance, "events");
        const Json& list = b.raw("list");
        if (!list.is_array()) {
            throw ConfigError(b.at("list"), "expected an array");
        }
        s.events.clear();
        for (std::size_t e = 0; e < list.size(); ++e) {
            Block eb(list[e], b.at("list") + "[" + std::to_string(e) + "]");
            ScenarioEvent ev;
            ev.time = eb.number("time");
            const std::string a = eb.string("action");
            if (a == "bypass") {
                ev.action = EventAction::Bypass;
            } else if (a == "activate") {
                ev.action = EventAction::Activate;
            } else if (a == "retarget") {
                ev.action = EventAction::Retarget;
            } else {
                throw ConfigError(eb.at("action"),
                                  "expected \"bypass\", \"activate\" or \"retarget\"");
            }
            if (ev.action != EventAction::Bypass) {
                if (eb.has("setpoints")) {
                    const Json& sps = eb.raw("setpoints");
                    if (!sps.is_array() || sps.size() != 3) {
                        throw ConfigError(eb.at("setpoints"), "expected three setpoints");
                    }
                    for (std::size_t k = 0; k < 3; ++k) {
                        ev.setpoints[k] = read_setpoint(
                            Block(sps[k], eb.at("setpoints") + "[" + std::to_string(k) + "]"));
                    }
                } else {
                    const Setpoint sp = read_setpoint(eb.child("setpoint"));
                    ev.setpoints = {sp, sp, sp};
                }
            }
            eb.finish();
            s.events.push_back(ev);
        }
        b.finish();
    }
    root.finish();
    s.validate();
    return s;
}

Json scenario_to_json(const Scenario& s)
{
    Json j;
    j["name"] = s.name;
    j["topology"] = to_string(s.topology);
    j["grid"] = {{"provenance", tag(s, "grid")},
                 {"voltage_ll", s.grid_voltage_ll},
                 {"frequency", s.frequency}};
    j["feeder1"] = write_feeder(s.feeder1, tag(s, "feeder1"));
    if (s.topology == Topology::TwoFeeder) {
        j["feeder2"] = write_feeder(s.feeder2, tag(s, "feeder2"));
        j["line"] = {{"provenance", tag(s, "line")},
                     {"resistance", s.line.resistance()},
                     {"inductance", s.line.inductance()}};
    } else {
        Json p = Json::array();
        Json q = Json::array();
        for (const auto& x : s.load_power) {
            p.push_back(x.real());
            q.push_back(x.imag());
        }
        j["load"] = {{"provenance", tag(s, "load")}, {"p", p}, {"q", q}};
    }
    j["series"] = {{"provenance", tag(s, "series")},
                   {"dc_voltage", s.series_dc_voltage},
                   {"inductance", s.series_inductance},
                   {"tuning_factor", s.series_tuning},
                   {"setpoint_ramp", s.setpoint_ramp}};
    j["afe"] = {{"provenance", tag(s, "afe")},
                {"filter_inductance", s.afe.filter_inductance},
                {"filter_resistance", s.afe.filter_resistance},
                {"phase_margin_deg", rad_to_deg(s.afe.phase_margin)},
                {"dc_voltage_ref", s.afe.dc_voltage_ref},
                {"dc_capacitance_per_half", s.afe.dc_capacitance_per_half},
                {"current_limit", s.afe.current_limit}};
    Json mab = magnetics_to_json(s.mab.magnetics);
    mab.erase("provenance");
    Json m;
    m["provenance"] = tag(s, "mab");
    for (auto& [k, v] : mab.items()) {
        m[k] = v;
    }
    m["capacitances"] = s.mab.capacitances;
    m["voltage_ref"] = s.mab.voltage_ref;
    m["delay"] = s.mab.delay;
    m["phase_margin_deg"] = rad_to_deg(s.mab.phase_margin);
    m["phase_limit_deg"] = rad_to_deg(s.mab.phase_limit);
    m["crossover_rule"] = s.mab.rule == CrossoverRule::ExactPhase ? "exact-phase" : "printed";
    m["feedforward"] = s.mab.feedforward;
    m["decoupling"] = s.mab.decoupling;
    j["mab"] = m;
    j["simulation"] = {{"provenance", tag(s, "simulation")},
                       {"duration", s.duration},
                       {"step", s.step},
                       {"sample_period", s.sample_period},
                       {"record_interval", s.record_interval}};
    Json list = Json::array();
    for (const auto& ev : s.events) {
        Json e;
        e["time"] = ev.time;
        e["action"] = to_string(ev.action);
        if (ev.action != EventAction::Bypass) {
            Json sps = Json::array();
            for (const auto& sp : ev.setpoints) {
                sps.push_back(write_setpoint(sp));
            }
            e["setpoints"] = sps;
        }
        list.push_back(e);
    }
    j["events"] = {{"provenance", tag(s, "events")}, {"list", list}};
    return j;
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "no such file: " + path.string());
    }
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("", path.string() + ": " + e.what());
    }
}

Scenario load_scenario(const std::string& name_or_path)
{
    for (const auto& n : preset_names()) {
        if (n == name_or_path) {
            return scenario_preset(n);
        }
    }
    Scenario s = scenario_from_json(read_json_file(name_or_path));
    if (s.name.empty()) {
        s.name = std::filesystem::path(name_or_path).stem().string();
    }
    return s;
}

MabMagnetics magnetics_from_json(const Json& doc, const std::string& path)
{
    Block b(doc, path);
    std::map<std::string, std::string> prov;
    b.provenance(prov, "magnetics");
    MabMagnetics m = MabMagnetics::reference_design();
    read_mab_magnetics(b, m);
    b.finish();
    try {
        m.validate();
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    return m;
}

Json magnetics_to_json(const MabMagnetics& m)
{
    return {{"provenance", "calibrated"},
            {"star_inductance", m.star_inductance},
            {"magnetizing_inductance", m.magnetizing_inductance},
            {"turns", m.turns},
            {"switching_frequency", m.switching_frequency}};
}

namespace {

std::vector<SwitchParams> read_group(Block& root, const std::string& key)
{
    std::vector<SwitchParams> out;
    if (!root.has(key)) {
        return out;
    }
    const Json& list = root.raw(key);
    if (!list.is_array()) {
        throw ConfigError(root.at(key), "expected an array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        Block b(list[i], root.at(key) + "[" + std::to_string(i) + "]");
        SwitchParams p;
        p.r_on = b.number("r_on");
        p.c_oss = b.number("c_oss");
        p.switching_time = b.number("switching_time");
        p.dc_voltage = b.number("dc_voltage");
        p.frequency = b.number("frequency");
        p.i_rms = b.number("i_rms");
        p.i_avg = b.number("i_avg");
        p.count = static_cast<int>(b.number("count", 1.0));
        b.finish();
        try {
            p.validate();
        } catch (const DomainError& e) {
            throw ConfigError(root.at(key) + "[" + std::to_string(i) + "]", e.what());
        }
        out.push_back(p);
    }
    return out;
}

Json write_group(const std::vector<SwitchParams>& g)
{
    Json list = Json::array();
    for (const auto& p : g) {
        list.push_back({{"r_on", p.r_on},
                        {"c_oss", p.c_oss},
                        {"switching_time", p.switching_time},
                        {"dc_voltage", p.dc_voltage},
                        {"frequency", p.frequency},
                        {"i_rms", p.i_rms},
                        {"i_avg", p.i_avg},
                        {"count", p.count}});
    }
    return list;
}

} // namespace

StageDevices devices_from_json(const Json& doc)
{
    Block b(doc, "");
    std::map<std::string, std::string> prov;
    b.provenance(prov, "devices");
    StageDevices d;
    d.series = read_group(b, "series");
    d.mab = read_group(b, "mab");
    d.afe = read_group(b, "afe");
    d.mab_transformer = b.number("mab_transformer", 0.0);
    d.filters = b.number("filters", 0.0);
    b.finish();
    return d;
}

Json devices_to_json(const StageDevices& d)
{
    return {{"provenance", "calibrated"},
            {"series", write_group(d.series)},
            {"mab", write_group(d.mab)},
            {"afe", write_group(d.afe)},
            {"mab_transformer", d.mab_transformer},
            {"filters", d.filters}};
}

} // namespace pfc::io
