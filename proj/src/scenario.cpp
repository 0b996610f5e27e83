/*
 * Copyright (c) 2026 The quadport authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "quadport/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace quadport {

namespace {

// Key map ------------------------------------------------------------------------

struct Entry {
    std::string value;
    int line = 0;
};

struct Section {
    int line = 0;
    std::map<std::string, Entry> keys;
};

using KeyMap = std::map<std::string, Section>;  // "" holds top-level keys

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

KeyMap tokenize(std::string_view text)
{
    KeyMap map;
    map[""];
    std::string current;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ParseError(line_no, std::string(line),
                                 "line " + std::to_string(line_no) + ": malformed section header");
            }
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (map.contains(current)) {
                throw ParseError(line_no, current,
                                 "line " + std::to_string(line_no) + ": duplicate section [" +
                                     current + "]");
            }
            map[current].line = line_no;
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError(line_no, std::string(line),
                             "line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) {
            throw ParseError(line_no, key, "line " + std::to_string(line_no) + ": empty key");
        }
        auto& section = map[current];
        if (section.keys.contains(key)) {
            throw ParseError(line_no, key,
                             "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        section.keys[key] = {value, line_no};
    }
    return map;
}

bool is_event_section(const std::string& name) { return name.starts_with("event."); }

// Applies `over` on top of `base`.
void overlay(KeyMap& base, const KeyMap& over)
{
    bool events_cleared = false;
    for (const auto& [name, section] : over) {
        if (is_event_section(name) && !events_cleared) {
            std::erase_if(base, [](const auto& kv) { return is_event_section(kv.first); });
            events_cleared = true;
        }
        const bool replaces = (name.starts_with("port") && section.keys.contains("kind")) ||
                              (name == "initial" && section.keys.contains("kind")) ||
                              (name == "control" && section.keys.contains("type"));
        if (replaces) {
            base[name] = section;
            continue;
        }
        auto& target = base[name];
        if (target.line == 0) target.line = section.line;
        for (const auto& [key, entry] : section.keys) target.keys[key] = entry;
    }
}

KeyMap resolve(std::string_view text, int depth);

KeyMap resolve_preset(const std::string& name, int line, int depth)
{
    if (depth > 8) throw ParseError(line, "preset", "preset inheritance nested too deeply");
    if (!is_preset(name)) {
        throw ValidationError("preset", "unknown preset '" + name + "'");
    }
    return resolve(preset_text(name), depth + 1);
}

KeyMap resolve(std::string_view text, int depth)
{
    KeyMap own = tokenize(text);
    auto& top = own[""].keys;
    const auto preset = top.find("preset");
    if (preset == top.end()) return own;
    KeyMap base = resolve_preset(preset->second.value, preset->second.line, depth);
    top.erase(preset);
    overlay(base, own);
    return base;
}

// Typed reading with unknown-key detection ------------------------------------------

class Reader {
public:
    Reader(const KeyMap& map, const std::string& section) : name_(section)
    {
        if (auto it = map.find(section); it != map.end()) section_ = &it->second;
    }

    bool present() const { return section_ != nullptr; }
    bool has(const std::string& key) const
    {
        return section_ != nullptr && section_->keys.contains(key);
    }

    std::optional<std::string> text(const std::string& key)
    {
        const Entry* e = find(key);
        if (e == nullptr) return std::nullopt;
        return e->value;
    }

    std::string text(const std::string& key, const std::string& fallback)
    {
        return text(key).value_or(fallback);
    }

    std::optional<double> number(const std::string& key)
    {
        const Entry* e = find(key);
        if (e == nullptr) return std::nullopt;
        double v = 0.0;
        const char* begin = e->value.data();
        const char* end = begin + e->value.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end || e->value.empty()) {
            throw ParseError(e->line, qualified(key),
                             "line " + std::to_string(e->line) + ": key '" + qualified(key) +
                                 "' expects a number, got '" + e->value + "'");
        }
        return v;
    }

    double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

    double required(const std::string& key)
    {
        auto v = number(key);
        if (!v) throw ValidationError(qualified(key), "missing required key '" + qualified(key) + "'");
        return *v;
    }

    int integer(const std::string& key, int fallback)
    {
        const Entry* e = find(key);
        if (e == nullptr) return fallback;
        int v = 0;
        const char* begin = e->value.data();
        const char* end = begin + e->value.size();
        auto [ptr, ec] = std::from_chars(begin, end, v);
        if (ec != std::errc{} || ptr != end || e->value.empty()) {
            throw ParseError(e->line, qualified(key),
                             "line " + std::to_string(e->line) + ": key '" + qualified(key) +
                                 "' expects an integer, got '" + e->value + "'");
        }
        return v;
    }

    std::optional<bool> boolean(const std::string& key)
    {
        const Entry* e = find(key);
        if (e == nullptr) return std::nullopt;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        throw ParseError(e->line, qualified(key),
                         "line " + std::to_string(e->line) + ": key '" + qualified(key) +
                             "' expects true or false");
    }

    /// Reports the first key nobody asked for.
    void finish() const
    {
        if (section_ == nullptr) return;
        for (const auto& [key, entry] : section_->keys) {
            if (!used_.contains(key)) {
                throw ParseError(entry.line, qualified(key),
                                 "line " + std::to_string(entry.line) + ": unknown key '" +
                                     qualified(key) + "'");
            }
        }
    }

    std::string qualified(const std::string& key) const
    {
        return name_.empty() ? key : name_ + "." + key;
    }

private:
    const Entry* find(const std::string& key)
    {
        used_.insert(key);
        if (section_ == nullptr) return nullptr;
        auto it = section_->keys.find(key);
        return it == section_->keys.end() ? nullptr : &it->second;
    }

    std::string name_;
    const Section* section_ = nullptr;
    std::set<std::string> used_;
};

std::string_view flag_key(std::string_view mode)
{
    if (mode == "medium_power") return "charge_battery";
    if (mode == "regenerative_braking") return "charge_uc";
    return "uc_assist";
}

// Reads `mode` plus its flag from `r`; keys may carry a prefix (events).
std::optional<HevMode> read_mode(Reader& r)
{
    const auto name = r.text("mode");
    std::optional<bool> flags[3] = {r.boolean("charge_battery"), r.boolean("uc_assist"),
                                    r.boolean("charge_uc")};
    if (!name) {
        for (const auto& f : flags) {
            if (f) throw ValidationError(r.qualified("mode"), "mode flag given without a mode");
        }
        return std::nullopt;
    }
    const std::string_view wanted = flag_key(*name);
    bool flag = false;
    const char* keys[3] = {"charge_battery", "uc_assist", "charge_uc"};
    for (int i = 0; i < 3; ++i) {
        if (!flags[i]) continue;
        if (wanted != keys[i]) {
            throw ValidationError(r.qualified(keys[i]),
                                  "'" + std::string(keys[i]) + "' does not apply to mode " + *name);
        }
        flag = *flags[i];
    }
    try {
        return make_mode(*name, flag);
    } catch (const ConfigError& e) {
        throw ValidationError(r.qualified("mode"), e.what());
    }
}

PortModel read_port(Reader& r, const std::string& kind_key, const std::string& prefix,
                    const std::string& where)
{
    const std::string kind = r.text(kind_key, "sink");
    auto key = [&](const char* k) { return prefix + k; };
    if (kind == "source") {
        return VoltageSource{r.required(key("volts")), r.number(key("series_ohms"), 0.0)};
    }
    if (kind == "load") return ResistiveLoad{r.required(key("ohms"))};
    if (kind == "capacitor") {
        return CapacitorOnly{r.required(key("farads")), r.number(key("initial_volts"), 0.0)};
    }
    if (kind == "sink") return CurrentSink{r.number(key("amps"), 0.0)};
    throw ValidationError(where + ".kind", "unknown port kind '" + kind + "'");
}

std::optional<DutyCommand> read_duties(Reader& r, bool required)
{
    std::array<std::optional<double>, 6> d;
    bool any = false;
    for (int i = 0; i < 6; ++i) {
        d[static_cast<std::size_t>(i)] = r.number("d" + std::to_string(i + 1));
        any = any || d[static_cast<std::size_t>(i)].has_value();
    }
    if (!any && !required) return std::nullopt;
    std::array<double, 6> values{};
    for (int i = 0; i < 6; ++i) {
        if (!d[static_cast<std::size_t>(i)]) {
            throw ValidationError(r.qualified("d" + std::to_string(i + 1)),
                                  "open-loop duties need all of d1..d6");
        }
        values[static_cast<std::size_t>(i)] = *d[static_cast<std::size_t>(i)];
    }
    return DutyCommand::from_array(values);
}

Scenario build(const KeyMap& map)
{
    Scenario s;
    std::set<std::string> known{"", "params", "port1", "port2", "port3", "port4", "control",
                                "controller", "supervisor", "simulation", "measure", "initial"};
    for (const auto& [name, section] : map) {
        if (!known.contains(name) && !is_event_section(name)) {
            throw ParseError(section.line, name,
                             "line " + std::to_string(section.line) + ": unknown section [" +
                                 name + "]");
        }
    }

    {
        Reader top(map, "");
        s.name = top.text("name", "scenario");
        top.finish();
    }
    {
        Reader r(map, "params");
        ConverterParams& p = s.params;
        p.l1 = r.number("l1", p.l1);
        p.l2 = r.number("l2", p.l2);
        p.l3 = r.number("l3", p.l3);
        p.c1 = r.number("c1", p.c1);
        p.c2 = r.number("c2", p.c2);
        p.c3 = r.number("c3", p.c3);
        p.c4 = r.number("c4", p.c4);
        p.f_sw = r.number("f_sw", p.f_sw);
        p.switch_on_resistance = r.number("switch_on_resistance", p.switch_on_resistance);
        r.finish();
    }
    for (std::size_t k = 0; k < kPortCount; ++k) {
        const std::string name = "port" + std::to_string(k + 1);
        Reader r(map, name);
        s.params.ports[k] = read_port(r, "kind", "", name);
        r.finish();
    }
    {
        Reader r(map, "control");
        const std::string type = r.text("type", "open_loop");
        if (type == "open_loop") {
            s.control = OpenLoop{*read_duties(r, true)};
        } else if (type == "closed_loop") {
            ClosedLoop c;
            auto mode = read_mode(r);
            if (!mode) throw ValidationError("control.mode", "closed-loop control needs a mode");
            c.mode = *mode;
            c.demand_w = r.required("demand_w");

            Reader g(map, "controller");
            const std::string gains = g.text("gains", "derived");
            if (gains != "derived" && gains != "explicit") {
                throw ValidationError("controller.gains", "gains must be 'derived' or 'explicit'");
            }
            c.derived_gains = gains == "derived";
            ControllerConfig& cc = c.controller;
            if (!c.derived_gains) {
                auto channel = [&](const char* name) {
                    return ChannelGains{g.required(std::string("kp_") + name),
                                        g.required(std::string("ki_") + name)};
                };
                cc.gains.battery = channel("battery");
                cc.gains.fuel_cell = channel("fuel_cell");
                cc.gains.transfer = channel("transfer");
                cc.gains.voltage = channel("voltage");
                cc.gains.uc_trim = channel("uc");
            }
            cc.window.lo = g.number("clamp_lo", cc.window.lo);
            cc.window.hi = g.number("clamp_hi", cc.window.hi);
            cc.near_unity_band = g.number("near_unity_band", cc.near_unity_band);
            cc.hysteresis = g.number("hysteresis", cc.hysteresis);
            cc.fixed_d1 = g.number("fixed_d1", cc.fixed_d1);
            cc.transfer_current_limit = g.number("transfer_current_limit", cc.transfer_current_limit);
            cc.uc_trim_limit = g.number("uc_trim_limit", cc.uc_trim_limit);
            g.finish();

            Reader v(map, "supervisor");
            SupervisorConfig& sc = c.supervisor;
            sc.v_dc = v.number("v_dc", sc.v_dc);
            sc.v_fc = v.number("v_fc", sc.v_fc);
            sc.v_batt = v.number("v_batt", sc.v_batt);
            sc.v_uc_high = v.number("v_uc_high", sc.v_uc_high);
            sc.charge_current = v.number("charge_current", sc.charge_current);
            sc.fc_high_current = v.number("fc_high_current", sc.fc_high_current);
            sc.regen_battery_current = v.number("regen_battery_current", sc.regen_battery_current);
            sc.uc_share = v.number("uc_share", sc.uc_share);
            v.finish();

            if (c.derived_gains) cc.gains = ControlGains::derive(s.params, sc);
            s.control = c;
        } else {
            throw ValidationError("control.type", "unknown control type '" + type + "'");
        }
        r.finish();
    }
    if (!s.closed_loop()) {
        for (const char* name : {"controller", "supervisor"}) {
            if (map.contains(name)) {
                throw ValidationError(name, std::string("[") + name +
                                                "] only applies to closed-loop control");
            }
        }
    }
    {
        Reader r(map, "simulation");
        SimulationSettings& st = s.settings;
        st.duration = r.number("duration", st.duration);
        st.steps_per_period = r.integer("steps_per_period", st.steps_per_period);
        try {
            st.integrator = integrator_from_string(r.text("integrator", "rk4"));
        } catch (const ConfigError& e) {
            throw ValidationError("simulation.integrator", e.what());
        }
        st.record_decimation = r.integer("record_decimation", st.record_decimation);
        st.record_window = r.number("record_window", st.record_window);
        r.finish();
    }
    {
        Reader r(map, "measure");
        s.measure_periods = r.integer("periods", s.measure_periods);
        s.tolerance.relative = r.number("relative_tol", s.tolerance.relative);
        s.tolerance.volts_floor = r.number("volts_floor", s.tolerance.volts_floor);
        s.tolerance.amps_floor = r.number("amps_floor", s.tolerance.amps_floor);
        r.finish();
    }
    {
        Reader r(map, "initial");
        const std::string kind = r.text("kind", "zero");
        if (kind == "zero") {
            s.initial_kind = InitialKind::Zero;
        } else if (kind == "averaged") {
            s.initial_kind = InitialKind::Averaged;
        } else if (kind == "explicit") {
            s.initial_kind = InitialKind::Explicit;
            s.initial = {r.number("i_l1", 0.0), r.number("i_l2", 0.0), r.number("i_l3", 0.0),
                         r.number("v_c1", 0.0), r.number("v_c2", 0.0), r.number("v_c3", 0.0),
                         r.number("v_c4", 0.0)};
        } else {
            throw ValidationError("initial.kind", "unknown initial kind '" + kind + "'");
        }
        r.finish();
    }

    // Events in numeric order of their suffix.
    std::vector<std::pair<long, std::string>> event_names;
    for (const auto& [name, section] : map) {
        if (!is_event_section(name)) continue;
        const std::string suffix = name.substr(6);
        long index = 0;
        auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), index);
        if (ec != std::errc{} || ptr != suffix.data() + suffix.size()) {
            throw ParseError(section.line, name, "event sections are named [event.<number>]");
        }
        event_names.emplace_back(index, name);
    }
    std::sort(event_names.begin(), event_names.end());
    for (const auto& [index, name] : event_names) {
        Reader r(map, name);
        ScenarioEvent e;
        e.time = r.required("time");
        e.mode = read_mode(r);
        e.demand_w = r.number("demand_w");
        e.duties = read_duties(r, false);
        for (std::size_t k = 0; k < kPortCount; ++k) {
            const std::string prefix = "port" + std::to_string(k + 1) + ".";
            if (r.has(prefix + "kind")) {
                e.ports.push_back({k, read_port(r, prefix + "kind", prefix, name + "." + prefix)});
            }
        }
        r.finish();
        s.events.push_back(std::move(e));
    }
    return s;
}

// Writing ----------------------------------------------------------------------------------

std::string num(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_port(std::ostream& os, const PortModel& port, const std::string& prefix)
{
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, VoltageSource>) {
                os << prefix << "kind = source\n"
                   << prefix << "volts = " << num(p.volts) << '\n'
                   << prefix << "series_ohms = " << num(p.series_ohms) << '\n';
            } else if constexpr (std::is_same_v<T, ResistiveLoad>) {
                os << prefix << "kind = load\n" << prefix << "ohms = " << num(p.ohms) << '\n';
            } else if constexpr (std::is_same_v<T, CapacitorOnly>) {
                os << prefix << "kind = capacitor\n"
                   << prefix << "farads = " << num(p.farads) << '\n'
                   << prefix << "initial_volts = " << num(p.initial_volts) << '\n';
            } else {
                os << prefix << "kind = sink\n" << prefix << "amps = " << num(p.amps) << '\n';
            }
        },
        port);
}

void write_mode(std::ostream& os, const HevMode& mode)
{
    os << "mode = " << mode_name(mode) << '\n'
       << flag_key(mode_name(mode)) << " = " << (mode_flag(mode) ? "true" : "false") << '\n';
}

void write_duties(std::ostream& os, const DutyCommand& d)
{
    const auto a = d.as_array();
    for (std::size_t i = 0; i < a.size(); ++i) os << 'd' << i + 1 << " = " << num(a[i]) << '\n';
}

void rethrow_as_validation(const std::string& key, const auto& fn)
{
    try {
        fn();
    } catch (const ConfigError& e) {
        throw ValidationError(key, key + ": " + e.what());
    }
}

}  // namespace

// Public API -----------------------------------------------------------------------------

void Scenario::validate() const
{
    if (name.empty()) throw ValidationError("name", "scenario name must not be empty");
    rethrow_as_validation("params", [&] { params.validate(); });
    rethrow_as_validation("simulation", [&] { settings.validate(); });
    if (measure_periods < 1) throw ValidationError("measure.periods", "measure.periods must be >= 1");
    if (settings.duration < 2.0 * measure_periods * params.period() * (1.0 - 1e-9)) {
        throw ValidationError("simulation.duration",
                              "simulation.duration must cover 2 * measure.periods switching periods");
    }
    if (settings.record_window > 0.0 &&
        settings.record_window < 2.0 * measure_periods * params.period() * (1.0 - 1e-9)) {
        throw ValidationError("simulation.record_window",
                              "simulation.record_window must cover 2 * measure.periods switching periods");
    }
    if (!(tolerance.relative >= 0.0) || !(tolerance.volts_floor >= 0.0) ||
        !(tolerance.amps_floor >= 0.0)) {
        throw ValidationError("measure", "measure tolerances must be >= 0");
    }

    if (const auto* open = std::get_if<OpenLoop>(&control)) {
        rethrow_as_validation("control", [&] { open->duties.validate(); });
    } else {
        const auto& c = std::get<ClosedLoop>(control);
        if (!std::isfinite(c.demand_w)) throw ValidationError("control.demand_w", "demand must be finite");
        const ClampWindow w = c.controller.window;
        if (!(w.lo >= 0.0 && w.lo < w.hi && w.hi <= 1.0)) {
            throw ValidationError("controller.clamp_lo", "clamp window must satisfy 0 <= lo < hi <= 1");
        }
        if (!(c.controller.fixed_d1 >= 0.0 && c.controller.fixed_d1 < 1.0)) {
            throw ValidationError("controller.fixed_d1", "fixed_d1 must lie in [0, 1)");
        }
        const SupervisorConfig& sc = c.supervisor;
        for (auto [v, key] : {std::pair{sc.v_dc, "v_dc"}, std::pair{sc.v_fc, "v_fc"},
                              std::pair{sc.v_batt, "v_batt"}, std::pair{sc.v_uc_high, "v_uc_high"}}) {
            if (!(v > 0.0)) {
                throw ValidationError(std::string("supervisor.") + key, "nominal voltages must be > 0");
            }
        }
        if (!(sc.uc_share >= 0.0 && sc.uc_share <= 1.0)) {
            throw ValidationError("supervisor.uc_share", "uc_share must lie in [0, 1]");
        }
    }

    if (initial_kind == InitialKind::Averaged && !closed_loop()) {
        throw ValidationError("initial.kind", "averaged initial state needs closed-loop control");
    }
    if (initial_kind == InitialKind::Explicit && !initial.all_finite()) {
        throw ValidationError("initial", "initial state must be finite");
    }

    double previous = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const ScenarioEvent& e = events[i];
        const std::string key = "event." + std::to_string(i + 1) + ".time";
        if (!(e.time > previous) || (i == 0 && !(e.time > 0.0))) {
            throw ValidationError(key, "event times must be positive and strictly increasing");
        }
        if (e.time > settings.duration) {
            throw ValidationError(key, "event time beyond simulation.duration");
        }
        previous = e.time;
        if (e.duties) {
            if (closed_loop()) {
                throw ValidationError(key, "duty events only apply to open-loop control");
            }
            rethrow_as_validation("event." + std::to_string(i + 1), [&] { e.duties->validate(); });
        }
        if ((e.mode || e.demand_w) && !closed_loop()) {
            throw ValidationError(key, "mode and demand events need closed-loop control");
        }
        for (const PortChange& pc : e.ports) {
            rethrow_as_validation("event." + std::to_string(i + 1),
                                  [&] { validate_port(pc.model, "port" + std::to_string(pc.port + 1)); });
        }
    }
}

Scenario parse_scenario(std::string_view text, std::string_view origin)
{
    try {
        Scenario s = build(resolve(text, 0));
        s.validate();
        return s;
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.key(), std::string(origin) + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(e.key(), std::string(origin) + ": " + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

Scenario load_scenario_or_preset(const std::string& name_or_path)
{
    if (std::filesystem::exists(name_or_path)) return load_scenario(name_or_path);
    if (is_preset(name_or_path)) return load_preset(name_or_path);
    throw std::runtime_error("'" + name_or_path + "' is neither a scenario file nor a preset name");
}

Scenario load_preset(std::string_view name)
{
    return parse_scenario(preset_text(name), std::string("preset ") + std::string(name));
}

std::string write_scenario(const Scenario& s)
{
    std::ostringstream os;
    os << "name = " << s.name << "\n\n[params]\n";
    const ConverterParams& p = s.params;
    os << "l1 = " << num(p.l1) << "\nl2 = " << num(p.l2) << "\nl3 = " << num(p.l3)
       << "\nc1 = " << num(p.c1) << "\nc2 = " << num(p.c2) << "\nc3 = " << num(p.c3)
       << "\nc4 = " << num(p.c4) << "\nf_sw = " << num(p.f_sw)
       << "\nswitch_on_resistance = " << num(p.switch_on_resistance) << '\n';
    for (std::size_t k = 0; k < kPortCount; ++k) {
        os << "\n[port" << k + 1 << "]\n";
        write_port(os, p.ports[k], "");
    }

    os << "\n[control]\n";
    if (const auto* open = std::get_if<OpenLoop>(&s.control)) {
        os << "type = open_loop\n";
        write_duties(os, open->duties);
    } else {
        const auto& c = std::get<ClosedLoop>(s.control);
        os << "type = closed_loop\n";
        write_mode(os, c.mode);
        os << "demand_w = " << num(c.demand_w) << '\n';

        const ControllerConfig& cc = c.controller;
        os << "\n[controller]\n";
        if (c.derived_gains) {
            os << "gains = derived\n";
        } else {
            os << "gains = explicit\n";
            const std::pair<const char*, ChannelGains> channels[] = {
                {"battery", cc.gains.battery},   {"fuel_cell", cc.gains.fuel_cell},
                {"transfer", cc.gains.transfer}, {"voltage", cc.gains.voltage},
                {"uc", cc.gains.uc_trim}};
            for (const auto& [name, g] : channels) {
                os << "kp_" << name << " = " << num(g.kp) << "\nki_" << name << " = " << num(g.ki)
                   << '\n';
            }
        }
        os << "clamp_lo = " << num(cc.window.lo) << "\nclamp_hi = " << num(cc.window.hi)
           << "\nnear_unity_band = " << num(cc.near_unity_band)
           << "\nhysteresis = " << num(cc.hysteresis) << "\nfixed_d1 = " << num(cc.fixed_d1)
           << "\ntransfer_current_limit = " << num(cc.transfer_current_limit)
           << "\nuc_trim_limit = " << num(cc.uc_trim_limit) << '\n';

        const SupervisorConfig& sc = c.supervisor;
        os << "\n[supervisor]\nv_dc = " << num(sc.v_dc) << "\nv_fc = " << num(sc.v_fc)
           << "\nv_batt = " << num(sc.v_batt) << "\nv_uc_high = " << num(sc.v_uc_high)
           << "\ncharge_current = " << num(sc.charge_current)
           << "\nfc_high_current = " << num(sc.fc_high_current)
           << "\nregen_battery_current = " << num(sc.regen_battery_current)
           << "\nuc_share = " << num(sc.uc_share) << '\n';
    }

    const SimulationSettings& st = s.settings;
    os << "\n[simulation]\nduration = " << num(st.duration)
       << "\nsteps_per_period = " << st.steps_per_period
       << "\nintegrator = " << to_string(st.integrator)
       << "\nrecord_decimation = " << st.record_decimation
       << "\nrecord_window = " << num(st.record_window) << '\n';

    os << "\n[measure]\nperiods = " << s.measure_periods
       << "\nrelative_tol = " << num(s.tolerance.relative)
       << "\nvolts_floor = " << num(s.tolerance.volts_floor)
       << "\namps_floor = " << num(s.tolerance.amps_floor) << '\n';

    os << "\n[initial]\n";
    switch (s.initial_kind) {
    case InitialKind::Zero: os << "kind = zero\n"; break;
    case InitialKind::Averaged: os << "kind = averaged\n"; break;
    case InitialKind::Explicit: {
        const StateVector& x = s.initial;
        os << "kind = explicit\ni_l1 = " << num(x.i_l1) << "\ni_l2 = " << num(x.i_l2)
           << "\ni_l3 = " << num(x.i_l3) << "\nv_c1 = " << num(x.v_c1) << "\nv_c2 = " << num(x.v_c2)
           << "\nv_c3 = " << num(x.v_c3) << "\nv_c4 = " << num(x.v_c4) << '\n';
        break;
    }
    }

    for (std::size_t i = 0; i < s.events.size(); ++i) {
        const ScenarioEvent& e = s.events[i];
        os << "\n[event." << i + 1 << "]\ntime = " << num(e.time) << '\n';
        if (e.mode) write_mode(os, *e.mode);
        if (e.demand_w) os << "demand_w = " << num(*e.demand_w) << '\n';
        if (e.duties) write_duties(os, *e.duties);
        for (const PortChange& pc : e.ports) {
            write_port(os, pc.model, "port" + std::to_string(pc.port + 1) + ".");
        }
    }
    return os.str();
}

void apply_event(const ScenarioEvent& e, ConverterParams& params, ControlSpec& control)
{
    for (const PortChange& pc : e.ports) params.ports[pc.port] = pc.model;
    if (auto* open = std::get_if<OpenLoop>(&control)) {
        if (e.duties) open->duties = *e.duties;
    } else {
        auto& closed = std::get<ClosedLoop>(control);
        if (e.mode) closed.mode = *e.mode;
        if (e.demand_w) closed.demand_w = *e.demand_w;
    }
}

Scenario final_configuration(const Scenario& s)
{
    Scenario out = s;
    for (const ScenarioEvent& e : s.events) apply_event(e, out.params, out.control);
    out.events.clear();
    return out;
}

StateVector initial_state(const Scenario& s)
{
    switch (s.initial_kind) {
    case InitialKind::Explicit: return s.initial;
    case InitialKind::Zero: {
        Vector7 x = Vector7::Zero();
        for (std::size_t k = 0; k < kPortCount; ++k) {
            if (const auto* c = std::get_if<CapacitorOnly>(&s.params.ports[k])) {
                x(port_state_index(k)) = c->initial_volts;
            }
        }
        pin_sources(x, s.params);
        return StateVector::from_vector(x);
    }
    case InitialKind::Averaged: break;
    }

    // Period-averaged operating point of the closed loop at t = 0.
    const auto& c = std::get<ClosedLoop>(s.control);
    const ControlSetpoints sp = mode_setpoints(c.mode, c.demand_w, c.supervisor);
    Vector7 x = Vector7::Zero();
    for (std::size_t k = 0; k < kPortCount; ++k) {
        if (const auto* cap = std::get_if<CapacitorOnly>(&s.params.ports[k])) {
            x(port_state_index(k)) = cap->initial_volts;
        }
    }
    pin_sources(x, s.params);
    if (!is_ideal_source(s.params.ports[3])) x(kVC4) = sp.v_dc_ref;
    x(kIL1) = -sp.i_batt_ref;
    x(kIL3) = -sp.i_fc_ref;

    const HevController controller(c.controller);
    const DutyCommand ff = controller.feedforward(sp, s.params, StateVector::from_vector(x));
    double i_load = 0.0;
    if (const auto* r = std::get_if<ResistiveLoad>(&s.params.ports[3])) i_load = x(kVC4) / r->ohms;
    if (const auto* k = std::get_if<CurrentSink>(&s.params.ports[3])) i_load = k->amps;
    // Charge balance on C4: (1 - d4) i_L2 = i_load + d6 i_L3.
    x(kIL2) = (i_load + ff.d6 * x(kIL3)) / (1.0 - ff.d4);
    return StateVector::from_vector(x);
}

}  // namespace quadport
