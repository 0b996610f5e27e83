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
#include "quadport/report.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace quadport {

namespace {

bool idle(const PortModel& port)
{
    const auto* sink = std::get_if<CurrentSink>(&port);
    return sink != nullptr && sink->amps == 0.0;
}

std::string num(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string fixed(double v, int digits = 4)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits + 2, v);
    return buf;
}

void open_loop_rows(const DutyCommand& d, const ConverterParams& p, const Vector4& v,
                    std::vector<ComparisonRow>& rows)
{
    const auto& ports = p.ports;
    if (is_ideal_source(ports[1]) && !is_ideal_source(ports[0]) && d.d3 > 0.0) {
        rows.push_back({"v_c1", "v2 / d3", v(1) / d.d3, v(0)});
    } else if (!is_ideal_source(ports[1]) && !idle(ports[1])) {
        rows.push_back({"v_c2", "d3 * v1", d.d3 * v(0), v(1)});
    }
    if (is_ideal_source(ports[2]) && !is_ideal_source(ports[3]) && d.d6 > 0.0) {
        rows.push_back({"v_c4", "v3 / d6", v(2) / d.d6, v(3)});
    } else if (!is_ideal_source(ports[2]) && !idle(ports[2])) {
        rows.push_back({"v_c3", "d6 * v4", d.d6 * v(3), v(2)});
    }
    if (!is_ideal_source(ports[3]) && d.d4 < 1.0) {
        rows.push_back({"v_c4", "(1 - d1) v1 / (1 - d4)", (1.0 - d.d1) * v(0) / (1.0 - d.d4), v(3)});
    } else if (!is_ideal_source(ports[0]) && d.d1 < 1.0) {
        rows.push_back({"v_c1", "(1 - d4) v4 / (1 - d1)", (1.0 - d.d4) * v(3) / (1.0 - d.d1), v(0)});
    }
}

void closed_loop_rows(const ClosedLoop& c, const SteadyStateReport& s,
                      std::vector<ComparisonRow>& rows)
{
    const ControlSetpoints sp = mode_setpoints(c.mode, c.demand_w, c.supervisor);
    rows.push_back({"v_c4", "v_dc_ref", sp.v_dc_ref, s.mean_port_voltage(3)});
    rows.push_back({"i_batt", "i_batt_ref", sp.i_batt_ref, s.mean_port_current(1)});
    rows.push_back({"i_fc", "i_fc_ref", sp.i_fc_ref, s.mean_port_current(2)});
    if (sp.v_uc_ref) rows.push_back({"v_c1", "v_uc_ref", *sp.v_uc_ref, s.mean_port_voltage(0)});
}

}  // namespace

PowerLedger power_ledger(const SteadyStateReport& steady)
{
    PowerLedger l;
    l.mean_power = steady.mean_port_power;
    l.mean_voltage = steady.mean_port_voltage;
    l.mean_current = steady.mean_port_current;
    l.balance_residual = l.mean_power.sum();
    l.throughput = l.mean_power.cwiseMax(0.0).sum();
    return l;
}

double ComparisonRow::abs_error() const { return std::abs(measured - predicted); }

std::optional<double> ComparisonRow::rel_error() const
{
    if (predicted == 0.0) return std::nullopt;
    return abs_error() / std::abs(predicted);
}

bool RunReport::flux_balanced() const
{
    for (std::size_t i = 0; i < 3; ++i) {
        if (!(std::abs(flux_residual[i]) < flux_limit[i])) return false;
    }
    return true;
}

RunReport build_report(const Scenario& scenario, const Waveform& waveform)
{
    const Scenario final = final_configuration(scenario);
    const ConverterParams& p = final.params;

    RunReport r;
    r.scenario = scenario.name;
    r.integrator = std::string(to_string(scenario.settings.integrator));
    r.steps_per_period = scenario.settings.steps_per_period;
    r.steady = measure_steady_state(waveform, p.f_sw, scenario.measure_periods, scenario.tolerance);
    r.ledger = power_ledger(r.steady);
    r.flux_residual = flux_balance_residuals(waveform, p);

    const Vector4& v = r.steady.mean_port_voltage;
    const std::array<double, 3> rails{std::abs(v(0)), std::max(std::abs(v(0)), std::abs(v(3))),
                                      std::abs(v(3))};
    for (std::size_t i = 0; i < 3; ++i) r.flux_limit[i] = 1e-3 * rails[i] * p.period();

    if (const auto* open = std::get_if<OpenLoop>(&final.control)) {
        open_loop_rows(open->duties, p, v, r.comparisons);
    } else {
        closed_loop_rows(std::get<ClosedLoop>(final.control), r.steady, r.comparisons);
    }
    return r;
}

std::string format_report(const RunReport& r)
{
    static const char* state_names[7] = {"i_l1", "i_l2", "i_l3", "v_c1", "v_c2", "v_c3", "v_c4"};
    std::ostringstream os;
    os << "scenario   " << r.scenario << '\n'
       << "integrator " << r.integrator << ", " << r.steps_per_period << " steps per period\n"
       << "window     " << fixed(r.steady.window_start) << " s .. " << fixed(r.steady.window_end)
       << " s (" << r.steady.n_periods << " periods)\n"
       << "settled    " << (r.steady.settled ? "yes" : "no") << "\n\n";

    os << "state      mean          periodicity   tolerance\n";
    for (int i = 0; i < 7; ++i) {
        char line[128];
        std::snprintf(line, sizeof line, "%-10s %-13.6g %-13.4g %-13.4g\n", state_names[i],
                      r.steady.mean_state(i), r.steady.periodicity_error(i),
                      r.steady.periodicity_tolerance(i));
        os << line;
    }

    os << "\nport       power (W)     voltage (V)   current (A)\n";
    for (int k = 0; k < 4; ++k) {
        char line[128];
        std::snprintf(line, sizeof line, "port%-6d %-13.6g %-13.6g %-13.6g\n", k + 1,
                      r.ledger.mean_power(k), r.ledger.mean_voltage(k), r.ledger.mean_current(k));
        os << line;
    }
    os << "balance residual " << fixed(r.ledger.balance_residual) << " W of "
       << fixed(r.ledger.throughput) << " W throughput\n";

    os << "\nflux over final period (V s)\n";
    for (std::size_t i = 0; i < 3; ++i) {
        char line[128];
        std::snprintf(line, sizeof line, "L%zu  %-12.4g limit %-12.4g %s\n", i + 1,
                      r.flux_residual[i], r.flux_limit[i],
                      std::abs(r.flux_residual[i]) < r.flux_limit[i] ? "ok" : "exceeded");
        os << line;
    }

    if (!r.comparisons.empty()) {
        os << "\nquantity   basis                     predicted     measured      rel. error\n";
        for (const ComparisonRow& row : r.comparisons) {
            const auto rel = row.rel_error();
            char err[32];
            if (rel) {
                std::snprintf(err, sizeof err, "%.3e", *rel);
            } else {
                std::snprintf(err, sizeof err, "- (abs %.3g)", row.abs_error());
            }
            char line[192];
            std::snprintf(line, sizeof line, "%-10s %-25s %-13.6g %-13.6g %s\n",
                          row.quantity.c_str(), row.basis.c_str(), row.predicted, row.measured,
                          err);
            os << line;
        }
    }
    return os.str();
}

std::string report_json(const RunReport& r)
{
    using nlohmann::ordered_json;
    auto vec = [](const auto& v) {
        ordered_json a = ordered_json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
        return a;
    };

    ordered_json j;
    j["scenario"] = r.scenario;
    j["integrator"] = r.integrator;
    j["steps_per_period"] = r.steps_per_period;
    j["settled"] = r.steady.settled;
    j["window"] = {{"start_s", r.steady.window_start},
                   {"end_s", r.steady.window_end},
                   {"periods", r.steady.n_periods}};
    j["state_names"] = {"i_l1", "i_l2", "i_l3", "v_c1", "v_c2", "v_c3", "v_c4"};
    j["mean_state"] = vec(r.steady.mean_state);
    j["periodicity_error"] = vec(r.steady.periodicity_error);
    j["periodicity_tolerance"] = vec(r.steady.periodicity_tolerance);
    j["ledger"] = {{"mean_power_w", vec(r.ledger.mean_power)},
                   {"mean_voltage_v", vec(r.ledger.mean_voltage)},
                   {"mean_current_a", vec(r.ledger.mean_current)},
                   {"balance_residual_w", r.ledger.balance_residual},
                   {"throughput_w", r.ledger.throughput}};
    j["flux"] = {{"residual_vs", r.flux_residual},
                 {"limit_vs", r.flux_limit},
                 {"balanced", r.flux_balanced()}};
    ordered_json rows = ordered_json::array();
    for (const ComparisonRow& row : r.comparisons) {
        ordered_json o;
        o["quantity"] = row.quantity;
        o["basis"] = row.basis;
        o["predicted"] = row.predicted;
        o["measured"] = row.measured;
        o["abs_error"] = row.abs_error();
        const auto rel = row.rel_error();
        o["rel_error"] = rel ? ordered_json(*rel) : ordered_json(nullptr);
        rows.push_back(o);
    }
    j["comparisons"] = rows;
    return j.dump(2) + "\n";
}

// CSV --------------------------------------------------------------------------------

namespace {

constexpr const char* kHeader =
    "time_s,i_l1_a,i_l2_a,i_l3_a,v_c1_v,v_c2_v,v_c3_v,v_c4_v,"
    "p_port1_w,p_port2_w,p_port3_w,p_port4_w,leg1_mode,leg2_mode,"
    "e_port1_j,e_port2_j,e_port3_j,e_port4_j";

constexpr std::size_t kColumns = 18;

double parse_double(std::string_view field, std::size_t line)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw std::runtime_error("waveform CSV line " + std::to_string(line) +
                                 ": malformed number '" + std::string(field) + "'");
    }
    return v;
}

}  // namespace

void write_waveform_csv(std::ostream& os, const Waveform& w)
{
    os << kHeader << '\n';
    std::string line;
    for (std::size_t k = 0; k < w.size(); ++k) {
        line = num(w.time[k]);
        for (int i = 0; i < 7; ++i) line += ',' + num(w.states[k](i));
        for (int i = 0; i < 4; ++i) line += ',' + num(w.port_power[k](i));
        line += ',';
        line += to_string(w.configs[k].leg1);
        line += ',';
        line += to_string(w.configs[k].leg2);
        for (int i = 0; i < 4; ++i) line += ',' + num(w.port_energy[k](i));
        os << line << '\n';
    }
}

Waveform read_waveform_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != kHeader) {
        throw std::runtime_error("waveform CSV: unexpected header");
    }
    Waveform w;
    std::size_t line_no = 1;
    std::vector<std::string_view> fields;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        fields.clear();
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != kColumns) {
            throw std::runtime_error("waveform CSV line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(kColumns) + " fields");
        }
        Vector7 x;
        Vector4 p;
        Vector4 e;
        for (int i = 0; i < 7; ++i) x(i) = parse_double(fields[1 + i], line_no);
        for (int i = 0; i < 4; ++i) p(i) = parse_double(fields[8 + i], line_no);
        for (int i = 0; i < 4; ++i) e(i) = parse_double(fields[14 + i], line_no);
        SwitchConfig c;
        try {
            c = {leg_mode_from_string(fields[12]), leg_mode_from_string(fields[13])};
        } catch (const ConfigError& err) {
            throw std::runtime_error("waveform CSV line " + std::to_string(line_no) + ": " +
                                     err.what());
        }
        w.push_back(parse_double(fields[0], line_no), x, c, p, e);
    }
    w.validate();
    return w;
}

}  // namespace quadport
