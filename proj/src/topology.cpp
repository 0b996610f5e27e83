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
#include "quadport/topology.hpp"

#include <cmath>
#include <string>

namespace quadport {

namespace {

using Row7 = Eigen::Matrix<double, 1, 7>;

Row7 unit_row(int index)
{
    Row7 r = Row7::Zero();
    r(index) = 1.0;
    return r;
}

// Node voltages and rail current of one leg, each as a linear form over the
// state vector. `upper` and `lower` are the currents leaving the inner nodes
// A and B into their inductors.
struct LegForms {
    Row7 v_upper;
    Row7 v_lower;
    Row7 rail_draw;
};

LegForms leg_forms(LegMode mode, const Row7& v_rail, const Row7& upper, const Row7& lower,
                   double r_on)
{
    LegForms f;
    switch (mode) {
    case LegMode::A:
        // S2, S3 conduct: A -> B -> ground.
        f.v_lower = -r_on * (upper + lower);
        f.v_upper = f.v_lower - r_on * upper;
        f.rail_draw = Row7::Zero();
        break;
    case LegMode::B:
        // S1, S3 conduct: A tied to the rail, B to ground.
        f.v_upper = v_rail - r_on * upper;
        f.v_lower = -r_on * lower;
        f.rail_draw = upper;
        break;
    case LegMode::C:
        // S1, S2 conduct: both inner nodes tied to the rail.
        f.v_upper = v_rail - r_on * (upper + lower);
        f.v_lower = f.v_upper - r_on * lower;
        f.rail_draw = upper + lower;
        break;
    }
    return f;
}

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ConfigError(std::string(name) + " must be positive and finite");
    }
}

}  // namespace

std::string_view to_string(LegMode mode)
{
    switch (mode) {
    case LegMode::A: return "A";
    case LegMode::B: return "B";
    case LegMode::C: return "C";
    }
    return "?";
}

LegMode leg_mode_from_string(std::string_view text)
{
    if (text == "A") return LegMode::A;
    if (text == "B") return LegMode::B;
    if (text == "C") return LegMode::C;
    throw ConfigError("unknown leg mode '" + std::string(text) + "'");
}

std::array<SwitchConfig, 9> SwitchConfig::all()
{
    std::array<SwitchConfig, 9> out{};
    for (int i = 0; i < 9; ++i) out[static_cast<std::size_t>(i)] = from_index(i);
    return out;
}

bool is_ideal_source(const PortModel& port)
{
    const auto* src = std::get_if<VoltageSource>(&port);
    return src != nullptr && src->series_ohms == 0.0;
}

void validate_port(const PortModel& port, std::string_view where)
{
    const std::string w(where);
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, VoltageSource>) {
                if (!std::isfinite(p.volts)) throw ConfigError(w + ".volts must be finite");
                if (!(p.series_ohms >= 0.0) || !std::isfinite(p.series_ohms)) {
                    throw ConfigError(w + ".series_ohms must be >= 0");
                }
            } else if constexpr (std::is_same_v<T, ResistiveLoad>) {
                if (!(p.ohms > 0.0) || !std::isfinite(p.ohms)) {
                    throw ConfigError(w + ".ohms must be > 0");
                }
            } else if constexpr (std::is_same_v<T, CapacitorOnly>) {
                if (!(p.farads > 0.0) || !std::isfinite(p.farads)) {
                    throw ConfigError(w + ".farads must be > 0");
                }
                if (!std::isfinite(p.initial_volts)) {
                    throw ConfigError(w + ".initial_volts must be finite");
                }
            } else {
                if (!std::isfinite(p.amps)) throw ConfigError(w + ".amps must be finite");
            }
        },
        port);
}

double ConverterParams::inductance(int state) const
{
    switch (state) {
    case kIL1: return l1;
    case kIL2: return l2;
    case kIL3: return l3;
    default: throw std::out_of_range("not an inductor state");
    }
}

double ConverterParams::capacitance(std::size_t port) const
{
    switch (port) {
    case 0: return c1;
    case 1: return c2;
    case 2: return c3;
    case 3: return c4;
    default: throw std::out_of_range("port index");
    }
}

void ConverterParams::validate() const
{
    require_positive(l1, "l1");
    require_positive(l2, "l2");
    require_positive(l3, "l3");
    require_positive(c1, "c1");
    require_positive(c2, "c2");
    require_positive(c3, "c3");
    require_positive(c4, "c4");
    require_positive(f_sw, "f_sw");
    if (!(switch_on_resistance >= 0.0) || !std::isfinite(switch_on_resistance)) {
        throw ConfigError("switch_on_resistance must be >= 0");
    }
    for (std::size_t k = 0; k < kPortCount; ++k) {
        validate_port(ports[k], "port" + std::to_string(k + 1));
    }
}

Vector7 StateVector::to_vector() const
{
    Vector7 x;
    x << i_l1, i_l2, i_l3, v_c1, v_c2, v_c3, v_c4;
    return x;
}

StateVector StateVector::from_vector(const Vector7& x)
{
    return {x(kIL1), x(kIL2), x(kIL3), x(kVC1), x(kVC2), x(kVC3), x(kVC4)};
}

bool StateVector::all_finite() const { return to_vector().allFinite(); }

Vector4 LinearDynamics::port_powers(const Vector7& x) const
{
    return x.segment<4>(kVC1).cwiseProduct(port_currents(x));
}

LegInductorVoltages leg_inductor_voltages(LegMode mode, double v_port_a, double v_port_b,
                                          double v_rail)
{
    switch (mode) {
    case LegMode::A: return {-v_port_a, -v_port_b};
    case LegMode::B: return {v_rail - v_port_a, -v_port_b};
    case LegMode::C: return {v_rail - v_port_a, v_rail - v_port_b};
    }
    return {};
}

LinearDynamics derive_dynamics(SwitchConfig config, const ConverterParams& params)
{
    params.validate();
    const double r_on = params.switch_on_resistance;

    const Row7 i1 = unit_row(kIL1);
    const Row7 i2 = unit_row(kIL2);
    const Row7 i3 = unit_row(kIL3);

    const LegForms leg1 = leg_forms(config.leg1, unit_row(kVC1), i2, i1, r_on);
    const LegForms leg2 = leg_forms(config.leg2, unit_row(kVC4), -i2, i3, r_on);

    LinearDynamics dyn;
    dyn.valid_for = config;

    dyn.a_matrix.row(kIL1) = (leg1.v_lower - unit_row(kVC2)) / params.l1;
    dyn.a_matrix.row(kIL2) = (leg1.v_upper - leg2.v_upper) / params.l2;
    dyn.a_matrix.row(kIL3) = (leg2.v_lower - unit_row(kVC3)) / params.l3;

    // Current the switch network pulls out of each port node.
    const std::array<Row7, kPortCount> draw{leg1.rail_draw, -i1, -i3, leg2.rail_draw};

    for (std::size_t k = 0; k < kPortCount; ++k) {
        const int s = port_state_index(k);
        const double c_filter = params.capacitance(k);
        const PortModel& port = params.ports[k];

        if (is_ideal_source(port)) {
            dyn.pinned[static_cast<std::size_t>(s)] = true;
            dyn.port_current.row(static_cast<int>(k)) = draw[k];
            continue;
        }

        // Port element injection as  y * x + q.
        Row7 y = Row7::Zero();
        double q = 0.0;
        double c_node = c_filter;
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, VoltageSource>) {
                    y(s) = -1.0 / p.series_ohms;
                    q = p.volts / p.series_ohms;
                } else if constexpr (std::is_same_v<T, ResistiveLoad>) {
                    y(s) = -1.0 / p.ohms;
                } else if constexpr (std::is_same_v<T, CapacitorOnly>) {
                    c_node += p.farads;
                } else {
                    q = -p.amps;
                }
            },
            port);

        dyn.a_matrix.row(s) = (y - draw[k]) / c_node;
        dyn.b_vector(s) = q / c_node;

        if (const auto* cap = std::get_if<CapacitorOnly>(&port)) {
            // The external capacitor supplies -C_ext dv/dt into the node.
            dyn.port_current.row(static_cast<int>(k)) = -cap->farads * dyn.a_matrix.row(s);
            dyn.port_current_offset(static_cast<int>(k)) = -cap->farads * dyn.b_vector(s);
        } else {
            dyn.port_current.row(static_cast<int>(k)) = y;
            dyn.port_current_offset(static_cast<int>(k)) = q;
        }
    }
    return dyn;
}

double stored_energy(const Vector7& x, const ConverterParams& params)
{
    double e = 0.5 * (params.l1 * x(kIL1) * x(kIL1) + params.l2 * x(kIL2) * x(kIL2) +
                      params.l3 * x(kIL3) * x(kIL3));
    for (std::size_t k = 0; k < kPortCount; ++k) {
        const double v = x(port_state_index(k));
        e += 0.5 * params.capacitance(k) * v * v;
    }
    return e;
}

void pin_sources(Vector7& x, const ConverterParams& params)
{
    for (std::size_t k = 0; k < kPortCount; ++k) {
        if (is_ideal_source(params.ports[k])) {
            x(port_state_index(k)) = std::get<VoltageSource>(params.ports[k]).volts;
        }
    }
}

}  // namespace quadport
