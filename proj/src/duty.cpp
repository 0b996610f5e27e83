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
#include "quadport/duty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace quadport {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

DutyCommand DutyCommand::from_array(const std::array<double, 6>& d)
{
    return {d[0], d[1], d[2], d[3], d[4], d[5]};
}

void DutyCommand::validate() const
{
    const auto d = as_array();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i]) || d[i] < 0.0 || d[i] > 1.0) {
            throw ConfigError("duty d" + std::to_string(i + 1) + " = " + fmt(d[i]) +
                              " outside [0, 1]");
        }
    }
    const double leg1 = d1 + d2 + d3;
    const double leg2 = d4 + d5 + d6;
    if (std::abs(leg1 - 1.0) > kDutySumTolerance) {
        throw ConfigError("leg 1 duties violate Da + Db + Dc = 1: d1 + d2 + d3 = " + fmt(leg1));
    }
    if (std::abs(leg2 - 1.0) > kDutySumTolerance) {
        throw ConfigError("leg 2 duties violate Da + Db + Dc = 1: d4 + d5 + d6 = " + fmt(leg2));
    }
}

bool DutyCommand::is_valid() const noexcept
{
    try {
        validate();
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

LegSteadyState leg_steady_state(double d_a, double d_b, double d_c, double v_rail)
{
    (void)d_a;
    return {(d_b + d_c) * v_rail, d_c * v_rail, v_rail};
}

PortVoltagePrediction predict_port_voltages(const DutyCommand& duties, double v1, double v4)
{
    return {duties.d3 * v1, duties.d6 * v4};
}

double check_transfer_balance(const DutyCommand& duties, double v1, double v4)
{
    return (1.0 - duties.d1) * v1 - (1.0 - duties.d4) * v4;
}

double clamp_duty(double d, ClampWindow window)
{
    return std::min(window.hi, std::max(window.lo, d));
}

double clamp_duty(double d, ClampWindow window, bool statically_on)
{
    if (statically_on && d == 0.0) return 0.0;
    return clamp_duty(d, window);
}

std::array<double, 3> flux_balance_residuals(const Waveform& waveform,
                                             const ConverterParams& params)
{
    const double period = params.period();
    if (waveform.empty() || waveform.span() < period * (1.0 - 1e-9)) {
        throw WindowTooShort("flux balance needs at least one full switching period");
    }
    const double t_end = waveform.time.back();
    const Vector7 start = waveform.state_at(t_end - period);
    const Vector7& end = waveform.states.back();
    return {params.l1 * (end(kIL1) - start(kIL1)), params.l2 * (end(kIL2) - start(kIL2)),
            params.l3 * (end(kIL3) - start(kIL3))};
}

DutyCommand solve_duties(const PortTargets& targets, const DutyPolicy& policy,
                         ClampWindow window)
{
    const auto [v1, v2, v3, v4] = targets;
    for (double v : {v1, v2, v3, v4}) {
        if (!std::isfinite(v) || v < 0.0) throw Infeasible("port targets must be finite and >= 0");
    }
    if (!(v1 > 0.0) || !(v4 > 0.0)) throw Infeasible("rail targets v1 and v4 must be positive");
    if (v2 > v1) throw Infeasible("v2 = " + fmt(v2) + " exceeds v1 = " + fmt(v1));
    if (v3 > v4) throw Infeasible("v3 = " + fmt(v3) + " exceeds v4 = " + fmt(v4));

    DutyCommand d;
    d.d3 = v2 / v1;
    d.d6 = v3 / v4;

    // Switches the policy holds permanently on (duty exactly 0, no PWM).
    bool s1_static = false;
    bool s4_static = false;

    auto boost = [&] {
        d.d1 = 0.0;
        d.d4 = 1.0 - v1 / v4;
        s1_static = true;
        s4_static = d.d4 == 0.0;
    };
    auto buck = [&] {
        d.d4 = 0.0;
        d.d1 = 1.0 - v4 / v1;
        s4_static = true;
        s1_static = d.d1 == 0.0;
    };

    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, policy::BoostPreferred>) {
                if (v1 <= v4) boost(); else buck();
            } else if constexpr (std::is_same_v<T, policy::BuckPreferred>) {
                if (v1 >= v4) buck(); else boost();
            } else {
                if (!(p.value >= 0.0 && p.value < 1.0)) {
                    throw Infeasible("fixed d1 must lie in [0, 1)");
                }
                d.d1 = p.value;
                d.d4 = 1.0 - (1.0 - p.value) * v1 / v4;
                s1_static = p.value == 0.0;
                if (d.d4 < 0.0) {
                    throw Infeasible("fixed d1 = " + fmt(p.value) + " needs d4 = " + fmt(d.d4) +
                                     " < 0");
                }
            }
        },
        policy);

    if (d.d1 + d.d3 > 1.0) throw Infeasible("d1 + d3 = " + fmt(d.d1 + d.d3) + " exceeds 1");
    if (d.d4 + d.d6 > 1.0) throw Infeasible("d4 + d6 = " + fmt(d.d4 + d.d6) + " exceeds 1");

    auto check_window = [&](double value, bool exempt, const char* name) {
        if (exempt) return;
        if (value < window.lo || value > window.hi) {
            throw Infeasible(std::string(name) + " = " + fmt(value) + " outside clamp window [" +
                             fmt(window.lo) + ", " + fmt(window.hi) + "]");
        }
    };
    check_window(d.d1, s1_static, "d1");
    check_window(d.d4, s4_static, "d4");
    check_window(d.d3, d.d3 == 0.0, "d3");
    check_window(d.d6, d.d6 == 0.0, "d6");

    d.d2 = std::max(0.0, 1.0 - d.d1 - d.d3);
    d.d5 = std::max(0.0, 1.0 - d.d4 - d.d6);
    return d;
}

}  // namespace quadport
