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
#include "quadport/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace quadport {

namespace {

// Keeps the PI arithmetic finite for any finite measurement.
constexpr double kErrorLimit = 1e12;
constexpr double kRailFloor = 1.0;

std::optional<double> nominal_volts(const PortModel& port)
{
    if (const auto* s = std::get_if<VoltageSource>(&port)) return s->volts;
    if (const auto* c = std::get_if<CapacitorOnly>(&port)) return c->initial_volts;
    return std::nullopt;
}

}  // namespace

// PI ---------------------------------------------------------------------------

double PiController::step(double error, double dt)
{
    const double e = std::clamp(error, -kErrorLimit, kErrorLimit);
    const double candidate = integral_state + ki * e * dt;
    const double unclamped = kp * e + candidate;
    const bool pushing_high = unclamped > hi && e > 0.0;
    const bool pushing_low = unclamped < lo && e < 0.0;
    if (!pushing_high && !pushing_low) integral_state = candidate;
    return std::clamp(kp * e + integral_state, lo, hi);
}

void PiController::set_limits(double lower, double upper)
{
    lo = lower;
    hi = std::max(lower, upper);
    integral_state = std::clamp(integral_state, lo, hi);
}

// Supervisor -------------------------------------------------------------------

std::string_view mode_name(const HevMode& mode)
{
    return std::visit(
        [](const auto& m) -> std::string_view {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, hev::MediumPower>) return "medium_power";
            else if constexpr (std::is_same_v<T, hev::HighPower>) return "high_power";
            else if constexpr (std::is_same_v<T, hev::LowPower>) return "low_power";
            else return "regenerative_braking";
        },
        mode);
}

bool mode_flag(const HevMode& mode)
{
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, hev::MediumPower>) return m.charge_battery;
            else if constexpr (std::is_same_v<T, hev::RegenerativeBraking>) return m.charge_uc;
            else return m.uc_assist;
        },
        mode);
}

HevMode make_mode(std::string_view name, bool flag)
{
    if (name == "medium_power") return hev::MediumPower{flag};
    if (name == "high_power") return hev::HighPower{flag};
    if (name == "low_power") return hev::LowPower{flag};
    if (name == "regenerative_braking") return hev::RegenerativeBraking{flag};
    throw ConfigError("unknown operating mode '" + std::string(name) + "'");
}

ControlSetpoints mode_setpoints(const HevMode& mode, double demand,
                                const SupervisorConfig& config)
{
    ControlSetpoints sp;
    sp.v_dc_ref = config.v_dc;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, hev::MediumPower>) {
                sp.i_batt_ref = m.charge_battery ? -config.charge_current : 0.0;
                sp.i_fc_ref = (demand - sp.i_batt_ref * config.v_batt) / config.v_fc;
                sp.v_uc_ref = config.v_uc_high;
            } else if constexpr (std::is_same_v<T, hev::HighPower>) {
                sp.i_fc_ref = config.fc_high_current;
                const double remainder = demand - sp.i_fc_ref * config.v_fc;
                const double battery_share = m.uc_assist ? 1.0 - config.uc_share : 1.0;
                sp.i_batt_ref = battery_share * remainder / config.v_batt;
                if (!m.uc_assist) sp.v_uc_ref = config.v_uc_high;
            } else if constexpr (std::is_same_v<T, hev::LowPower>) {
                sp.i_fc_ref = 0.0;
                const double battery_share = m.uc_assist ? 1.0 - config.uc_share : 1.0;
                sp.i_batt_ref = battery_share * demand / config.v_batt;
                if (!m.uc_assist) sp.v_uc_ref = config.v_uc_high;
            } else {
                sp.i_fc_ref = 0.0;
                sp.i_batt_ref = -config.regen_battery_current;
                if (!m.charge_uc) sp.v_uc_ref = config.v_uc_high;
            }
        },
        mode);
    sp.i_fc_ref = std::max(0.0, sp.i_fc_ref);
    return sp;
}

// Gains --------------------------------------------------------------------------

ControlGains ControlGains::derive(const ConverterParams& params, const SupervisorConfig& nominal)
{
    const double wc = 2.0 * std::numbers::pi * params.f_sw / 20.0;
    auto current_loop = [wc](double inductance) {
        const double kp = inductance * wc;
        return ChannelGains{kp, kp * wc / 5.0};
    };

    ControlGains g;
    g.battery = current_loop(params.l1);
    g.fuel_cell = current_loop(params.l3);
    g.transfer = current_loop(params.l2);

    const double wv = wc / 10.0;
    const double kv = params.c4 * wv;
    g.voltage = {kv, kv * wv / 5.0};

    if (const auto* uc = std::get_if<CapacitorOnly>(&params.ports[0])) {
        const double wu = 2.0 * std::numbers::pi * 0.1;
        const double plant = nominal.v_batt / (nominal.v_uc_high * (uc->farads + params.c1));
        const double ku = wu / plant;
        g.uc_trim = {ku, ku * wu / 5.0};
    }
    return g;
}

// Controller --------------------------------------------------------------------------

std::string_view to_string(TransferRegion region)
{
    switch (region) {
    case TransferRegion::Buck: return "buck";
    case TransferRegion::Boost: return "boost";
    case TransferRegion::NearUnity: return "near_unity";
    }
    return "?";
}

HevController::HevController(ControllerConfig config) : config_(config)
{
    const ControlGains& g = config_.gains;
    battery_.kp = g.battery.kp;
    battery_.ki = g.battery.ki;
    fuel_cell_.kp = g.fuel_cell.kp;
    fuel_cell_.ki = g.fuel_cell.ki;
    voltage_.kp = g.voltage.kp;
    voltage_.ki = g.voltage.ki;
    transfer_.kp = g.transfer.kp;
    transfer_.ki = g.transfer.ki;
    uc_trim_.kp = g.uc_trim.kp;
    uc_trim_.ki = g.uc_trim.ki;
}

TransferRegion HevController::select_region(double ratio) const
{
    const double distance = std::abs(ratio - 1.0);
    const double band = (started_ && region_ == TransferRegion::NearUnity)
                            ? config_.near_unity_band + config_.hysteresis
                            : config_.near_unity_band;
    if (distance < band) return TransferRegion::NearUnity;
    return ratio >= 1.0 ? TransferRegion::Buck : TransferRegion::Boost;
}

DutyCommand HevController::feedforward(const ControlSetpoints& setpoints,
                                       const ConverterParams& params,
                                       const StateVector& measured) const
{
    PortTargets t;
    t.v1 = setpoints.v_uc_ref.value_or(nominal_volts(params.ports[0]).value_or(measured.v_c1));
    t.v2 = nominal_volts(params.ports[1]).value_or(measured.v_c2);
    t.v3 = nominal_volts(params.ports[2]).value_or(measured.v_c3);
    t.v4 = setpoints.v_dc_ref;

    DutyPolicy policy = policy::BuckPreferred{};
    const double ratio = t.v4 > 0.0 ? t.v1 / t.v4 : 0.0;
    if (std::abs(ratio - 1.0) < config_.near_unity_band) {
        policy = policy::FixedD1{config_.fixed_d1};
    } else if (ratio < 1.0) {
        policy = policy::BoostPreferred{};
    }
    try {
        return solve_duties(t, policy, config_.window);
    } catch (const Infeasible& e) {
        throw SetpointInfeasible(std::string("setpoints infeasible: ") + e.what());
    }
}

DutyCommand HevController::control_period(const StateVector& measured,
                                          const ControlSetpoints& setpoints,
                                          const ConverterParams& params)
{
    feedforward(setpoints, params, measured);

    const ClampWindow w = config_.window;
    const double dt = params.period();
    const double v1 = std::max(measured.v_c1, kRailFloor);
    const double v4 = std::max(measured.v_c4, kRailFloor);
    const double v2 = measured.v_c2;
    const double v3 = measured.v_c3;

    region_ = select_region(v1 / v4);
    if (!started_) {
        // Bumpless start: the outer loop begins from the present transfer current.
        voltage_.integral_state = measured.i_l2;
        started_ = true;
    }

    double d1_min = 0.0;
    double d4_min = 0.0;
    switch (region_) {
    case TransferRegion::Buck: d1_min = w.lo; break;
    case TransferRegion::Boost: d4_min = w.lo; break;
    case TransferRegion::NearUnity:
        d1_min = config_.fixed_d1;
        d4_min = w.lo;
        break;
    }

    // Battery channel.
    double trim = 0.0;
    if (setpoints.v_uc_ref) {
        uc_trim_.set_limits(-config_.uc_trim_limit, config_.uc_trim_limit);
        trim = uc_trim_.step(*setpoints.v_uc_ref - measured.v_c1, dt);
    }
    const double i_l1_ref = -(setpoints.i_batt_ref + trim);
    const double d3_hi = std::min(w.hi, 1.0 - d1_min);
    battery_.set_limits(w.lo * v1 - v2, d3_hi * v1 - v2);
    const double u3 = battery_.step(i_l1_ref - measured.i_l1, dt);
    const double d3 = std::clamp((v2 + u3) / v1, w.lo, d3_hi);

    // Fuel-cell channel.
    const double i_l3_ref = -setpoints.i_fc_ref;
    const double d6_hi = std::min(w.hi, 1.0 - d4_min);
    fuel_cell_.set_limits(w.lo * v4 - v3, d6_hi * v4 - v3);
    const double u6 = fuel_cell_.step(i_l3_ref - measured.i_l3, dt);
    const double d6 = std::clamp((v3 + u6) / v4, w.lo, d6_hi);

    // dc-link voltage: outer loop sets the L2 current, inner loop the mean
    // transfer voltage u = (1 - d1) v1 - (1 - d4) v4.
    voltage_.set_limits(-config_.transfer_current_limit, config_.transfer_current_limit);
    const double i_l2_ref = voltage_.step(setpoints.v_dc_ref - measured.v_c4, dt);

    const double d1_hi = std::min(w.hi, 1.0 - d3);
    const double d4_hi = std::min(w.hi, 1.0 - d6);
    double d1 = 0.0;
    double d4 = 0.0;
    switch (region_) {
    case TransferRegion::Buck: {
        transfer_.set_limits((1.0 - d1_hi) * v1 - v4, (1.0 - w.lo) * v1 - v4);
        const double u = transfer_.step(i_l2_ref - measured.i_l2, dt);
        d1 = std::clamp(1.0 - (v4 + u) / v1, w.lo, d1_hi);
        break;
    }
    case TransferRegion::Boost: {
        transfer_.set_limits(v1 - (1.0 - w.lo) * v4, v1 - (1.0 - d4_hi) * v4);
        const double u = transfer_.step(i_l2_ref - measured.i_l2, dt);
        d4 = std::clamp(1.0 - (v1 - u) / v4, w.lo, d4_hi);
        break;
    }
    case TransferRegion::NearUnity: {
        d1 = std::min(config_.fixed_d1, d1_hi);
        const double rail1 = (1.0 - d1) * v1;
        transfer_.set_limits(rail1 - (1.0 - w.lo) * v4, rail1 - (1.0 - d4_hi) * v4);
        const double u = transfer_.step(i_l2_ref - measured.i_l2, dt);
        d4 = std::clamp(1.0 - (rail1 - u) / v4, w.lo, d4_hi);
        break;
    }
    }

    DutyCommand d;
    d.d1 = d1;
    d.d3 = d3;
    d.d2 = std::max(0.0, 1.0 - d1 - d3);
    d.d4 = d4;
    d.d6 = d6;
    d.d5 = std::max(0.0, 1.0 - d4 - d6);
    return d;
}

}  // namespace quadport
