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
#pragma once

// =============================================================================
// Closed-loop regulation and HEV operating-mode supervisor
// =============================================================================
// Three channels run once per switching period:
//   battery current   -> d3  (around the port-2 gain feedforward)
//   fuel-cell current -> d6  (around the port-3 gain feedforward)
//   dc-link voltage   -> (d1, d4), cascaded through the L2 transfer current
//
// Sign conventions: battery and fuel-cell currents are positive when the
// source delivers power (i_batt = -i_L1, i_fc = -i_L3).
// =============================================================================

#include "quadport/duty.hpp"
#include "quadport/topology.hpp"

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace quadport {

class SetpointInfeasible : public Infeasible {
public:
    using Infeasible::Infeasible;
};

struct PiController {
    double kp = 0.0;
    double ki = 0.0;
    double integral_state = 0.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    /// One proportional-integral update. The output is clamped to [lo, hi] and
    /// the integral is held while the output saturates in the direction of the
    /// error (conditional integration).
    double step(double error, double dt);
    void set_limits(double lower, double upper);
};

struct ControlSetpoints {
    double v_dc_ref = 100.0;
    double i_batt_ref = 0.0;
    double i_fc_ref = 0.0;
    std::optional<double> v_uc_ref;  // nullopt: ultracapacitor unregulated

    friend bool operator==(const ControlSetpoints&, const ControlSetpoints&) = default;
};

namespace hev {
struct MediumPower {
    bool charge_battery = false;
    friend bool operator==(const MediumPower&, const MediumPower&) = default;
};
struct HighPower {
    bool uc_assist = false;
    friend bool operator==(const HighPower&, const HighPower&) = default;
};
struct LowPower {
    bool uc_assist = false;
    friend bool operator==(const LowPower&, const LowPower&) = default;
};
struct RegenerativeBraking {
    bool charge_uc = false;
    friend bool operator==(const RegenerativeBraking&, const RegenerativeBraking&) = default;
};
}  // namespace hev

using HevMode =
    std::variant<hev::MediumPower, hev::HighPower, hev::LowPower, hev::RegenerativeBraking>;

std::string_view mode_name(const HevMode& mode);
bool mode_flag(const HevMode& mode);
/// Parses "medium_power", "high_power", "low_power", "regenerative_braking".
HevMode make_mode(std::string_view name, bool flag);

/// Nominal port voltages and the fixed currents of the operating-mode table.
struct SupervisorConfig {
    double v_dc = 100.0;
    double v_fc = 35.0;
    double v_batt = 25.0;
    double v_uc_high = 150.0;
    double charge_current = 10.0;      // battery charging in medium-power mode
    double fc_high_current = 40.0;     // fuel-cell share in high-power mode
    double regen_battery_current = 15.0;
    double uc_share = 0.25;            // fraction of the battery's duty taken by the UC on assist

    friend bool operator==(const SupervisorConfig&, const SupervisorConfig&) = default;
};

/// Setpoint table for the four operating modes. `demand` is the dc-link power
/// in watts (negative while braking).
ControlSetpoints mode_setpoints(const HevMode& mode, double demand,
                                const SupervisorConfig& config = {});

struct ChannelGains {
    double kp = 0.0;
    double ki = 0.0;
    friend bool operator==(const ChannelGains&, const ChannelGains&) = default;
};

struct ControlGains {
    ChannelGains battery;    // volts per amp on L1
    ChannelGains fuel_cell;  // volts per amp on L3
    ChannelGains transfer;   // volts per amp on L2 (inner loop)
    ChannelGains voltage;    // amps per volt on the dc link (outer loop)
    ChannelGains uc_trim;    // amps of battery current per volt of UC error

    /// Loop-shaped defaults against the period-averaged plant.
    ///
    /// Current loops see 1/(L s): kp = L wc, zero at wc/5, wc = 2 pi f_sw/20,
    /// which leaves about 79 degrees of phase margin before the one-period
    /// update delay. The dc-link loop sees 1/(C4 s) through the closed current
    /// loop and crosses over a decade lower. The ultracapacitor trim crosses
    /// over at 0.1 Hz against v_batt/(v_uc C_uc s); zero when port 1 has no
    /// external capacitance.
    static ControlGains derive(const ConverterParams& params, const SupervisorConfig& nominal = {});

    friend bool operator==(const ControlGains&, const ControlGains&) = default;
};

struct ControllerConfig {
    ControlGains gains;
    ClampWindow window;
    double near_unity_band = 0.10;
    double hysteresis = 0.02;
    double fixed_d1 = 0.2;
    double transfer_current_limit = 100.0;
    double uc_trim_limit = 2.0;

    friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

enum class TransferRegion { Buck, Boost, NearUnity };
std::string_view to_string(TransferRegion region);

class HevController {
public:
    explicit HevController(ControllerConfig config);

    /// Duties for the next switching period from the state sampled at its start.
    /// Throws SetpointInfeasible when the setpoints cannot be met even by
    /// feedforward at nominal port voltages.
    DutyCommand control_period(const StateVector& measured, const ControlSetpoints& setpoints,
                               const ConverterParams& params);

    TransferRegion region() const { return region_; }
    const ControllerConfig& config() const { return config_; }

    /// Feedforward duties at nominal port voltages; throws SetpointInfeasible.
    DutyCommand feedforward(const ControlSetpoints& setpoints, const ConverterParams& params,
                            const StateVector& measured) const;

private:
    TransferRegion select_region(double ratio) const;

    ControllerConfig config_;
    PiController battery_;
    PiController fuel_cell_;
    PiController voltage_;
    PiController transfer_;
    PiController uc_trim_;
    TransferRegion region_ = TransferRegion::Buck;
    bool started_ = false;
};

}  // namespace quadport
