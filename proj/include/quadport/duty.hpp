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

// Steady-state relations between duty ratios and port voltages.
//
// A duty ratio here is the fraction of the switching period during which a
// switch is OFF. Leg 1 uses (d1, d2, d3) for S1..S3, leg 2 uses (d4, d5, d6).

#include "quadport/topology.hpp"
#include "quadport/waveform.hpp"

#include <array>
#include <stdexcept>
#include <variant>

namespace quadport {

class Infeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WindowTooShort : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDutySumTolerance = 1e-9;

struct DutyCommand {
    double d1 = 1.0, d2 = 0.0, d3 = 0.0;
    double d4 = 1.0, d5 = 0.0, d6 = 0.0;

    std::array<double, 6> as_array() const { return {d1, d2, d3, d4, d5, d6}; }
    static DutyCommand from_array(const std::array<double, 6>& d);

    /// Throws ConfigError naming the violated constraint.
    void validate() const;
    bool is_valid() const noexcept;

    friend bool operator==(const DutyCommand&, const DutyCommand&) = default;
};

struct LegSteadyState {
    double v_a = 0.0;
    double v_b = 0.0;
    double v_c = 0.0;
};

/// Volt-second balance of a generic leg: v_a = (d_b + d_c) v_c, v_b = d_c v_c.
LegSteadyState leg_steady_state(double d_a, double d_b, double d_c, double v_rail);

struct PortTargets {
    double v1 = 0.0;
    double v2 = 0.0;
    double v3 = 0.0;
    double v4 = 0.0;
};

struct PortVoltagePrediction {
    double v2 = 0.0;
    double v3 = 0.0;
};

PortVoltagePrediction predict_port_voltages(const DutyCommand& duties, double v1, double v4);

/// (1 - d1) v1 - (1 - d4) v4; zero when L2 is in volt-second balance.
double check_transfer_balance(const DutyCommand& duties, double v1, double v4);

struct ClampWindow {
    double lo = 0.05;
    double hi = 0.95;

    friend bool operator==(const ClampWindow&, const ClampWindow&) = default;
};

double clamp_duty(double d, ClampWindow window = {});

/// As above, except a switch held permanently on by the duty policy keeps its
/// zero duty: no PWM is generated for it, so the driver limit does not apply.
double clamp_duty(double d, ClampWindow window, bool statically_on);

namespace policy {
struct BoostPreferred {};
struct BuckPreferred {};
struct FixedD1 {
    double value = 0.2;
};
}  // namespace policy

using DutyPolicy = std::variant<policy::BoostPreferred, policy::BuckPreferred, policy::FixedD1>;

/// Solves duties that hold all four port voltages at `targets`.
///
/// d3 and d6 follow the port gains, the (d1, d4) pair follows the transfer
/// balance under `policy`, and d2/d5 take the rest of each period. A duty of
/// exactly zero selected by the policy (a switch held permanently on) is exempt
/// from the clamp window. Throws Infeasible otherwise.
DutyCommand solve_duties(const PortTargets& targets, const DutyPolicy& policy,
                         ClampWindow window = {});

/// Volt-seconds applied to L1, L2, L3 over the final whole switching period of
/// `waveform`, computed as L * (i_end - i_start). Throws WindowTooShort when the
/// waveform spans less than one period.
std::array<double, 3> flux_balance_residuals(const Waveform& waveform,
                                             const ConverterParams& params);

}  // namespace quadport
