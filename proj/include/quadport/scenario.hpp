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

// Scenario files
// --------------
// Plain text, one `key = value` per line, `#` starts a comment, `[section]`
// opens a section. Top-level keys: `name`, `preset`. A `preset` key loads the
// named built-in scenario first; every key in the file then overrides it.
// Setting `kind` in a [portN] or [initial] section, or `type` in [control],
// discards the preset's other keys of that section. Declaring any [event.K]
// section replaces all preset events.
//
//   [params]      l1 l2 l3 c1 c2 c3 c4 f_sw switch_on_resistance
//   [port1..4]    kind = source (volts, series_ohms) | load (ohms)
//                      | capacitor (farads, initial_volts) | sink (amps)
//   [control]     type = open_loop (d1..d6)
//                      | closed_loop (mode, charge_battery|uc_assist|charge_uc, demand_w)
//   [controller]  gains = derived | explicit (kp_/ki_ battery, fuel_cell,
//                 transfer, voltage, uc), clamp_lo, clamp_hi, near_unity_band,
//                 hysteresis, fixed_d1, transfer_current_limit, uc_trim_limit
//   [supervisor]  v_dc v_fc v_batt v_uc_high charge_current fc_high_current
//                 regen_battery_current uc_share
//   [simulation]  duration steps_per_period integrator(rk4|exact) record_decimation
//                 record_window
//   [measure]     periods relative_tol volts_floor amps_floor
//   [initial]     kind = zero | averaged | explicit (i_l1 .. v_c4)
//   [event.K]     time, then any of: mode + flag, demand_w, d1..d6,
//                 portN.kind and portN.<field>
//
// Events latch at the first switching-period boundary at or after `time`.

#include "quadport/control.hpp"
#include "quadport/duty.hpp"
#include "quadport/simulator.hpp"
#include "quadport/topology.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace quadport {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, std::string key, const std::string& what)
        : std::runtime_error(what), line_(line), key_(std::move(key))
    {
    }
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct OpenLoop {
    DutyCommand duties;
    friend bool operator==(const OpenLoop&, const OpenLoop&) = default;
};

struct ClosedLoop {
    HevMode mode = hev::MediumPower{};
    double demand_w = 0.0;
    bool derived_gains = true;
    ControllerConfig controller;
    SupervisorConfig supervisor;
    friend bool operator==(const ClosedLoop&, const ClosedLoop&) = default;
};

using ControlSpec = std::variant<OpenLoop, ClosedLoop>;

struct PortChange {
    std::size_t port = 0;  // 0-based
    PortModel model;
    friend bool operator==(const PortChange&, const PortChange&) = default;
};

struct ScenarioEvent {
    double time = 0.0;
    std::optional<HevMode> mode;
    std::optional<double> demand_w;
    std::optional<DutyCommand> duties;
    std::vector<PortChange> ports;
    friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

enum class InitialKind { Zero, Averaged, Explicit };

struct Scenario {
    std::string name = "scenario";
    ConverterParams params;
    ControlSpec control = OpenLoop{};
    SimulationSettings settings;
    int measure_periods = 50;
    SettleTolerance tolerance;
    InitialKind initial_kind = InitialKind::Zero;
    StateVector initial;  // used when initial_kind == Explicit
    std::vector<ScenarioEvent> events;

    bool closed_loop() const { return std::holds_alternative<ClosedLoop>(control); }

    /// Throws ValidationError naming the offending key.
    void validate() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario parse_scenario(std::string_view text, std::string_view origin = "<text>");
Scenario load_scenario(const std::filesystem::path& path);

/// `name_or_path` is either a path to a scenario file or a built-in preset name.
Scenario load_scenario_or_preset(const std::string& name_or_path);

/// Fully specified text form; parse_scenario(write_scenario(s)) == s.
std::string write_scenario(const Scenario& scenario);

/// The scenario with every event applied and the event list emptied.
Scenario final_configuration(const Scenario& scenario);

/// Applies one event to the configuration it modifies.
void apply_event(const ScenarioEvent& event, ConverterParams& params, ControlSpec& control);

/// Initial state the run starts from (zero, averaged operating point, or explicit).
StateVector initial_state(const Scenario& scenario);

// Presets -------------------------------------------------------------------------

struct PresetInfo {
    std::string_view name;
    std::string_view summary;
};

const std::vector<PresetInfo>& preset_catalog();
bool is_preset(std::string_view name);
/// Scenario-file text of a built-in preset; throws ValidationError if unknown.
std::string_view preset_text(std::string_view name);
Scenario load_preset(std::string_view name);

}  // namespace quadport
