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

namespace quadport {

namespace {

struct Preset {
    PresetInfo info;
    std::string_view text;
};

// HEV bench: ultracapacitor on port 1, battery on port 2, fuel cell on
// port 3, dc link on port 4.
constexpr std::string_view kFig7a = R"(name = fig7a

[params]
l1 = 0.72e-3
l2 = 0.72e-3
l3 = 0.72e-3
c1 = 470e-6
c2 = 470e-6
c3 = 470e-6
c4 = 470e-6
f_sw = 50000

[port1]
kind = capacitor
farads = 1
initial_volts = 150

[port2]
kind = source
volts = 25

[port3]
kind = source
volts = 35

[port4]
kind = load
ohms = 5

[control]
type = closed_loop
mode = high_power
uc_assist = false
demand_w = 2000

[simulation]
duration = 0.02
steps_per_period = 1000
integrator = rk4
record_decimation = 10

[measure]
periods = 50

[initial]
kind = averaged
)";

constexpr std::string_view kFig7b = R"(preset = fig7a
name = fig7b

[port1]
kind = capacitor
farads = 1
initial_volts = 75

[control]
uc_assist = true
)";

constexpr std::string_view kFig6a = R"(preset = fig7a
name = fig6a

[port4]
kind = load
ohms = 10

[control]
type = closed_loop
mode = medium_power
charge_battery = false
demand_w = 1000
)";

constexpr std::string_view kFig6b = R"(preset = fig6a
name = fig6b

[control]
charge_battery = true
)";

constexpr std::string_view kFig8a = R"(preset = fig7a
name = fig8a

[port4]
kind = load
ohms = 20

[control]
type = closed_loop
mode = low_power
uc_assist = false
demand_w = 500
)";

constexpr std::string_view kFig8b = R"(preset = fig8a
name = fig8b

[port1]
kind = capacitor
farads = 1
initial_volts = 75

[control]
uc_assist = true
)";

constexpr std::string_view kFig9a = R"(preset = fig7a
name = fig9a

# The motor returns 375 W into the dc link.
[port4]
kind = sink
amps = -3.75

[control]
type = closed_loop
mode = regenerative_braking
charge_uc = false
demand_w = -375
)";

constexpr std::string_view kFig9b = R"(preset = fig7a
name = fig9b

[port1]
kind = capacitor
farads = 1
initial_volts = 75

[port4]
kind = sink
amps = -10

[control]
type = closed_loop
mode = regenerative_braking
charge_uc = true
demand_w = -1000
)";

// Open-loop benches. Unused ports carry an idle current sink.
constexpr std::string_view kGainEq8 = R"(name = gain_eq8

[port1]
kind = source
volts = 150

[port2]
kind = load
ohms = 2.5

[port3]
kind = sink
amps = 0

[port4]
kind = source
volts = 150

[control]
type = open_loop
d1 = 0
d2 = 0.83333333333333337
d3 = 0.16666666666666666
d4 = 0
d5 = 1
d6 = 0

[simulation]
duration = 0.03
steps_per_period = 1000
integrator = rk4
record_decimation = 10
)";

constexpr std::string_view kBoost = R"(name = boost

[port1]
kind = source
volts = 75

[port2]
kind = sink
amps = 0

[port3]
kind = sink
amps = 0

[port4]
kind = load
ohms = 100

[control]
type = open_loop
d1 = 0
d2 = 1
d3 = 0
d4 = 0.25
d5 = 0.75
d6 = 0

[simulation]
duration = 1.0
steps_per_period = 100
integrator = exact
record_decimation = 10
record_window = 0.02
)";

constexpr std::string_view kBuck = R"(preset = boost
name = buck

[port1]
kind = source
volts = 150

[control]
type = open_loop
d1 = 0.33333333333333331
d2 = 0.66666666666666674
d3 = 0
d4 = 0
d5 = 1
d6 = 0
)";

// Duties from the fixed-d1 solution at V1 = 100 V.
constexpr std::string_view kNearUnity = R"(name = near_unity

[port1]
kind = source
volts = 100

[port2]
kind = load
ohms = 10

[port3]
kind = load
ohms = 10

[port4]
kind = load
ohms = 100

[control]
type = open_loop
d1 = 0.2
d2 = 0.55000000000000004
d3 = 0.25
d4 = 0.2
d5 = 0.55000000000000004
d6 = 0.25

[simulation]
duration = 0.6
steps_per_period = 100
integrator = exact
record_decimation = 10
record_window = 0.02
)";

// Bench tests at 30 kHz. Duties are not published; d3 = 0.25 puts 100 V on
// port 1 from the 25 V source.
constexpr std::string_view kFig10 = R"(name = fig10

[params]
f_sw = 30000

[port1]
kind = load
ohms = 100

[port2]
kind = source
volts = 25

[port3]
kind = sink
amps = 0

[port4]
kind = load
ohms = 100

[control]
type = open_loop
d1 = 0
d2 = 0.75
d3 = 0.25
d4 = 0.2
d5 = 0.8
d6 = 0

[simulation]
duration = 0.8
steps_per_period = 100
integrator = exact
record_decimation = 10
record_window = 0.02
)";

constexpr std::string_view kFig11 = R"(name = fig11

[params]
f_sw = 30000

[port1]
kind = load
ohms = 100

[port2]
kind = load
ohms = 100

[port3]
kind = sink
amps = 0

[port4]
kind = source
volts = 100

[control]
type = open_loop
d1 = 0
d2 = 0.66666666666666674
d3 = 0.33333333333333331
d4 = 0.25
d5 = 0.75
d6 = 0

[simulation]
duration = 0.8
steps_per_period = 100
integrator = exact
record_decimation = 10
record_window = 0.02
)";

const std::vector<Preset>& presets()
{
    static const std::vector<Preset> all{
        {{"gain_eq8", "open loop: 150 V rail, d3 = 1/6, 2.5 ohm load on port 2"}, kGainEq8},
        {{"boost", "open loop: 75 V on port 1 boosted to port 4, d4 = 0.25"}, kBoost},
        {{"buck", "open loop: 150 V on port 1 bucked to port 4, d1 = 1/3"}, kBuck},
        {{"near_unity", "open loop: 100 V on port 1, fixed d1 = 0.2"}, kNearUnity},
        {{"fig6a", "medium power, 1 kW, battery idle"}, kFig6a},
        {{"fig6b", "medium power, 1 kW, battery charging at 10 A"}, kFig6b},
        {{"fig7a", "high power, 2 kW, fuel cell at 40 A"}, kFig7a},
        {{"fig7b", "high power, 2 kW, ultracapacitor assisting at 75 V"}, kFig7b},
        {{"fig8a", "low power, 500 W from the battery"}, kFig8a},
        {{"fig8b", "low power, 500 W, ultracapacitor assisting at 75 V"}, kFig8b},
        {{"fig9a", "regenerative braking, battery charging at 15 A"}, kFig9a},
        {{"fig9b", "regenerative braking, ultracapacitor charging"}, kFig9b},
        {{"fig10", "30 kHz bench: 25 V source on port 2, 100 ohm loads on ports 1 and 4"}, kFig10},
        {{"fig11", "30 kHz bench: 100 V source on port 4, 100 ohm loads on ports 1 and 2"}, kFig11},
    };
    return all;
}

const Preset* find(std::string_view name)
{
    const auto& all = presets();
    auto it = std::find_if(all.begin(), all.end(), [&](const Preset& p) { return p.info.name == name; });
    return it == all.end() ? nullptr : &*it;
}

}  // namespace

const std::vector<PresetInfo>& preset_catalog()
{
    static const std::vector<PresetInfo> catalog = [] {
        std::vector<PresetInfo> out;
        for (const Preset& p : presets()) out.push_back(p.info);
        return out;
    }();
    return catalog;
}

bool is_preset(std::string_view name) { return find(name) != nullptr; }

std::string_view preset_text(std::string_view name)
{
    const Preset* p = find(name);
    if (p == nullptr) throw ValidationError("preset", "unknown preset '" + std::string(name) + "'");
    return p->text;
}

}  // namespace quadport
