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
#include "doctest.h"

#include "quadport/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace quadport;

namespace {

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

constexpr const char* kMinimal = R"(name = minimal
[port1]
kind = source
volts = 100
[control]
type = open_loop
d1 = 0
d2 = 0.5
d3 = 0.5
d4 = 0
d5 = 1
d6 = 0
)";

}  // namespace

TEST_CASE("preset fig7a")
{
    const Scenario s = load_preset("fig7a");
    REQUIRE(s.closed_loop());
    const auto& c = std::get<ClosedLoop>(s.control);
    CHECK(std::holds_alternative<hev::HighPower>(c.mode));
    CHECK(c.demand_w == 2000.0);
    CHECK(s.params.f_sw == 50e3);
    CHECK(s.params.l1 == 0.72e-3);
    CHECK(s.params.l2 == 0.72e-3);
    CHECK(s.params.l3 == 0.72e-3);
    CHECK(std::get<VoltageSource>(s.params.ports[1]).volts == 25.0);
    CHECK(std::get<VoltageSource>(s.params.ports[2]).volts == 35.0);
    CHECK(c.controller.gains == ControlGains::derive(s.params, c.supervisor));
}

TEST_CASE("preset fig10")
{
    const Scenario s = load_preset("fig10");
    CHECK(s.params.f_sw == 30e3);
    CHECK(std::get<VoltageSource>(s.params.ports[1]).volts == 25.0);
    CHECK(std::get<ResistiveLoad>(s.params.ports[0]).ohms == 100.0);
    CHECK(std::get<ResistiveLoad>(s.params.ports[3]).ohms == 100.0);
    CHECK(std::get<OpenLoop>(s.control).duties.d3 == 0.25);
}

TEST_CASE("presets inherit and override")
{
    const Scenario a = load_preset("fig6a");
    const Scenario b = load_preset("fig6b");
    CHECK(std::get<ClosedLoop>(b.control).mode == HevMode{hev::MediumPower{true}});
    CHECK(std::get<ClosedLoop>(a.control).mode == HevMode{hev::MediumPower{false}});
    CHECK(a.params == b.params);

    const Scenario custom = parse_scenario(R"(preset = fig7a
name = custom
[params]
f_sw = 40000
[port4]
ohms = 4
[simulation]
duration = 0.01
)");
    CHECK(custom.name == "custom");
    CHECK(custom.params.f_sw == 40e3);
    CHECK(std::get<ResistiveLoad>(custom.params.ports[3]).ohms == 4.0);
    CHECK(custom.settings.duration == 0.01);
    CHECK(custom.settings.steps_per_period == 1000);
    // Derived gains follow the overridden switching frequency.
    const auto& c = std::get<ClosedLoop>(custom.control);
    CHECK(c.controller.gains == ControlGains::derive(custom.params, c.supervisor));
}

TEST_CASE("presets match their golden files")
{
    for (const PresetInfo& info : preset_catalog()) {
        CAPTURE(info.name);
        const std::filesystem::path golden =
            std::filesystem::path(QUADPORT_GOLDEN_DIR) / (std::string(info.name) + ".scenario");
        REQUIRE(std::filesystem::exists(golden));
        CHECK(write_scenario(load_preset(info.name)) == read_file(golden));
    }
}

TEST_CASE("write and parse round trip")
{
    for (const PresetInfo& info : preset_catalog()) {
        const Scenario s = load_preset(info.name);
        CHECK(parse_scenario(write_scenario(s)) == s);
    }

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Scenario s = load_preset(trial % 2 == 0 ? "fig7a" : "boost");
        s.name = "random" + std::to_string(trial);
        s.params.l2 = 1e-4 + 1e-3 * u(rng);
        s.params.c3 = 1e-4 + 1e-3 * u(rng);
        s.params.ports[2] = VoltageSource{10.0 + 50.0 * u(rng), u(rng)};
        s.settings.duration = 0.02 + u(rng);
        s.tolerance.relative = 0.001 + 0.01 * u(rng);
        if (auto* c = std::get_if<ClosedLoop>(&s.control)) {
            c->demand_w = 3000.0 * u(rng);
            c->derived_gains = false;
            c->controller.gains.battery.kp = u(rng);
            c->controller.gains.uc_trim.ki = u(rng);
            ScenarioEvent e;
            e.time = 0.01;
            e.mode = hev::LowPower{true};
            e.demand_w = 123.456;
            e.ports.push_back({3, ResistiveLoad{7.0}});
            s.events.push_back(e);
        } else {
            s.initial_kind = InitialKind::Explicit;
            s.initial.v_c4 = 100.0 * u(rng);
            ScenarioEvent e;
            e.time = 0.015;
            e.duties = DutyCommand{0.0, 1.0 - 0.1, 0.1, 0.3 * u(rng), 0.0, 0.0};
            e.duties->d5 = 1.0 - e.duties->d4;
            s.events.push_back(e);
        }
        const std::string text = write_scenario(s);
        const Scenario back = parse_scenario(text);
        CHECK(back == s);
        CHECK(write_scenario(back) == text);
    }
}

TEST_CASE("validation errors name the offending key")
{
    SUBCASE("duty row sum")
    {
        std::string text = kMinimal;
        text.replace(text.find("d3 = 0.5"), 8, "d3 = 0.4");
        try {
            parse_scenario(text);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.key() == "control");
            CHECK(std::string(e.what()).find("Da + Db + Dc = 1") != std::string::npos);
        }
    }
    SUBCASE("zero duration")
    {
        const std::string text = std::string(kMinimal) + "[simulation]\nduration = 0\n";
        CHECK_THROWS_AS(parse_scenario(text), ValidationError);
    }
    SUBCASE("events must increase and stay inside the run")
    {
        const std::string base = std::string(kMinimal) + "[simulation]\nduration = 0.01\n";
        CHECK_NOTHROW(parse_scenario(base + "[event.1]\ntime = 0.002\nd1 = 0\nd2 = 1\nd3 = 0\n"
                                            "d4 = 0\nd5 = 1\nd6 = 0\n"));
        try {
            parse_scenario(base + "[event.1]\ntime = 0.004\nport2.kind = load\nport2.ohms = 5\n"
                                  "[event.2]\ntime = 0.003\nport2.kind = load\nport2.ohms = 6\n");
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(e.key() == "event.2.time");
        }
        CHECK_THROWS_AS(parse_scenario(base + "[event.1]\ntime = 0.02\nport2.kind = sink\n"),
                        ValidationError);
    }
    SUBCASE("unknown preset")
    {
        CHECK_THROWS_AS(parse_scenario("preset = nothing\n"), ValidationError);
    }
    SUBCASE("closed-loop only sections")
    {
        CHECK_THROWS_AS(parse_scenario(std::string(kMinimal) + "[supervisor]\nv_dc = 90\n"),
                        ValidationError);
    }
    SUBCASE("mode flag must belong to the mode")
    {
        CHECK_THROWS_AS(parse_scenario("preset = fig7a\n[control]\ncharge_uc = true\n"),
                        ValidationError);
    }
}

TEST_CASE("parse errors report line and key")
{
    const auto expect = [](const std::string& text, int line, const std::string& key) {
        try {
            parse_scenario(text);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
            CHECK(e.key() == key);
        }
    };
    expect("name = x\n[port1]\nkind = source\nvolts = lots\n", 4, "port1.volts");
    expect("name = x\n\n[params]\nl1 = 1e-3\nwidth = 3\n", 5, "params.width");
    expect("name = x\njust words\n", 2, "just words");
    expect("name = x\n[params]\nl1 = 1\nl1 = 2\n", 4, "l1");
    expect("[bogus]\n", 1, "bogus");
}

TEST_CASE("scenario files load from disk")
{
    const auto path = std::filesystem::temp_directory_path() / "quadport_test.scenario";
    {
        std::ofstream out(path);
        out << "# comment line\npreset = buck\nname = from_disk  # trailing comment\n";
    }
    const Scenario s = load_scenario(path);
    CHECK(s.name == "from_disk");
    CHECK(std::get<OpenLoop>(s.control).duties.d1 == doctest::Approx(1.0 / 3.0));
    CHECK(load_scenario_or_preset(path.string()) == s);
    CHECK(load_scenario_or_preset("buck").name == "buck");
    CHECK_THROWS(load_scenario_or_preset("no_such_thing"));
    std::filesystem::remove(path);
}

TEST_CASE("initial states")
{
    const Scenario boost = load_preset("boost");
    const StateVector z = initial_state(boost);
    CHECK(z.v_c1 == 75.0);  // pinned by the source
    CHECK(z.v_c4 == 0.0);

    const Scenario fig7a = load_preset("fig7a");
    const StateVector a = initial_state(fig7a);
    CHECK(a.i_l1 == doctest::Approx(-24.0));
    CHECK(a.i_l3 == doctest::Approx(-40.0));
    CHECK(a.v_c1 == 150.0);
    CHECK(a.v_c4 == 100.0);
    // 20 A load current carried through L2 and the fuel-cell leg.
    CHECK(a.i_l2 == doctest::Approx((20.0 - 0.35 * 40.0) / 1.0));

    CHECK_THROWS_AS(parse_scenario(std::string(kMinimal) + "[initial]\nkind = averaged\n"),
                    ValidationError);
}

TEST_CASE("final configuration applies every event")
{
    Scenario s = load_preset("fig7a");
    ScenarioEvent e;
    e.time = 0.01;
    e.mode = hev::MediumPower{true};
    e.demand_w = 800.0;
    e.ports.push_back({3, ResistiveLoad{12.5}});
    s.events.push_back(e);
    const Scenario f = final_configuration(s);
    CHECK(f.events.empty());
    CHECK(std::get<ClosedLoop>(f.control).mode == HevMode{hev::MediumPower{true}});
    CHECK(std::get<ClosedLoop>(f.control).demand_w == 800.0);
    CHECK(std::get<ResistiveLoad>(f.params.ports[3]).ohms == 12.5);
}
