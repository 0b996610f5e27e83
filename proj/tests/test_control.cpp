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

#include "quadport/control.hpp"
#include "quadport/simulator.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace quadport;

namespace {

// y' = (u - y) / tau, advanced exactly over dt with u held.
struct FirstOrderPlant {
    double tau = 1e-3;
    double y = 0.0;
    void advance(double u, double dt) { y = u + (y - u) * std::exp(-dt / tau); }
};

double overshoot_of(PiController pi, double ref, double dt, int steps)
{
    FirstOrderPlant plant;
    double peak = 0.0;
    for (int k = 0; k < steps; ++k) {
        plant.advance(pi.step(ref - plant.y, dt), dt);
        peak = std::max(peak, plant.y);
    }
    return peak - ref;
}

ConverterParams hev_params()
{
    ConverterParams p;
    p.ports = {CapacitorOnly{1.0, 150.0}, VoltageSource{25.0}, VoltageSource{35.0},
               ResistiveLoad{5.0}};
    return p;
}

StateVector nominal_state()
{
    StateVector x;
    x.v_c1 = 150.0;
    x.v_c2 = 25.0;
    x.v_c3 = 35.0;
    x.v_c4 = 100.0;
    return x;
}

}  // namespace

TEST_CASE("PI step arithmetic")
{
    PiController pi{2.0, 100.0};
    CHECK(pi.step(1.0, 0.01) == doctest::Approx(3.0));
    CHECK(pi.integral_state == doctest::Approx(1.0));
    CHECK(pi.step(-0.5, 0.01) == doctest::Approx(-1.0 + 0.5));

    SUBCASE("integration holds while saturated in the error direction")
    {
        PiController sat{1.0, 100.0, 0.0, -2.0, 2.0};
        CHECK(sat.step(5.0, 0.01) == 2.0);
        CHECK(sat.integral_state == 0.0);
        // Error reversal unwinds immediately.
        CHECK(sat.step(-1.0, 0.01) == doctest::Approx(-2.0));
        CHECK(sat.integral_state == doctest::Approx(-1.0));
    }
    SUBCASE("set_limits clamps the integral")
    {
        PiController p{0.0, 1.0, 10.0};
        p.set_limits(-1.0, 3.0);
        CHECK(p.integral_state == 3.0);
        p.set_limits(5.0, 4.0);
        CHECK(p.hi == 5.0);
    }
}

TEST_CASE("PI settles a first-order plant")
{
    const double dt = 1e-5;
    PiController pi{2.0, 2000.0};
    FirstOrderPlant plant;
    for (int k = 0; k < 500; ++k) plant.advance(pi.step(1.0 - plant.y, dt), dt);
    CHECK(std::abs(plant.y - 1.0) <= 0.01);
}

TEST_CASE("anti-windup bounds the overshoot after saturation")
{
    const double dt = 1e-5;
    const double free = overshoot_of(PiController{2.0, 2000.0}, 1.0, dt, 3000);
    PiController limited{2.0, 2000.0, 0.0, -1.3, 1.3};
    const double clamped = overshoot_of(limited, 1.0, dt, 3000);
    CHECK(clamped <= std::max(2.0 * free, 0.01));

    // Without conditional integration the same limits overshoot further.
    struct Naive {
        double integral = 0.0;
    } naive;
    FirstOrderPlant plant;
    double peak = 0.0;
    for (int k = 0; k < 3000; ++k) {
        const double e = 1.0 - plant.y;
        naive.integral += 2000.0 * e * dt;
        plant.advance(std::clamp(2.0 * e + naive.integral, -1.3, 1.3), dt);
        peak = std::max(peak, plant.y);
    }
    CHECK(clamped < peak - 1.0);
}

TEST_CASE("setpoint table")
{
    SUBCASE("high power shares 2 kW between fuel cell and battery")
    {
        const auto sp = mode_setpoints(hev::HighPower{false}, 2000.0);
        CHECK(sp.i_fc_ref == 40.0);
        CHECK(sp.i_batt_ref == doctest::Approx(24.0));
        CHECK(sp.v_dc_ref == 100.0);
        REQUIRE(sp.v_uc_ref.has_value());
        CHECK(*sp.v_uc_ref == 150.0);
        const auto assist = mode_setpoints(hev::HighPower{true}, 2000.0);
        CHECK(assist.i_batt_ref == doctest::Approx(18.0));
        CHECK_FALSE(assist.v_uc_ref.has_value());
    }
    SUBCASE("medium power")
    {
        const auto idle = mode_setpoints(hev::MediumPower{false}, 1000.0);
        CHECK(idle.i_batt_ref == 0.0);
        CHECK(idle.i_fc_ref == doctest::Approx(1000.0 / 35.0));
        const auto charge = mode_setpoints(hev::MediumPower{true}, 1000.0);
        CHECK(charge.i_batt_ref == -10.0);
        CHECK(charge.i_fc_ref == doctest::Approx(1250.0 / 35.0));
    }
    SUBCASE("low power")
    {
        CHECK(mode_setpoints(hev::LowPower{false}, 500.0).i_batt_ref == doctest::Approx(20.0));
        CHECK(mode_setpoints(hev::LowPower{true}, 500.0).i_batt_ref == doctest::Approx(15.0));
        CHECK(mode_setpoints(hev::LowPower{false}, 500.0).i_fc_ref == 0.0);
    }
    SUBCASE("regenerative braking")
    {
        const auto sp = mode_setpoints(hev::RegenerativeBraking{false}, -375.0);
        CHECK(sp.i_batt_ref == -15.0);
        CHECK(sp.i_fc_ref == 0.0);
        CHECK_FALSE(mode_setpoints(hev::RegenerativeBraking{true}, -1000.0).v_uc_ref.has_value());
    }
    SUBCASE("names")
    {
        CHECK(mode_name(make_mode("low_power", true)) == "low_power");
        CHECK(mode_flag(make_mode("regenerative_braking", true)));
        CHECK_THROWS_AS(make_mode("cruise", false), ConfigError);
    }
}

TEST_CASE("derived gains")
{
    const ConverterParams p = hev_params();
    const ControlGains g = ControlGains::derive(p);
    const double wc = 2.0 * std::numbers::pi * 50e3 / 20.0;
    CHECK(g.battery.kp == doctest::Approx(0.72e-3 * wc));
    CHECK(g.battery.ki == doctest::Approx(0.72e-3 * wc * wc / 5.0));
    CHECK(g.voltage.kp == doctest::Approx(470e-6 * wc / 10.0));
    CHECK(g.uc_trim.kp > 0.0);

    ConverterParams no_uc = p;
    no_uc.ports[0] = VoltageSource{150.0};
    CHECK(ControlGains::derive(no_uc).uc_trim == ChannelGains{});
}

TEST_CASE("zero gains reduce the controller to feedforward")
{
    const ConverterParams p = hev_params();
    ControllerConfig cfg;
    HevController c(cfg);
    const auto sp = mode_setpoints(hev::HighPower{false}, 2000.0);
    const DutyCommand d = c.control_period(nominal_state(), sp, p);
    const DutyCommand ff = c.feedforward(sp, p, nominal_state());
    CHECK(c.region() == TransferRegion::Buck);
    CHECK(d.d1 == doctest::Approx(1.0 / 3.0));
    CHECK(d.d3 == doctest::Approx(1.0 / 6.0));
    CHECK(d.d6 == doctest::Approx(0.35));
    CHECK(d.d4 == 0.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(d.as_array()[i] == doctest::Approx(ff.as_array()[i]));
}

TEST_CASE("transfer region follows the rail ratio with hysteresis")
{
    ConverterParams p = hev_params();
    ControllerConfig cfg;
    HevController c(cfg);
    ControlSetpoints sp;
    sp.v_uc_ref = 100.0;
    sp.i_batt_ref = 0.0;
    sp.i_fc_ref = 10.0;
    auto at = [&](double v1) {
        StateVector x = nominal_state();
        x.v_c1 = v1;
        c.control_period(x, sp, p);
        return c.region();
    };
    CHECK(at(105.0) == TransferRegion::NearUnity);
    CHECK(at(111.0) == TransferRegion::NearUnity);
    CHECK(at(113.0) == TransferRegion::Buck);
    CHECK(at(111.0) == TransferRegion::Buck);
    CHECK(at(85.0) == TransferRegion::Boost);
    CHECK(at(95.0) == TransferRegion::NearUnity);
}

TEST_CASE("infeasible setpoints")
{
    const ConverterParams p = hev_params();
    SupervisorConfig sup;
    sup.v_dc = 30.0;  // below the 35 V fuel cell
    HevController c(ControllerConfig{});
    const auto sp = mode_setpoints(hev::MediumPower{false}, 1000.0, sup);
    CHECK_THROWS_AS(c.control_period(nominal_state(), sp, p), SetpointInfeasible);
    CHECK_THROWS_AS(c.control_period(nominal_state(), sp, p), Infeasible);
}

TEST_CASE("duties stay valid for arbitrary measurements")
{
    const ConverterParams p = hev_params();
    ControllerConfig cfg;
    cfg.gains = ControlGains::derive(p);
    HevController c(cfg);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const auto sp = mode_setpoints(hev::HighPower{false}, 2000.0);
    for (int k = 0; k < 5000; ++k) {
        StateVector x;
        x.i_l1 = 1e3 * u(rng);
        x.i_l2 = 1e3 * u(rng);
        x.i_l3 = 1e3 * u(rng);
        x.v_c1 = 200.0 * u(rng);
        x.v_c2 = 100.0 * u(rng);
        x.v_c3 = 100.0 * u(rng);
        x.v_c4 = (k % 7 == 0) ? 1e9 : 300.0 * u(rng);
        const DutyCommand d = c.control_period(x, sp, p);
        CHECK(d.is_valid());
        for (double v : d.as_array()) CHECK(std::isfinite(v));
        for (double v : {d.d3, d.d6}) {
            CHECK(v >= cfg.window.lo);
            CHECK(v <= cfg.window.hi);
        }
        for (double v : {d.d1, d.d4}) CHECK((v == 0.0 || (v >= cfg.window.lo && v <= cfg.window.hi)));
    }
}

TEST_CASE("closed loop recovers from a perturbed start")
{
    const ConverterParams p = hev_params();
    ControllerConfig cfg;
    cfg.gains = ControlGains::derive(p);
    HevController c(cfg);
    const auto sp = mode_setpoints(hev::HighPower{false}, 2000.0);

    StateVector x0 = nominal_state();
    x0.v_c4 = 90.0;
    x0.i_l1 = -10.0;
    x0.i_l3 = -30.0;
    SimulationSettings s;
    s.duration = 0.02;
    const Waveform w = simulate(
        p,
        [&](PeriodInput& in) {
            return c.control_period(StateVector::from_vector(in.mean_state), sp, *in.params);
        },
        s, x0);
    const SteadyStateReport r = measure_steady_state(w, p.f_sw, 50);
    CHECK(r.settled);
    CHECK(r.mean_port_voltage(3) == doctest::Approx(100.0).epsilon(0.01));
    CHECK(r.mean_port_current(1) == doctest::Approx(24.0).epsilon(0.01));
    CHECK(r.mean_port_current(2) == doctest::Approx(40.0).epsilon(0.01));
}
