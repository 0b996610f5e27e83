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

#include "quadport/duty.hpp"

#include <cmath>
#include <random>

using namespace quadport;

TEST_CASE("port gains")
{
    DutyCommand d;
    d.d1 = 0.0;
    d.d3 = 25.0 / 150.0;
    d.d2 = 1.0 - d.d3;
    d.d4 = 0.0;
    d.d6 = 0.35;
    d.d5 = 0.65;
    const auto v = predict_port_voltages(d, 150.0, 100.0);
    CHECK(v.v2 == doctest::Approx(25.0).epsilon(1e-15));
    CHECK(v.v3 == doctest::Approx(35.0).epsilon(1e-15));

    DutyCommand full{0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
    CHECK(predict_port_voltages(full, 123.4, 50.0).v2 == 123.4);
}

TEST_CASE("generic leg solution agrees with the port gain of leg 1")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double da = u(rng) * 0.5;
        const double dc = u(rng) * (1.0 - da);
        const double db = 1.0 - da - dc;
        const double vc = 10.0 + 200.0 * u(rng);
        const LegSteadyState leg = leg_steady_state(da, db, dc, vc);
        const DutyCommand d{da, db, dc, 1.0, 0.0, 0.0};
        CHECK(leg.v_b == predict_port_voltages(d, vc, 0.0).v2);
        CHECK(leg.v_a == doctest::Approx((1.0 - da) * vc).epsilon(1e-13));
        // Flux balance on both leg inductors vanishes at the predicted voltages.
        const double flux_a = -leg.v_a * da + (db + dc) * (vc - leg.v_a);
        const double flux_b = -leg.v_b * (da + db) + dc * (vc - leg.v_b);
        CHECK(std::abs(flux_a) < 1e-12 * vc);
        CHECK(std::abs(flux_b) < 1e-12 * vc);
    }
}

TEST_CASE("gain is homogeneous in the rails and increasing in d3")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        DutyCommand d{0.1, 0.0, u(rng) * 0.9, 0.2, 0.0, u(rng) * 0.8};
        const double v1 = 1.0 + 200.0 * u(rng);
        const double v4 = 1.0 + 200.0 * u(rng);
        const double k = 0.1 + 10.0 * u(rng);
        const auto base = predict_port_voltages(d, v1, v4);
        const auto scaled = predict_port_voltages(d, k * v1, k * v4);
        CHECK(scaled.v2 == doctest::Approx(k * base.v2).epsilon(1e-14));
        CHECK(scaled.v3 == doctest::Approx(k * base.v3).epsilon(1e-14));

        DutyCommand higher = d;
        higher.d3 = d.d3 + 1e-6;
        CHECK(predict_port_voltages(higher, v1, v4).v2 > base.v2);
    }
}

TEST_CASE("transfer balance residual")
{
    CHECK(check_transfer_balance({0.0, 1.0, 0.0, 0.0, 1.0, 0.0}, 100.0, 100.0) == 0.0);
    CHECK(check_transfer_balance({0.0, 1.0, 0.0, 0.25, 0.75, 0.0}, 75.0, 100.0) == 0.0);
    CHECK(std::abs(check_transfer_balance({1.0 / 3.0, 2.0 / 3.0, 0.0, 0.0, 1.0, 0.0}, 150.0,
                                          100.0)) < 1e-12);
    CHECK(check_transfer_balance({0.5, 0.5, 0.0, 0.0, 1.0, 0.0}, 150.0, 100.0) ==
          doctest::Approx(-25.0));
}

TEST_CASE("clamp window")
{
    CHECK(clamp_duty(0.02) == 0.05);
    CHECK(clamp_duty(0.50) == 0.50);
    CHECK(clamp_duty(0.99) == 0.95);
    CHECK(clamp_duty(0.0, {}, true) == 0.0);
    CHECK(clamp_duty(0.0, {}, false) == 0.05);
    CHECK(clamp_duty(0.01, {}, true) == 0.05);
    CHECK(clamp_duty(0.3, {0.1, 0.2}) == 0.2);
}

TEST_CASE("duty command validation names the row constraint")
{
    const DutyCommand bad{0.3, 0.3, 0.3, 0.0, 1.0, 0.0};
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("Da + Db + Dc = 1"), ConfigError);
    CHECK_FALSE(bad.is_valid());
    CHECK_THROWS_AS((DutyCommand{-0.1, 1.1, 0.0, 0.0, 1.0, 0.0}.validate()), ConfigError);
    CHECK((DutyCommand{0.2, 0.3, 0.5, 0.0, 1.0, 0.0}.is_valid()));
}

TEST_CASE("solve_duties reference cases")
{
    SUBCASE("buck transfer with the HEV rail voltages")
    {
        const DutyCommand d = solve_duties({150.0, 25.0, 35.0, 100.0}, policy::BuckPreferred{});
        CHECK(d.d1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
        CHECK(d.d3 == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
        CHECK(d.d4 == 0.0);
        CHECK(d.d6 == doctest::Approx(0.35).epsilon(1e-15));
        CHECK(d.d2 == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(d.d5 == doctest::Approx(0.65).epsilon(1e-14));
        CHECK(d.is_valid());
    }
    SUBCASE("fixed d1 near unity")
    {
        const DutyCommand d = solve_duties({100.0, 25.0, 35.0, 100.0}, policy::FixedD1{0.2});
        CHECK(d.d1 == 0.2);
        CHECK(d.d4 == doctest::Approx(0.2).epsilon(1e-14));
    }
    SUBCASE("boost transfer")
    {
        const DutyCommand d = solve_duties({75.0, 25.0, 35.0, 100.0}, policy::BoostPreferred{});
        CHECK(d.d1 == 0.0);
        CHECK(d.d4 == doctest::Approx(0.25).epsilon(1e-15));
    }
    SUBCASE("equal rails degenerate to d1 = d4 = 0 under both preferences")
    {
        for (const DutyPolicy& pol : {DutyPolicy{policy::BoostPreferred{}},
                                      DutyPolicy{policy::BuckPreferred{}}}) {
            const DutyCommand d = solve_duties({100.0, 25.0, 35.0, 100.0}, pol);
            CHECK(d.d1 == 0.0);
            CHECK(d.d4 == 0.0);
        }
    }
    SUBCASE("infeasible targets")
    {
        CHECK_THROWS_AS(solve_duties({100.0, 150.0, 35.0, 100.0}, policy::BuckPreferred{}),
                        Infeasible);
        CHECK_THROWS_AS(solve_duties({100.0, 25.0, 135.0, 100.0}, policy::BuckPreferred{}),
                        Infeasible);
        // d1 = 0.8 and d3 = 0.5 leave negative slack.
        CHECK_THROWS_AS(solve_duties({500.0, 250.0, 35.0, 100.0}, policy::BuckPreferred{}),
                        Infeasible);
        // d1 = 0.02 falls below the driver window.
        CHECK_THROWS_AS(solve_duties({102.0, 25.0, 35.0, 100.0}, policy::BuckPreferred{}),
                        Infeasible);
        // d6 = 0.99 above the window.
        CHECK_THROWS_AS(solve_duties({150.0, 25.0, 99.0, 100.0}, policy::BuckPreferred{}),
                        Infeasible);
        // fixed d1 cannot reach a much lower dc link.
        CHECK_THROWS_AS(solve_duties({150.0, 25.0, 35.0, 100.0}, policy::FixedD1{0.2}),
                        Infeasible);
        CHECK_THROWS_AS(solve_duties({0.0, 0.0, 35.0, 100.0}, policy::BuckPreferred{}),
                        Infeasible);
    }
}

TEST_CASE("solve_duties round trip on random feasible targets")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int solved = 0;
    for (int i = 0; i < 2000; ++i) {
        const double v1 = 20.0 + 200.0 * u(rng);
        const double v4 = 20.0 + 200.0 * u(rng);
        const PortTargets t{v1, v1 * (0.05 + 0.4 * u(rng)), v4 * (0.05 + 0.4 * u(rng)), v4};
        DutyPolicy pol = policy::BuckPreferred{};
        if (i % 3 == 1) pol = policy::BoostPreferred{};
        if (i % 3 == 2) pol = policy::FixedD1{0.2};
        DutyCommand d;
        try {
            d = solve_duties(t, pol);
        } catch (const Infeasible&) {
            continue;
        }
        ++solved;
        CHECK(d.is_valid());
        const auto v = predict_port_voltages(d, t.v1, t.v4);
        CHECK(v.v2 == doctest::Approx(t.v2).epsilon(1e-14));
        CHECK(v.v3 == doctest::Approx(t.v3).epsilon(1e-14));
        CHECK(std::abs(check_transfer_balance(d, t.v1, t.v4)) <= 1e-13 * std::max(t.v1, t.v4));
    }
    CHECK(solved > 500);
}
