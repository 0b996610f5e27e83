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

#include "quadport/scenario.hpp"
#include "quadport/simulator.hpp"
#include "quadport/waveform.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace quadport {

/// Mean port quantities over the steady-state window. Power is positive when
/// the port element delivers power into the converter.
struct PowerLedger {
    Vector4 mean_power = Vector4::Zero();
    Vector4 mean_voltage = Vector4::Zero();
    Vector4 mean_current = Vector4::Zero();
    double balance_residual = 0.0;  // sum of mean port powers
    double throughput = 0.0;        // sum of the positive mean port powers
};

PowerLedger power_ledger(const SteadyStateReport& steady);

struct ComparisonRow {
    std::string quantity;
    std::string basis;  // what the prediction comes from
    double predicted = 0.0;
    double measured = 0.0;

    double abs_error() const;
    /// nullopt when the prediction is zero.
    std::optional<double> rel_error() const;
};

struct RunReport {
    std::string scenario;
    std::string integrator;
    int steps_per_period = 0;
    SteadyStateReport steady;
    PowerLedger ledger;
    std::array<double, 3> flux_residual{};  // L * delta i over the final period
    std::array<double, 3> flux_limit{};     // 1e-3 * rail voltage * T_s
    std::vector<ComparisonRow> comparisons;

    bool flux_balanced() const;
};

/// Deterministic function of the scenario and the recorded waveform. Throws
/// WindowTooShort when the waveform is shorter than the measurement needs.
RunReport build_report(const Scenario& scenario, const Waveform& waveform);

std::string format_report(const RunReport& report);
std::string report_json(const RunReport& report);

// Waveform CSV ----------------------------------------------------------------------
//
// Columns: time_s, i_l1_a, i_l2_a, i_l3_a, v_c1_v .. v_c4_v, p_port1_w ..
// p_port4_w, leg1_mode, leg2_mode, e_port1_j .. e_port4_j. Numbers are written
// in shortest round-trip form, so reading a file back reproduces the waveform
// bit for bit.

void write_waveform_csv(std::ostream& os, const Waveform& waveform);
Waveform read_waveform_csv(std::istream& is);

}  // namespace quadport
