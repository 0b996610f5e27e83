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

#include "quadport/report.hpp"
#include "quadport/scenario.hpp"
#include "quadport/simulator.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace quadport {

/// Process exit codes of the command-line runner.
enum class RunStatus : int {
    Ok = 0,
    IoError = 1,
    Validation = 2,
    Diverged = 3,
    NotSettled = 4,
    Infeasible = 5,
};

std::string_view to_string(RunStatus status);

struct RunOptions {
    std::optional<int> steps_per_period;
    std::optional<Integrator> integrator;
    std::optional<std::filesystem::path> out_dir;  // write CSV and reports when set
};

struct RunResult {
    std::string name;
    RunStatus status = RunStatus::Ok;
    std::string message;
    Waveform waveform;
    std::optional<RunReport> report;
    std::vector<std::pair<double, DutyCommand>> duties;  // commanded, per period
};

/// Scenario with the command-line overrides applied.
Scenario with_overrides(Scenario scenario, const RunOptions& options);

/// Per-period duty source for a scenario: fixed or event-switched duties in
/// open loop, the HEV controller in closed loop. Events latch at the first
/// period boundary at or after their time.
DutySource make_duty_source(const Scenario& scenario);

/// Runs one scenario. Simulation failures are reported through `status`; I/O
/// failures while writing outputs throw std::runtime_error naming the path.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

/// Runs independent scenarios on up to `threads` worker threads. Results are
/// in input order and identical to running them one after another.
std::vector<RunResult> run_many(const std::vector<Scenario>& scenarios,
                                const RunOptions& options = {}, unsigned threads = 0);

}  // namespace quadport
