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
#include "quadport/runner.hpp"

#include "quadport/control.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <memory>
#include <numeric>
#include <thread>

namespace quadport {

std::string_view to_string(RunStatus status)
{
    switch (status) {
    case RunStatus::Ok: return "ok";
    case RunStatus::IoError: return "io-error";
    case RunStatus::Validation: return "validation";
    case RunStatus::Diverged: return "diverged";
    case RunStatus::NotSettled: return "not-settled";
    case RunStatus::Infeasible: return "infeasible";
    }
    return "?";
}

Scenario with_overrides(Scenario s, const RunOptions& options)
{
    if (options.steps_per_period) {
        // Keep the number of samples per period when possible.
        const int samples = s.settings.steps_per_period / s.settings.record_decimation;
        const int steps = std::max(1, *options.steps_per_period);
        s.settings.steps_per_period = steps;
        s.settings.record_decimation = steps % samples == 0
                                           ? steps / samples
                                           : std::gcd(s.settings.record_decimation, steps);
    }
    if (options.integrator) s.settings.integrator = *options.integrator;
    return s;
}

namespace {

struct SourceState {
    std::vector<ScenarioEvent> events;
    std::size_t next_event = 0;
    ControlSpec control;
    std::optional<HevController> controller;
};

}  // namespace

DutySource make_duty_source(const Scenario& scenario)
{
    auto state = std::make_shared<SourceState>();
    state->events = scenario.events;
    state->control = scenario.control;
    if (const auto* c = std::get_if<ClosedLoop>(&scenario.control)) {
        state->controller.emplace(c->controller);
    }

    return [state](PeriodInput& in) {
        const double slack = 1e-9 * in.params->period();
        while (state->next_event < state->events.size() &&
               state->events[state->next_event].time <= in.time + slack) {
            const ScenarioEvent& e = state->events[state->next_event++];
            apply_event(e, *in.params, state->control);
            if (!e.ports.empty()) in.params_changed = true;
        }
        if (const auto* open = std::get_if<OpenLoop>(&state->control)) return open->duties;
        const auto& c = std::get<ClosedLoop>(state->control);
        const ControlSetpoints sp = mode_setpoints(c.mode, c.demand_w, c.supervisor);
        return state->controller->control_period(StateVector::from_vector(in.mean_state), sp,
                                                 *in.params);
    };
}

namespace {

void write_file(const std::filesystem::path& path, const auto& writer)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("error while writing " + path.string());
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    write_file(dir / (r.name + "_waveform.csv"),
               [&](std::ostream& os) { write_waveform_csv(os, r.waveform); });
    if (r.report) {
        write_file(dir / (r.name + "_report.txt"),
                   [&](std::ostream& os) { os << format_report(*r.report); });
        write_file(dir / (r.name + "_report.json"),
                   [&](std::ostream& os) { os << report_json(*r.report); });
    }
}

}  // namespace

RunResult run_scenario(const Scenario& input, const RunOptions& options)
{
    RunResult r;
    r.name = input.name;
    Scenario s;
    try {
        s = with_overrides(input, options);
        s.validate();
    } catch (const ValidationError& e) {
        r.status = RunStatus::Validation;
        r.message = e.what();
        return r;
    }

    SimulationTrace trace;
    try {
        r.waveform = simulate(s.params, make_duty_source(s), s.settings, initial_state(s), &trace);
    } catch (const Diverged& e) {
        r.status = RunStatus::Diverged;
        r.message = e.what();
    } catch (const NumericalFailure& e) {
        r.status = RunStatus::Diverged;
        r.message = e.what();
    } catch (const Infeasible& e) {
        r.status = RunStatus::Infeasible;
        r.message = e.what();
    } catch (const ConfigError& e) {
        r.status = RunStatus::Validation;
        r.message = e.what();
    }
    r.duties = std::move(trace.duties);

    if (r.status == RunStatus::Ok) {
        try {
            r.report = build_report(s, r.waveform);
            if (!r.report->steady.settled) {
                r.status = RunStatus::NotSettled;
                r.message = "waveform did not settle within the measurement tolerance";
            }
        } catch (const WindowTooShort& e) {
            r.status = RunStatus::Validation;
            r.message = e.what();
        }
    }

    if (options.out_dir && !r.waveform.empty()) write_outputs(r, *options.out_dir);
    return r;
}

std::vector<RunResult> run_many(const std::vector<Scenario>& scenarios, const RunOptions& options,
                                unsigned threads)
{
    std::vector<RunResult> results(scenarios.size());
    std::vector<std::exception_ptr> errors(scenarios.size());
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(scenarios.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < scenarios.size(); i = next++) {
            try {
                results[i] = run_scenario(scenarios[i], options);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

}  // namespace quadport
