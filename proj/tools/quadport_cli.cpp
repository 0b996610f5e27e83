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
#include "CLI11.hpp"

#include "quadport/report.hpp"
#include "quadport/runner.hpp"
#include "quadport/scenario.hpp"

#include <fstream>
#include <iostream>

using namespace quadport;

namespace {

int exit_code(RunStatus s) { return static_cast<int>(s); }

int cmd_run(const std::vector<std::string>& names, const std::string& out,
            std::optional<int> steps, const std::string& integrator, unsigned jobs)
{
    RunOptions options;
    options.out_dir = out;
    options.steps_per_period = steps;
    if (!integrator.empty()) options.integrator = integrator_from_string(integrator);

    std::vector<Scenario> scenarios;
    for (const auto& name_or_path : names) scenarios.push_back(load_scenario_or_preset(name_or_path));

    const std::vector<RunResult> results = run_many(scenarios, options, jobs);
    int code = 0;
    for (const RunResult& r : results) {
        std::cout << "== " << r.name << ": " << to_string(r.status);
        if (!r.message.empty()) std::cout << " (" << r.message << ')';
        std::cout << '\n';
        if (r.report) std::cout << format_report(*r.report) << '\n';
        if (code == 0) code = exit_code(r.status);
    }
    return code;
}

int cmd_list()
{
    for (const PresetInfo& p : preset_catalog()) {
        std::cout << p.name << std::string(12 - std::min<std::size_t>(11, p.name.size()), ' ')
                  << p.summary << '\n';
    }
    return 0;
}

int cmd_validate(const std::string& name_or_path)
{
    const Scenario s = load_scenario_or_preset(name_or_path);
    std::cout << s.name << ": valid (" << (s.closed_loop() ? "closed loop" : "open loop") << ", "
              << s.settings.duration << " s, " << s.events.size() << " events)\n";
    return 0;
}

int cmd_show(const std::string& name_or_path)
{
    std::cout << write_scenario(load_scenario_or_preset(name_or_path));
    return 0;
}

int cmd_report(const std::string& csv, const std::string& name_or_path, bool json)
{
    std::ifstream in(csv);
    if (!in) throw std::runtime_error("cannot open " + csv);
    const Waveform w = read_waveform_csv(in);
    const RunReport r = build_report(load_scenario_or_preset(name_or_path), w);
    std::cout << (json ? report_json(r) : format_report(r));
    return r.steady.settled ? 0 : exit_code(RunStatus::NotSettled);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Four-port dc-dc converter simulator"};
    app.require_subcommand(1);

    std::vector<std::string> run_specs;
    std::string out_dir = ".";
    std::optional<int> steps;
    std::string integrator;
    unsigned jobs = 0;
    auto* run = app.add_subcommand("run", "simulate scenario files or presets");
    run->add_option("scenario", run_specs, "scenario file or preset name")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--steps-per-period", steps, "integration steps per switching period");
    run->add_option("--integrator", integrator, "rk4 or exact")
        ->check(CLI::IsMember({"rk4", "exact"}));
    run->add_option("-j,--jobs", jobs, "parallel runs (default: hardware threads)");

    app.add_subcommand("list-presets", "list built-in scenarios");

    std::string validate_spec;
    auto* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("scenario", validate_spec)->required();

    std::string show_spec;
    auto* show = app.add_subcommand("show", "print the fully resolved scenario");
    show->add_option("scenario", show_spec)->required();

    std::string report_csv;
    std::string report_spec;
    bool report_as_json = false;
    auto* report = app.add_subcommand("report", "steady-state report of a recorded waveform");
    report->add_option("waveform", report_csv)->required();
    report->add_option("scenario", report_spec)->required();
    report->add_flag("--json", report_as_json, "emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_code(RunStatus::Validation);
    }

    try {
        if (*run) return cmd_run(run_specs, out_dir, steps, integrator, jobs);
        if (app.got_subcommand("list-presets")) return cmd_list();
        if (*validate) return cmd_validate(validate_spec);
        if (*show) return cmd_show(show_spec);
        if (*report) return cmd_report(report_csv, report_spec, report_as_json);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(RunStatus::Validation);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(RunStatus::Validation);
    } catch (const WindowTooShort& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(RunStatus::Validation);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(RunStatus::IoError);
    }
    return 0;
}
