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

// =============================================================================
// Time-domain engine
// =============================================================================
// Each switching period is split into constant-topology segments by the PWM
// schedule. Within a segment the dynamics are affine, so integration runs on a
// uniform grid of steps_per_period points with extra splits at every switching
// instant; no step ever spans two switch configurations.
// =============================================================================

#include "quadport/duty.hpp"
#include "quadport/topology.hpp"
#include "quadport/waveform.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace quadport {

class Diverged : public std::runtime_error {
public:
    Diverged(double time, const std::string& what) : std::runtime_error(what), time_(time) {}
    double time() const { return time_; }

private:
    double time_;
};

class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Integrator { FixedStepRK4, ExactPiecewise };

std::string_view to_string(Integrator integrator);
Integrator integrator_from_string(std::string_view text);

struct SimulationSettings {
    double duration = 0.02;
    int steps_per_period = 1000;
    Integrator integrator = Integrator::FixedStepRK4;
    int record_decimation = 10;
    /// When positive, only the final `record_window` seconds are recorded at
    /// the decimated rate; earlier samples are kept at period boundaries only.
    double record_window = 0.0;

    /// Throws ConfigError.
    void validate() const;

    friend bool operator==(const SimulationSettings&, const SimulationSettings&) = default;
};

struct ModeBoundary {
    double offset = 0.0;  // seconds from the start of the period
    LegMode mode = LegMode::A;
};

struct ModeSchedule {
    double period = 0.0;
    std::vector<ModeBoundary> leg1;
    std::vector<ModeBoundary> leg2;

    struct Segment {
        double begin = 0.0;
        double end = 0.0;
        SwitchConfig config;
    };

    /// Both legs merged into constant-configuration segments covering [0, period].
    std::vector<Segment> segments() const;
};

/// Partitions one period per leg in the order A -> B -> C with durations
/// d_a T, d_b T, d_c T. Zero-length modes are omitted.
ModeSchedule build_schedule(const DutyCommand& duties, double f_sw);

/// State-transition pair of a constant-topology interval:
/// x(dt) = phi x0 + gamma.
struct SegmentPropagator {
    Matrix7 phi = Matrix7::Identity();
    Vector7 gamma = Vector7::Zero();
};

/// Exact propagator over dt, via the exponential of the augmented matrix
/// [[A, b], [0, 0]]. Works for singular A. Throws NumericalFailure.
SegmentPropagator exact_propagator(const LinearDynamics& dyn, double dt);

/// x(dt) = e^{A dt} x0 + (integral_0^dt e^{A s} ds) b.
StateVector exact_segment_solution(const LinearDynamics& dyn, const StateVector& x0, double dt);

/// One classical Runge-Kutta step on the affine system.
Vector7 rk4_step(const LinearDynamics& dyn, const Vector7& x, double dt);

/// Handed to the duty source at the start of each period.
struct PeriodInput {
    std::size_t index = 0;
    double time = 0.0;
    Vector7 state = Vector7::Zero();
    Vector7 mean_state = Vector7::Zero();  // average over the previous period; `state` for the first
    ConverterParams* params = nullptr;  // may be modified; set params_changed when so
    bool params_changed = false;
};

/// Queried once per switching period; the returned duties latch for the period.
using DutySource = std::function<DutyCommand(PeriodInput&)>;

struct StepRecord {
    double begin = 0.0;
    double end = 0.0;
    SwitchConfig config;
};

/// Optional diagnostics collected during a run.
struct SimulationTrace {
    bool record_steps = false;
    std::vector<StepRecord> steps;
    std::vector<std::pair<double, DutyCommand>> duties;  // (period start, latched duties)
};

Waveform simulate(ConverterParams params, const DutySource& duties_source,
                  const SimulationSettings& settings, const StateVector& initial,
                  SimulationTrace* trace = nullptr);

Waveform simulate(const ConverterParams& params, const DutyCommand& duties,
                  const SimulationSettings& settings, const StateVector& initial,
                  SimulationTrace* trace = nullptr);

// Steady-state measurement ------------------------------------------------------

struct SettleTolerance {
    double relative = 0.01;
    double volts_floor = 0.01;
    double amps_floor = 0.01;

    friend bool operator==(const SettleTolerance&, const SettleTolerance&) = default;
};

struct SteadyStateReport {
    double window_start = 0.0;
    double window_end = 0.0;
    int n_periods = 0;
    Vector7 mean_state = Vector7::Zero();
    Vector4 mean_port_power = Vector4::Zero();
    Vector4 mean_port_voltage = Vector4::Zero();
    Vector4 mean_port_current = Vector4::Zero();  // mean power / mean voltage
    Vector7 periodicity_error = Vector7::Zero();  // max |x(t) - x(t - T)| over the window
    Vector7 periodicity_tolerance = Vector7::Zero();
    bool settled = false;
};

/// Averages over the final `n_periods` whole periods of the waveform. Throws
/// WindowTooShort unless the waveform covers 2 n_periods periods.
SteadyStateReport measure_steady_state(const Waveform& waveform, double f_sw, int n_periods,
                                       SettleTolerance tolerance = {});

}  // namespace quadport
