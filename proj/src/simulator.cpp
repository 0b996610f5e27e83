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
#include "quadport/simulator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace quadport {

std::string_view to_string(Integrator integrator)
{
    switch (integrator) {
    case Integrator::FixedStepRK4: return "rk4";
    case Integrator::ExactPiecewise: return "exact";
    }
    return "?";
}

Integrator integrator_from_string(std::string_view text)
{
    if (text == "rk4") return Integrator::FixedStepRK4;
    if (text == "exact") return Integrator::ExactPiecewise;
    throw ConfigError("unknown integrator '" + std::string(text) + "' (expected rk4 or exact)");
}

void SimulationSettings::validate() const
{
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw ConfigError("simulation duration must be > 0");
    }
    if (steps_per_period < 100) throw ConfigError("steps_per_period must be >= 100");
    if (record_decimation < 1) throw ConfigError("record_decimation must be >= 1");
    if (!(record_window >= 0.0) || !std::isfinite(record_window)) {
        throw ConfigError("record_window must be >= 0");
    }
    if (steps_per_period % record_decimation != 0) {
        throw ConfigError("steps_per_period must be a multiple of record_decimation");
    }
}

// Scheduling ------------------------------------------------------------------

namespace {

std::vector<ModeBoundary> leg_boundaries(double da, double db, double dc, double period)
{
    std::vector<ModeBoundary> out;
    double offset = 0.0;
    const std::array<std::pair<double, LegMode>, 3> parts{
        {{da, LegMode::A}, {db, LegMode::B}, {dc, LegMode::C}}};
    for (const auto& [d, mode] : parts) {
        if (d > 0.0 && offset < period) out.push_back({offset, mode});
        offset += d * period;
    }
    return out;
}

LegMode mode_at(const std::vector<ModeBoundary>& leg, double offset)
{
    LegMode mode = leg.front().mode;
    for (const auto& b : leg) {
        if (b.offset <= offset) mode = b.mode;
    }
    return mode;
}

}  // namespace

std::vector<ModeSchedule::Segment> ModeSchedule::segments() const
{
    std::vector<double> cuts;
    for (const auto& b : leg1) cuts.push_back(b.offset);
    for (const auto& b : leg2) cuts.push_back(b.offset);
    cuts.push_back(period);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Segment> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double begin = cuts[i];
        out.push_back({begin, cuts[i + 1], {mode_at(leg1, begin), mode_at(leg2, begin)}});
    }
    return out;
}

ModeSchedule build_schedule(const DutyCommand& duties, double f_sw)
{
    duties.validate();
    if (!(f_sw > 0.0)) throw ConfigError("f_sw must be positive");
    ModeSchedule s;
    s.period = 1.0 / f_sw;
    s.leg1 = leg_boundaries(duties.d1, duties.d2, duties.d3, s.period);
    s.leg2 = leg_boundaries(duties.d4, duties.d5, duties.d6, s.period);
    return s;
}

// Segment kernels ---------------------------------------------------------------

SegmentPropagator exact_propagator(const LinearDynamics& dyn, double dt)
{
    using Matrix8 = Eigen::Matrix<double, 8, 8>;
    Matrix8 m = Matrix8::Zero();
    m.topLeftCorner<7, 7>() = dyn.a_matrix * dt;
    m.topRightCorner<7, 1>() = dyn.b_vector * dt;
    const Matrix8 e = m.exp();
    if (!e.allFinite()) throw NumericalFailure("matrix exponential did not produce finite values");
    SegmentPropagator p;
    p.phi = e.topLeftCorner<7, 7>();
    p.gamma = e.topRightCorner<7, 1>();
    return p;
}

StateVector exact_segment_solution(const LinearDynamics& dyn, const StateVector& x0, double dt)
{
    if (!(dt > 0.0)) throw ConfigError("segment length must be positive");
    const SegmentPropagator p = exact_propagator(dyn, dt);
    return StateVector::from_vector(p.phi * x0.to_vector() + p.gamma);
}

Vector7 rk4_step(const LinearDynamics& dyn, const Vector7& x, double dt)
{
    const Vector7 k1 = dyn.derivative(x);
    const Vector7 k2 = dyn.derivative(x + 0.5 * dt * k1);
    const Vector7 k3 = dyn.derivative(x + 0.5 * dt * k2);
    const Vector7 k4 = dyn.derivative(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Engine --------------------------------------------------------------------------

namespace {

class Stepper {
public:
    Stepper(Integrator integrator, const ConverterParams& params) : integrator_(integrator)
    {
        reset(params);
    }

    void reset(const ConverterParams& params)
    {
        for (int i = 0; i < 9; ++i) {
            dynamics_[static_cast<std::size_t>(i)] =
                derive_dynamics(SwitchConfig::from_index(i), params);
        }
        propagators_.clear();
    }

    const LinearDynamics& dynamics(SwitchConfig c) const
    {
        return dynamics_[static_cast<std::size_t>(c.index())];
    }

    Vector7 advance(SwitchConfig c, const Vector7& x, double dt)
    {
        if (integrator_ == Integrator::FixedStepRK4) return rk4_step(dynamics(c), x, dt);
        const SegmentPropagator& p = propagator(c, dt);
        return p.phi * x + p.gamma;
    }

private:
    const SegmentPropagator& propagator(SwitchConfig c, double dt)
    {
        const std::uint64_t key = std::bit_cast<std::uint64_t>(dt) * 9u +
                                  static_cast<std::uint64_t>(c.index());
        auto it = propagators_.find(key);
        if (it != propagators_.end()) return it->second;
        // Closed-loop duties create fresh partial-step lengths every period.
        if (propagators_.size() > 4096) propagators_.clear();
        return propagators_.emplace(key, exact_propagator(dynamics(c), dt)).first->second;
    }

    Integrator integrator_;
    std::array<LinearDynamics, 9> dynamics_;
    std::unordered_map<std::uint64_t, SegmentPropagator> propagators_;
};

std::string describe_divergence(double t, const Vector7& x)
{
    std::ostringstream os;
    os.precision(9);
    os << "simulation diverged at t = " << t << " s (state:";
    for (int i = 0; i < 7; ++i) os << ' ' << x(i);
    os << ')';
    return os.str();
}

}  // namespace

Waveform simulate(ConverterParams params, const DutySource& duties_source,
                  const SimulationSettings& settings, const StateVector& initial,
                  SimulationTrace* trace)
{
    settings.validate();
    params.validate();
    if (!initial.all_finite()) throw ConfigError("initial state must be finite");

    const int n = settings.steps_per_period;
    const double period = params.period();
    const double h = period / n;
    const auto total_steps =
        std::max<std::int64_t>(1, std::llround(settings.duration / h));

    Stepper stepper(settings.integrator, params);
    Vector7 x = initial.to_vector();
    pin_sources(x, params);

    Waveform wf;
    // Steps before this index are recorded at period boundaries only.
    std::int64_t fine_from = 0;
    if (settings.record_window > 0.0) {
        fine_from = std::max<std::int64_t>(
            0, total_steps - std::llround(std::ceil(settings.record_window / period)) * n);
    }
    wf.reserve(static_cast<std::size_t>((total_steps - fine_from) / settings.record_decimation +
                                        fine_from / n + 2));
    Vector4 energy = Vector4::Zero();

    std::int64_t step = 0;
    bool first = true;
    Vector7 mean = x;
    Vector4 p_end = Vector4::Zero();
    SwitchConfig p_config{};
    bool p_valid = false;
    Vector7 running = Vector7::Zero();
    SwitchConfig last_config{};

    for (std::size_t k = 0; step < total_steps; ++k) {
        const double t0 = static_cast<double>(k) * period;

        PeriodInput input;
        input.index = k;
        input.time = t0;
        input.state = x;
        input.mean_state = mean;
        input.params = &params;
        const DutyCommand duties = duties_source(input);
        if (input.params_changed) {
            params.validate();
            stepper.reset(params);
            pin_sources(x, params);
            p_valid = false;
        }
        if (trace != nullptr) trace->duties.emplace_back(t0, duties);
        std::vector<ModeSchedule::Segment> segments = build_schedule(duties, params.f_sw).segments();
        // Switching instants within rounding of a grid point land on it, so
        // no sliver step of ~1e-21 s is taken.
        auto snap = [&](double& v) {
            const double q = std::round(v / h);
            const double g = q >= n ? period : q * h;
            if (std::abs(v - g) <= 1e-9 * h) v = g;
        };
        for (auto& sg : segments) {
            snap(sg.begin);
            snap(sg.end);
        }
        std::erase_if(segments, [](const auto& sg) { return !(sg.end > sg.begin); });

        if (first) {
            last_config = segments.front().config;
            const LinearDynamics& dyn = stepper.dynamics(last_config);
            wf.push_back(0.0, x, last_config, dyn.port_powers(x), energy);
            first = false;
        }

        std::size_t seg = 0;
        for (int j = 0; j < n && step < total_steps; ++j) {
            const double a = j * h;
            const double b = (j + 1 == n) ? period : (j + 1) * h;
            double s = a;
            while (s < b) {
                while (seg + 1 < segments.size() && segments[seg].end <= s) ++seg;
                const double e = std::min(b, segments[seg].end);
                const SwitchConfig config = segments[seg].config;
                const LinearDynamics& dyn = stepper.dynamics(config);
                const double dt = e - s;

                const Vector4 p_begin =
                    (p_valid && p_config == config) ? p_end : dyn.port_powers(x);
                const Vector7 x_begin = x;
                x = stepper.advance(config, x, dt);
                running += 0.5 * dt * (x_begin + x);
                if (!x.allFinite()) {
                    throw Diverged(t0 + e, describe_divergence(t0 + e, x));
                }
                p_end = dyn.port_powers(x);
                p_config = config;
                p_valid = true;
                energy += 0.5 * dt * (p_begin + p_end);
                if (trace != nullptr && trace->record_steps) {
                    trace->steps.push_back({t0 + s, t0 + e, config});
                }
                last_config = config;
                s = e;
            }
            ++step;
            const bool on_grid = step >= fine_from ? step % settings.record_decimation == 0
                                                   : step % n == 0;
            if (on_grid || step == total_steps) {
                const double t = static_cast<double>(step) * h;
                wf.push_back(t, x, last_config, stepper.dynamics(last_config).port_powers(x),
                             energy);
            }
        }
        mean = running / period;
        running.setZero();
    }
    return wf;
}

Waveform simulate(const ConverterParams& params, const DutyCommand& duties,
                  const SimulationSettings& settings, const StateVector& initial,
                  SimulationTrace* trace)
{
    duties.validate();
    return simulate(
        params, [duties](PeriodInput&) { return duties; }, settings, initial, trace);
}

// Steady state ----------------------------------------------------------------------

SteadyStateReport measure_steady_state(const Waveform& waveform, double f_sw, int n_periods,
                                       SettleTolerance tolerance)
{
    if (n_periods < 1) throw ConfigError("n_periods must be >= 1");
    const double period = 1.0 / f_sw;
    const double window = n_periods * period;
    if (waveform.size() < 2 || waveform.span() < 2.0 * window * (1.0 - 1e-9)) {
        throw WindowTooShort("steady-state window needs " + std::to_string(2 * n_periods) +
                             " periods of waveform");
    }

    SteadyStateReport r;
    r.n_periods = n_periods;
    r.window_end = waveform.time.back();
    r.window_start = r.window_end - window;

    // Trapezoidal mean over the window, starting exactly at window_start.
    const std::size_t i0 = waveform.index_at_or_before(r.window_start);
    double t_prev = r.window_start;
    Vector7 x_prev = waveform.state_at(r.window_start);
    Vector7 integral = Vector7::Zero();
    Vector7 max_dev = Vector7::Zero();
    for (std::size_t i = i0; i < waveform.size(); ++i) {
        const double t = waveform.time[i];
        if (t <= t_prev) continue;
        integral += 0.5 * (t - t_prev) * (x_prev + waveform.states[i]);
        t_prev = t;
        x_prev = waveform.states[i];
        const Vector7 dev = (waveform.states[i] - waveform.state_at(t - period)).cwiseAbs();
        max_dev = max_dev.cwiseMax(dev);
    }
    r.mean_state = integral / window;
    r.periodicity_error = max_dev;

    const Vector4 e_end = waveform.port_energy.back();
    const Vector4 e_start = waveform.energy_at(r.window_start);
    r.mean_port_power = (e_end - e_start) / window;
    r.mean_port_voltage = r.mean_state.segment<4>(kVC1);
    for (int k = 0; k < 4; ++k) {
        const double v = r.mean_port_voltage(k);
        r.mean_port_current(k) = std::abs(v) > 1e-12 ? r.mean_port_power(k) / v : 0.0;
    }

    r.settled = true;
    for (int i = 0; i < 7; ++i) {
        const double floor = i <= kIL3 ? tolerance.amps_floor : tolerance.volts_floor;
        r.periodicity_tolerance(i) =
            std::max(tolerance.relative * std::abs(r.mean_state(i)), floor);
        if (r.periodicity_error(i) > r.periodicity_tolerance(i)) r.settled = false;
    }
    return r;
}

}  // namespace quadport
