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
#include "quadport/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace quadport {

namespace {

template <typename Vec>
Vec interpolate(const std::vector<double>& time, const std::vector<Vec>& column, std::size_t i,
                double t)
{
    if (i + 1 >= time.size() || time[i] == t) return column[i];
    const double w = (t - time[i]) / (time[i + 1] - time[i]);
    if (w <= 0.0) return column[i];
    return column[i] + w * (column[i + 1] - column[i]);
}

}  // namespace

void Waveform::reserve(std::size_t n)
{
    time.reserve(n);
    states.reserve(n);
    configs.reserve(n);
    port_power.reserve(n);
    port_energy.reserve(n);
}

void Waveform::push_back(double t, const Vector7& x, SwitchConfig config, const Vector4& power,
                         const Vector4& energy)
{
    time.push_back(t);
    states.push_back(x);
    configs.push_back(config);
    port_power.push_back(power);
    port_energy.push_back(energy);
}

std::size_t Waveform::index_at_or_before(double t) const
{
    if (empty()) throw std::out_of_range("empty waveform");
    // Sample times come from a period-aligned grid; absorb rounding in t.
    const double slack = 1e-9 * std::max(std::abs(t), span()) + 1e-15;
    auto it = std::upper_bound(time.begin(), time.end(), t + slack);
    if (it == time.begin()) throw std::out_of_range("time before waveform start");
    return static_cast<std::size_t>(std::distance(time.begin(), it) - 1);
}

Vector7 Waveform::state_at(double t) const
{
    const std::size_t i = index_at_or_before(t);
    if (std::abs(time[i] - t) <= 1e-9 * std::max(std::abs(t), span()) + 1e-15) return states[i];
    return interpolate(time, states, i, t);
}

Vector4 Waveform::energy_at(double t) const
{
    const std::size_t i = index_at_or_before(t);
    if (std::abs(time[i] - t) <= 1e-9 * std::max(std::abs(t), span()) + 1e-15) {
        return port_energy[i];
    }
    return interpolate(time, port_energy, i, t);
}

void Waveform::validate() const
{
    const std::size_t n = time.size();
    if (states.size() != n || configs.size() != n || port_power.size() != n ||
        port_energy.size() != n) {
        throw ConfigError("waveform columns have mismatched lengths");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(time[k]) || !states[k].allFinite() || !port_power[k].allFinite() ||
            !port_energy[k].allFinite()) {
            throw ConfigError("non-finite waveform entry at sample " + std::to_string(k));
        }
        if (k > 0 && !(time[k] > time[k - 1])) {
            throw ConfigError("waveform timestamps not strictly increasing at sample " +
                              std::to_string(k));
        }
    }
}

}  // namespace quadport
