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

#include "quadport/topology.hpp"

#include <cstddef>
#include <vector>

namespace quadport {

/// Recorded simulation output, one entry per sample in every column.
///
/// `configs[k]` is the switch configuration that was active over the step
/// ending at `time[k]` (for the first sample, the one about to become active),
/// and `port_power[k]` is evaluated under that configuration. `port_energy`
/// holds the running integral of port power since the start of the run.
struct Waveform {
    std::vector<double> time;
    std::vector<Vector7> states;
    std::vector<SwitchConfig> configs;
    std::vector<Vector4> port_power;
    std::vector<Vector4> port_energy;

    std::size_t size() const { return time.size(); }
    bool empty() const { return time.empty(); }
    double span() const { return empty() ? 0.0 : time.back() - time.front(); }

    void reserve(std::size_t n);
    void push_back(double t, const Vector7& x, SwitchConfig config, const Vector4& power,
                   const Vector4& energy);

    /// Index of the last sample with time <= t (within a relative tolerance).
    std::size_t index_at_or_before(double t) const;

    /// State at time t; exact at a sample, linearly interpolated between samples.
    Vector7 state_at(double t) const;
    Vector4 energy_at(double t) const;

    /// Throws ConfigError if timestamps are not strictly increasing or any entry
    /// is non-finite.
    void validate() const;
};

}  // namespace quadport
