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
// Four-port converter topology
// =============================================================================
// Two three-switch legs share a common ground.
//
//   leg 1 (rail = port 1, C1):  V1+ --S1-- A1 --S2-- B1 --S3-- GND
//   leg 2 (rail = port 4, C4):  V4+ --S4-- A2 --S5-- B2 --S6-- GND
//
//   L1: B1 -> port 2 (C2)      L2: A1 -> A2      L3: B2 -> port 3 (C3)
//
// Exactly one switch per leg is OFF at any instant. Inductor currents are
// positive in the arrow direction above. L2 is the leg-to-leg transfer
// inductor; L1 and L3 are the port inductors.
// =============================================================================

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace quadport {

using Vector7 = Eigen::Matrix<double, 7, 1>;
using Matrix7 = Eigen::Matrix<double, 7, 7>;
using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix47 = Eigen::Matrix<double, 4, 7>;

inline constexpr std::size_t kStateCount = 7;
inline constexpr std::size_t kPortCount = 4;

/// Index of each entry in the packed state vector.
enum StateIndex : int {
    kIL1 = 0,
    kIL2 = 1,
    kIL3 = 2,
    kVC1 = 3,
    kVC2 = 4,
    kVC3 = 5,
    kVC4 = 6,
};

/// Packed index of the capacitor state that sits on port `port` (0-based).
constexpr int port_state_index(std::size_t port) { return kVC1 + static_cast<int>(port); }

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Which switch of a three-switch leg is OFF: top (A), middle (B), bottom (C).
enum class LegMode { A, B, C };

std::string_view to_string(LegMode mode);
LegMode leg_mode_from_string(std::string_view text);

struct SwitchConfig {
    LegMode leg1 = LegMode::A;
    LegMode leg2 = LegMode::A;

    /// Dense index in [0, 9).
    constexpr int index() const { return 3 * static_cast<int>(leg1) + static_cast<int>(leg2); }
    static constexpr SwitchConfig from_index(int i)
    {
        return {static_cast<LegMode>(i / 3), static_cast<LegMode>(i % 3)};
    }
    static std::array<SwitchConfig, 9> all();

    friend constexpr bool operator==(SwitchConfig, SwitchConfig) = default;
};

// Port models ---------------------------------------------------------------

struct VoltageSource {
    double volts = 0.0;
    double series_ohms = 0.0;  // 0 means ideal: the port capacitor state is pinned

    friend bool operator==(const VoltageSource&, const VoltageSource&) = default;
};

struct ResistiveLoad {
    double ohms = 1.0;

    friend bool operator==(const ResistiveLoad&, const ResistiveLoad&) = default;
};

/// External capacitance (e.g. an ultracapacitor) in parallel with the port filter.
struct CapacitorOnly {
    double farads = 1.0;
    double initial_volts = 0.0;

    friend bool operator==(const CapacitorOnly&, const CapacitorOnly&) = default;
};

/// Constant current drawn from the port node. Negative amps inject current.
struct CurrentSink {
    double amps = 0.0;

    friend bool operator==(const CurrentSink&, const CurrentSink&) = default;
};

using PortModel = std::variant<VoltageSource, ResistiveLoad, CapacitorOnly, CurrentSink>;

bool is_ideal_source(const PortModel& port);
void validate_port(const PortModel& port, std::string_view where);

struct ConverterParams {
    double l1 = 0.72e-3;
    double l2 = 0.72e-3;
    double l3 = 0.72e-3;
    double c1 = 470e-6;
    double c2 = 470e-6;
    double c3 = 470e-6;
    double c4 = 470e-6;
    double f_sw = 50e3;
    std::array<PortModel, kPortCount> ports{CurrentSink{}, CurrentSink{}, CurrentSink{},
                                            CurrentSink{}};
    double switch_on_resistance = 0.0;

    double period() const { return 1.0 / f_sw; }
    double inductance(int state) const;
    double capacitance(std::size_t port) const;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    friend bool operator==(const ConverterParams&, const ConverterParams&) = default;
};

struct StateVector {
    double i_l1 = 0.0;
    double i_l2 = 0.0;
    double i_l3 = 0.0;
    double v_c1 = 0.0;
    double v_c2 = 0.0;
    double v_c3 = 0.0;
    double v_c4 = 0.0;

    Vector7 to_vector() const;
    static StateVector from_vector(const Vector7& x);
    bool all_finite() const;

    friend bool operator==(const StateVector&, const StateVector&) = default;
};

/// Affine dynamics x' = A x + b of one switch configuration, plus the affine
/// map from state to the current each port element injects into its node.
struct LinearDynamics {
    Matrix7 a_matrix = Matrix7::Zero();
    Vector7 b_vector = Vector7::Zero();
    Matrix47 port_current = Matrix47::Zero();
    Vector4 port_current_offset = Vector4::Zero();
    std::array<bool, kStateCount> pinned{};  // states held by ideal sources
    SwitchConfig valid_for{};

    Vector7 derivative(const Vector7& x) const { return a_matrix * x + b_vector; }

    /// Current injected by each port element into the converter (amperes).
    Vector4 port_currents(const Vector7& x) const { return port_current * x + port_current_offset; }

    /// Power delivered by each port element into the converter (watts).
    Vector4 port_powers(const Vector7& x) const;
};

struct LegInductorVoltages {
    double v_la = 0.0;
    double v_lb = 0.0;
};

/// Inductor voltages of a generic three-switch leg with rail voltage `v_rail`:
/// La ties the upper inner node to `v_port_a`, Lb the lower inner node to `v_port_b`.
LegInductorVoltages leg_inductor_voltages(LegMode mode, double v_port_a, double v_port_b,
                                          double v_rail);

LinearDynamics derive_dynamics(SwitchConfig config, const ConverterParams& params);

/// Energy held in the inductors and the port filter capacitors (joules).
/// External CapacitorOnly storage is accounted as a port, not as stored energy.
double stored_energy(const Vector7& x, const ConverterParams& params);

/// Overwrites the pinned (ideal-source) states of `x` with their source volts.
void pin_sources(Vector7& x, const ConverterParams& params);

}  // namespace quadport
