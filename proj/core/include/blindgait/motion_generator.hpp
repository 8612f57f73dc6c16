// Copyright 2026 The Blindgait Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BLINDGAIT_MOTION_GENERATOR_HPP_
#define BLINDGAIT_MOTION_GENERATOR_HPP_

#include <array>

#include "blindgait/kinematics.hpp"
#include "blindgait/rng.hpp"
#include "blindgait/types.hpp"

namespace blindgait {

/// Foot trajectory generator parameters.
struct FtgParams {
  double max_foot_height = 0.2;  // h, m
  double base_frequency = 1.25;  // f0, Hz
};

/// Per-leg periodic phases. A leg is in contact phase for phi in [0, pi) and
/// in swing phase for phi in [pi, 2*pi).
struct PhaseState {
  Vec4 phase = Vec4::Zero();         // phi_i, rad, in [0, 2*pi)
  Vec4 initial_phase = Vec4::Zero();  // phi_{i,0}, rad
  double base_frequency = 1.25;       // f0, Hz
  Vec4 frequency_offsets = Vec4::Zero();  // f_i, Hz

  bool in_contact_phase(LegIndex leg) const {
    return phase[leg_id(leg)] < kPi;
  }

  /// Effective phase rate of a leg, rad/s.
  double phase_rate(LegIndex leg) const {
    return kTwoPi * (base_frequency + frequency_offsets[leg_id(leg)]);
  }
};

/// Samples initial phases from U(0, 2*pi) per leg.
PhaseState random_initial_phases(double base_frequency, Rng& rng);

/// Deterministic trot pattern: diagonal pairs half a cycle apart.
PhaseState trot_initial_phases(double base_frequency);

/// Advances every leg phase by 2*pi*(f0 + f_i)*dt, wrapped into [0, 2*pi).
PhaseState advance_phase(const PhaseState& state, double dt);

/// Vertical FTG offset for phase phi: two cubic Hermite segments over the
/// swing interval with zero slope at the junctions, constant -0.5 in stance.
/// Range is [-0.5, h - 0.5].
double ftg_eval(double phi, const FtgParams& params);

/// Standing/locomotion state machine driven by the command stream.
struct ControllerMode {
  enum class State { Standing, Locomoting };
  State state = State::Locomoting;
  double zero_command_time = 0.0;  // s of sustained stop command

  bool standing() const { return state == State::Standing; }
  /// Current base frequency: 0 when standing, nominal f0 otherwise.
  double base_frequency(const FtgParams& params) const {
    return standing() ? 0.0 : params.base_frequency;
  }
};

/// Switches to Standing after the stop command is sustained 0.5 s; any
/// direction command, or base speed above 0.3 m/s, switches back to
/// Locomoting immediately.
ControllerMode update_mode(const ControllerMode& mode, const Command& cmd,
                           double base_speed, double dt);

/// Residual action scaling: policy outputs in [-1, 1] map to these physical
/// ranges before composition.
struct ResidualScales {
  double lateral = 0.15;    // x, y residual, m per unit action
  double vertical = 0.10;   // z residual, m per unit action
  double frequency = 0.5;   // f_i offset, Hz per unit action
};

/// Composes FTG outputs with policy residuals into per-leg foot targets in
/// the legs' horizontal frames. Targets are clamped into the reachable
/// workspace; extreme residuals land on the 98%-reach shell.
std::array<Vec3, kNumLegs> compose_targets(
    const PhaseState& phase, const Eigen::Matrix<double, 12, 1>& residuals,
    const FtgParams& params, const RobotModel& model);

/// Splits a raw 16-dim policy action into frequency offsets (Hz) and
/// residuals (m), applying clipping to [-1, 1] and the physical scales.
struct ScaledAction {
  Vec4 frequency_offsets = Vec4::Zero();
  Eigen::Matrix<double, 12, 1> residuals = Eigen::Matrix<double, 12, 1>::Zero();
};

ScaledAction scale_action(const Eigen::Matrix<double, 16, 1>& raw,
                          const ResidualScales& scales);

}  // namespace blindgait

#endif  // BLINDGAIT_MOTION_GENERATOR_HPP_
