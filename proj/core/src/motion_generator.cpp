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

#include "blindgait/motion_generator.hpp"

#include <cmath>

namespace blindgait {

namespace {

double wrap_phase(double phi) {
  phi = std::fmod(phi, kTwoPi);
  if (phi < 0.0) phi += kTwoPi;
  return phi;
}

}  // namespace

PhaseState random_initial_phases(double base_frequency, Rng& rng) {
  PhaseState state;
  state.base_frequency = base_frequency;
  for (int i = 0; i < kNumLegs; ++i) {
    state.initial_phase[i] = rng.uniform(0.0, kTwoPi);
    state.phase[i] = state.initial_phase[i];
  }
  return state;
}

PhaseState trot_initial_phases(double base_frequency) {
  PhaseState state;
  state.base_frequency = base_frequency;
  // Diagonal pairs (LF, RH) and (RF, LH) half a cycle apart.
  state.initial_phase << 0.0, kPi, kPi, 0.0;
  state.phase = state.initial_phase;
  return state;
}

PhaseState advance_phase(const PhaseState& state, double dt) {
  PhaseState next = state;
  for (int i = 0; i < kNumLegs; ++i) {
    const double rate = kTwoPi * (state.base_frequency + state.frequency_offsets[i]);
    next.phase[i] = wrap_phase(state.phase[i] + rate * dt);
  }
  return next;
}

double ftg_eval(double phi, const FtgParams& params) {
  const double h = params.max_foot_height;
  const double k = 2.0 * (phi - kPi) / kPi;
  if (k < 0.0 || k > 2.0) return -0.5;  // stance
  if (k <= 1.0) {
    const double k2 = k * k;
    return h * (-2.0 * k2 * k + 3.0 * k2) - 0.5;
  }
  const double k2 = k * k;
  return h * (2.0 * k2 * k - 9.0 * k2 + 12.0 * k - 4.0) - 0.5;
}

ControllerMode update_mode(const ControllerMode& mode, const Command& cmd,
                           double base_speed, double dt) {
  ControllerMode next = mode;
  if (!cmd.is_stop() || base_speed > 0.3) {
    next.state = ControllerMode::State::Locomoting;
    next.zero_command_time = cmd.is_stop() ? mode.zero_command_time + dt : 0.0;
    return next;
  }
  next.zero_command_time = mode.zero_command_time + dt;
  if (next.zero_command_time >= 0.5) {
    next.state = ControllerMode::State::Standing;
  }
  return next;
}

std::array<Vec3, kNumLegs> compose_targets(
    const PhaseState& phase, const Eigen::Matrix<double, 12, 1>& residuals,
    const FtgParams& params, const RobotModel& model) {
  std::array<Vec3, kNumLegs> targets;
  for (int i = 0; i < kNumLegs; ++i) {
    // Stance point sits one nominal reach below the hip; the swing spline
    // lifts the foot by up to h above it.
    const double lift = ftg_eval(phase.phase[i], params) + 0.5;
    const Vec3 nominal(0.0, 0.0, lift - model.nominal_reach);
    const Vec3 raw = nominal + residuals.segment<3>(3 * i);
    targets[i] = clamp_to_workspace(raw, model);
  }
  return targets;
}

ScaledAction scale_action(const Eigen::Matrix<double, 16, 1>& raw,
                          const ResidualScales& scales) {
  ScaledAction out;
  auto clip = [](double v) { return std::clamp(v, -1.0, 1.0); };
  for (int i = 0; i < kNumLegs; ++i) {
    out.frequency_offsets[i] = clip(raw[i]) * scales.frequency;
    out.residuals[3 * i + 0] = clip(raw[4 + 3 * i + 0]) * scales.lateral;
    out.residuals[3 * i + 1] = clip(raw[4 + 3 * i + 1]) * scales.lateral;
    out.residuals[3 * i + 2] = clip(raw[4 + 3 * i + 2]) * scales.vertical;
  }
  return out;
}

}  // namespace blindgait
