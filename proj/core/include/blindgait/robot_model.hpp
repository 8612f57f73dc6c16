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

#ifndef BLINDGAIT_ROBOT_MODEL_HPP_
#define BLINDGAIT_ROBOT_MODEL_HPP_

#include <array>

#include "blindgait/types.hpp"

namespace blindgait {

/// Per-joint angle limits, radians.
struct JointLimits {
  double lower = 0.0;
  double upper = 0.0;
};

/// Kinematic and inertial description of a generic quadruped with 3-DOF
/// point-foot legs (abduction, hip flexion, knee). Left/right legs are
/// mirror-symmetric in the hip offsets and the abduction link offset.
struct RobotModel {
  // Hip origins in the base frame, ordered LF, RF, LH, RH.
  std::array<Vec3, kNumLegs> hip_offsets = {
      Vec3(0.30, 0.10, 0.0), Vec3(0.30, -0.10, 0.0),
      Vec3(-0.30, 0.10, 0.0), Vec3(-0.30, -0.10, 0.0)};

  double abduction_offset = 0.10;  // lateral link length, m (signed per side)
  double thigh_length = 0.25;      // m
  double shank_length = 0.25;      // m
  double nominal_reach = 0.42;     // hip-to-foot distance at rest, m

  JointLimits abduction_limits{-0.80, 0.80};
  JointLimits hip_limits{-1.60, 1.60};
  JointLimits knee_limits{-2.80, -0.05};  // knee-backward branch only

  double torque_limit = 40.0;  // N*m per joint

  double base_mass = 25.0;  // kg
  Mat3 base_inertia = (Eigen::Vector3d(0.271, 0.833, 0.938)).asDiagonal();
  double hip_link_mass = 1.0;    // kg
  double thigh_link_mass = 1.0;  // kg
  double shank_link_mass = 1.0;  // kg

  // Collision geometry.
  Vec3 base_half_extents = Vec3(0.30, 0.15, 0.10);  // base box, m
  double foot_radius = 0.02;                        // point-foot sphere, m
  double link_radius = 0.02;                        // thigh/shank capsules, m

  double total_mass() const {
    return base_mass +
           kNumLegs * (hip_link_mass + thigh_link_mass + shank_link_mass);
  }

  /// Total weight m*g in newtons.
  double weight() const { return total_mass() * kGravity; }

  /// Signed abduction offset along the hip-frame y-axis: +d for left legs,
  /// -d for right legs.
  double signed_abduction_offset(LegIndex leg) const {
    return is_left_leg(leg) ? abduction_offset : -abduction_offset;
  }

  /// Maximum hip-to-foot distance (fully stretched leg).
  double max_reach() const {
    double planar = thigh_length + shank_length;
    return std::sqrt(abduction_offset * abduction_offset + planar * planar);
  }

  /// Minimum hip-to-foot distance (fully folded leg).
  double min_reach() const {
    double planar = std::abs(thigh_length - shank_length);
    return std::sqrt(abduction_offset * abduction_offset + planar * planar);
  }

  /// Throws ValidationError if the geometry is inconsistent.
  void validate() const;
};

}  // namespace blindgait

#endif  // BLINDGAIT_ROBOT_MODEL_HPP_
