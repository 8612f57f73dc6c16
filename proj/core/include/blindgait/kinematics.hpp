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

#ifndef BLINDGAIT_KINEMATICS_HPP_
#define BLINDGAIT_KINEMATICS_HPP_

#include <optional>

#include "blindgait/robot_model.hpp"
#include "blindgait/types.hpp"

namespace blindgait {

/// Gravity-aligned reference frame attached one nominal reach below a hip.
/// Its z-axis points opposite the gravity vector for every base attitude and
/// its x-axis follows the base yaw, so roll and pitch of the base never leak
/// into foot targets expressed here.
struct HorizontalFrame {
  Vec3 origin = Vec3::Zero();  // world
  double yaw = 0.0;            // rad, equals base yaw

  Mat3 rotation() const {
    Mat3 r;
    double c = std::cos(yaw), s = std::sin(yaw);
    r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
    return r;
  }

  Vec3 to_world(const Vec3& p_frame) const {
    return origin + rotation() * p_frame;
  }
  Vec3 from_world(const Vec3& p_world) const {
    return rotation().transpose() * (p_world - origin);
  }
};

/// Thrown when the base x-axis is (numerically) parallel to gravity and the
/// horizontal frame yaw is undefined.
class GimbalSingularError : public std::runtime_error {
 public:
  GimbalSingularError()
      : std::runtime_error(
            "horizontal frame undefined: base x-axis parallel to gravity") {}
};

/// Builds the horizontal frame of a leg from the current base pose.
HorizontalFrame horizontal_frame(const RigidTransform& base_pose, LegIndex leg,
                                 const RobotModel& model);

/// Foot position in the hip frame (axes parallel to base, origin at the hip)
/// for joint angles q = (abduction, hip flexion, knee).
Vec3 forward_kinematics(const Vec3& q, LegIndex leg, const RobotModel& model);

/// Analytic inverse kinematics on the knee-backward branch. `target` is the
/// foot position in the hip frame. Returns nullopt when the target lies
/// outside the reachable workspace; callers are expected to clamp first.
std::optional<Vec3> inverse_kinematics(const Vec3& target, LegIndex leg,
                                       const RobotModel& model);

/// Position of the hip expressed in the leg's horizontal frame. This is
/// (0, 0, nominal_reach) exactly, for every base attitude.
inline Vec3 hip_in_horizontal_frame(const RobotModel& model) {
  return Vec3(0.0, 0.0, model.nominal_reach);
}

/// Radially clamps a horizontal-frame foot target into the spherical shell
/// of reachable distances around the hip, shrunk by `margin` (fraction of
/// max reach kept, e.g. 0.98).
Vec3 clamp_to_workspace(const Vec3& target_h, const RobotModel& model,
                        double margin = 0.98);

}  // namespace blindgait

#endif  // BLINDGAIT_KINEMATICS_HPP_
