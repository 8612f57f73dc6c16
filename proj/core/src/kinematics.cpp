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

#include "blindgait/kinematics.hpp"

#include <cmath>

namespace blindgait {

namespace {

Mat3 rot_x(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

Mat3 rot_y(double a) {
  double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << c, 0, s, 0, 1, 0, -s, 0, c;
  return r;
}

}  // namespace

HorizontalFrame horizontal_frame(const RigidTransform& base_pose, LegIndex leg,
                                 const RobotModel& model) {
  const Vec3 base_x = base_pose.rotation.col(0);
  const double planar_norm = std::hypot(base_x.x(), base_x.y());
  if (planar_norm < 1e-9) throw GimbalSingularError();

  HorizontalFrame frame;
  frame.yaw = std::atan2(base_x.y(), base_x.x());
  const Vec3 hip_world = base_pose.apply(model.hip_offsets[leg_id(leg)]);
  frame.origin = hip_world - Vec3(0.0, 0.0, model.nominal_reach);
  return frame;
}

Vec3 forward_kinematics(const Vec3& q, LegIndex leg, const RobotModel& model) {
  const double d = model.signed_abduction_offset(leg);
  const Mat3 r1 = rot_x(q[0]);
  const Vec3 shoulder = r1 * Vec3(0.0, d, 0.0);
  const Vec3 thigh = rot_y(q[1]) * Vec3(0.0, 0.0, -model.thigh_length);
  const Vec3 shank = rot_y(q[1] + q[2]) * Vec3(0.0, 0.0, -model.shank_length);
  return shoulder + r1 * (thigh + shank);
}

std::optional<Vec3> inverse_kinematics(const Vec3& target, LegIndex leg,
                                       const RobotModel& model) {
  const double d = model.signed_abduction_offset(leg);
  const double lt = model.thigh_length;
  const double ls = model.shank_length;

  // Abduction: in the y-z plane the foot sits at distance |d| sideways from
  // the leg plane, a height s below the abduction axis.
  const double rho_sq = target.y() * target.y() + target.z() * target.z();
  const double s_sq = rho_sq - d * d;
  if (s_sq < 0.0) return std::nullopt;
  const double s = std::sqrt(s_sq);
  const double q1 =
      std::atan2(target.z(), target.y()) - std::atan2(-s, d);

  // Planar 2-link chain in the abducted x-z plane, both links along -z at
  // zero angles. Knee-backward branch: knee angle <= 0.
  const double dist_sq = target.x() * target.x() + s_sq;
  const double cos_knee = (dist_sq - lt * lt - ls * ls) / (2.0 * lt * ls);
  if (cos_knee > 1.0 + 1e-12 || cos_knee < -1.0 - 1e-12) return std::nullopt;
  const double q3 = -std::acos(std::clamp(cos_knee, -1.0, 1.0));

  const double a = lt + ls * std::cos(q3);
  const double b = ls * std::sin(q3);
  const double q2 = std::atan2(-target.x(), s) - std::atan2(b, a);

  Vec3 q(q1, q2, q3);
  // Wrap q1 and q2 into (-pi, pi] so equivalent angles compare equal.
  for (int i = 0; i < 2; ++i) {
    while (q[i] > kPi) q[i] -= kTwoPi;
    while (q[i] <= -kPi) q[i] += kTwoPi;
  }
  return q;
}

Vec3 clamp_to_workspace(const Vec3& target_h, const RobotModel& model,
                        double margin) {
  const Vec3 hip = hip_in_horizontal_frame(model);
  Vec3 rel = target_h - hip;
  double dist = rel.norm();
  const double outer = margin * model.max_reach();
  const double inner = std::min(model.min_reach() / margin, outer);
  if (dist < 1e-12) {
    // Degenerate target at the hip: push straight down to the inner shell.
    return hip + Vec3(0.0, 0.0, -inner);
  }
  if (dist > outer) rel *= outer / dist;
  if (dist < inner) rel *= inner / dist;
  return hip + rel;
}

}  // namespace blindgait
