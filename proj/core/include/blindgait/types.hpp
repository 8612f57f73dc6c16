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

#ifndef BLINDGAIT_TYPES_HPP_
#define BLINDGAIT_TYPES_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace blindgait {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

/// Legs are indexed LF, RF, LH, RH (left/right, fore/hind).
enum class LegIndex : int { LF = 0, RF = 1, LH = 2, RH = 3 };

inline constexpr int kNumLegs = 4;
inline constexpr int kJointsPerLeg = 3;
inline constexpr int kNumJoints = kNumLegs * kJointsPerLeg;

inline constexpr std::array<LegIndex, kNumLegs> kAllLegs = {
    LegIndex::LF, LegIndex::RF, LegIndex::LH, LegIndex::RH};

inline int leg_id(LegIndex leg) { return static_cast<int>(leg); }

inline const char* leg_name(LegIndex leg) {
  constexpr const char* names[] = {"LF", "RF", "LH", "RH"};
  return names[leg_id(leg)];
}

/// True for LF and LH.
inline bool is_left_leg(LegIndex leg) {
  return leg == LegIndex::LF || leg == LegIndex::LH;
}

/// Rigid transform (rotation + translation), world-from-body convention.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_inverse(const Vec3& p) const {
    return rotation.transpose() * (p - translation);
  }
};

/// Direction-only locomotion command: a unit heading (cos, sin of the target
/// yaw in base frame) or exactly (0, 0) for "stop", plus a turning direction
/// in {-1, 0, +1} about the base z-axis.
struct Command {
  Vec2 heading = Vec2::Zero();
  int turn = 0;

  bool is_stop() const { return heading.x() == 0.0 && heading.y() == 0.0; }

  static Command stop() { return Command{}; }

  static Command from_yaw(double yaw, int turn = 0) {
    Command c;
    c.heading = Vec2(std::cos(yaw), std::sin(yaw));
    c.turn = turn;
    return c;
  }

  /// A command is valid if the heading is exactly zero or unit-norm.
  bool valid(double tol = 1e-9) const {
    if (is_stop()) return turn == -1 || turn == 0 || turn == 1;
    return std::abs(heading.norm() - 1.0) < tol &&
           (turn == -1 || turn == 0 || turn == 1);
  }
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

inline constexpr double kGravity = 9.81;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

}  // namespace blindgait

#endif  // BLINDGAIT_TYPES_HPP_
