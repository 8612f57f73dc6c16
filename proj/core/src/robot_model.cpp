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

#include "blindgait/robot_model.hpp"

namespace blindgait {

void RobotModel::validate() const {
  if (thigh_length <= 0.0 || shank_length <= 0.0) {
    throw ValidationError("robot model: link lengths must be positive");
  }
  if (nominal_reach >= thigh_length + shank_length) {
    throw ValidationError(
        "robot model: nominal reach must be shorter than the stretched leg");
  }
  if (abduction_offset < 0.0) {
    throw ValidationError("robot model: abduction offset must be >= 0");
  }
  if (torque_limit <= 0.0) {
    throw ValidationError("robot model: torque limit must be positive");
  }
  if (base_mass <= 0.0 || hip_link_mass <= 0.0 || thigh_link_mass <= 0.0 ||
      shank_link_mass <= 0.0) {
    throw ValidationError("robot model: masses must be positive");
  }
  // Left/right mirror symmetry of the hip layout.
  auto mirrored = [](const Vec3& a, const Vec3& b) {
    return a.x() == b.x() && a.y() == -b.y() && a.z() == b.z();
  };
  if (!mirrored(hip_offsets[leg_id(LegIndex::LF)],
                hip_offsets[leg_id(LegIndex::RF)]) ||
      !mirrored(hip_offsets[leg_id(LegIndex::LH)],
                hip_offsets[leg_id(LegIndex::RH)])) {
    throw ValidationError("robot model: hip offsets must mirror left/right");
  }
}

}  // namespace blindgait
